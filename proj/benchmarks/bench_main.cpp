// Microbenchmarks for the numeric hot spots: kernel-spectrum diversity,
// memory packing, conditional compression, hashing embedder, and a full
// simulation round.

#include <benchmark/benchmark.h>

#include "semdrift/embed.hpp"
#include "semdrift/engine.hpp"
#include "semdrift/memory.hpp"
#include "semdrift/metrics.hpp"
#include "semdrift/rng.hpp"

using namespace semdrift;

namespace {

std::vector<Embedding> random_unit_vectors(std::size_t n, std::size_t dim,
                                           std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Embedding> out;
    for (std::size_t i = 0; i < n; ++i) {
        Embedding e;
        for (std::size_t d = 0; d < dim; ++d) e.values.push_back(rng.next_gaussian());
        normalize(e);
        out.push_back(std::move(e));
    }
    return out;
}

void BM_VendiExact(benchmark::State& state) {
    const auto embs = random_unit_vectors(static_cast<std::size_t>(state.range(0)), 256, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vendi_exact(embs));
    }
}
BENCHMARK(BM_VendiExact)->Arg(30)->Arg(60);

void BM_OfflineEmbed(benchmark::State& state) {
    Rng rng(11);
    std::string text;
    for (int i = 0; i < state.range(0); ++i) {
        text += "word" + std::to_string(rng.next_below(500)) + " ";
    }
    OfflineEmbedder emb;
    for (auto _ : state) {
        benchmark::DoNotOptimize(emb.embed(text));
    }
}
BENCHMARK(BM_OfflineEmbed)->Arg(100)->Arg(1000);

void BM_PackDiverse(benchmark::State& state) {
    OfflineEmbedder emb;
    MemoryStore store("bench");
    Rng rng(13);
    for (int i = 0; i < state.range(0); ++i) {
        std::string text;
        for (int w = 0; w < 25; ++w) {
            text += "tok" + std::to_string(rng.next_below(300)) + " ";
        }
        store.write(text, 1 + static_cast<int>(rng.next_below(60)),
                    EventKind::Main, emb);
    }
    Embedding query = emb.embed("tok1 tok2 tok3 topic query");
    normalize(query);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            pack_diverse(store, query, 61, 800, PackingWeights{}, 64));
    }
}
BENCHMARK(BM_PackDiverse)->Arg(200)->Arg(1000);

void BM_DeflateConditional(benchmark::State& state) {
    Rng rng(17);
    std::string history, window;
    for (int i = 0; i < state.range(0); ++i) {
        history += static_cast<char>('a' + rng.next_below(26));
    }
    for (int i = 0; i < 2000; ++i) {
        window += static_cast<char>('a' + rng.next_below(26));
    }
    for (auto _ : state) {
        const auto base = deflate_size(history, 6);
        const auto joint = deflate_size(history + window, 6);
        benchmark::DoNotOptimize(joint - base);
    }
}
BENCHMARK(BM_DeflateConditional)->Arg(20000)->Arg(100000);

void BM_SimulationRound(benchmark::State& state) {
    ConditionSpec cond;
    cond.rounds = static_cast<int>(state.range(0));
    SyntheticGenerator gen;
    RuleBasedReferee referee;
    OfflineEmbedder embedder;
    std::uint64_t seed = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            run_simulation(cond, seed++, gen, referee, embedder));
    }
}
BENCHMARK(BM_SimulationRound)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
