#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "semdrift/pipeline.hpp"
#include "semdrift/plot.hpp"

using namespace semdrift;
namespace fs = std::filesystem;

namespace {

std::string small_config_json(int rounds = 10, int replicates = 2) {
    return R"({
      "schema_version": 1,
      "seed": 7,
      "backend": {"type": "synthetic", "beta": 2.0},
      "embedder": {"type": "offline"},
      "conditions": [
        {"name": "standard", "rounds": )" +
           std::to_string(rounds) + R"(, "replicates": )" +
           std::to_string(replicates) + R"(}
      ],
      "metrics": {"window_len": 10, "vendi_resamples": 20},
      "workers": 2
    })";
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("semdrift_pipe_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("pipeline config round-trips and hashes canonically") {
    const auto config = pipeline_config_from_json(small_config_json());
    const std::string canonical = pipeline_config_to_json(config);
    const auto back = pipeline_config_from_json(canonical);
    CHECK(pipeline_config_to_json(back) == canonical);
    CHECK(pipeline_config_hash(back) == pipeline_config_hash(config));

    // Any semantic change shifts the hash.
    auto changed = config;
    changed.seed = 8;
    CHECK(pipeline_config_hash(changed) != pipeline_config_hash(config));
}

TEST_CASE("pipeline config validation") {
    CHECK_THROWS_AS(pipeline_config_from_json("{"), Error);
    CHECK_THROWS_AS(pipeline_config_from_json(R"({"schema_version": 2,
        "conditions": ["standard"]})"),
                    Error);
    CHECK_THROWS_AS(pipeline_config_from_json(R"({"conditions": []})"),
                    Error);  // missing standard is fine, duplicates are not:
    CHECK_THROWS_AS(pipeline_config_from_json(
                        R"({"conditions": ["standard", "standard"]})"),
                    Error);
    CHECK_THROWS_AS(pipeline_config_from_json(
                        R"({"backend": {"type": "quantum"},
                            "conditions": ["standard"]})"),
                    Error);
    // Built-in names resolve.
    const auto config = pipeline_config_from_json(
        R"({"conditions": ["standard", "temperature_1.2", "beta1_control"]})");
    CHECK(config.conditions.size() == 3);
    CHECK(config.conditions[1].temperature == 1.2);
    CHECK(config.conditions[2].synthetic_beta.has_value());
}

TEST_CASE("simulate validates the condition name before running") {
    TempDir dir;
    const auto config = pipeline_config_from_json(small_config_json());
    const int rc = cmd_simulate(config, dir.str(), std::string("nope"), false);
    CHECK(rc == 1);
    CHECK_FALSE(fs::exists(dir.path / "manifest.json"));
}

TEST_CASE("simulate refuses to overwrite unless forced") {
    TempDir dir;
    const auto config = pipeline_config_from_json(small_config_json());
    CHECK(cmd_simulate(config, dir.str(), std::nullopt, false) == 0);
    CHECK(fs::exists(dir.path / "manifest.json"));
    // Same config: refused without --force.
    CHECK(cmd_simulate(config, dir.str(), std::nullopt, false) == 1);
    CHECK(cmd_simulate(config, dir.str(), std::nullopt, true) == 0);
}

TEST_CASE("analyze handles a one-window run: within-run trace is [0]") {
    TempDir dir;
    const auto config = pipeline_config_from_json(small_config_json(10, 2));
    REQUIRE(cmd_simulate(config, dir.str(), std::nullopt, false) == 0);
    const std::string analysis = dir.str() + "/analysis";
    REQUIRE(cmd_analyze(config, dir.str(), analysis) == 0);

    std::ifstream in(analysis + "/traces.csv");
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "condition,run,window,lexical,within_run,convergence");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        // window column is always 1 and within_run is exactly 0.
        CHECK(line.find(",1,") != std::string::npos);
        const auto last_comma = line.rfind(',');
        const auto within_field =
            line.substr(0, last_comma);  // strip empty convergence
        const auto comma = within_field.rfind(',');
        CHECK(within_field.substr(comma + 1) == "0");
    }
    CHECK(rows == 2);  // one window per replicate
}

TEST_CASE("analyze before simulate is a validation error") {
    TempDir dir;
    const auto config = pipeline_config_from_json(small_config_json());
    CHECK(cmd_analyze(config, dir.str(), dir.str() + "/analysis") == 1);
}

TEST_CASE("derive_families maps the builtin grid onto factors") {
    const auto config = pipeline_config_from_json(R"({
      "conditions": ["standard", "temperature_0.5", "temperature_1.2",
                     "rag_diversity", "prompt_persona", "noise_injection"]
    })");
    const auto families = derive_families(config);
    std::map<std::string, std::size_t> levels;
    for (const auto& f : families) levels[f.factor] = f.levels.size();
    CHECK(levels.at("TEMPERATURE") == 2);
    CHECK(levels.at("RAG") == 1);
    CHECK(levels.at("PROMPT") == 1);
    CHECK(levels.at("PERTURBATION") == 1);
}

TEST_CASE("run seeds differ across conditions and replicates") {
    const auto config = pipeline_config_from_json(small_config_json());
    const auto& cond = config.conditions.front();
    CHECK(run_seed(config, cond, 0) != run_seed(config, cond, 1));
    auto other = cond;
    other.name = "other";
    CHECK(run_seed(config, cond, 0) != run_seed(config, other, 0));
}

TEST_CASE("line charts render deterministically with data mapped in frame") {
    PlotSeries s;
    s.label = "demo";
    for (int i = 0; i < 10; ++i) {
        s.x.push_back(i);
        s.y.push_back(0.1 * i);
    }
    const std::string svg1 = render_line_chart("t", "x", "y", {s});
    const std::string svg2 = render_line_chart("t", "x", "y", {s});
    CHECK(svg1 == svg2);
    CHECK(svg1.find("<svg") == 0);
    CHECK(svg1.find("polyline") != std::string::npos);
    CHECK(svg1.find("demo") != std::string::npos);
    // Escapes XML-significant characters in labels.
    const std::string svg3 =
        render_line_chart("a < b & c", "x", "y", {s});
    CHECK(svg3.find("a &lt; b &amp; c") != std::string::npos);
}
