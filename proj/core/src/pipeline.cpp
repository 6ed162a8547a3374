#include "semdrift/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "semdrift/channel.hpp"
#include "semdrift/http_client.hpp"
#include "semdrift/metrics.hpp"
#include "semdrift/plot.hpp"
#include "semdrift/rng.hpp"
#include "semdrift/stats.hpp"

namespace semdrift {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config

PipelineConfig pipeline_config_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& ex) {
        throw Error("bad_config", std::string("invalid pipeline JSON: ") + ex.what());
    }
    PipelineConfig config;
    config.schema_version = j.value("schema_version", 1);
    if (config.schema_version != 1) {
        throw Error("bad_config", "unsupported schema_version " +
                                      std::to_string(config.schema_version));
    }
    config.seed = j.value("seed", config.seed);
    config.workers = j.value("workers", config.workers);

    if (j.contains("backend")) {
        const auto& b = j["backend"];
        config.backend.type = b.value("type", "synthetic");
        if (config.backend.type == "synthetic") {
            auto& p = config.backend.synthetic;
            p.beta = b.value("beta", p.beta);
            p.topic_count = b.value("topic_count", p.topic_count);
            p.context_weight = b.value("context_weight", p.context_weight);
            p.novel_unit_weight = b.value("novel_unit_weight", p.novel_unit_weight);
            p.novel_pool_size = b.value("novel_pool_size", p.novel_pool_size);
            p.invite_prob = b.value("invite_prob", p.invite_prob);
            p.consent_prob = b.value("consent_prob", p.consent_prob);
        } else if (config.backend.type == "http") {
            config.backend.url = b.value("url", "");
            config.backend.model = b.value("model", "");
        } else {
            throw Error("bad_config", "unknown backend type '" +
                                          config.backend.type + "'");
        }
    }
    if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        config.embedder.type = e.value("type", "offline");
        config.embedder.url = e.value("url", "");
        config.embedder.model = e.value("model", "");
        config.embedder.dim = e.value("dim", config.embedder.dim);
        config.embedder.cache_dir = e.value("cache_dir", "");
        config.embedder.chunk_limit = e.value("chunk_limit", config.embedder.chunk_limit);
        if (config.embedder.type != "offline" && config.embedder.type != "http") {
            throw Error("bad_config", "unknown embedder type '" +
                                          config.embedder.type + "'");
        }
    }
    if (j.contains("referee")) {
        config.referee.type = j["referee"].value("type", "rules");
        config.referee.model = j["referee"].value("model", "");
        if (config.referee.type != "rules" && config.referee.type != "llm") {
            throw Error("bad_config", "unknown referee type '" +
                                          config.referee.type + "'");
        }
        if (config.referee.type == "llm" && config.backend.type != "http") {
            throw Error("bad_config", "llm referee requires the http backend");
        }
    }
    if (!j.contains("conditions") || j["conditions"].empty()) {
        throw Error("bad_config", "pipeline config needs a non-empty conditions list");
    }
    for (const auto& c : j["conditions"]) {
        if (c.is_string()) {
            config.conditions.push_back(builtin_condition(c.get<std::string>()));
        } else {
            config.conditions.push_back(condition_from_json(c.dump()));
        }
    }
    {
        std::set<std::string> names;
        for (const auto& c : config.conditions) {
            if (!names.insert(c.name).second) {
                throw Error("bad_config", "duplicate condition '" + c.name + "'");
            }
        }
    }
    if (j.contains("metrics")) {
        const auto& m = j["metrics"];
        config.metrics.window_len = m.value("window_len", config.metrics.window_len);
        config.metrics.vendi_m = m.value("vendi_m", config.metrics.vendi_m);
        config.metrics.vendi_resamples =
            m.value("vendi_resamples", config.metrics.vendi_resamples);
        config.metrics.compression_level =
            m.value("compression_level", config.metrics.compression_level);
        config.metrics.history_budget =
            m.value("history_budget", config.metrics.history_budget);
        config.metrics.survival_early_windows =
            m.value("survival_early_windows", config.metrics.survival_early_windows);
        config.metrics.survival_mass_frac =
            m.value("survival_mass_frac", config.metrics.survival_mass_frac);
        config.metrics.axis_edge_windows =
            m.value("axis_edge_windows", config.metrics.axis_edge_windows);
    }
    if (j.contains("fit")) {
        const auto& f = j["fit"];
        config.fit.early_points = f.value("early_points", config.fit.early_points);
        config.fit.tail_points = f.value("tail_points", config.fit.tail_points);
        config.fit.bootstrap_resamples =
            f.value("bootstrap_resamples", config.fit.bootstrap_resamples);
    }
    if (j.contains("families")) {
        for (const auto& f : j["families"]) {
            FamilyConfig family;
            family.factor = f.at("factor").get<std::string>();
            family.model_group = f.value("model_group", "default");
            family.reference_condition = f.at("reference").get<std::string>();
            for (auto it = f.at("levels").begin(); it != f.at("levels").end(); ++it) {
                family.levels[it.key()] = it.value().get<std::string>();
            }
            config.families.push_back(std::move(family));
        }
    }
    return config;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return pipeline_config_from_json(buf.str());
}

std::string pipeline_config_to_json(const PipelineConfig& config) {
    ordered_json j;
    j["schema_version"] = config.schema_version;
    j["seed"] = config.seed;
    {
        ordered_json b;
        b["type"] = config.backend.type;
        if (config.backend.type == "synthetic") {
            const auto& p = config.backend.synthetic;
            b["beta"] = p.beta;
            b["topic_count"] = p.topic_count;
            b["context_weight"] = p.context_weight;
            b["novel_unit_weight"] = p.novel_unit_weight;
            b["novel_pool_size"] = p.novel_pool_size;
            b["invite_prob"] = p.invite_prob;
            b["consent_prob"] = p.consent_prob;
        } else {
            b["url"] = config.backend.url;
            b["model"] = config.backend.model;
        }
        j["backend"] = b;
    }
    {
        ordered_json e;
        e["type"] = config.embedder.type;
        if (config.embedder.type == "http") {
            e["url"] = config.embedder.url;
            e["model"] = config.embedder.model;
            e["dim"] = config.embedder.dim;
            e["cache_dir"] = config.embedder.cache_dir;
        }
        e["chunk_limit"] = config.embedder.chunk_limit;
        j["embedder"] = e;
    }
    {
        ordered_json r;
        r["type"] = config.referee.type;
        if (config.referee.type == "llm") r["model"] = config.referee.model;
        j["referee"] = r;
    }
    j["conditions"] = ordered_json::array();
    for (const auto& c : config.conditions) {
        j["conditions"].push_back(ordered_json::parse(condition_to_json(c)));
    }
    {
        ordered_json m;
        m["window_len"] = config.metrics.window_len;
        m["vendi_m"] = config.metrics.vendi_m;
        m["vendi_resamples"] = config.metrics.vendi_resamples;
        m["compression_level"] = config.metrics.compression_level;
        m["history_budget"] = config.metrics.history_budget;
        m["survival_early_windows"] = config.metrics.survival_early_windows;
        m["survival_mass_frac"] = config.metrics.survival_mass_frac;
        m["axis_edge_windows"] = config.metrics.axis_edge_windows;
        j["metrics"] = m;
    }
    {
        ordered_json f;
        f["early_points"] = config.fit.early_points;
        f["tail_points"] = config.fit.tail_points;
        f["bootstrap_resamples"] = config.fit.bootstrap_resamples;
        j["fit"] = f;
    }
    if (!config.families.empty()) {
        j["families"] = ordered_json::array();
        for (const auto& fam : config.families) {
            ordered_json f;
            f["factor"] = fam.factor;
            f["model_group"] = fam.model_group;
            f["reference"] = fam.reference_condition;
            ordered_json levels = ordered_json::object();
            for (const auto& [label, cond] : fam.levels) levels[label] = cond;
            f["levels"] = levels;
            j["families"].push_back(f);
        }
    }
    j["workers"] = config.workers;
    return j.dump(2);
}

std::uint64_t pipeline_config_hash(const PipelineConfig& config) {
    return fnv1a64(pipeline_config_to_json(config));
}

std::uint64_t run_seed(const PipelineConfig& config, const ConditionSpec& cond,
                       int replicate) {
    return derive_seed(config.seed, fnv1a64(cond.name),
                       static_cast<std::uint64_t>(replicate));
}

std::vector<FamilyConfig> derive_families(const PipelineConfig& config) {
    if (!config.families.empty()) return config.families;
    std::vector<FamilyConfig> families;
    const std::string model_group =
        config.backend.type == "synthetic" ? "synthetic" : config.backend.model;
    bool have_standard = false;
    for (const auto& c : config.conditions) {
        if (c.name == "standard") have_standard = true;
    }
    if (!have_standard) return families;

    auto family_of = [&](const std::string& name) -> std::string {
        if (name.rfind("temperature_", 0) == 0) return "TEMPERATURE";
        if (name.rfind("maxtokens_", 0) == 0) return "MAXTOKEN";
        if (name == "rag_diversity") return "RAG";
        if (name.rfind("prompt_", 0) == 0) return "PROMPT";
        if (name == "scale_n10") return "SCALINGLAW";
        if (name == "noise_injection") return "PERTURBATION";
        if (name == "beta1_control") return "AMPLIFICATION";
        return "";
    };
    auto level_of = [&](const std::string& name) {
        const auto underscore = name.rfind('_');
        if (underscore == std::string::npos) return name;
        return name.substr(underscore + 1);
    };
    std::map<std::string, FamilyConfig> by_factor;
    for (const auto& c : config.conditions) {
        const std::string factor = family_of(c.name);
        if (factor.empty()) continue;
        auto& fam = by_factor[factor];
        fam.factor = factor;
        fam.model_group = model_group;
        fam.reference_condition = "standard";
        fam.levels[level_of(c.name)] = c.name;
    }
    for (auto& [factor, fam] : by_factor) families.push_back(fam);
    return families;
}

// ---------------------------------------------------------------------------
// Shared run/analysis plumbing

namespace {

struct Backends {
    std::shared_ptr<Generator> generator;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<RefereeClassifier> referee;
};

Backends make_backends(const PipelineConfig& config,
                       const std::optional<double>& synthetic_beta = {}) {
    Backends b;
    if (config.backend.type == "synthetic") {
        SyntheticGeneratorParams params = config.backend.synthetic;
        if (synthetic_beta) params.beta = *synthetic_beta;
        b.generator = std::make_shared<SyntheticGenerator>(params);
    } else {
        HttpClientConfig http = http_config_from_env(false);
        if (!config.backend.url.empty()) http.url = config.backend.url;
        b.generator = std::make_shared<HttpChatGenerator>(http);
    }
    if (config.embedder.type == "offline") {
        b.embedder = std::make_shared<OfflineEmbedder>();
    } else {
        HttpClientConfig http = http_config_from_env(true);
        if (!config.embedder.url.empty()) http.url = config.embedder.url;
        auto inner = std::make_shared<HttpEmbedder>(http, config.embedder.model,
                                                    config.embedder.dim);
        b.embedder = std::make_shared<CachingEmbedder>(
            inner, config.embedder.cache_dir);
    }
    if (config.referee.type == "rules") {
        b.referee = std::make_shared<RuleBasedReferee>();
    } else {
        b.referee = std::make_shared<LlmReferee>(b.generator, config.referee.model);
    }
    return b;
}

void run_parallel(std::vector<std::function<void()>>& tasks, int workers) {
    if (workers < 1) workers = 1;
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::atomic<bool> failed{false};
    std::string first_error;
    std::mutex error_mutex;
    const auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                tasks[i]();
            } catch (const std::exception& ex) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) first_error = ex.what();
            }
        }
    };
    const int n = std::min<int>(workers, static_cast<int>(tasks.size()));
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failed) throw Error("task_failed", first_error);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    out << content;
    if (!out) throw Error("io", "write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string rep_name(int replicate) { return "rep" + std::to_string(replicate); }

}  // namespace

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const PipelineConfig& config, const std::string& out_dir,
                 const std::optional<std::string>& only_condition, bool force,
                 int workers_override) {
    // Validate everything up front.
    std::vector<ConditionSpec> conditions;
    for (const auto& c : config.conditions) {
        if (!only_condition || c.name == *only_condition) conditions.push_back(c);
    }
    if (only_condition && conditions.empty()) {
        std::cerr << "error: condition '" << *only_condition
                  << "' is not in the pipeline config\n";
        return 1;
    }
    for (const auto& c : conditions) {
        agent_names(c.n_agents);                            // throws if invalid
        render_instruction(c.prompt_template, "X", {}, 0);  // template exists
    }
    const std::string manifest_path = out_dir + "/manifest.json";
    const std::uint64_t config_hash = pipeline_config_hash(config);
    if (fs::exists(manifest_path) && !force) {
        std::cerr << "error: " << manifest_path
                  << " already exists (same or different config); rerun with "
                     "--force to overwrite\n";
        return 1;
    }
    fs::create_directories(out_dir);

    struct RunOutcome {
        std::string condition;
        int replicate = 0;
        std::uint64_t seed = 0;
        bool complete = false;
        std::size_t events = 0;
        std::string error;
    };
    std::vector<RunOutcome> outcomes;
    std::vector<std::function<void()>> tasks;
    std::mutex outcome_mutex;

    for (const auto& cond : conditions) {
        fs::create_directories(out_dir + "/runs/" + cond.name);
        for (int rep = 0; rep < cond.replicates; ++rep) {
            tasks.push_back([&, cond, rep] {
                // Backends are constructed per task: HTTP clients tolerate
                // concurrency but per-run state must not be shared.
                Backends b = make_backends(config, cond.synthetic_beta);
                const std::uint64_t seed = run_seed(config, cond, rep);
                SimulationResult result = run_simulation(
                    cond, seed, *b.generator, *b.referee, *b.embedder);
                const std::string base =
                    out_dir + "/runs/" + cond.name + "/" + rep_name(rep);
                save_transcript(result.run, base + ".jsonl");
                for (std::size_t a = 0; a < result.memories.size(); ++a) {
                    result.memories[a].save(base + ".mem." +
                                            result.memories[a].owner() +
                                            ".jsonl");
                }
                {
                    std::string log;
                    for (const auto& rec : result.context_log) {
                        ordered_json j;
                        j["round"] = rec.round;
                        j["agent"] = rec.agent;
                        j["purpose"] = rec.purpose;
                        j["noise_injected"] = rec.noise_injected;
                        j["retrieved"] = rec.retrieved_ids;
                        j["prompt_chars"] = rec.prompt_chars;
                        log += j.dump();
                        log += "\n";
                    }
                    write_file(base + ".context.jsonl", log);
                }
                RunOutcome outcome;
                outcome.condition = cond.name;
                outcome.replicate = rep;
                outcome.seed = seed;
                outcome.complete = result.run.complete;
                outcome.events = result.run.events.size();
                std::lock_guard lock(outcome_mutex);
                outcomes.push_back(std::move(outcome));
            });
        }
    }

    try {
        run_parallel(tasks, workers_override > 0 ? workers_override
                                                 : config.workers);
    } catch (const std::exception& ex) {
        std::cerr << "error: simulation failed: " << ex.what() << "\n";
        return 2;
    }

    // Deterministic manifest order.
    std::sort(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) {
        if (a.condition != b.condition) return a.condition < b.condition;
        return a.replicate < b.replicate;
    });
    ordered_json manifest;
    manifest["schema"] = "semdrift.manifest";
    manifest["version"] = 1;
    manifest["config_hash"] = hex64(config_hash);
    manifest["config"] = ordered_json::parse(pipeline_config_to_json(config));
    manifest["runs"] = ordered_json::array();
    bool any_incomplete = false;
    for (const auto& o : outcomes) {
        ordered_json r;
        r["condition"] = o.condition;
        r["replicate"] = o.replicate;
        r["seed"] = o.seed;
        r["complete"] = o.complete;
        r["events"] = o.events;
        r["file"] = "runs/" + o.condition + "/" + rep_name(o.replicate) + ".jsonl";
        manifest["runs"].push_back(r);
        if (!o.complete) any_incomplete = true;
    }
    write_file(manifest_path, manifest.dump(2) + "\n");
    if (any_incomplete) {
        std::cerr << "warning: some runs are incomplete\n";
        return 3;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// analyze

namespace {

struct LoadedRun {
    std::string condition;
    int replicate = 0;
    Run run;
    WindowSeries series;
    EmbeddedWindowSeries embedded;
    std::string model;  // homogeneous model id, empty for mixed
};

struct RunMetrics {
    std::vector<std::size_t> lexical;
    std::vector<double> within;
    std::vector<double> convergence;
    std::vector<VendiResult> vendi;
    SurvivalReport survival;
    bool survival_ok = false;
    CompressionTrace compression;
};

double mean_range(const std::vector<double>& v, std::size_t from, std::size_t to) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = from; i < to && i < v.size(); ++i) {
        s += v[i];
        ++n;
    }
    return n > 0 ? s / static_cast<double>(n) : 0.0;
}

}  // namespace

int cmd_analyze(const PipelineConfig& config, const std::string& runs_dir,
                const std::string& out_dir, int workers_override) {
    if (!fs::exists(runs_dir + "/manifest.json")) {
        std::cerr << "error: no manifest.json under " << runs_dir << "\n";
        return 1;
    }
    const auto manifest = nlohmann::json::parse(read_file(runs_dir + "/manifest.json"));
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/plots");

    // Load transcripts (ordered by manifest).
    std::vector<LoadedRun> runs;
    for (const auto& r : manifest["runs"]) {
        if (!r.value("complete", false)) continue;
        LoadedRun loaded;
        loaded.condition = r["condition"].get<std::string>();
        loaded.replicate = r["replicate"].get<int>();
        loaded.run = load_transcript(runs_dir + "/" + r["file"].get<std::string>());
        loaded.model = loaded.run.agent_models.empty() ? loaded.run.model_id : "";
        runs.push_back(std::move(loaded));
    }
    if (runs.empty()) {
        std::cerr << "error: no complete runs to analyze\n";
        return 1;
    }

    Backends backends = make_backends(config);
    Embedder& embedder = *backends.embedder;

    // Window segmentation + embeddings (parallel per run, deterministic).
    {
        std::vector<std::function<void()>> tasks;
        for (auto& loaded : runs) {
            tasks.push_back([&, ptr = &loaded] {
                ptr->series = segment_windows(ptr->run, config.metrics.window_len);
                ptr->embedded = embed_series(ptr->series, embedder,
                                             config.embedder.chunk_limit, true);
            });
        }
        try {
            run_parallel(tasks, workers_override > 0 ? workers_override
                                                     : config.workers);
        } catch (const std::exception& ex) {
            std::cerr << "error: analysis failed: " << ex.what() << "\n";
            return 2;
        }
    }

    std::map<std::string, std::vector<const LoadedRun*>> by_condition;
    for (const auto& loaded : runs) {
        by_condition[loaded.condition].push_back(&loaded);
    }

    // Per-run metrics.
    std::vector<RunMetrics> metrics(runs.size());
    {
        std::vector<std::function<void()>> tasks;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            tasks.push_back([&, i] {
                const LoadedRun& loaded = runs[i];
                RunMetrics& m = metrics[i];
                m.lexical = lexical_diversity(loaded.series);
                m.within = within_run_diversity(loaded.embedded);
                m.convergence = convergence_degree(loaded.embedded);
                m.vendi = vendi_trace(
                    loaded.embedded, config.metrics.vendi_m,
                    config.metrics.vendi_resamples,
                    derive_seed(config.seed, fnv1a64(loaded.run.run_id), 1));
                try {
                    m.survival = token_survival(
                        loaded.series, config.metrics.survival_early_windows,
                        config.metrics.survival_mass_frac, 0,
                        derive_seed(config.seed, fnv1a64(loaded.run.run_id), 2));
                    m.survival_ok = true;
                } catch (const Error&) {
                    m.survival_ok = false;  // run too short for survival
                }
                // Wrong-history control: the next replicate of the condition.
                const auto& peers = by_condition[loaded.condition];
                const WindowSeries* wrong = nullptr;
                if (peers.size() > 1) {
                    for (std::size_t p = 0; p < peers.size(); ++p) {
                        if (peers[p] == &loaded) {
                            wrong = &peers[(p + 1) % peers.size()]->series;
                            break;
                        }
                    }
                }
                m.compression = compression_trace(
                    loaded.series, wrong, config.metrics.compression_level,
                    config.metrics.history_budget,
                    derive_seed(config.seed, fnv1a64(loaded.run.run_id), 3));
            });
        }
        try {
            run_parallel(tasks, workers_override > 0 ? workers_override
                                                     : config.workers);
        } catch (const std::exception& ex) {
            std::cerr << "error: analysis failed: " << ex.what() << "\n";
            return 2;
        }
    }

    // ---- CSV outputs (manifest order keeps bytes stable).
    {
        std::string csv = "condition,run,window,lexical,within_run,convergence\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            const auto& loaded = runs[i];
            const auto& m = metrics[i];
            for (std::size_t w = 0; w < m.within.size(); ++w) {
                csv += loaded.condition + "," + rep_name(loaded.replicate) + "," +
                       std::to_string(w + 1) + "," +
                       std::to_string(m.lexical[w]) + "," +
                       fmt_double(m.within[w]) + ",";
                if (w >= 1) csv += fmt_double(m.convergence[w - 1]);
                csv += "\n";
            }
        }
        write_file(out_dir + "/traces.csv", csv);
    }
    {
        std::string csv = "condition,pair,window,cross_run\n";
        for (const auto& [cond, peers] : by_condition) {
            for (std::size_t i = 0; i < peers.size(); ++i) {
                for (std::size_t j = i + 1; j < peers.size(); ++j) {
                    const auto pair = cross_run_diversity(peers[i]->embedded,
                                                          peers[j]->embedded);
                    const std::string pair_id = rep_name(peers[i]->replicate) +
                                                "-" +
                                                rep_name(peers[j]->replicate);
                    for (std::size_t w = 0; w < pair.per_window.size(); ++w) {
                        csv += cond + "," + pair_id + "," +
                               std::to_string(w + 1) + "," +
                               fmt_double(pair.per_window[w]) + "\n";
                    }
                }
            }
        }
        write_file(out_dir + "/cross.csv", csv);
    }
    {
        std::string csv =
            "condition,run,window,m,resamples,n_utterances,skipped,h_v,s_eff,"
            "v_norm\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (const auto& v : metrics[i].vendi) {
                csv += runs[i].condition + "," + rep_name(runs[i].replicate) +
                       "," + std::to_string(v.window) + "," +
                       std::to_string(v.m) + "," + std::to_string(v.resamples) +
                       "," + std::to_string(v.n_utterances) + "," +
                       (v.skipped ? "1" : "0") + "," + fmt_double(v.h_v) + "," +
                       fmt_double(v.s_eff) + "," + fmt_double(v.v_norm) + "\n";
            }
        }
        write_file(out_dir + "/vendi.csv", csv);
    }
    {
        std::string csv = "condition,run,window,head_survival,tail_survival\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (!metrics[i].survival_ok) continue;
            const auto& s = metrics[i].survival;
            for (std::size_t w = 0; w < s.head_survival.size(); ++w) {
                csv += runs[i].condition + "," + rep_name(runs[i].replicate) +
                       "," + std::to_string(w + 1) + "," +
                       fmt_double(s.head_survival[w]) + "," +
                       fmt_double(s.tail_survival[w]) + "\n";
            }
        }
        write_file(out_dir + "/survival.csv", csv);
    }
    {
        std::string csv =
            "condition,run,window,skipped,raw_len,delta_hist,ratio,adv_wrong,"
            "adv_shuffled,adv_reversed\n";
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (const auto& p : metrics[i].compression.points) {
                csv += runs[i].condition + "," + rep_name(runs[i].replicate) +
                       "," + std::to_string(p.window) + "," +
                       (p.skipped ? "1" : "0") + "," +
                       std::to_string(p.raw_len) + "," +
                       fmt_double(p.delta_hist) + "," + fmt_double(p.ratio) +
                       "," + (p.has_wrong ? fmt_double(p.advantage_wrong) : "") +
                       "," + fmt_double(p.advantage_shuffled) + "," +
                       fmt_double(p.advantage_reversed) + "\n";
            }
        }
        write_file(out_dir + "/compression.csv", csv);
    }

    // ---- Cultural axes per condition.
    {
        std::string csv = "condition,axis,mean_shift,ci_lo,ci_hi,t,p,stars\n";
        for (const auto& [cond, peers] : by_condition) {
            const std::size_t need =
                2 * static_cast<std::size_t>(config.metrics.axis_edge_windows);
            bool enough = !peers.empty();
            std::vector<EmbeddedWindowSeries> series;
            for (const auto* p : peers) {
                if (p->embedded.windows.size() < need) enough = false;
            }
            if (!enough) continue;
            for (const auto* p : peers) series.push_back(p->embedded);
            const auto shifts = cultural_projection(
                series, default_cultural_axes(), embedder,
                config.metrics.axis_edge_windows,
                config.fit.bootstrap_resamples,
                derive_seed(config.seed, fnv1a64(cond), 4));
            for (const auto& s : shifts) {
                csv += cond + "," + s.axis + "," + fmt_double(s.mean_shift) +
                       "," + fmt_double(s.ci_lo) + "," + fmt_double(s.ci_hi) +
                       "," + fmt_double(s.t) + "," + fmt_double(s.p) + "," +
                       s.stars + "\n";
            }
        }
        write_file(out_dir + "/axes.csv", csv);
    }

    // ---- Attribution probe across homogeneous models (when >= 2 classes).
    ordered_json attribution_summary;
    {
        std::map<std::string, std::vector<Embedding>> train;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (runs[i].model.empty()) continue;
            for (const auto& per_window : runs[i].embedded.utterance_embeddings) {
                for (const auto& e : per_window) {
                    train[runs[i].model].push_back(e);
                }
            }
        }
        for (auto it = train.begin(); it != train.end();) {
            if (it->second.size() < 50) it = train.erase(it);
            else ++it;
        }
        if (train.size() >= 2) {
            const auto probe = train_attribution_probe(
                train, 0.2, derive_seed(config.seed, 5));
            std::string csv =
                "condition,run,window,mean_true_posterior,accuracy\n";
            double pooled_post = 0.0, pooled_acc = 0.0;
            std::size_t pooled_n = 0;
            for (std::size_t i = 0; i < runs.size(); ++i) {
                if (runs[i].model.empty()) continue;
                // Round-documents grouped into windows.
                std::map<int, std::string> round_docs;
                for (const auto& e : runs[i].run.events) {
                    if (e.kind == EventKind::Group) continue;
                    auto& doc = round_docs[e.round];
                    if (!doc.empty()) doc += "\n";
                    doc += e.text;
                }
                std::vector<std::vector<std::pair<Embedding, std::string>>> windows(
                    runs[i].series.windows.size());
                for (const auto& [round, doc] : round_docs) {
                    const int w = (round - 1) / config.metrics.window_len;
                    if (w >= static_cast<int>(windows.size()) || doc.empty()) continue;
                    windows[static_cast<std::size_t>(w)].emplace_back(
                        embed_document(doc, embedder, config.embedder.chunk_limit),
                        runs[i].model);
                }
                const auto eval = evaluate_attribution(probe, windows);
                for (std::size_t w = 0; w < eval.accuracy.size(); ++w) {
                    csv += runs[i].condition + "," + rep_name(runs[i].replicate) +
                           "," + std::to_string(w + 1) + "," +
                           fmt_double(eval.mean_true_posterior[w]) + "," +
                           fmt_double(eval.accuracy[w]) + "\n";
                }
                pooled_post += eval.pooled_posterior;
                pooled_acc += eval.pooled_accuracy;
                ++pooled_n;
            }
            write_file(out_dir + "/attribution.csv", csv);
            attribution_summary["classes"] = ordered_json::array();
            for (const auto& [cls, embs] : train) {
                ordered_json c;
                c["model"] = cls;
                c["train_utterances"] = embs.size();
                attribution_summary["classes"].push_back(c);
            }
            attribution_summary["pooled_mean_posterior"] =
                pooled_n ? pooled_post / static_cast<double>(pooled_n) : 0.0;
            attribution_summary["pooled_accuracy"] =
                pooled_n ? pooled_acc / static_cast<double>(pooled_n) : 0.0;
        } else {
            attribution_summary["skipped"] =
                "fewer than 2 homogeneous model classes with 50+ utterances";
        }
    }

    // ---- Condition-level summary.
    ordered_json summary;
    summary["schema"] = "semdrift.analysis";
    summary["version"] = 1;
    summary["embedder"] = embedder.id();
    summary["compressor"] =
        "deflate-" + std::to_string(config.metrics.compression_level);
    summary["conditions"] = ordered_json::object();
    for (const auto& [cond, peers] : by_condition) {
        ordered_json c;
        c["runs"] = peers.size();
        const std::size_t n_windows = peers.front()->series.windows.size();
        c["windows"] = n_windows;

        // Within-run aggregate + plateau on the late half.
        std::vector<PlateauSegment> segments;
        double within_early = 0.0, within_late = 0.0;
        std::size_t ne = 0, nl = 0;
        bool lexical_strict = true;
        for (const auto* p : peers) {
            const std::size_t idx = static_cast<std::size_t>(p - &runs[0]);
            const auto& m = metrics[idx];
            PlateauSegment seg;
            seg.run_id = rep_name(p->replicate);
            for (std::size_t w = m.within.size() / 2; w < m.within.size(); ++w) {
                seg.positions.push_back(static_cast<double>(w + 1));
                seg.values.push_back(m.within[w]);
                within_late += m.within[w];
                ++nl;
            }
            for (std::size_t w = 1; w < 5 && w < m.within.size(); ++w) {
                within_early += m.within[w];
                ++ne;
            }
            segments.push_back(std::move(seg));
            for (std::size_t w = 1; w < m.lexical.size(); ++w) {
                if (m.lexical[w] <= m.lexical[w - 1]) lexical_strict = false;
            }
        }
        c["within_early_mean"] = ne ? within_early / static_cast<double>(ne) : 0.0;
        c["within_late_mean"] = nl ? within_late / static_cast<double>(nl) : 0.0;
        c["lexical_strictly_increasing"] = lexical_strict;
        if (segments.size() >= 2 && n_windows >= 4) {
            const auto pt = plateau_test(segments);
            ordered_json plateau;
            plateau["slope"] = pt.slope;
            plateau["slope_per_100"] = pt.slope_per_100;
            plateau["p_two_sided"] = pt.p_two_sided;
            plateau["fraction_negative"] = pt.fraction_negative;
            plateau["end_to_end_change"] = pt.end_to_end_change;
            c["plateau"] = plateau;
        }

        if (peers.size() >= 2) {
            std::vector<EmbeddedWindowSeries> series;
            for (const auto* p : peers) series.push_back(p->embedded);
            const auto cross = condition_cross_run_diversity(series);
            ordered_json cr;
            cr["mean"] = cross.mean;
            cr["first_window"] = cross.per_window_mean.front();
            cr["last_window"] = cross.per_window_mean.back();
            c["cross_run"] = cr;
        }

        // Vendi early/late means (first and last 5 windows, unskipped).
        {
            double early = 0.0, late = 0.0;
            std::size_t n_early = 0, n_late = 0;
            for (const auto* p : peers) {
                const std::size_t idx = static_cast<std::size_t>(p - &runs[0]);
                const auto& vt = metrics[idx].vendi;
                for (std::size_t w = 0; w < vt.size(); ++w) {
                    if (vt[w].skipped) continue;
                    if (w < 5) {
                        early += vt[w].v_norm;
                        ++n_early;
                    }
                    if (w + 5 >= vt.size()) {
                        late += vt[w].v_norm;
                        ++n_late;
                    }
                }
            }
            ordered_json v;
            v["early_mean"] = n_early ? early / static_cast<double>(n_early) : 0.0;
            v["late_mean"] = n_late ? late / static_cast<double>(n_late) : 0.0;
            c["vendi"] = v;
        }

        // Survival summaries.
        c["survival"] = ordered_json::array();
        for (const auto* p : peers) {
            const std::size_t idx = static_cast<std::size_t>(p - &runs[0]);
            if (!metrics[idx].survival_ok) continue;
            const auto& s = metrics[idx].survival;
            ordered_json row;
            row["run"] = rep_name(p->replicate);
            row["delta_auc"] = s.delta_auc;
            row["half_survival_lag"] = s.half_survival_lag;
            row["terminal_gap"] = s.terminal_gap;
            row["budget"] = s.budget;
            c["survival"].push_back(row);
        }

        // Compression: run-level late-minus-early mean conditional ratio.
        {
            std::vector<double> diffs;
            for (const auto* p : peers) {
                const std::size_t idx = static_cast<std::size_t>(p - &runs[0]);
                const auto& points = metrics[idx].compression.points;
                std::vector<double> ratios;
                for (const auto& pt : points) {
                    if (!pt.skipped) ratios.push_back(pt.ratio);
                }
                if (ratios.size() < 4) continue;
                const std::size_t half = ratios.size() / 2;
                diffs.push_back(mean_range(ratios, half, ratios.size()) -
                                mean_range(ratios, 0, half));
            }
            ordered_json comp;
            comp["run_diffs"] = diffs;
            comp["late_minus_early_mean"] = mean(diffs);
            if (diffs.size() >= 5) {
                comp["wilcoxon_one_sided_p"] =
                    wilcoxon_signed_rank_one_sided(diffs);
            }
            if (diffs.size() >= 2) {
                const auto t = paired_t_one_sided(diffs);
                comp["t"] = t.t;
                comp["t_one_sided_p"] = t.p;
            }
            c["compression"] = comp;
        }
        summary["conditions"][cond] = c;
    }
    summary["attribution"] = attribution_summary;
    write_file(out_dir + "/summary.json", summary.dump(2) + "\n");

    // ---- Plots mirroring the three trace panels.
    {
        std::vector<PlotSeries> lexical, within, cross;
        for (const auto& [cond, peers] : by_condition) {
            PlotSeries lex{cond, {}, {}};
            PlotSeries win{cond, {}, {}};
            const std::size_t n_windows = peers.front()->series.windows.size();
            for (std::size_t w = 0; w < n_windows; ++w) {
                double lex_mean = 0.0, win_mean = 0.0;
                std::size_t n = 0;
                for (const auto* p : peers) {
                    const std::size_t idx = static_cast<std::size_t>(p - &runs[0]);
                    if (w >= metrics[idx].within.size()) continue;
                    lex_mean += static_cast<double>(metrics[idx].lexical[w]);
                    win_mean += metrics[idx].within[w];
                    ++n;
                }
                if (n == 0) continue;
                lex.x.push_back(static_cast<double>(w + 1));
                lex.y.push_back(lex_mean / static_cast<double>(n));
                win.x.push_back(static_cast<double>(w + 1));
                win.y.push_back(win_mean / static_cast<double>(n));
            }
            lexical.push_back(std::move(lex));
            within.push_back(std::move(win));
            if (peers.size() >= 2) {
                std::vector<EmbeddedWindowSeries> series;
                for (const auto* p : peers) series.push_back(p->embedded);
                const auto cr = condition_cross_run_diversity(series);
                PlotSeries s{cond, {}, {}};
                for (std::size_t w = 0; w < cr.per_window_mean.size(); ++w) {
                    s.x.push_back(static_cast<double>(w + 1));
                    s.y.push_back(cr.per_window_mean[w]);
                }
                cross.push_back(std::move(s));
            }
        }
        write_line_chart(out_dir + "/plots/lexical_trace.svg",
                         "Cumulative lexical diversity", "window",
                         "unique unigrams", lexical);
        write_line_chart(out_dir + "/plots/within_run_trace.svg",
                         "Within-run semantic diversity", "window",
                         "1 - cos(e_w, e_1)", within);
        write_line_chart(out_dir + "/plots/cross_run_trace.svg",
                         "Cross-run semantic diversity", "window",
                         "mean pairwise 1 - cos", cross);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// stats

namespace {

struct TraceRow {
    std::string condition;
    std::string run;
    int window = 0;
    double within = 0.0;
};

struct CrossRow {
    std::string condition;
    std::string pair;
    int window = 0;
    double value = 0.0;
};

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (!line.empty() && line.back() == ',') fields.push_back("");
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace

int cmd_stats(const PipelineConfig& config, const std::string& analysis_dir,
              const std::string& out_dir) {
    const auto families = derive_families(config);
    if (families.empty()) {
        std::cerr << "error: no regression families configured or derivable "
                     "(a 'standard' reference condition is required)\n";
        return 1;
    }
    std::vector<TraceRow> traces;
    for (const auto& row : read_csv(analysis_dir + "/traces.csv")) {
        if (row[0] == "condition") continue;
        traces.push_back(
            {row[0], row[1], std::stoi(row[2]), std::stod(row[4])});
    }
    std::vector<CrossRow> cross;
    for (const auto& row : read_csv(analysis_dir + "/cross.csv")) {
        if (row[0] == "condition") continue;
        cross.push_back({row[0], row[1], std::stoi(row[2]), std::stod(row[3])});
    }
    fs::create_directories(out_dir);

    const std::string header = "Factor,Model,Level,Raw p,Adjusted p,Coefficient,SE\n";
    auto emit = [&](bool within_layer) {
        std::string csv = header;
        for (const auto& family : families) {
            RegressionSpec spec;
            spec.outcome_layer = within_layer ? "within_run" : "cross_run";
            spec.factor = family.factor;
            spec.model_group = family.model_group;
            spec.reference_level = "standard";

            auto add_condition = [&](const std::string& level,
                                     const std::string& condition) {
                if (within_layer) {
                    for (const auto& t : traces) {
                        if (t.condition != condition) continue;
                        spec.observations.push_back(
                            {t.within, level, t.window, condition + ":" + t.run});
                    }
                } else {
                    for (const auto& x : cross) {
                        if (x.condition != condition) continue;
                        spec.observations.push_back(
                            {x.value, level, x.window, condition + ":" + x.pair});
                    }
                }
            };
            add_condition("standard", family.reference_condition);
            for (const auto& [level, condition] : family.levels) {
                add_condition(level, condition);
            }
            OlsFit fit;
            try {
                fit = fixed_effects_ols(spec);
            } catch (const Error& e) {
                std::cerr << "warning: family " << family.factor << " ("
                          << spec.outcome_layer << ") skipped: " << e.what()
                          << "\n";
                continue;
            }
            for (const auto& row : fit.level_rows) {
                csv += family.factor + "," + family.model_group + "," +
                       row.level + "," + fmt_double(row.raw_p, 6) + "," +
                       fmt_double(row.adjusted_p, 6) + "," +
                       fmt_double(row.coefficient, 6) + "," +
                       fmt_double(row.se, 6) + "\n";
            }
        }
        return csv;
    };
    write_file(out_dir + "/intervention_within.csv", emit(true));
    write_file(out_dir + "/intervention_cross.csv", emit(false));
    return 0;
}

// ---------------------------------------------------------------------------
// fit

int cmd_fit(const PipelineConfig& config, const std::string& analysis_dir,
            const std::string& out_dir) {
    std::map<std::string, std::map<std::string, std::vector<double>>> by_run;
    for (const auto& row : read_csv(analysis_dir + "/traces.csv")) {
        if (row[0] == "condition") continue;
        by_run[row[0]][row[1]].push_back(std::stod(row[4]));
    }
    if (by_run.empty()) {
        std::cerr << "error: no traces found in " << analysis_dir << "\n";
        return 1;
    }
    fs::create_directories(out_dir);

    std::string fits_csv =
        "condition,run,d_inf,gamma,rmse,r_squared,gamma_identified\n";
    std::string plateau_csv =
        "Group,Observed late plateau,Predicted late plateau (Early 50),"
        "Mean absolute error (Early 50),95% bootstrap CI\n";

    // Traces shorter than the early+tail horizon cannot support plateau
    // prediction and are excluded from the cohorts.
    const std::size_t min_len = static_cast<std::size_t>(
        config.fit.early_points + config.fit.tail_points);
    std::vector<std::vector<double>> all_traces;
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>>
        condition_traces;
    for (const auto& [cond, runs] : by_run) {
        std::vector<std::vector<double>> traces;
        for (const auto& [run, trace] : runs) {
            try {
                const auto fit = fit_exponential(trace);
                fits_csv += cond + "," + run + "," + fmt_double(fit.d_inf) +
                            "," + fmt_double(fit.gamma) + "," +
                            fmt_double(fit.rmse) + "," +
                            fmt_double(fit.r_squared) + "," +
                            (fit.gamma_identified ? "1" : "0") + "\n";
            } catch (const Error& e) {
                std::cerr << "warning: fit failed for " << cond << "/" << run
                          << ": " << e.what() << "\n";
            }
            if (trace.size() < min_len) continue;
            traces.push_back(trace);
            all_traces.push_back(trace);
        }
        condition_traces.emplace_back(cond, std::move(traces));
    }
    write_file(out_dir + "/fits.csv", fits_csv);

    auto plateau_row = [&](const std::string& group,
                           const std::vector<std::vector<double>>& traces,
                           std::uint64_t seed) -> std::string {
        if (traces.size() < 2) return "";
        PlateauCohortSummary s;
        try {
            s = summarize_plateau_cohort(traces, config.fit.early_points,
                                         config.fit.tail_points,
                                         config.fit.bootstrap_resamples, seed);
        } catch (const Error& e) {
            std::cerr << "warning: plateau prediction failed for " << group
                      << ": " << e.what() << "\n";
            return "";
        }
        return group + "," + fmt_double(s.observed_mean, 6) + " ± " +
               fmt_double(s.observed_sd, 6) + "," +
               fmt_double(s.predicted_mean, 6) + " ± " +
               fmt_double(s.predicted_sd, 6) + "," +
               fmt_double(s.mae_mean, 6) + " ± " + fmt_double(s.mae_sd, 6) +
               ",[" + fmt_double(s.mae_ci_lo, 6) + ", " +
               fmt_double(s.mae_ci_hi, 6) + "]\n";
    };
    plateau_csv += plateau_row("Overall", all_traces,
                               derive_seed(config.seed, 6));
    for (const auto& [cond, traces] : condition_traces) {
        plateau_csv += plateau_row(cond, traces,
                                   derive_seed(config.seed, 6, fnv1a64(cond)));
    }
    write_file(out_dir + "/plateau.csv", plateau_csv);
    return 0;
}

// ---------------------------------------------------------------------------
// channel

int cmd_channel(const std::string& spec_path, int steps,
                const std::string& out_dir) {
    ChannelModel channel;
    nlohmann::json spec;
    try {
        const std::string text = read_file(spec_path);
        channel = channel_from_json(text);
        spec = nlohmann::json::parse(text);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    fs::create_directories(out_dir);

    const auto n = static_cast<Eigen::Index>(channel.n());
    Eigen::VectorXd p0 = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    if (spec.contains("p0")) {
        const auto v = spec["p0"].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(v.size()) != n) {
            std::cerr << "error: p0 has wrong dimension\n";
            return 1;
        }
        for (Eigen::Index i = 0; i < n; ++i) p0(i) = v[static_cast<std::size_t>(i)];
    }

    try {
        const auto trajectory = entropy_trajectory_and_fit(channel, p0, steps);
        const auto stationary = stationary_and_gap(channel);
        const auto dpi = dpi_check(channel, p0, steps);

        std::string csv = "t,entropy,mutual_information\n";
        for (std::size_t t = 0; t < trajectory.entropy.size(); ++t) {
            csv += std::to_string(t) + "," + fmt_double(trajectory.entropy[t]) +
                   "," + fmt_double(dpi.mutual_information[t]) + "\n";
        }
        write_file(out_dir + "/trajectory.csv", csv);

        ordered_json j;
        j["n"] = channel.n();
        j["beta"] = channel.beta;
        j["stationary"] = std::vector<double>(
            stationary.stationary.data(),
            stationary.stationary.data() + stationary.stationary.size());
        j["spectral_gap"] = stationary.spectral_gap;
        j["lambda2_modulus"] = stationary.lambda2_modulus;
        j["lambda3_modulus"] = stationary.lambda3_modulus;
        j["h_stationary"] = trajectory.h_stationary;
        j["gamma_fit"] = trajectory.gamma_fit;
        j["h_limit_fit"] = trajectory.h_limit_fit;
        j["r_squared"] = trajectory.r_squared;
        j["dpi_non_increasing"] = dpi.non_increasing;
        j["dpi_max_violation"] = dpi.max_violation;
        const double dh_thr = spec.value("dh_threshold", 0.05);
        const double h0 = trajectory.entropy.front();
        if (trajectory.gamma_fit > 0.0) {
            const auto horizon = creativity_horizon(
                h0, trajectory.h_stationary, trajectory.gamma_fit, dh_thr);
            j["horizon_t_star"] = horizon.t_star;
            j["horizon_clamped"] = horizon.clamped;
            j["horizon_threshold"] = dh_thr;
        }
        write_file(out_dir + "/channel.json", j.dump(2) + "\n");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(const std::string& analysis_dir, const std::string& out_dir) {
    nlohmann::json summary;
    try {
        summary = nlohmann::json::parse(read_file(analysis_dir + "/summary.json"));
    } catch (const std::exception& ex) {
        std::cerr << "error: cannot read analysis summary: " << ex.what() << "\n";
        return 1;
    }
    fs::create_directories(out_dir);
    std::string md = "# Semantic drift analysis report\n\n";
    md += "Embedder: `" + summary.value("embedder", "?") + "`  \n";
    md += "Compressor: `" + summary.value("compressor", "?") + "`\n\n";
    md += "| condition | runs | within early | within late | plateau p | "
          "cross w1 | cross wN | vendi early | vendi late |\n";
    md += "|---|---|---|---|---|---|---|---|---|\n";
    for (auto it = summary["conditions"].begin();
         it != summary["conditions"].end(); ++it) {
        const auto& c = it.value();
        md += "| " + it.key() + " | " +
              std::to_string(c.value("runs", 0)) + " | " +
              fmt_double(c.value("within_early_mean", 0.0), 4) + " | " +
              fmt_double(c.value("within_late_mean", 0.0), 4) + " | ";
        md += c.contains("plateau")
                  ? fmt_double(c["plateau"].value("p_two_sided", 1.0), 4)
                  : std::string("-");
        md += " | ";
        if (c.contains("cross_run")) {
            md += fmt_double(c["cross_run"].value("first_window", 0.0), 4) +
                  " | " +
                  fmt_double(c["cross_run"].value("last_window", 0.0), 4);
        } else {
            md += "- | -";
        }
        md += " | " + fmt_double(c["vendi"].value("early_mean", 0.0), 4) +
              " | " + fmt_double(c["vendi"].value("late_mean", 0.0), 4) +
              " |\n";
    }
    md += "\nDetailed tables: `traces.csv`, `cross.csv`, `vendi.csv`, "
          "`survival.csv`, `compression.csv`, `axes.csv`; figures under "
          "`plots/`.\n";
    write_file(out_dir + "/report.md", md);
    return 0;
}

int cmd_memory_dump(const std::string& store_path, std::size_t limit) {
    try {
        const MemoryStore store = MemoryStore::load(store_path);
        std::cout << "owner: " << store.owner() << ", items: "
                  << store.items().size() << "\n";
        std::size_t shown = 0;
        for (const auto& item : store.items()) {
            if (limit > 0 && shown++ >= limit) break;
            std::cout << "#" << item.item_id << " round " << item.round << " "
                      << to_string(item.type) << " used " << item.usage_count
                      << ": " << item.text.substr(0, 100) << "\n";
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace semdrift
