#pragma once
// Declarative pipeline over the whole toolkit: simulate condition grids,
// compute transcript metrics and plots, run the intervention regressions,
// fit contraction curves, and emit reports. Every output is a deterministic
// function of (config, seeds) alone, independent of worker count.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semdrift/engine.hpp"

namespace semdrift {

struct BackendConfig {
    std::string type = "synthetic";  // "synthetic" | "http"
    SyntheticGeneratorParams synthetic;
    std::string url;    // http backend
    std::string model;  // http backend default model
};

struct EmbedderConfig {
    std::string type = "offline";  // "offline" | "http"
    std::string url;
    std::string model;
    std::size_t dim = 3072;
    std::string cache_dir;
    std::size_t chunk_limit = 8000;
};

struct RefereeConfig {
    std::string type = "rules";  // "rules" | "llm"
    std::string model;
};

struct MetricsConfig {
    int window_len = 10;
    std::size_t vendi_m = 30;
    int vendi_resamples = 200;
    int compression_level = 6;
    std::size_t history_budget = 0;  // 0 = full prior history
    int survival_early_windows = 4;
    double survival_mass_frac = 0.10;
    int axis_edge_windows = 3;
};

struct FitConfig {
    int early_points = 5;   // windows used for the early fit
    int tail_points = 5;    // windows defining the observed plateau
    int bootstrap_resamples = 10000;
};

// One regression family: a factor with levels mapped to condition names,
// compared against the reference condition within a model group.
struct FamilyConfig {
    std::string factor;
    std::string model_group;
    std::string reference_condition;
    std::map<std::string, std::string> levels;  // level label -> condition
};

struct PipelineConfig {
    int schema_version = 1;
    std::uint64_t seed = 1;
    BackendConfig backend;
    EmbedderConfig embedder;
    RefereeConfig referee;
    std::vector<ConditionSpec> conditions;
    MetricsConfig metrics;
    FitConfig fit;
    std::vector<FamilyConfig> families;  // empty = derive from conditions
    int workers = 4;
};

PipelineConfig pipeline_config_from_json(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);
// Canonical serialization used for the manifest and the config hash.
std::string pipeline_config_to_json(const PipelineConfig& config);
std::uint64_t pipeline_config_hash(const PipelineConfig& config);

// Derive the regression families from condition names (the built-in grid
// naming scheme) when none are configured explicitly.
std::vector<FamilyConfig> derive_families(const PipelineConfig& config);

// Seed for (condition, replicate), derived from the master seed.
std::uint64_t run_seed(const PipelineConfig& config, const ConditionSpec& cond,
                       int replicate);

// ---------------------------------------------------------------------------
// Commands. All return the standard process exit code:
// 0 success, 1 validation error, 2 runtime error, 3 partial results.

int cmd_simulate(const PipelineConfig& config, const std::string& out_dir,
                 const std::optional<std::string>& only_condition, bool force,
                 int workers_override = 0);

int cmd_analyze(const PipelineConfig& config, const std::string& runs_dir,
                const std::string& out_dir, int workers_override = 0);

int cmd_stats(const PipelineConfig& config, const std::string& analysis_dir,
              const std::string& out_dir);

int cmd_fit(const PipelineConfig& config, const std::string& analysis_dir,
            const std::string& out_dir);

int cmd_channel(const std::string& spec_path, int steps,
                const std::string& out_dir);

int cmd_report(const std::string& analysis_dir, const std::string& out_dir);

int cmd_memory_dump(const std::string& store_path, std::size_t limit);

}  // namespace semdrift
