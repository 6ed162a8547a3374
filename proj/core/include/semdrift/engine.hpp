#pragma once
// Closed-loop multi-agent simulation: per-round randomized scheduling,
// referee classification and routing, the two-step group handshake, context
// assembly with short-term buffer + retrieval-augmented memory, intervention
// levers (temperature, output budget, packing policy, prompts, population
// size, noise injection), and deterministic seeding throughout.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semdrift/corpus.hpp"
#include "semdrift/embed.hpp"
#include "semdrift/generator.hpp"
#include "semdrift/memory.hpp"
#include "semdrift/referee.hpp"

namespace semdrift {

enum class PackerKind { Standard, Diverse };

std::string to_string(PackerKind p);
PackerKind packer_from_string(const std::string& s);

struct ConditionSpec {
    std::string name = "standard";
    int n_agents = 3;
    int rounds = 200;
    double temperature = 0.9;
    int max_tokens = 200;
    std::string prompt_template = "default";
    PackerKind memory_packer = PackerKind::Standard;
    std::vector<int> noise_rounds;  // rounds with 5 injected passages
    std::string model_id = "synthetic";
    std::map<std::string, std::string> agent_models;  // mixed composition
    int replicates = 3;
    int short_term_rounds = 3;  // conversation buffer depth k
    std::size_t retrieval_budget = 800;  // tokens
    std::size_t retrieval_pool = 64;     // candidate pool for the packer
    std::optional<double> synthetic_beta;  // overrides the synthetic backend
};

ConditionSpec condition_from_json(const std::string& json_text);
std::string condition_to_json(const ConditionSpec& cond);

// The paper-matched preset grid (one factor changed per condition).
std::vector<ConditionSpec> builtin_conditions();
ConditionSpec builtin_condition(const std::string& name);

// ---------------------------------------------------------------------------
// Prompt templates and noise passages

// Environment instruction presets; {self.name} and {ctx} are substituted at
// assembly time. Per-agent variants (personas, biographies, roles) cycle by
// agent index.
const std::vector<std::string>& prompt_template_ids();
std::string render_instruction(const std::string& template_id,
                               const std::string& agent_name,
                               const std::vector<std::string>& other_names,
                               int agent_index);

// The five fixed public-domain noise passages.
const std::vector<std::string>& noise_passages();

// Fixed agent name pool (up to 10 agents).
std::vector<std::string> agent_names(int n);

// ---------------------------------------------------------------------------
// Context assembly

struct ShortTermEntry {
    int round = 0;
    std::string speaker;
    EventKind kind = EventKind::Main;
    std::string text;
};

struct ContextRecord {
    int round = 0;
    std::string agent;
    std::string purpose;  // "main" or "reaction"
    bool noise_injected = false;
    std::vector<std::string> noise_texts;
    std::vector<std::uint64_t> retrieved_ids;
    std::size_t prompt_chars = 0;
    int short_term_rounds_used = 0;
    std::size_t retrieval_budget_used = 0;
    std::string prompt;  // filled only when prompt logging is enabled
};

struct AssembledContext {
    std::string prompt;
    ContextRecord record;
};

// Builds instruction + identity profile + short-term buffer + packed
// memories (+ noise passages when scheduled). On overflow of
// `max_prompt_chars` the oldest short-term rounds are evicted first, then
// the retrieval budget is halved; the instruction is never truncated.
AssembledContext assemble_context(
    const std::string& agent_name, int agent_index, int round,
    const ConditionSpec& cond, const std::vector<std::string>& other_names,
    const std::vector<ShortTermEntry>& short_term, MemoryStore& memory,
    Embedder& embedder, bool inject_noise,
    std::size_t max_prompt_chars = 32768);

// ---------------------------------------------------------------------------
// Group handshake

struct GroupState {
    std::string inviter;
    std::vector<std::string> members;  // includes the inviter
    bool active = false;
    std::uint64_t created_ts = 0;
};

// Recipients' reaction texts are classified as consenting or declining; the
// group forms from the inviter plus consenters (none -> no group, logged as
// a declined invitation by the caller).
GroupState group_handshake(
    const std::string& inviter,
    const std::vector<std::pair<std::string, std::string>>& recipient_replies,
    RefereeClassifier& referee, std::uint64_t ts);

// ---------------------------------------------------------------------------
// Simulation driver

struct SimulationHooks {
    // Invoked in event order; useful for streaming sinks.
    std::function<void(const Utterance&)> on_event;
};

struct SimulationResult {
    Run run;
    std::vector<MemoryStore> memories;       // one per agent
    std::vector<ContextRecord> context_log;  // one per generation call
    std::vector<GroupState> groups;
    std::size_t referee_fallbacks = 0;
};

// Deterministic for a fixed (cond, seed) with the synthetic backend: agent
// order is drawn from a seeded shuffle each round, every generation call
// gets a derived seed, and all routing follows the referee records.
SimulationResult run_simulation(const ConditionSpec& cond, std::uint64_t seed,
                                Generator& generator,
                                RefereeClassifier& referee, Embedder& embedder,
                                const SimulationHooks& hooks = {},
                                bool log_prompts = false);

}  // namespace semdrift
