#include "semdrift/engine.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semdrift/rng.hpp"

namespace semdrift {

std::string to_string(PackerKind p) {
    return p == PackerKind::Standard ? "standard" : "diversity";
}

PackerKind packer_from_string(const std::string& s) {
    if (s == "standard") return PackerKind::Standard;
    if (s == "diversity" || s == "diverse") return PackerKind::Diverse;
    throw Error("bad_packer", "unknown memory packer: " + s);
}

ConditionSpec condition_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& ex) {
        throw Error("bad_condition", std::string("invalid JSON: ") + ex.what());
    }
    ConditionSpec cond;
    cond.name = j.value("name", cond.name);
    cond.n_agents = j.value("n_agents", cond.n_agents);
    cond.rounds = j.value("rounds", cond.rounds);
    cond.temperature = j.value("temperature", cond.temperature);
    cond.max_tokens = j.value("max_tokens", cond.max_tokens);
    cond.prompt_template = j.value("prompt_template", cond.prompt_template);
    if (j.contains("memory_packer")) {
        cond.memory_packer =
            packer_from_string(j["memory_packer"].get<std::string>());
    }
    if (j.contains("noise_rounds")) {
        cond.noise_rounds = j["noise_rounds"].get<std::vector<int>>();
    }
    cond.model_id = j.value("model_id", cond.model_id);
    if (j.contains("agent_models")) {
        for (auto it = j["agent_models"].begin(); it != j["agent_models"].end();
             ++it) {
            cond.agent_models[it.key()] = it.value().get<std::string>();
        }
    }
    cond.replicates = j.value("replicates", cond.replicates);
    cond.short_term_rounds = j.value("short_term_rounds", cond.short_term_rounds);
    cond.retrieval_budget = j.value("retrieval_budget", cond.retrieval_budget);
    cond.retrieval_pool = j.value("retrieval_pool", cond.retrieval_pool);
    if (j.contains("synthetic_beta")) {
        cond.synthetic_beta = j["synthetic_beta"].get<double>();
    }
    if (cond.rounds < 1) throw Error("bad_condition", "rounds must be >= 1");
    if (cond.n_agents < 2) throw Error("bad_condition", "n_agents must be >= 2");
    if (cond.temperature <= 0.0) {
        throw Error("bad_condition", "temperature must be > 0");
    }
    if (cond.max_tokens < 1) throw Error("bad_condition", "max_tokens must be >= 1");
    return cond;
}

std::string condition_to_json(const ConditionSpec& cond) {
    nlohmann::ordered_json j;
    j["name"] = cond.name;
    j["n_agents"] = cond.n_agents;
    j["rounds"] = cond.rounds;
    j["temperature"] = cond.temperature;
    j["max_tokens"] = cond.max_tokens;
    j["prompt_template"] = cond.prompt_template;
    j["memory_packer"] = to_string(cond.memory_packer);
    if (!cond.noise_rounds.empty()) j["noise_rounds"] = cond.noise_rounds;
    j["model_id"] = cond.model_id;
    if (!cond.agent_models.empty()) {
        nlohmann::ordered_json m = nlohmann::ordered_json::object();
        for (const auto& [agent, model] : cond.agent_models) m[agent] = model;
        j["agent_models"] = m;
    }
    j["replicates"] = cond.replicates;
    j["short_term_rounds"] = cond.short_term_rounds;
    j["retrieval_budget"] = cond.retrieval_budget;
    j["retrieval_pool"] = cond.retrieval_pool;
    if (cond.synthetic_beta) j["synthetic_beta"] = *cond.synthetic_beta;
    return j.dump();
}

std::vector<ConditionSpec> builtin_conditions() {
    std::vector<ConditionSpec> conditions;
    ConditionSpec standard;
    conditions.push_back(standard);

    for (double t : {0.5, 1.2, 2.0}) {
        ConditionSpec c = standard;
        std::ostringstream name;
        name << "temperature_" << t;
        c.name = name.str();
        c.temperature = t;
        conditions.push_back(c);
    }
    {
        ConditionSpec c = standard;
        c.name = "maxtokens_1500";
        c.max_tokens = 1500;
        conditions.push_back(c);
    }
    {
        ConditionSpec c = standard;
        c.name = "rag_diversity";
        c.memory_packer = PackerKind::Diverse;
        conditions.push_back(c);
    }
    for (const auto& tpl : prompt_template_ids()) {
        if (tpl == "default") continue;
        ConditionSpec c = standard;
        c.name = "prompt_" + tpl;
        c.prompt_template = tpl;
        conditions.push_back(c);
    }
    {
        // Population scaling runs a shorter horizon with two replicates.
        ConditionSpec c = standard;
        c.name = "scale_n10";
        c.n_agents = 10;
        c.rounds = 20;
        c.replicates = 2;
        conditions.push_back(c);
    }
    {
        ConditionSpec c = standard;
        c.name = "noise_injection";
        c.noise_rounds = {3, 6, 9, 12, 15};
        conditions.push_back(c);
    }
    {
        // No-amplification control for the synthetic backend.
        ConditionSpec c = standard;
        c.name = "beta1_control";
        c.synthetic_beta = 1.0;
        conditions.push_back(c);
    }
    return conditions;
}

ConditionSpec builtin_condition(const std::string& name) {
    for (const auto& c : builtin_conditions()) {
        if (c.name == name) return c;
    }
    throw Error("unknown_condition", "no built-in condition '" + name + "'");
}

// ---------------------------------------------------------------------------

namespace {

std::string render_short_term(const std::vector<ShortTermEntry>& entries,
                              int from_round) {
    std::string out;
    for (const auto& e : entries) {
        if (e.round < from_round) continue;
        out += "Round " + std::to_string(e.round) + " | " + e.speaker;
        out += e.kind == EventKind::Reaction ? " reacted: " : " said: ";
        out += e.text;
        out += "\n";
    }
    return out;
}

}  // namespace

AssembledContext assemble_context(
    const std::string& agent_name, int agent_index, int round,
    const ConditionSpec& cond, const std::vector<std::string>& other_names,
    const std::vector<ShortTermEntry>& short_term, MemoryStore& memory,
    Embedder& embedder, bool inject_noise, std::size_t max_prompt_chars) {
    AssembledContext out;
    out.record.round = round;
    out.record.agent = agent_name;
    out.record.purpose = "main";

    const std::string instruction = render_instruction(
        cond.prompt_template, agent_name, other_names, agent_index);
    const std::string profile =
        "You are " + agent_name + ", one of " + std::to_string(cond.n_agents) +
        " individuals sharing this space. You speak in your own voice and "
        "follow your own curiosity.";

    // Retrieval query: the agent's recent view of the conversation, falling
    // back to the instruction in round 1.
    // Buffer depth k covers the current round plus the k-1 preceding ones.
    std::string query_text = render_short_term(
        short_term, round - cond.short_term_rounds + 1);
    if (query_text.empty()) query_text = instruction;

    int buffer_from = round - cond.short_term_rounds + 1;
    std::size_t budget = memory.items().empty() ? 0 : cond.retrieval_budget;

    for (;;) {
        std::string prompt = instruction;
        prompt += "\n\n";
        prompt += profile;

        const std::string buffer_text = render_short_term(short_term, buffer_from);
        if (!buffer_text.empty()) {
            prompt += "\n\n== recent conversation ==\n" + buffer_text;
        }

        std::vector<std::uint64_t> retrieved;
        if (budget > 0) {
            const Embedding query = embed_document(query_text, embedder);
            std::string memory_text;
            if (cond.memory_packer == PackerKind::Diverse) {
                PackingWeights weights;
                const auto packed =
                    pack_diverse(memory, query, round, budget, weights,
                                 cond.retrieval_pool);
                for (const auto& p : packed.items) {
                    retrieved.push_back(p.item->item_id);
                    memory_text += "- (round " + std::to_string(p.item->round) +
                                   ") " + p.item->text + "\n";
                }
            } else {
                const auto packed =
                    pack_standard(memory, query, budget, cond.retrieval_pool);
                for (const auto& p : packed) {
                    retrieved.push_back(p.item->item_id);
                    memory_text += "- (round " + std::to_string(p.item->round) +
                                   ") " + p.item->text + "\n";
                }
            }
            if (!memory_text.empty()) {
                prompt += "\n\n== retrieved memories ==\n" + memory_text;
            }
        }

        if (inject_noise) {
            prompt += "\n\n== passages ==\n";
            for (const auto& passage : noise_passages()) {
                prompt += passage;
                prompt += "\n";
            }
        }

        prompt += "\nYou are " + agent_name + ". It is round " +
                  std::to_string(round) + ". Take your action now.";

        if (prompt.size() <= max_prompt_chars) {
            out.prompt = std::move(prompt);
            out.record.retrieved_ids = std::move(retrieved);
            out.record.short_term_rounds_used =
                std::max(0, round - std::max(buffer_from, 1));
            out.record.retrieval_budget_used = budget;
            break;
        }
        // Evict the oldest short-term rounds first, then shrink retrieval.
        if (buffer_from < round) {
            ++buffer_from;
            continue;
        }
        if (budget > 0) {
            budget /= 2;
            continue;
        }
        throw Error("context_overflow",
                    "instruction alone exceeds the prompt limit");
    }

    if (inject_noise) {
        out.record.noise_injected = true;
        out.record.noise_texts = noise_passages();
    }
    return out;
}

// ---------------------------------------------------------------------------

GroupState group_handshake(
    const std::string& inviter,
    const std::vector<std::pair<std::string, std::string>>& recipient_replies,
    RefereeClassifier& referee, std::uint64_t ts) {
    GroupState group;
    group.inviter = inviter;
    group.created_ts = ts;
    group.members.push_back(inviter);
    for (const auto& [recipient, reply] : recipient_replies) {
        const ActionRecord record = referee_classify(recipient, reply, referee);
        if (record.agree_to_group) {
            group.members.push_back(recipient);
        }
    }
    group.active = group.members.size() > 1;
    if (!group.active) group.members.clear();
    return group;
}

// ---------------------------------------------------------------------------

SimulationResult run_simulation(const ConditionSpec& cond, std::uint64_t seed,
                                Generator& generator,
                                RefereeClassifier& referee, Embedder& embedder,
                                const SimulationHooks& hooks,
                                bool log_prompts) {
    const auto names = agent_names(cond.n_agents);
    SimulationResult result;
    result.run.run_id = cond.name + "-seed" + std::to_string(seed);
    result.run.condition_id = cond.name;
    result.run.model_id = cond.agent_models.empty() ? cond.model_id : "";
    result.run.agent_models = cond.agent_models;
    result.run.seed = seed;
    result.run.rounds = cond.rounds;

    for (const auto& name : names) result.memories.emplace_back(name);
    std::vector<ShortTermEntry> short_term;

    auto model_for = [&](const std::string& agent) {
        auto it = cond.agent_models.find(agent);
        return it == cond.agent_models.end() ? cond.model_id : it->second;
    };

    std::uint64_t ts = 0;
    auto append_event = [&](int round, const std::string& agent, EventKind kind,
                            const std::string& text) -> const Utterance& {
        Utterance e;
        e.run_id = result.run.run_id;
        e.round = round;
        e.agent_id = agent;
        e.kind = kind;
        e.text = text;
        e.timestamp = ts++;
        result.run.events.push_back(std::move(e));
        if (hooks.on_event) hooks.on_event(result.run.events.back());
        return result.run.events.back();
    };

    auto other_names_of = [&](std::size_t idx) {
        std::vector<std::string> others;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i != idx) others.push_back(names[i]);
        }
        return others;
    };

    try {
        for (int round = 1; round <= cond.rounds; ++round) {
            const bool noise_round =
                std::find(cond.noise_rounds.begin(), cond.noise_rounds.end(),
                          round) != cond.noise_rounds.end();

            // Randomized speaking order from a per-round seeded shuffle.
            std::vector<std::size_t> order(names.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            Rng order_rng(derive_seed(seed, 0x0Dull, static_cast<std::uint64_t>(round)));
            order_rng.shuffle(order);

            for (std::size_t pos = 0; pos < order.size(); ++pos) {
                const std::size_t speaker_idx = order[pos];
                const std::string& speaker = names[speaker_idx];

                AssembledContext ctx = assemble_context(
                    speaker, static_cast<int>(speaker_idx), round, cond,
                    other_names_of(speaker_idx), short_term,
                    result.memories[speaker_idx], embedder, noise_round);
                if (log_prompts) ctx.record.prompt = ctx.prompt;
                ctx.record.prompt_chars = ctx.prompt.size();
                result.context_log.push_back(ctx.record);
                result.memories[speaker_idx].note_selected(
                    ctx.record.retrieved_ids, round);

                GenerationRequest request;
                request.prompt = ctx.prompt;
                request.temperature = cond.temperature;
                request.max_tokens = cond.max_tokens;
                request.model_id = model_for(speaker);
                request.seed = derive_seed(seed, 1,
                                           static_cast<std::uint64_t>(round),
                                           speaker_idx);
                const std::string text = generator.generate(request);
                append_event(round, speaker, EventKind::Main, text);
                result.memories[speaker_idx].write(speaker + ": " + text, round,
                                                   EventKind::Main, embedder);
                short_term.push_back({round, speaker, EventKind::Main, text});

                bool fallback = false;
                const ActionRecord record =
                    referee_classify(speaker, text, referee, &fallback);
                if (fallback) ++result.referee_fallbacks;
                if (!record.is_interaction) continue;

                // Broadcast to all non-speaking agents of the round; each
                // recipient reacts once, and reactions are delivered back.
                std::vector<std::pair<std::string, std::string>> replies;
                for (std::size_t r = 0; r < names.size(); ++r) {
                    if (r == speaker_idx) continue;
                    const std::string& recipient = names[r];
                    result.memories[r].write(speaker + ": " + text, round,
                                             EventKind::Main, embedder);

                    std::string reaction_prompt = render_instruction(
                        cond.prompt_template, recipient,
                        other_names_of(r), static_cast<int>(r));
                    reaction_prompt += "\n\nYou are reacting to " + speaker +
                                       ", who just said:\n\"" + text +
                                       "\"\nReact briefly in your own voice.";
                    GenerationRequest reaction_request;
                    reaction_request.prompt = reaction_prompt;
                    reaction_request.temperature = cond.temperature;
                    reaction_request.max_tokens = cond.max_tokens;
                    reaction_request.model_id = model_for(recipient);
                    reaction_request.seed =
                        derive_seed(seed, 2 + speaker_idx,
                                    static_cast<std::uint64_t>(round), r);
                    const std::string reaction =
                        generator.generate(reaction_request);

                    ContextRecord reaction_record;
                    reaction_record.round = round;
                    reaction_record.agent = recipient;
                    reaction_record.purpose = "reaction";
                    reaction_record.prompt_chars = reaction_prompt.size();
                    if (log_prompts) reaction_record.prompt = reaction_prompt;
                    result.context_log.push_back(reaction_record);

                    append_event(round, recipient, EventKind::Reaction, reaction);
                    result.memories[r].write(recipient + ": " + reaction, round,
                                             EventKind::Reaction, embedder);
                    // Delivered back to the speaker.
                    result.memories[speaker_idx].write(
                        recipient + ": " + reaction, round, EventKind::Reaction,
                        embedder);
                    short_term.push_back(
                        {round, recipient, EventKind::Reaction, reaction});
                    replies.emplace_back(recipient, reaction);
                }

                if (record.group_invitation) {
                    const GroupState group =
                        group_handshake(speaker, replies, referee, ts);
                    std::string notice;
                    if (group.active) {
                        notice = "group formed:";
                        for (const auto& m : group.members) notice += " " + m;
                    } else {
                        notice = "invitation by " + speaker + " declined";
                    }
                    append_event(round, "environment", EventKind::Group, notice);
                    result.groups.push_back(group);
                    if (group.active) {
                        for (const auto& member : group.members) {
                            const auto it =
                                std::find(names.begin(), names.end(), member);
                            const auto idx = static_cast<std::size_t>(
                                it - names.begin());
                            result.memories[idx].write(notice, round,
                                                       EventKind::Group,
                                                       embedder);
                        }
                    }
                }
            }

            // Trim the short-term buffer to the configured depth.
            const int keep_from = round + 2 - cond.short_term_rounds;
            short_term.erase(
                std::remove_if(short_term.begin(), short_term.end(),
                               [&](const ShortTermEntry& e) {
                                   return e.round < keep_from;
                               }),
                short_term.end());
        }
    } catch (const Error&) {
        result.run.complete = false;
        return result;
    }
    result.run.complete = true;
    return result;
}

}  // namespace semdrift
