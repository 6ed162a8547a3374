#include "semdrift/corpus.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace semdrift {

using ordered_json = nlohmann::ordered_json;

std::string to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Main: return "main";
        case EventKind::Reaction: return "reaction";
        case EventKind::Group: return "group";
    }
    return "main";
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "main") return EventKind::Main;
    if (s == "reaction") return EventKind::Reaction;
    if (s == "group") return EventKind::Group;
    throw Error("bad_event_kind", "unknown event kind: " + s);
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        const bool word_char =
            (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
            (c >= '0' && c <= '9') || c >= 0x80;
        if (word_char) {
            current.push_back(
                (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a')
                                       : static_cast<char>(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

WindowSeries segment_windows(const Run& run, int window_len) {
    if (run.events.empty()) throw Error("no_events", "no events in run " + run.run_id);
    if (window_len < 1) throw Error("bad_window_len", "window_len must be positive");

    int max_round = 0;
    for (const auto& e : run.events) max_round = std::max(max_round, e.round);
    const int n_windows = max_round / window_len;
    if (n_windows == 0) {
        throw Error("run_too_short",
                    "run " + run.run_id + " has " + std::to_string(max_round) +
                        " rounds, need at least " + std::to_string(window_len));
    }

    WindowSeries series;
    series.run_id = run.run_id;
    series.window_len = window_len;
    series.windows.resize(n_windows);
    for (int w = 0; w < n_windows; ++w) {
        auto& win = series.windows[w];
        win.run_id = run.run_id;
        win.index = w + 1;
        win.first_round = w * window_len + 1;
        win.last_round = (w + 1) * window_len;
    }
    for (std::size_t i = 0; i < run.events.size(); ++i) {
        const auto& e = run.events[i];
        const int w = (e.round - 1) / window_len;
        if (w >= n_windows) continue;  // dropped tail
        auto& win = series.windows[w];
        win.utterance_refs.push_back(i);
        if (e.kind == EventKind::Group) continue;  // environment metadata
        if (!win.document.empty()) win.document.push_back('\n');
        win.document += e.text;
        win.utterance_texts.push_back(e.text);
    }
    for (auto& win : series.windows) win.tokens = tokenize(win.document);
    return series;
}

TokenStats token_stats(const WindowSeries& series) {
    TokenStats stats;
    stats.window_counts.resize(series.windows.size());
    std::set<std::string> vocab;
    for (std::size_t w = 0; w < series.windows.size(); ++w) {
        auto& counts = stats.window_counts[w];
        for (const auto& tok : series.windows[w].tokens) {
            ++counts[tok];
            const int wi = static_cast<int>(w) + 1;
            stats.first_window.emplace(tok, wi);
            stats.last_window[tok] = wi;
            vocab.insert(tok);
        }
        stats.cumulative_vocabulary.push_back(vocab.size());
    }
    return stats;
}

std::vector<std::size_t> lexical_diversity(const WindowSeries& series) {
    return token_stats(series).cumulative_vocabulary;
}

namespace {

constexpr int kTranscriptVersion = 1;

ordered_json header_json(const Run& run) {
    ordered_json h;
    h["schema"] = "semdrift.transcript";
    h["version"] = kTranscriptVersion;
    h["run_id"] = run.run_id;
    h["condition_id"] = run.condition_id;
    h["model_id"] = run.model_id;
    if (!run.agent_models.empty()) {
        ordered_json m = ordered_json::object();
        for (const auto& [agent, model] : run.agent_models) m[agent] = model;
        h["agent_models"] = m;
    }
    h["seed"] = run.seed;
    h["rounds"] = run.rounds;
    h["replicate"] = run.replicate;
    h["complete"] = run.complete;
    return h;
}

}  // namespace

std::string transcript_to_string(const Run& run) {
    std::string out = header_json(run).dump();
    out.push_back('\n');
    for (const auto& e : run.events) {
        ordered_json j;
        j["round"] = e.round;
        j["agent"] = e.agent_id;
        j["kind"] = to_string(e.kind);
        j["text"] = e.text;
        j["ts"] = e.timestamp;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

Run transcript_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    Run run;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const std::exception& ex) {
            throw Error("malformed_line", "line " + std::to_string(lineno) +
                                              ": " + ex.what());
        }
        try {
            if (!have_header) {
                if (j.value("schema", "") != "semdrift.transcript") {
                    throw Error("bad_schema",
                                "line 1: not a semdrift transcript header");
                }
                const int version = j.value("version", -1);
                if (version != kTranscriptVersion) {
                    throw Error("version_mismatch",
                                "transcript version " + std::to_string(version) +
                                    ", expected " +
                                    std::to_string(kTranscriptVersion));
                }
                run.run_id = j.at("run_id").get<std::string>();
                run.condition_id = j.at("condition_id").get<std::string>();
                run.model_id = j.at("model_id").get<std::string>();
                if (j.contains("agent_models")) {
                    for (auto it = j["agent_models"].begin();
                         it != j["agent_models"].end(); ++it) {
                        run.agent_models[it.key()] = it.value().get<std::string>();
                    }
                }
                run.seed = j.at("seed").get<std::uint64_t>();
                run.rounds = j.at("rounds").get<int>();
                run.replicate = j.value("replicate", 0);
                run.complete = j.value("complete", true);
                have_header = true;
                continue;
            }
            Utterance e;
            e.run_id = run.run_id;
            e.round = j.at("round").get<int>();
            e.agent_id = j.at("agent").get<std::string>();
            e.kind = event_kind_from_string(j.at("kind").get<std::string>());
            e.text = j.at("text").get<std::string>();
            e.timestamp = j.at("ts").get<std::uint64_t>();
            run.events.push_back(std::move(e));
        } catch (const Error&) {
            throw;
        } catch (const std::exception& ex) {
            throw Error("malformed_line", "line " + std::to_string(lineno) +
                                              ": " + ex.what());
        }
    }
    if (!have_header) throw Error("empty_transcript", "no header line found");
    return run;
}

void save_transcript(const Run& run, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open for writing: " + path);
    out << transcript_to_string(run);
    if (!out) throw Error("io", "write failed: " + path);
}

Run load_transcript(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return transcript_from_string(buf.str());
}

}  // namespace semdrift
