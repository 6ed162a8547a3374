#pragma once
// Canonical data model for runs, events, windows and tokenization, plus
// JSONL persistence of transcripts.
//
// All types are plain values; every operation here is a pure function.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semdrift/common.hpp"

namespace semdrift {

enum class EventKind { Main, Reaction, Group };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct Utterance {
    std::string run_id;
    int round = 1;             // >= 1
    std::string agent_id;
    EventKind kind = EventKind::Main;
    std::string text;          // may be empty only for logged refusals
    std::uint64_t timestamp = 0;  // strictly increasing within a run
};

struct Run {
    std::string run_id;
    std::string condition_id;
    // Homogeneous composition uses model_id; mixed compositions fill the map.
    std::string model_id;
    std::map<std::string, std::string> agent_models;
    std::uint64_t seed = 0;
    int rounds = 0;
    int replicate = 0;
    bool complete = true;  // false when a backend failure aborted the run
    std::vector<Utterance> events;
};

struct Window {
    std::string run_id;
    int index = 1;          // w >= 1
    int first_round = 1;
    int last_round = 1;
    std::string document;   // concatenated model-generated text only
    std::vector<std::string> tokens;
    std::vector<std::size_t> utterance_refs;  // indices into Run::events
    // Per-utterance model-generated texts inside this window (for
    // utterance-level metrics such as Vendi resampling).
    std::vector<std::string> utterance_texts;
};

struct WindowSeries {
    std::string run_id;
    int window_len = 10;
    std::vector<Window> windows;
};

struct TokenStats {
    // Per-window unigram multisets, ordered by window index.
    std::vector<std::map<std::string, int>> window_counts;
    // First/last window (1-based) in which each token occurs.
    std::map<std::string, int> first_window;
    std::map<std::string, int> last_window;
    std::vector<std::size_t> cumulative_vocabulary;  // |union of U_1..U_w|
};

// Lowercase (ASCII case fold; bytes >= 0x80 pass through as word characters)
// and split on non-alphanumeric boundaries, dropping empty tokens. This is
// the single unigram definition used across all lexical metrics.
std::vector<std::string> tokenize(const std::string& text);

// Partition a run into non-overlapping windows of `window_len` consecutive
// rounds. Trailing rounds that do not fill a window are dropped. Window
// documents contain main and reaction text only; group notices are
// environment metadata and excluded.
WindowSeries segment_windows(const Run& run, int window_len);

TokenStats token_stats(const WindowSeries& series);

// Cumulative unique-unigram counts L_w, one entry per window.
std::vector<std::size_t> lexical_diversity(const WindowSeries& series);

// Transcript persistence: one JSON object per line. First line is the run
// header, remaining lines are events in timestamp order. Byte-stable.
void save_transcript(const Run& run, const std::string& path);
Run load_transcript(const std::string& path);

std::string transcript_to_string(const Run& run);
Run transcript_from_string(const std::string& text);

}  // namespace semdrift
