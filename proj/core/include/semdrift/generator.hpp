#pragma once
// Pluggable utterance generators: a deterministic synthetic mode-amplifying
// generator for desk-scale experiments, and a remote chat-completion HTTP
// client (see http_client.hpp for the transport).

#include <cstdint>
#include <string>
#include <vector>

#include "semdrift/common.hpp"

namespace semdrift {

struct GenerationRequest {
    std::string prompt;
    double temperature = 0.9;
    int max_tokens = 200;
    std::uint64_t seed = 0;  // honored by the synthetic backend only
    std::string model_id;
};

class Generator {
public:
    virtual ~Generator() = default;
    virtual std::string id() const = 0;
    // Returns non-empty text of at most max_tokens whitespace tokens.
    virtual std::string generate(const GenerationRequest& request) = 0;
};

// ---------------------------------------------------------------------------
// Synthetic mode-amplifying generator.
//
// Topics are sampled from p(k) proportional to (count_k + 1)^e with the
// temperature-scaled amplification exponent e = 1 + (beta - 1)/T, where
// count_k is the topic-keyword evidence the generator reads out of its own
// prompt (short-term buffer plus retrieved memories), scaled by
// context_weight. Surface phrases within the chosen topic compete against a
// pool of "novel continuation" candidates: every stock phrase p carries
// weight zipf_p * (1 + uses_in_context), every novel candidate a small
// constant weight, and all candidate weights are sharpened by beta/T. With
// beta = 1 novel continuations keep a large share and the text stays fresh;
// with beta > 1 the many small novel candidates are crushed and the
// well-supported stock phrases dominate - topics contract while each
// utterance still coins at least one new surface lexeme. Context evidence
// and phrase usage are capped in total mass, so amplification works on
// relative dominance and the contraction builds over windows rather than
// within a single round.

struct SyntheticGeneratorParams {
    int topic_count = 6;           // K (max 6 shipped topic banks)
    double beta = 2.0;             // sharpening exponent, >= 1
    double context_weight = 1.0;   // scale on context topic evidence
    double novel_unit_weight = 0.27;  // weight of one novel candidate
    int novel_pool_size = 60;        // number of virtual novel candidates
    double evidence_cap = 12.0;  // cap on total context topic-evidence mass
    double usage_gain_scale = 0.08;  // occurrences-to-gain conversion rate
    double usage_cap = 5.0;         // per-phrase cap on scaled usage
    int main_slots = 7;               // phrase slots per main utterance
    int reaction_slots = 3;
    double invite_prob = 0.04;
    double consent_prob = 0.6;
};

struct SyntheticStep {
    int topic = 0;
    std::vector<double> topic_probabilities;
    std::string text;
};

class SyntheticGenerator : public Generator {
public:
    explicit SyntheticGenerator(SyntheticGeneratorParams params = {});

    std::string id() const override { return "synthetic"; }
    std::string generate(const GenerationRequest& request) override;

    // Topic distribution for given evidence counts: p(k) proportional to
    // (count_k + 1)^(beta / temperature).
    std::vector<double> topic_distribution(const std::vector<double>& counts,
                                           double temperature) const;

    // One sampling step: draw the next topic from the distribution above and
    // render text from its phrase bank with fresh surface lexemes.
    SyntheticStep step(const std::vector<double>& history_counts,
                       double temperature, std::uint64_t seed,
                       int slots = -1) const;

    // Context parsing, exposed for tests: per-topic keyword hit counts and
    // per-phrase bigram usage counts.
    std::vector<double> topic_evidence(const std::string& context) const;
    std::vector<std::vector<int>> phrase_usage(const std::string& context) const;

    const SyntheticGeneratorParams& params() const { return params_; }
    const std::vector<std::vector<std::string>>& phrase_banks() const {
        return phrases_;
    }

    // Fixed surface forms the engine and referee rules key on.
    static const std::string& invitation_phrase();
    static const std::string& consent_phrase();
    static const std::string& decline_phrase();

private:
    std::string render(int topic, const std::vector<std::vector<int>>& usage,
                       double temperature, class Rng& rng, int slots) const;

    SyntheticGeneratorParams params_;
    std::vector<std::vector<std::string>> lexicons_;  // per-topic keywords
    std::vector<std::vector<std::string>> phrases_;   // per-topic stock phrases
};

}  // namespace semdrift
