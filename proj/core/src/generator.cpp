#include "semdrift/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "semdrift/corpus.hpp"
#include "semdrift/rng.hpp"

namespace semdrift {

namespace {

// Disjoint topic lexicons. Topic 0 deliberately overlaps with the default
// environment instruction ("infinite space"), giving every run the same mild
// initial tilt through context conditioning.
const std::vector<std::vector<std::string>> kLexicons = {
    {"space", "infinite", "horizon", "drift", "nebula", "orbit", "stellar",
     "comet", "gravity", "eclipse", "distant", "starlight", "expanse",
     "cosmic", "aurora", "zenith"},
    {"garden", "seedling", "blossom", "orchard", "soil", "meadow", "fern",
     "pollen", "harvest", "grove", "petal", "vine", "moss", "clover",
     "sprout", "bramble"},
    {"gear", "circuit", "piston", "engine", "lever", "dynamo", "valve",
     "rivet", "conveyor", "turbine", "socket", "flywheel", "axle", "gauge",
     "welding", "armature"},
    {"river", "tide", "delta", "harbor", "wave", "lagoon", "estuary",
     "driftwood", "reef", "ripple", "shoal", "brine", "ferry", "marsh",
     "inlet", "sandbar"},
    {"melody", "rhythm", "chord", "tempo", "sonata", "cadence", "refrain",
     "timbre", "crescendo", "octave", "motif", "resonance", "percussion",
     "lyric", "chorus", "staccato"},
    {"archive", "ledger", "manuscript", "parchment", "scribe", "folio",
     "codex", "margin", "catalog", "quill", "binding", "chapter",
     "annotation", "registry", "gazette", "index"},
};

constexpr int kPhrasesPerTopic = 24;

// Coined lexemes draw letters uniformly so their character n-grams spread
// over the whole n-gram space; narrow syllable patterns would alias all
// novel words onto one shared embedding direction.
std::string coin_lexeme(Rng& rng) {
    const std::size_t len = 6 + rng.next_below(4);
    std::string word;
    for (std::size_t i = 0; i < len; ++i) {
        word += static_cast<char>('a' + rng.next_below(26));
    }
    return word;
}

int draw_categorical(const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = rng.next_double() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        u -= weights[i];
        if (u <= 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

}  // namespace

const std::string& SyntheticGenerator::invitation_phrase() {
    static const std::string phrase =
        "shall we gather as a group around this?";
    return phrase;
}

const std::string& SyntheticGenerator::consent_phrase() {
    static const std::string phrase = "yes, count me in for the group";
    return phrase;
}

const std::string& SyntheticGenerator::decline_phrase() {
    static const std::string phrase =
        "i would rather decline the group for now";
    return phrase;
}

SyntheticGenerator::SyntheticGenerator(SyntheticGeneratorParams params)
    : params_(params) {
    if (params_.topic_count < 2 ||
        params_.topic_count > static_cast<int>(kLexicons.size())) {
        throw Error("bad_params",
                    "topic_count must be in [2, " +
                        std::to_string(kLexicons.size()) + "]");
    }
    if (params_.beta < 1.0) {
        throw Error("bad_params", "sharpening exponent must be >= 1");
    }
    lexicons_.assign(kLexicons.begin(),
                     kLexicons.begin() + params_.topic_count);
    // Stock phrases: deterministic word pairs from the topic lexicon.
    for (int k = 0; k < params_.topic_count; ++k) {
        const auto& lex = lexicons_[static_cast<std::size_t>(k)];
        std::vector<std::string> bank;
        for (int p = 0; p < kPhrasesPerTopic; ++p) {
            const auto a = static_cast<std::size_t>((p * 5 + 3) % lex.size());
            auto b = static_cast<std::size_t>((p * 7 + 1) % lex.size());
            if (b == a) b = (b + 1) % lex.size();
            bank.push_back(lex[a] + " " + lex[b]);
        }
        phrases_.push_back(std::move(bank));
    }
}

std::vector<double> SyntheticGenerator::topic_evidence(
    const std::string& context) const {
    std::map<std::string, int> word_topic;
    for (int k = 0; k < params_.topic_count; ++k) {
        for (const auto& w : lexicons_[static_cast<std::size_t>(k)]) {
            word_topic[w] = k;
        }
    }
    std::vector<double> counts(static_cast<std::size_t>(params_.topic_count), 0.0);
    for (const auto& tok : tokenize(context)) {
        auto it = word_topic.find(tok);
        if (it != word_topic.end()) {
            counts[static_cast<std::size_t>(it->second)] += 1.0;
        }
    }
    return counts;
}

std::vector<std::vector<int>> SyntheticGenerator::phrase_usage(
    const std::string& context) const {
    const auto tokens = tokenize(context);
    std::map<std::string, int> bigrams;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        ++bigrams[tokens[i] + " " + tokens[i + 1]];
    }
    std::vector<std::vector<int>> usage;
    for (const auto& bank : phrases_) {
        std::vector<int> u;
        for (const auto& phrase : bank) {
            auto it = bigrams.find(phrase);
            u.push_back(it == bigrams.end() ? 0 : it->second);
        }
        usage.push_back(std::move(u));
    }
    return usage;
}

std::vector<double> SyntheticGenerator::topic_distribution(
    const std::vector<double>& counts, double temperature) const {
    if (counts.size() != static_cast<std::size_t>(params_.topic_count)) {
        throw Error("bad_counts", "counts size must equal topic_count");
    }
    if (temperature <= 0.0) {
        throw Error("bad_temperature", "temperature must be positive");
    }
    // Temperature scales the amplification component of the exponent, so
    // beta = 1 stays a no-amplification identity at every temperature and
    // the formula reduces to (count + 1)^beta at T = 1.
    const double exponent = 1.0 + (params_.beta - 1.0) / temperature;
    std::vector<double> p(counts.size());
    double z = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        if (counts[k] < 0.0) {
            throw Error("bad_counts", "topic counts must be non-negative");
        }
        p[k] = std::pow(counts[k] + 1.0, exponent);
        z += p[k];
    }
    for (double& v : p) v /= z;
    return p;
}

std::string SyntheticGenerator::render(
    int topic, const std::vector<std::vector<int>>& usage, double temperature,
    Rng& rng, int slots) const {
    const auto& bank = phrases_[static_cast<std::size_t>(topic)];
    const auto& uses = usage[static_cast<std::size_t>(topic)];
    const double exponent = 1.0 + (params_.beta - 1.0) / temperature;

    // Sharpened candidate weights: stock phrases vs the novel pool. Usage
    // converts to gain slowly and saturates, so reinforcement builds across
    // windows instead of locking within a single round of echo.
    std::vector<double> stock(bank.size());
    double stock_mass = 0.0;
    for (std::size_t p = 0; p < bank.size(); ++p) {
        const double zipf = 1.0 / std::sqrt(static_cast<double>(p + 1));
        const double scaled_use =
            std::min(uses[p] * params_.usage_gain_scale, params_.usage_cap);
        const double use_gain = std::pow(1.0 + scaled_use, 0.8);
        stock[p] = std::pow(zipf * use_gain, exponent);
        stock_mass += stock[p];
    }
    const double novel_mass =
        static_cast<double>(params_.novel_pool_size) *
        std::pow(params_.novel_unit_weight, exponent);

    // Every utterance opens with a coined signature lexeme, so surface
    // novelty never stops even under full topic lock-in.
    std::string text = coin_lexeme(rng);
    for (int s = 0; s < slots; ++s) {
        const bool fresh =
            rng.next_double() * (stock_mass + novel_mass) < novel_mass;
        std::string piece;
        if (fresh) {
            piece = coin_lexeme(rng);
        } else {
            piece = bank[static_cast<std::size_t>(draw_categorical(stock, rng))];
        }
        text += ", ";
        text += piece;
    }
    text += ".";
    return text;
}

SyntheticStep SyntheticGenerator::step(const std::vector<double>& history_counts,
                                       double temperature, std::uint64_t seed,
                                       int slots) const {
    Rng rng(seed);
    SyntheticStep out;
    out.topic_probabilities = topic_distribution(history_counts, temperature);
    out.topic = draw_categorical(out.topic_probabilities, rng);
    std::vector<std::vector<int>> no_usage;
    for (const auto& bank : phrases_) {
        no_usage.emplace_back(bank.size(), 0);
    }
    out.text = render(out.topic, no_usage, temperature, rng,
                      slots < 0 ? params_.main_slots : slots);
    return out;
}

std::string SyntheticGenerator::generate(const GenerationRequest& request) {
    if (request.max_tokens < 1) {
        throw Error("bad_request", "max_tokens must be >= 1");
    }
    Rng rng(request.seed);

    const bool reaction =
        request.prompt.find("You are reacting to") != std::string::npos;
    const bool invitation_pending =
        request.prompt.find(invitation_phrase()) != std::string::npos;

    std::string text;
    if (reaction && invitation_pending) {
        // Handshake reply: consent or decline, then a short topical remark.
        text = rng.next_double() < params_.consent_prob ? consent_phrase()
                                                        : decline_phrase();
        text += ". ";
    }

    // Topic evidence is capped in total mass: amplification acts on the
    // relative shares of topics in the context.
    const auto counts_raw = topic_evidence(request.prompt);
    double total_evidence = 0.0;
    for (double c : counts_raw) total_evidence += c;
    const double evidence_scale =
        total_evidence > params_.evidence_cap
            ? params_.evidence_cap / total_evidence
            : 1.0;
    std::vector<double> counts(counts_raw.size());
    for (std::size_t k = 0; k < counts.size(); ++k) {
        counts[k] = params_.context_weight * counts_raw[k] * evidence_scale;
    }
    const auto probs = topic_distribution(counts, request.temperature);
    const int topic = draw_categorical(probs, rng);
    const auto usage = phrase_usage(request.prompt);
    text += render(topic, usage, request.temperature, rng,
                   reaction ? params_.reaction_slots : params_.main_slots);

    if (!reaction && rng.next_double() < params_.invite_prob) {
        text += " ";
        text += invitation_phrase();
    }

    // Enforce the output budget in whitespace tokens.
    std::istringstream in(text);
    std::string word, out;
    int n = 0;
    while (in >> word && n < request.max_tokens) {
        if (n > 0) out += " ";
        out += word;
        ++n;
    }
    if (out.empty()) throw Error("empty_generation", "no tokens produced");
    return out;
}

}  // namespace semdrift
