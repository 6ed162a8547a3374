#pragma once
// Utterance classification into structured action records, governing message
// routing. Two classifiers ship: a remote LLM referee with deterministic
// decoding and strict-JSON repair, and a deterministic rule-based referee
// for offline runs. Both sit behind the same repair-and-fallback wrapper.

#include <memory>
#include <string>

#include "semdrift/generator.hpp"

namespace semdrift {

enum class Valence { Positive, Negative, Neutral };

std::string to_string(Valence v);
Valence valence_from_string(const std::string& s);

struct ActionRecord {
    std::string action_name;  // concise verb phrase, non-empty
    bool is_interaction = true;
    Valence valence = Valence::Neutral;
    std::string description;  // non-empty
    bool group_invitation = false;
    bool agree_to_group = false;
};

class RefereeClassifier {
public:
    virtual ~RefereeClassifier() = default;
    virtual std::string id() const = 0;
    // May throw; the referee_classify wrapper applies the fallback contract.
    virtual ActionRecord classify(const std::string& speaker,
                                  const std::string& raw_text) = 0;
};

// Wrapper with the documented fallback: on classifier failure the utterance
// gets a default record (is_interaction = true, neutral valence,
// action_name "Unclassified", description = first 80 characters, both group
// booleans false). `fallback_used`, when given, reports whether it fired.
ActionRecord referee_classify(const std::string& speaker,
                              const std::string& raw_text,
                              RefereeClassifier& classifier,
                              bool* fallback_used = nullptr);

// Deterministic keyword-rule classifier. The rule table is documented in
// the README; interaction requires a second-person/first-plural marker,
// a question, or an invitation/greeting form.
class RuleBasedReferee : public RefereeClassifier {
public:
    std::string id() const override { return "rule-based"; }
    ActionRecord classify(const std::string& speaker,
                          const std::string& raw_text) override;
};

// LLM referee: prompts a chat backend with the fixed classification
// instruction at temperature 0 and parses strict JSON; one repair re-query
// on malformed output, then throws (the wrapper then applies the default).
class LlmReferee : public RefereeClassifier {
public:
    LlmReferee(std::shared_ptr<Generator> backend, std::string model_id);
    std::string id() const override { return "llm:" + model_id_; }
    ActionRecord classify(const std::string& speaker,
                          const std::string& raw_text) override;

    static std::string build_prompt(const std::string& speaker,
                                    const std::string& raw_text);
    // Strict parse of the six-key record; throws Error("malformed_record").
    static ActionRecord parse_record(const std::string& json_text);

private:
    std::shared_ptr<Generator> backend_;
    std::string model_id_;
};

}  // namespace semdrift
