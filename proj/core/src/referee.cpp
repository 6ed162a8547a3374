#include "semdrift/referee.hpp"

#include <algorithm>
#include <array>
#include <set>

#include <nlohmann/json.hpp>

#include "semdrift/corpus.hpp"

namespace semdrift {

std::string to_string(Valence v) {
    switch (v) {
        case Valence::Positive: return "positive";
        case Valence::Negative: return "negative";
        case Valence::Neutral: return "neutral";
    }
    return "neutral";
}

Valence valence_from_string(const std::string& s) {
    if (s == "positive") return Valence::Positive;
    if (s == "negative") return Valence::Negative;
    if (s == "neutral") return Valence::Neutral;
    throw Error("bad_valence", "unknown valence: " + s);
}

ActionRecord referee_classify(const std::string& speaker,
                              const std::string& raw_text,
                              RefereeClassifier& classifier,
                              bool* fallback_used) {
    if (fallback_used != nullptr) *fallback_used = false;
    try {
        return classifier.classify(speaker, raw_text);
    } catch (const std::exception&) {
        if (fallback_used != nullptr) *fallback_used = true;
        ActionRecord record;
        record.action_name = "Unclassified";
        record.is_interaction = true;
        record.valence = Valence::Neutral;
        record.description = raw_text.substr(0, 80);
        if (record.description.empty()) record.description = "(empty utterance)";
        record.group_invitation = false;
        record.agree_to_group = false;
        return record;
    }
}

namespace {

const std::set<std::string> kSecondPerson = {"you", "your",  "yours", "we",
                                             "us",  "our",   "ours",  "everyone",
                                             "together", "anyone"};
const std::set<std::string> kGreetings = {"hello", "hi", "greetings", "welcome"};
const std::set<std::string> kPositive = {
    "thank",  "thanks",   "glad",    "wonderful", "appreciate", "love",
    "great",  "happy",    "agree",   "yes",       "welcome",    "gladly",
    "delight", "curious", "beautiful", "warm",    "joy",        "excited"};
const std::set<std::string> kNegative = {
    "hate",  "attack",  "refuse",  "terrible", "angry", "wrong",
    "decline", "fight", "awful",   "fear",     "no",    "never",
    "reject", "worse",  "hostile", "destroy"};
const std::set<std::string> kInvitationWords = {"join", "gather", "invite",
                                                "form", "assemble"};
const std::set<std::string> kConsentWords = {"count", "join", "agree", "gladly",
                                             "accept"};
const std::set<std::string> kDeclineWords = {"decline", "rather", "cannot",
                                             "refuse", "pass"};

bool contains_any(const std::vector<std::string>& tokens,
                  const std::set<std::string>& set) {
    return std::any_of(tokens.begin(), tokens.end(),
                       [&](const std::string& t) { return set.count(t) > 0; });
}

}  // namespace

ActionRecord RuleBasedReferee::classify(const std::string& /*speaker*/,
                                        const std::string& raw_text) {
    if (raw_text.empty()) {
        throw Error("empty_utterance", "nothing to classify");
    }
    const auto tokens = tokenize(raw_text);
    const bool question = raw_text.find('?') != std::string::npos;
    const bool second_person = contains_any(tokens, kSecondPerson);
    const bool greeting = contains_any(tokens, kGreetings);

    ActionRecord record;

    // Group invitation: an invitation verb plus the group/circle noun.
    const bool group_noun =
        std::find(tokens.begin(), tokens.end(), "group") != tokens.end() ||
        std::find(tokens.begin(), tokens.end(), "circle") != tokens.end();
    record.group_invitation =
        group_noun && contains_any(tokens, kInvitationWords);

    // Consent applies only to replies mentioning the group.
    const bool consent = group_noun && contains_any(tokens, kConsentWords) &&
                         !contains_any(tokens, kDeclineWords);
    record.agree_to_group = consent;

    record.is_interaction =
        second_person || question || greeting || record.group_invitation ||
        group_noun;

    int positive = 0, negative = 0;
    for (const auto& t : tokens) {
        if (kPositive.count(t)) ++positive;
        if (kNegative.count(t)) ++negative;
    }
    record.valence = positive > negative   ? Valence::Positive
                     : negative > positive ? Valence::Negative
                                           : Valence::Neutral;

    if (record.group_invitation) {
        record.action_name = "Invite to Group";
    } else if (group_noun && consent) {
        record.action_name = "Reply to Invitation";
    } else if (group_noun && contains_any(tokens, kDeclineWords)) {
        record.action_name = "Decline Invitation";
    } else if (question) {
        record.action_name = "Ask";
    } else if (record.is_interaction) {
        record.action_name = "Engage";
    } else {
        record.action_name = "Reflect";
    }
    record.description = raw_text.substr(0, 80);
    return record;
}

// ---------------------------------------------------------------------------

LlmReferee::LlmReferee(std::shared_ptr<Generator> backend, std::string model_id)
    : backend_(std::move(backend)), model_id_(std::move(model_id)) {}

std::string LlmReferee::build_prompt(const std::string& speaker,
                                     const std::string& raw_text) {
    std::string prompt =
        "You are Referee analyzing text from [" + speaker + "]: \"\"" +
        raw_text + "\"\"\n\n";
    prompt +=
        "We define six keys for classification:\n"
        "1. `action_name`: A concise verb phrase summarizing the main action "
        "(e.g. \"Reply to Invitation\", \"Collaborate\", \"Attack\").\n"
        "2. `is_interaction`: true if the message indicates active "
        "communication or engagement; false otherwise.\n"
        "3. `valence`: can be \"positive\" if the tone is encouraging, "
        "grateful, or constructive; \"negative\" if it is hostile or "
        "destructive; or \"neutral\" if the tone is balanced or ambiguous.\n"
        "4. `description`: A brief, explicit description of the speaker's "
        "expressed intent or emotion. Do not leave this field empty.\n"
        "5. `group_invitation`: true if the message includes an invitation "
        "for a group interaction; false if not mentioned.\n"
        "6. `agree_to_group`: For replies to an invitation, true if "
        "accepting, false if declining; if not applicable, set to false.\n\n"
        "Important: For every input, you must return explicit values for all "
        "keys. Even if the text is very short, use your best judgment to "
        "assign a suitable value.\n\n"
        "Output must be valid JSON ONLY, with all keys present and "
        "non-empty, and without extra text.\n"
        "Make your best guess and output JSON only.";
    return prompt;
}

ActionRecord LlmReferee::parse_record(const std::string& json_text) {
    // Tolerate surrounding prose by extracting the outermost JSON object.
    const auto open = json_text.find('{');
    const auto close = json_text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open) {
        throw Error("malformed_record", "no JSON object in referee output");
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text.substr(open, close - open + 1));
    } catch (const std::exception& ex) {
        throw Error("malformed_record", std::string("invalid JSON: ") + ex.what());
    }
    ActionRecord record;
    try {
        record.action_name = j.at("action_name").get<std::string>();
        record.is_interaction = j.at("is_interaction").get<bool>();
        record.valence = valence_from_string(j.at("valence").get<std::string>());
        record.description = j.at("description").get<std::string>();
        record.group_invitation = j.at("group_invitation").get<bool>();
        record.agree_to_group = j.at("agree_to_group").get<bool>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& ex) {
        throw Error("malformed_record", std::string("missing or mistyped key: ") +
                                            ex.what());
    }
    if (record.action_name.empty() || record.description.empty()) {
        throw Error("malformed_record", "empty action_name or description");
    }
    return record;
}

ActionRecord LlmReferee::classify(const std::string& speaker,
                                  const std::string& raw_text) {
    GenerationRequest request;
    request.prompt = build_prompt(speaker, raw_text);
    request.temperature = 0.0;  // deterministic decoding
    request.max_tokens = 200;
    request.model_id = model_id_;

    std::string output = backend_->generate(request);
    try {
        return parse_record(output);
    } catch (const Error&) {
        // One repair re-query, then let the wrapper apply the default.
        output = backend_->generate(request);
        return parse_record(output);
    }
}

}  // namespace semdrift
