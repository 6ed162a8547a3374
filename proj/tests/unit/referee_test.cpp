#include <doctest.h>

#include <memory>
#include <vector>

#include "semdrift/referee.hpp"

using namespace semdrift;

TEST_CASE("rule-based referee on the canonical invitation reply") {
    RuleBasedReferee referee;
    const auto record = referee.classify(
        "Bay", "Thank you for the invitation, and yes, count me in for the group.");
    CHECK(record.is_interaction);
    CHECK(record.valence == Valence::Positive);
    CHECK(record.agree_to_group);
    CHECK(record.action_name == "Reply to Invitation");
    CHECK_FALSE(record.group_invitation);
}

TEST_CASE("rule-based referee: invitations and declines") {
    RuleBasedReferee referee;
    const auto invite =
        referee.classify("Ari", "shall we gather as a group around this?");
    CHECK(invite.group_invitation);
    CHECK(invite.is_interaction);
    CHECK(invite.action_name == "Invite to Group");

    const auto decline = referee.classify(
        "Cam", "i would rather decline the group for now. the tide turns.");
    CHECK_FALSE(decline.agree_to_group);
    CHECK(decline.action_name == "Decline Invitation");
}

TEST_CASE("rule-based referee matches a hand-labeled interaction fixture") {
    // 50 utterances labeled by hand against the documented rule table:
    // interaction iff second-person/first-plural marker, question mark,
    // greeting, or group mention.
    const std::vector<std::pair<std::string, bool>> fixture = {
        {"the quiet orchard rests beside the moss.", false},
        {"do you see the comet over the ridge?", true},
        {"hello there, fellow travelers.", true},
        {"i will sit with the ledger and think.", false},
        {"we could build a raft from driftwood.", true},
        {"the turbine hums in the distance.", false},
        {"what lies beyond the estuary?", true},
        {"your melody carries across the water.", true},
        {"a folio of maps, annotated in the margin.", false},
        {"let us gather near the harbor.", true},
        {"the engine needs a new valve.", false},
        {"greetings, keepers of the archive.", true},
        {"i wonder about the far nebula.", false},
        {"can anyone hear the refrain?", true},
        {"the seedling broke through the soil today.", false},
        {"this registry holds every name.", false},
        {"you and i should trade stories.", true},
        {"our shared space feels wider today.", true},
        {"the rhythm slows near the cadence.", false},
        {"why does the gauge read zero?", true},
        {"moss gathers on the north wall.", false},
        {"welcome to the meadow, one and all.", true},
        {"the ferry crosses at dawn.", false},
        {"shall we form a group by the grove?", true},
        {"a sonata in three movements.", false},
        {"the flywheel spun all night.", false},
        {"is the lagoon deeper than it looks?", true},
        {"together we chart the expanse.", true},
        {"the scribe copies the codex line by line.", false},
        {"tides shift the sandbar gradually.", false},
        {"may i borrow your quill?", true},
        {"the aurora folded over the zenith.", false},
        {"join the circle when the chord resolves.", true},
        {"an axle creaks under the conveyor.", false},
        {"thinking about the harvest calendar.", false},
        {"did the eclipse change anything?", true},
        {"the brine stings but the reef glows.", false},
        {"us three could map the delta.", true},
        {"catalog entries multiply unattended.", false},
        {"hi, the percussion starts at dusk.", true},
        {"the vine wraps the bramble twice.", false},
        {"how does the dynamo hold its charge?", true},
        {"a margin note in faded ink.", false},
        {"everyone drifts toward the starlight.", true},
        {"the piston settles after the stroke.", false},
        {"petals fall where the sprout bends.", false},
        {"would anyone walk the channel path?", true},
        {"the chapter ends mid-sentence.", false},
        {"i keep my own counsel tonight.", false},
        {"your gears mesh with our motif.", true},
    };
    REQUIRE(fixture.size() == 50);
    RuleBasedReferee referee;
    for (const auto& [text, expected] : fixture) {
        const auto record = referee.classify("Agent", text);
        INFO("utterance: " << text);
        CHECK(record.is_interaction == expected);
    }
}

namespace {

// Scripted generator for the LLM referee path.
class ScriptedGenerator : public Generator {
public:
    explicit ScriptedGenerator(std::vector<std::string> outputs)
        : outputs_(std::move(outputs)) {}
    std::string id() const override { return "scripted"; }
    std::string generate(const GenerationRequest&) override {
        ++calls;
        if (outputs_.empty()) throw Error("exhausted", "no more outputs");
        std::string out = outputs_.front();
        outputs_.erase(outputs_.begin());
        return out;
    }
    int calls = 0;

private:
    std::vector<std::string> outputs_;
};

const char* kGoodRecord = R"({
  "action_name": "Reply to Invitation",
  "is_interaction": true,
  "valence": "positive",
  "description": "Expresses gratitude and readiness to join the discussion.",
  "group_invitation": false,
  "agree_to_group": true
})";

}  // namespace

TEST_CASE("llm referee parses a strict JSON record") {
    auto backend = std::make_shared<ScriptedGenerator>(
        std::vector<std::string>{kGoodRecord});
    LlmReferee referee(backend, "referee-model");
    const auto record = referee.classify("Bay", "Thank you for the invitation");
    CHECK(record.action_name == "Reply to Invitation");
    CHECK(record.agree_to_group);
    CHECK(record.valence == Valence::Positive);
    CHECK(backend->calls == 1);
}

TEST_CASE("llm referee re-queries once on malformed output") {
    auto backend = std::make_shared<ScriptedGenerator>(
        std::vector<std::string>{"sorry, here is my analysis", kGoodRecord});
    LlmReferee referee(backend, "referee-model");
    const auto record = referee.classify("Bay", "text");
    CHECK(record.agree_to_group);
    CHECK(backend->calls == 2);
}

TEST_CASE("malformed output twice falls back to the default record") {
    auto backend = std::make_shared<ScriptedGenerator>(
        std::vector<std::string>{"{broken", "{\"also\": \"broken\"}"});
    LlmReferee referee(backend, "referee-model");
    bool fallback = false;
    const std::string long_text(120, 'x');
    const auto record = referee_classify("Bay", long_text, referee, &fallback);
    CHECK(fallback);
    CHECK(record.action_name == "Unclassified");
    CHECK(record.is_interaction);
    CHECK(record.valence == Valence::Neutral);
    CHECK(record.description.size() == 80);
    CHECK_FALSE(record.group_invitation);
    CHECK_FALSE(record.agree_to_group);
    CHECK(backend->calls == 2);
}

TEST_CASE("unreachable classifier also falls back with a warning flag") {
    class DownGenerator : public Generator {
    public:
        std::string id() const override { return "down"; }
        std::string generate(const GenerationRequest&) override {
            throw Error("http_error", "connection refused");
        }
    };
    LlmReferee referee(std::make_shared<DownGenerator>(), "referee-model");
    bool fallback = false;
    const auto record = referee_classify("Bay", "hello?", referee, &fallback);
    CHECK(fallback);
    CHECK(record.action_name == "Unclassified");
}

TEST_CASE("llm referee prompt carries the classification contract") {
    const std::string prompt = LlmReferee::build_prompt("Ari", "some text");
    CHECK(prompt.find("You are Referee analyzing text from [Ari]") !=
          std::string::npos);
    CHECK(prompt.find("Output must be valid JSON ONLY") != std::string::npos);
    CHECK(prompt.find("agree_to_group") != std::string::npos);
}
