#include <catch2/catch_amalgamated.hpp>

#include "agon/policies.hpp"
#include "helpers.hpp"

using namespace agon;

namespace {

GameSpec repeated_spec(bool communication = false) {
    GameSpec spec;
    spec.game_id = "pd_conventional";
    spec.matrix = testutil::conventional_pd();
    spec.n_rounds = 10;
    spec.communication_enabled = communication;
    return spec;
}

// Builds a history where the opponent (player2) played the given sequence;
// player1 (self) played B throughout.
std::vector<RoundRecord> opponent_transcript(const GameSpec& spec,
                                             const std::vector<Choice>& opponent) {
    std::vector<RoundRecord> history;
    for (std::size_t i = 0; i < opponent.size(); ++i) {
        RoundRecord r;
        r.round_index = static_cast<int>(i) + 1;
        r.choice1 = Choice::B;
        r.choice2 = opponent[i];
        r.payoffs = payoff(spec.matrix, r.choice1, r.choice2);
        history.push_back(r);
    }
    return history;
}

DecisionContext context_at(const GameSpec& spec, const std::vector<RoundRecord>& history,
                           int round) {
    DecisionContext ctx;
    ctx.spec = &spec;
    ctx.self = {"agent1", Personality::Cooperative, "text"};
    ctx.opponent_id = "agent2";
    ctx.self_index = 0;
    ctx.history = &history;
    ctx.round_index = round;
    return ctx;
}

} // namespace

TEST_CASE("catalog lists the builtin policies") {
    const auto& names = builtin_policy_names();
    for (const char* expected : {"always_cooperate", "always_defect", "tit_for_tat",
                                 "grim_trigger", "uniform_random", "fixed_a", "fixed_b"})
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    CHECK_THROWS_AS(make_policy("no_such_policy", 0), std::invalid_argument);
}

TEST_CASE("fixed policies") {
    const auto spec = repeated_spec();
    const std::vector<RoundRecord> empty;
    auto ctx = context_at(spec, empty, 1);
    CHECK(make_policy("always_defect", 0)->decide(ctx) == Choice::A);
    CHECK(make_policy("always_cooperate", 0)->decide(ctx) == Choice::B);
    CHECK(make_policy("fixed_a", 0)->decide(ctx) == Choice::A);
    CHECK(make_policy("fixed_b", 0)->decide(ctx) == Choice::B);
}

TEST_CASE("tit-for-tat replays the opponent with one round of lag") {
    const auto spec = repeated_spec();
    auto tft = make_policy("tit_for_tat", 0);

    const std::vector<Choice> opponent = {Choice::A, Choice::B, Choice::A, Choice::A, Choice::B,
                                          Choice::B, Choice::A, Choice::B, Choice::A, Choice::A};
    const auto full = opponent_transcript(spec, opponent);

    // Brute-force replay: at round k the policy must echo opponent[k-2].
    for (int round = 1; round <= 10; ++round) {
        const std::vector<RoundRecord> history(full.begin(), full.begin() + (round - 1));
        const auto ctx = context_at(spec, history, round);
        const Choice expected = round == 1 ? Choice::B : opponent[static_cast<std::size_t>(round) - 2];
        CHECK(tft->decide(ctx) == expected);
    }
}

TEST_CASE("grim trigger defects forever after the first defection") {
    const auto spec = repeated_spec();
    auto grim = make_policy("grim_trigger", 0);
    // Opponent defects at round 4.
    const std::vector<Choice> opponent = {Choice::B, Choice::B, Choice::B, Choice::A, Choice::B,
                                          Choice::B, Choice::B, Choice::B, Choice::B, Choice::B};
    const auto full = opponent_transcript(spec, opponent);
    for (int round = 1; round <= 10; ++round) {
        const std::vector<RoundRecord> history(full.begin(), full.begin() + (round - 1));
        const auto ctx = context_at(spec, history, round);
        CHECK(grim->decide(ctx) == (round <= 4 ? Choice::B : Choice::A));
    }
}

TEST_CASE("seeded uniform random replays identically") {
    const auto spec = repeated_spec();
    const std::vector<RoundRecord> empty;
    auto first = make_policy("uniform_random", 7);
    auto second = make_policy("uniform_random", 7);
    std::vector<Choice> a, b;
    for (int round = 1; round <= 10; ++round) {
        const auto ctx = context_at(spec, empty, round);
        a.push_back(first->decide(ctx));
        b.push_back(second->decide(ctx));
    }
    CHECK(a == b);
    // Pure in (seed, round): asking again for round 5 agrees.
    const auto ctx5 = context_at(spec, empty, 5);
    CHECK(first->decide(ctx5) == a[4]);
    // Different seed, different sequence (with overwhelming probability).
    auto other = make_policy("uniform_random", 8);
    std::vector<Choice> c;
    for (int round = 1; round <= 10; ++round) c.push_back(other->decide(context_at(spec, empty, round)));
    CHECK(a != c);
}

TEST_CASE("scripted policies stay silent in the communication phase") {
    const auto spec = repeated_spec(true);
    const std::vector<RoundRecord> empty;
    auto ctx = context_at(spec, empty, 1);
    CHECK(make_policy("tit_for_tat", 0)->compose_message(ctx).empty());
    CHECK(make_policy("always_defect", 0)->compose_message(ctx).empty());
}

TEST_CASE("compose_message requires communication to be enabled") {
    const auto spec = repeated_spec(false);
    const std::vector<RoundRecord> empty;
    auto ctx = context_at(spec, empty, 1);
    CHECK_THROWS_AS(make_policy("tit_for_tat", 0)->compose_message(ctx), std::logic_error);
}

TEST_CASE("scripted decisions ignore the rendered prompt") {
    const auto spec = repeated_spec();
    const auto history = opponent_transcript(spec, {Choice::A});
    auto tft = make_policy("tit_for_tat", 0);
    auto ctx = context_at(spec, history, 2);
    ctx.rendered_prompt = "prompt in English";
    const Choice first = tft->decide(ctx);
    ctx.rendered_prompt = "dấu nhắc bằng tiếng Việt";
    CHECK(tft->decide(ctx) == first);
}
