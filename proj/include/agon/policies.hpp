// Decision-maker abstraction and the scripted policy catalog. Scripted
// policies are pure functions of (history, round index, seed) and never read
// the rendered prompt, which makes them language-invariant oracles for the
// runner and the analysis. They emit empty communication messages so that
// message-length metrics on scripted fixtures are exactly zero.

#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "agon/game.hpp"
#include "agon/util.hpp"

namespace agon {

enum class Personality { Cooperative, Selfish };

inline const char* personality_key(Personality p) {
    return p == Personality::Cooperative ? "cooperative" : "selfish";
}

// agent_id stays a neutral placeholder ("agent1"/"agent2"); all trait
// content lives in personality_text, which is localized per language.
struct AgentProfile {
    std::string agent_id;
    Personality personality = Personality::Cooperative;
    std::string personality_text;
};

// Everything a policy may look at for one call. Contains no information
// about the opponent's personality, and no current-round choice of either
// player. self_index 0 means this agent is player1 in the round records.
struct DecisionContext {
    const GameSpec* spec = nullptr;
    AgentProfile self;
    std::string opponent_id;
    int self_index = 0;
    const std::vector<RoundRecord>* history = nullptr;
    std::vector<Message> current_round_messages;
    int round_index = 1;
    std::string rendered_prompt;

    Choice opponent_choice(const RoundRecord& r) const {
        return self_index == 0 ? r.choice2 : r.choice1;
    }
};

class AgentPolicy {
public:
    virtual ~AgentPolicy() = default;
    virtual const char* name() const = 0;

    // One message per round when communication is enabled. Scripted policies
    // stay silent; model-backed ones return the gateway text verbatim.
    virtual std::string compose_message(const DecisionContext& ctx) {
        require_communication(ctx);
        return "";
    }

    virtual Choice decide(const DecisionContext& ctx) = 0;

    // Gateway calls behind the most recent compose/decide (0 for scripted).
    virtual int last_attempt_count() const { return 0; }

protected:
    static void require_communication(const DecisionContext& ctx) {
        if (!ctx.spec || !ctx.spec->communication_enabled)
            throw std::logic_error("compose_message: communication is not enabled");
    }
};

namespace policies {

class Fixed final : public AgentPolicy {
public:
    Fixed(Choice c, const char* name) : choice_(c), name_(name) {}
    const char* name() const override { return name_; }
    Choice decide(const DecisionContext&) override { return choice_; }

private:
    Choice choice_;
    const char* name_;
};

class TitForTat final : public AgentPolicy {
public:
    const char* name() const override { return "tit_for_tat"; }
    Choice decide(const DecisionContext& ctx) override {
        if (ctx.round_index <= 1 || !ctx.history || ctx.history->empty()) return Choice::B;
        return ctx.opponent_choice(ctx.history->at(static_cast<std::size_t>(ctx.round_index) - 2));
    }
};

class GrimTrigger final : public AgentPolicy {
public:
    const char* name() const override { return "grim_trigger"; }
    Choice decide(const DecisionContext& ctx) override {
        if (ctx.history)
            for (const auto& r : *ctx.history)
                if (ctx.opponent_choice(r) == Choice::A) return Choice::A;
        return Choice::B;
    }
};

// Stateless per round: the draw is a pure function of (seed, round_index),
// so replays and out-of-order queries agree.
class UniformRandom final : public AgentPolicy {
public:
    explicit UniformRandom(std::uint64_t seed) : seed_(seed) {}
    const char* name() const override { return "uniform_random"; }
    Choice decide(const DecisionContext& ctx) override {
        std::uint64_t draw = splitmix64(seed_ ^ (static_cast<std::uint64_t>(ctx.round_index) *
                                                 0x9e3779b97f4a7c15ull));
        return (draw & 1) ? Choice::A : Choice::B;
    }

private:
    std::uint64_t seed_;
};

} // namespace policies

inline const std::vector<std::string>& builtin_policy_names() {
    static const std::vector<std::string> names = {
        "always_cooperate", "always_defect", "tit_for_tat", "grim_trigger",
        "uniform_random",   "fixed_a",       "fixed_b",
    };
    return names;
}

inline std::unique_ptr<AgentPolicy> make_policy(const std::string& name, std::uint64_t seed) {
    if (name == "always_cooperate") return std::make_unique<policies::Fixed>(Choice::B, "always_cooperate");
    if (name == "always_defect") return std::make_unique<policies::Fixed>(Choice::A, "always_defect");
    if (name == "fixed_a") return std::make_unique<policies::Fixed>(Choice::A, "fixed_a");
    if (name == "fixed_b") return std::make_unique<policies::Fixed>(Choice::B, "fixed_b");
    if (name == "tit_for_tat") return std::make_unique<policies::TitForTat>();
    if (name == "grim_trigger") return std::make_unique<policies::GrimTrigger>();
    if (name == "uniform_random") return std::make_unique<policies::UniformRandom>(seed);
    throw std::invalid_argument("unknown policy: " + name);
}

} // namespace agon
