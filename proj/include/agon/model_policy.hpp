// Model-backed policy: sends the rendered prompt through the gateway and
// extracts the chosen option. On an unparseable response it re-queries the
// same prompt up to three times, then gives up — the runner marks the game
// failed rather than substituting a default choice.

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "agon/gateway.hpp"
#include "agon/policies.hpp"

namespace agon {

class ModelPolicy final : public AgentPolicy {
public:
    static constexpr int kParseRequeries = 3;

    ModelPolicy(Gateway& gateway, ModelConfig cfg, std::string label_a, std::string label_b,
                std::uint64_t seed)
        : gateway_(&gateway),
          cfg_(std::move(cfg)),
          label_a_(std::move(label_a)),
          label_b_(std::move(label_b)),
          seed_(seed) {}

    const char* name() const override { return "model"; }

    std::string compose_message(const DecisionContext& ctx) override {
        require_communication(ctx);
        ChatExchange ex = gateway_->complete(cfg_, ctx.rendered_prompt, seed_);
        last_attempts_ = ex.attempt_count;
        return ex.response_text;
    }

    Choice decide(const DecisionContext& ctx) override {
        if (ctx.rendered_prompt.empty())
            throw std::logic_error("decide: model policy requires a rendered prompt");
        last_attempts_ = 0;
        for (int requery = 0; requery <= kParseRequeries; ++requery) {
            ChatExchange ex = gateway_->complete(cfg_, ctx.rendered_prompt, seed_);
            last_attempts_ += ex.attempt_count;
            try {
                return parse_choice(ex.response_text, label_a_, label_b_);
            } catch (const GatewayError& err) {
                if (err.kind != GatewayError::Kind::NoChoiceFound) throw;
            }
        }
        GatewayError err(GatewayError::Kind::NoChoiceFound,
                         "no parseable choice after " + std::to_string(kParseRequeries + 1) +
                             " queries");
        err.attempt_count = last_attempts_;
        throw err;
    }

    int last_attempt_count() const override { return last_attempts_; }

private:
    Gateway* gateway_;
    ModelConfig cfg_;
    std::string label_a_;
    std::string label_b_;
    std::uint64_t seed_;
    int last_attempts_ = 0;
};

} // namespace agon
