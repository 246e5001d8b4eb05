// Executes experiment cells: renders prompts, drives the per-round protocol
// (communication phase, then informationally simultaneous decisions), applies
// payoffs through the game core, and appends one JSONL record per game.
//
// Round protocol: agent1 composes a message from the full context, agent2
// composes seeing agent1's current message, then BOTH decision prompts are
// rendered before either decision call is issued — neither prompt can contain
// the opponent's current-round choice. The issue order of the two decision
// calls is a knob (decide_agent2_first) purely so tests can prove it changes
// nothing.
//
// A policy or gateway error marks the game failed at that round; the record
// is persisted either way and the run continues with the remaining cells.

#pragma once

#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "agon/cells.hpp"
#include "agon/config.hpp"
#include "agon/game.hpp"
#include "agon/logrecord.hpp"
#include "agon/model_policy.hpp"
#include "agon/policies.hpp"
#include "agon/prompt.hpp"
#include "agon/text.hpp"

namespace agon {

struct RunSummary {
    long long total_cells = 0;
    long long completed = 0;
    long long failed = 0;
    long long skipped = 0; // already completed in the resume log
};

struct RunOptions {
    int workers = 0;          // 0: take the config value
    bool resume = false;
    bool decide_agent2_first = false;
    std::function<void(const GameLogRecord&, long long done, long long total)> progress;
};

inline std::string iso8601_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class GameRunner {
public:
    // Captures each rendered prompt before the policy sees it (tests only).
    using PromptHook = std::function<void(const ExperimentCell&, int round, Phase,
                                          const std::string& agent_id, const std::string& prompt)>;

    GameRunner(const ExperimentConfig& config, Gateway& gateway)
        : config_(&config), gateway_(&gateway) {
        std::vector<std::string> violations;
        const bool need_comm =
            std::find(config.communication_variants.begin(), config.communication_variants.end(),
                      true) != config.communication_variants.end();
        templates_ = TemplateSet::load(config.resolved_template_dir(), config.family_keys(),
                                       config.languages, need_comm, config.rounds_known_variants,
                                       &violations);
        auto placeholder_violations =
            validate_template_set(templates_, config.family_keys(), config.languages, need_comm,
                                  config.rounds_known_variants);
        violations.insert(violations.end(), placeholder_violations.begin(),
                          placeholder_violations.end());
        if (!violations.empty())
            throw ConfigError("template set invalid: " + violations.front() + " (+" +
                              std::to_string(violations.size() - 1) + " more)");
    }

    PromptHook prompt_hook;

    GameLogRecord play_game(const ExperimentCell& cell, bool decide_agent2_first = false) {
        const GameDef& game = config_->games[cell.game_index];
        const ModelConfig& model = config_->models[cell.model_index];
        const LanguagePack& pack = config_->localization.at(cell.language);

        GameSpec spec;
        spec.game_id = cell.game_id;
        spec.family = game.family;
        spec.matrix = game.matrix;
        spec.n_rounds = cell.n_rounds;
        spec.rounds_known = cell.rounds_known;
        spec.communication_enabled = cell.communication;

        AgentProfile profile1{"agent1", pairing_trait(cell.pairing, 0), ""};
        AgentProfile profile2{"agent2", pairing_trait(cell.pairing, 1), ""};
        profile1.personality_text = pack.personality_text.at(personality_key(profile1.personality));
        profile2.personality_text = pack.personality_text.at(personality_key(profile2.personality));

        auto policy1 = instantiate_policy(config_->policy_agent1, model, pack, cell, "agent1");
        auto policy2 = instantiate_policy(config_->policy_agent2, model, pack, cell, "agent2");

        GameLogRecord rec = start_record(cell, game, pack, *policy1, *policy2, profile1, profile2);
        GameState state;
        state.spec = spec;

        int current_round = 1;
        try {
            for (int round = 1; round <= spec.n_rounds; ++round) {
                current_round = round;
                LoggedRound logged;
                logged.round_index = round;

                std::vector<Message> round_messages;
                if (spec.communication_enabled) {
                    // Fixed order: agent1 speaks, then agent2 sees that message.
                    for (int idx = 0; idx < 2; ++idx) {
                        AgentPolicy& policy = idx == 0 ? *policy1 : *policy2;
                        const AgentProfile& self = idx == 0 ? profile1 : profile2;
                        const AgentProfile& other = idx == 0 ? profile2 : profile1;
                        DecisionContext ctx =
                            make_context(spec, game, pack, cell.language, self, other, idx, state,
                                         round_messages, round, Phase::Communication);
                        if (prompt_hook)
                            prompt_hook(cell, round, Phase::Communication, self.agent_id,
                                        ctx.rendered_prompt);
                        std::string text = policy.compose_message(ctx);
                        round_messages.push_back({self.agent_id, text});
                        logged.messages.push_back(
                            {self.agent_id, std::move(text),
                             static_cast<long long>(text::count_scalars(round_messages.back().text)),
                             policy.last_attempt_count()});
                    }
                }

                // Both decision prompts exist before either decision call.
                DecisionContext ctx1 = make_context(spec, game, pack, cell.language, profile1,
                                                    profile2, 0, state, round_messages, round,
                                                    Phase::Decision);
                DecisionContext ctx2 = make_context(spec, game, pack, cell.language, profile2,
                                                    profile1, 1, state, round_messages, round,
                                                    Phase::Decision);
                if (prompt_hook) {
                    prompt_hook(cell, round, Phase::Decision, "agent1", ctx1.rendered_prompt);
                    prompt_hook(cell, round, Phase::Decision, "agent2", ctx2.rendered_prompt);
                }

                Choice c1, c2;
                if (decide_agent2_first) {
                    c2 = policy2->decide(ctx2);
                    logged.attempts2 = policy2->last_attempt_count();
                    c1 = policy1->decide(ctx1);
                    logged.attempts1 = policy1->last_attempt_count();
                } else {
                    c1 = policy1->decide(ctx1);
                    logged.attempts1 = policy1->last_attempt_count();
                    c2 = policy2->decide(ctx2);
                    logged.attempts2 = policy2->last_attempt_count();
                }

                RoundRecord round_record;
                round_record.round_index = round;
                round_record.messages = round_messages;
                round_record.choice1 = c1;
                round_record.choice2 = c2;
                round_record.payoffs = payoff(spec.matrix, c1, c2);
                state = apply_round(std::move(state), std::move(round_record));

                logged.choice1 = choice_letter(c1);
                logged.choice2 = choice_letter(c2);
                logged.payoffs = state.history.back().payoffs;
                rec.rounds.push_back(std::move(logged));
            }
            rec.status = "completed";
        } catch (const GatewayError& e) {
            rec.status = "failed";
            rec.failed_round = current_round;
            rec.failure_reason = std::string(gateway_error_kind(e.kind)) + ": " + e.what() +
                                 " (attempts " + std::to_string(e.attempt_count) + ")";
        } catch (const std::exception& e) {
            rec.status = "failed";
            rec.failed_round = current_round;
            rec.failure_reason = e.what();
        }

        rec.cumulative = state.cumulative;
        rec.ended_at = iso8601_utc_now();
        return rec;
    }

    // Executes every cell not already completed in the resume log. Appends
    // are serialized; cells run in a bounded worker pool.
    RunSummary run(const std::filesystem::path& log_path, const RunOptions& options = {}) {
        const auto cells = enumerate_cells(*config_);
        RunSummary summary;
        summary.total_cells = static_cast<long long>(cells.size());

        std::set<std::string> already_done;
        if (options.resume) {
            LogScan scan = scan_log(log_path);
            if (scan.trailing_partial) {
                // Drop the truncated trailing line so appends start clean.
                std::filesystem::resize_file(log_path,
                                             static_cast<std::uintmax_t>(scan.valid_bytes));
            }
            already_done = std::move(scan.completed_cells);
        } else if (std::filesystem::exists(log_path) &&
                   std::filesystem::file_size(log_path) > 0) {
            throw std::runtime_error("log file already exists (pass resume to continue): " +
                                     log_path.string());
        }

        std::vector<const ExperimentCell*> pending;
        for (const auto& cell : cells) {
            if (already_done.count(cell.cell_id)) {
                summary.skipped += 1;
            } else {
                pending.push_back(&cell);
            }
        }

        JsonlWriter writer(log_path);
        std::atomic<std::size_t> next{0};
        std::atomic<long long> completed{0}, failed{0}, done{0};
        std::mutex progress_mutex;

        int workers = options.workers > 0 ? options.workers : config_->workers;
        workers = std::max(1, std::min<int>(workers, static_cast<int>(pending.size() ? pending.size() : 1)));

        auto worker = [&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= pending.size()) return;
                GameLogRecord rec = play_game(*pending[i], options.decide_agent2_first);
                writer.append(rec);
                (rec.completed() ? completed : failed).fetch_add(1);
                const long long so_far = done.fetch_add(1) + 1;
                if (options.progress) {
                    std::lock_guard<std::mutex> lock(progress_mutex);
                    options.progress(rec, so_far, static_cast<long long>(pending.size()));
                }
            }
        };

        if (workers == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }

        summary.completed = completed.load();
        summary.failed = failed.load();
        return summary;
    }

private:
    static Personality pairing_trait(const std::string& pairing, int index) {
        // c_s is unordered; canonically agent1 takes the first letter.
        const char c = pairing.at(index == 0 ? 0 : 2);
        return c == 'c' ? Personality::Cooperative : Personality::Selfish;
    }

    std::unique_ptr<AgentPolicy> instantiate_policy(const std::string& name,
                                                    const ModelConfig& model,
                                                    const LanguagePack& pack,
                                                    const ExperimentCell& cell,
                                                    const std::string& agent_id) {
        const std::uint64_t agent_seed = mix_seeds({cell.seed, fnv1a64(agent_id)});
        if (name == "model")
            return std::make_unique<ModelPolicy>(*gateway_, model, pack.option_a, pack.option_b,
                                                 agent_seed);
        return make_policy(name, agent_seed);
    }

    GameLogRecord start_record(const ExperimentCell& cell, const GameDef& game,
                               const LanguagePack& pack, const AgentPolicy& policy1,
                               const AgentPolicy& policy2, const AgentProfile& profile1,
                               const AgentProfile& profile2) const {
        GameLogRecord rec;
        rec.cell_id = cell.cell_id;
        rec.run_seed = config_->run_seed;
        rec.started_at = iso8601_utc_now();
        rec.game_variant = cell.game_id;
        rec.game = cell.family_key;
        rec.family = game.family == GameFamily::Coordination ? "coordination" : "pd";
        rec.language = cell.language;
        rec.model = cell.model_name;
        rec.personality_pairing = cell.pairing;
        rec.communication = cell.communication;
        rec.rounds_known = cell.rounds_known;
        rec.game_length = cell.game_length;
        rec.n_rounds = cell.n_rounds;
        rec.repetition = cell.repetition;
        rec.orientation = game.matrix.orientation == Orientation::Penalty ? "penalty" : "reward";
        rec.option_label_a = pack.option_a;
        rec.option_label_b = pack.option_b;
        rec.agent1 = {profile1.agent_id, personality_key(profile1.personality), policy1.name()};
        rec.agent2 = {profile2.agent_id, personality_key(profile2.personality), policy2.name()};
        rec.status = "failed"; // overwritten on success
        return rec;
    }

    DecisionContext make_context(const GameSpec& spec, const GameDef& game,
                                 const LanguagePack& pack, const std::string& language,
                                 const AgentProfile& self, const AgentProfile& opponent,
                                 int self_index, const GameState& state,
                                 const std::vector<Message>& current_messages, int round,
                                 Phase phase) const {
        DecisionContext ctx;
        ctx.spec = &spec;
        ctx.self = self;
        ctx.opponent_id = opponent.agent_id;
        ctx.self_index = self_index;
        ctx.history = &state.history;
        ctx.current_round_messages = current_messages;
        ctx.round_index = round;

        const PromptTemplate* tmpl =
            templates_.find(game.family_key, language, phase, spec.rounds_known);
        if (!tmpl)
            throw ConfigError("no template for (" + game.family_key + ", " + language + ", " +
                              phase_key(phase) + ")");
        Binding binding{
            {"agent_id", self.agent_id},
            {"opponent_id", opponent.agent_id},
            {"personality", self.personality_text},
            {"game", game.description.at(language)},
            {"option_a", pack.option_a},
            {"option_b", pack.option_b},
            {"payoffs",
             render_payoff_description(spec.matrix, pack, opponent.agent_id, self_index == 0)},
            {"round", std::to_string(round)},
            {"history", render_history(state.history, pack, spec.matrix.orientation, "agent1",
                                       "agent2")},
            {"messages", render_messages(all_messages(state, current_messages), pack)},
        };
        if (spec.rounds_known) binding["total_rounds"] = std::to_string(spec.n_rounds);
        ctx.rendered_prompt = render(tmpl->body, binding);
        return ctx;
    }

    // Prior exchanges from every past round plus the current round so far,
    // in send order.
    static std::vector<Message> all_messages(const GameState& state,
                                             const std::vector<Message>& current) {
        std::vector<Message> all;
        for (const auto& r : state.history)
            all.insert(all.end(), r.messages.begin(), r.messages.end());
        all.insert(all.end(), current.begin(), current.end());
        return all;
    }

    const ExperimentConfig* config_;
    Gateway* gateway_;
    TemplateSet templates_;
};

} // namespace agon
