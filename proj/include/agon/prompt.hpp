// Prompt rendering: localized template files with {name} placeholders,
// history and message blocks, and a per-language string pack. Substitution
// is single-pass — substituted values are never rescanned, so agent-produced
// text cannot inject placeholders — and byte-deterministic.

#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "agon/game.hpp"

namespace agon {

enum class Phase { Communication, Decision };

inline const char* phase_key(Phase p) {
    return p == Phase::Communication ? "communication" : "decision";
}

struct PromptTemplate {
    std::string game_key;  // template family, e.g. "pd" or "bos"
    std::string language;
    Phase phase = Phase::Decision;
    bool rounds_known = true;
    std::string body;
};

struct RenderError : std::runtime_error {
    enum class Kind { MissingPlaceholder, UnknownPlaceholder };
    Kind kind;
    std::string placeholder;
    RenderError(Kind k, std::string name)
        : std::runtime_error(std::string(k == Kind::MissingPlaceholder ? "missing placeholder: "
                                                                       : "unknown placeholder: ") +
                             name),
          kind(k),
          placeholder(std::move(name)) {}
};

using Binding = std::map<std::string, std::string>;

namespace detail {

inline bool placeholder_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

// Returns the placeholder name starting after '{' at pos, or nullopt if the
// brace does not open a well-formed {name}.
inline std::optional<std::string_view> parse_placeholder(std::string_view body, std::size_t pos) {
    std::size_t i = pos + 1;
    while (i < body.size() && placeholder_char(body[i])) ++i;
    if (i == pos + 1 || i >= body.size() || body[i] != '}') return std::nullopt;
    return body.substr(pos + 1, i - pos - 1);
}

} // namespace detail

inline std::set<std::string> extract_placeholders(std::string_view body) {
    std::set<std::string> names;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] != '{') continue;
        if (auto name = detail::parse_placeholder(body, i)) {
            names.emplace(*name);
            i += name->size() + 1;
        }
    }
    return names;
}

// Single-pass substitution. Every placeholder in the body must be bound;
// under strict mode, bindings not used by the body are also an error.
inline std::string render(std::string_view body, const Binding& binding, bool strict = false) {
    std::string out;
    out.reserve(body.size());
    std::set<std::string> used;
    for (std::size_t i = 0; i < body.size();) {
        if (body[i] == '{') {
            if (auto name = detail::parse_placeholder(body, i)) {
                auto it = binding.find(std::string(*name));
                if (it == binding.end())
                    throw RenderError(RenderError::Kind::MissingPlaceholder, std::string(*name));
                out += it->second;
                used.insert(it->first);
                i += name->size() + 2;
                continue;
            }
        }
        out.push_back(body[i]);
        ++i;
    }
    if (strict) {
        for (const auto& [key, value] : binding)
            if (!used.count(key)) throw RenderError(RenderError::Kind::UnknownPlaceholder, key);
    }
    return out;
}

// Per-language strings used to build bindings. Shipped packs live in the
// experiment config and are plain editable text.
struct LanguagePack {
    std::string option_a;
    std::string option_b;
    std::string no_history;    // marker rendered when there are no past rounds
    std::string history_line;  // {round},{agent1},{choice1},{agent2},{choice2},{payoff1},{payoff2},{value_word}
    std::string message_line;  // {agent},{text}
    std::string payoff_line;   // {self_option},{other_option},{opponent_id},{self_value},{other_value},{value_word}
    std::string penalty_word;
    std::string reward_word;
    std::map<std::string, std::string> personality_text; // "cooperative"/"selfish" -> text

    const std::string& label(Choice c) const { return c == Choice::A ? option_a : option_b; }
    const std::string& value_word(Orientation o) const {
        return o == Orientation::Penalty ? penalty_word : reward_word;
    }
};

// One line per past round: index, both choices as localized labels, both
// payoffs. Empty history renders the pack's marker.
inline std::string render_history(const std::vector<RoundRecord>& records, const LanguagePack& pack,
                                  Orientation orientation, const std::string& agent1_id,
                                  const std::string& agent2_id) {
    if (records.empty()) return pack.no_history;
    std::string out;
    for (const auto& r : records) {
        Binding b{{"round", std::to_string(r.round_index)},
                  {"agent1", agent1_id},
                  {"agent2", agent2_id},
                  {"choice1", pack.label(r.choice1)},
                  {"choice2", pack.label(r.choice2)},
                  {"payoff1", std::to_string(r.payoffs.p1)},
                  {"payoff2", std::to_string(r.payoffs.p2)},
                  {"value_word", pack.value_word(orientation)}};
        if (!out.empty()) out.push_back('\n');
        out += render(pack.history_line, b);
    }
    return out;
}

// Messages in send order with speaker attribution; bodies pass through
// verbatim (substitution happens on the pack line, not the message text).
inline std::string render_messages(const std::vector<Message>& messages, const LanguagePack& pack) {
    std::string out;
    for (const auto& m : messages) {
        std::string line = pack.message_line;
        // Manual splice instead of render(): the message text must never be
        // treated as a template even if the pack line were malformed.
        auto agent_pos = line.find("{agent}");
        if (agent_pos != std::string::npos) line.replace(agent_pos, 7, m.agent_id);
        auto text_pos = line.find("{text}");
        if (text_pos != std::string::npos) line.replace(text_pos, 6, m.text);
        if (!out.empty()) out.push_back('\n');
        out += line;
    }
    return out;
}

// Enumerates the four outcome sentences for the matrix from self's view.
inline std::string render_payoff_description(const PayoffMatrix& m, const LanguagePack& pack,
                                             const std::string& opponent_id, bool self_is_player1) {
    std::string out;
    for (Choice self : {Choice::A, Choice::B}) {
        for (Choice other : {Choice::A, Choice::B}) {
            const PayoffPair& p = self_is_player1 ? m.at(self, other) : m.at(other, self);
            const PayoffValue self_value = self_is_player1 ? p.p1 : p.p2;
            const PayoffValue other_value = self_is_player1 ? p.p2 : p.p1;
            Binding b{{"self_option", pack.label(self)},
                      {"other_option", pack.label(other)},
                      {"opponent_id", opponent_id},
                      {"self_value", std::to_string(self_value)},
                      {"other_value", std::to_string(other_value)},
                      {"value_word", pack.value_word(m.orientation)}};
            if (!out.empty()) out.push_back('\n');
            out += render(pack.payoff_line, b);
        }
    }
    return out;
}

inline std::string template_filename(const std::string& game_key, const std::string& language,
                                     Phase phase, bool rounds_known) {
    return game_key + "_" + language + "_" + phase_key(phase) + "_" +
           (rounds_known ? "known" : "unknown") + ".txt";
}

class TemplateSet {
public:
    void add(PromptTemplate t) {
        auto key = std::make_tuple(t.game_key, t.language, t.phase, t.rounds_known);
        templates_[key] = std::move(t);
    }

    const PromptTemplate* find(const std::string& game_key, const std::string& language, Phase phase,
                               bool rounds_known) const {
        auto it = templates_.find(std::make_tuple(game_key, language, phase, rounds_known));
        return it == templates_.end() ? nullptr : &it->second;
    }

    // Loads every (game_key, language, phase, variant) combination that the
    // requirements imply. Missing files are reported in violations, not thrown.
    static TemplateSet load(const std::filesystem::path& dir, const std::vector<std::string>& game_keys,
                            const std::vector<std::string>& languages, bool need_communication,
                            const std::vector<bool>& known_variants, std::vector<std::string>* violations) {
        TemplateSet set;
        std::vector<Phase> phases{Phase::Decision};
        if (need_communication) phases.push_back(Phase::Communication);
        for (const auto& game : game_keys) {
            for (const auto& lang : languages) {
                for (Phase phase : phases) {
                    for (bool known : known_variants) {
                        const auto path = dir / template_filename(game, lang, phase, known);
                        std::ifstream in(path, std::ios::binary);
                        if (!in) {
                            if (violations)
                                violations->push_back("missing template (" + lang + ", " +
                                                      phase_key(phase) + ", " +
                                                      (known ? "known" : "unknown") + "): " +
                                                      path.string());
                            continue;
                        }
                        std::ostringstream body;
                        body << in.rdbuf();
                        set.add(PromptTemplate{game, lang, phase, known, body.str()});
                    }
                }
            }
        }
        return set;
    }

private:
    std::map<std::tuple<std::string, std::string, Phase, bool>, PromptTemplate> templates_;
};

// Placeholder completeness per template: the shared required set, the
// decision-phase history/messages blocks, and the rounds-known variant rule
// ({total_rounds} present in known variants, absent in unknown ones).
inline std::vector<std::string> validate_template_set(const TemplateSet& set,
                                                      const std::vector<std::string>& game_keys,
                                                      const std::vector<std::string>& languages,
                                                      bool need_communication,
                                                      const std::vector<bool>& known_variants) {
    static const std::vector<std::string> required_common = {
        "game", "option_a", "option_b", "payoffs", "personality", "opponent_id", "round"};
    std::vector<std::string> violations;
    std::vector<Phase> phases{Phase::Decision};
    if (need_communication) phases.push_back(Phase::Communication);
    for (const auto& game : game_keys) {
        for (const auto& lang : languages) {
            for (Phase phase : phases) {
                for (bool known : known_variants) {
                    const PromptTemplate* t = set.find(game, lang, phase, known);
                    const std::string where = template_filename(game, lang, phase, known);
                    if (!t) {
                        violations.push_back("missing template (" + lang + ", " + phase_key(phase) +
                                             ", " + (known ? "known" : "unknown") + "): " + where);
                        continue;
                    }
                    const auto present = extract_placeholders(t->body);
                    for (const auto& name : required_common)
                        if (!present.count(name))
                            violations.push_back(where + ": missing placeholder {" + name + "}");
                    if (phase == Phase::Decision) {
                        for (const char* name : {"history", "messages"})
                            if (!present.count(name))
                                violations.push_back(where + ": missing placeholder {" +
                                                     std::string(name) + "}");
                    }
                    if (known && !present.count("total_rounds"))
                        violations.push_back(where + ": missing placeholder {total_rounds}");
                    if (!known && present.count("total_rounds"))
                        violations.push_back(where +
                                             ": {total_rounds} not allowed in rounds-unknown variant");
                }
            }
        }
    }
    return violations;
}

} // namespace agon
