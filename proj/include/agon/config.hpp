// Experiment configuration: a JSON document naming the games, languages,
// models, personality pairings, and toggled conditions of a factorial
// design, plus the per-language string packs and the policy assignment.
// Payoff cells must be integers; the engine keeps totals exact.

#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agon/game.hpp"
#include "agon/gateway.hpp"
#include "agon/policies.hpp"
#include "agon/prompt.hpp"

namespace agon {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GameDef {
    std::string id;        // e.g. "pd_conventional"
    std::string family_key; // template base name and analysis grouping, e.g. "pd"
    GameFamily family = GameFamily::PrisonersDilemma;
    PayoffMatrix matrix;
    std::map<std::string, std::string> description; // language -> text
};

struct ExperimentConfig {
    std::uint64_t run_seed = 0;
    int workers = 4;
    int repetitions = 1;
    int repeated_rounds = 10;
    std::string template_dir = "templates";
    std::vector<GameDef> games;
    std::vector<std::string> languages;
    std::vector<ModelConfig> models;
    std::vector<std::string> personality_pairings;   // c_c, c_s, s_s
    std::vector<bool> communication_variants;        // canonical order: false, true
    std::vector<bool> rounds_known_variants;
    std::vector<std::string> game_lengths;           // one_shot or repeated
    std::string policy_agent1 = "model";
    std::string policy_agent2 = "model";
    std::map<std::string, LanguagePack> localization;
    std::filesystem::path base_dir;                  // directory of the config file

    std::filesystem::path resolved_template_dir() const {
        std::filesystem::path p(template_dir);
        return p.is_absolute() ? p : base_dir / p;
    }

    std::vector<std::string> family_keys() const {
        std::vector<std::string> keys;
        for (const auto& g : games)
            if (std::find(keys.begin(), keys.end(), g.family_key) == keys.end())
                keys.push_back(g.family_key);
        return keys;
    }
};

namespace detail {

inline PayoffValue integer_cell(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw ConfigError(where + ": payoff values must be integers");
    return v.get<PayoffValue>();
}

inline PayoffMatrix parse_matrix(const nlohmann::json& j, Orientation orientation,
                                 const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_array() || j[0].size() != 2 ||
        !j[1].is_array() || j[1].size() != 2)
        throw ConfigError(where + ": matrix must be a 2x2 array of [p1,p2] pairs");
    PayoffMatrix m;
    m.orientation = orientation;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const auto& cell = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            if (!cell.is_array() || cell.size() != 2)
                throw ConfigError(where + ": each matrix cell must be a [p1,p2] pair");
            m.cells[r][c] = {integer_cell(cell[0], where), integer_cell(cell[1], where)};
        }
    }
    return m;
}

inline Provider parse_provider(const std::string& s, const std::string& where) {
    if (s == "openai") return Provider::OpenAIStyle;
    if (s == "replicate") return Provider::ReplicateStyle;
    if (s == "mock") return Provider::Mock;
    throw ConfigError(where + ": unknown provider '" + s + "'");
}

inline ModelConfig parse_model(const nlohmann::json& j) {
    ModelConfig m;
    m.model_name = j.at("name").get<std::string>();
    const std::string where = "model " + m.model_name;
    m.provider = parse_provider(j.value("provider", "mock"), where);
    m.temperature = j.value("temperature", 1.0);
    m.top_p = j.value("top_p", 1.0);
    m.endpoint_url = j.value("endpoint", "");
    m.timeout = std::chrono::milliseconds(
        static_cast<long long>(j.value("timeout_s", 60.0) * 1000.0));
    m.max_retries = j.value("max_retries", 3);
    m.requests_per_second_cap = j.value("requests_per_second", 0.0);
    m.backoff_initial = std::chrono::milliseconds(j.value("backoff_initial_ms", 250));
    m.poll_interval = std::chrono::milliseconds(j.value("poll_interval_ms", 1000));
    if (j.contains("mock")) {
        const auto& mk = j.at("mock");
        m.mock.length_mean = mk.value("length_mean", m.mock.length_mean);
        m.mock.length_sd = mk.value("length_sd", m.mock.length_sd);
        m.mock.length_min = mk.value("length_min", m.mock.length_min);
        m.mock.length_max = mk.value("length_max", m.mock.length_max);
        m.mock.latency_ms = mk.value("latency_ms", 0);
        m.mock.fail_when_prompt_contains = mk.value("fail_when_prompt_contains", "");
    }
    return m;
}

inline LanguagePack parse_language_pack(const nlohmann::json& j, const std::string& lang) {
    const std::string where = "localization." + lang;
    LanguagePack pack;
    pack.option_a = j.value("option_a", "");
    pack.option_b = j.value("option_b", "");
    pack.no_history = j.value("no_history", "");
    pack.history_line = j.value("history_line", "");
    pack.message_line = j.value("message_line", "{agent}: {text}");
    pack.payoff_line = j.value("payoff_line", "");
    pack.penalty_word = j.value("penalty_word", "");
    pack.reward_word = j.value("reward_word", "");
    if (j.contains("personalities"))
        for (const auto& [key, value] : j.at("personalities").items())
            pack.personality_text[key] = value.get<std::string>();
    return pack;
}

} // namespace detail

// Parses the file. Structural problems (unreadable JSON, wrong types,
// missing required keys) throw ConfigError; semantic checks live in
// validate_config so they can all be reported at once.
inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }

    ExperimentConfig cfg;
    cfg.base_dir = std::filesystem::absolute(path).parent_path();
    try {
        cfg.run_seed = j.value("run_seed", 0ull);
        cfg.workers = j.value("workers", 4);
        cfg.repetitions = j.value("repetitions", 1);
        cfg.repeated_rounds = j.value("repeated_rounds", 10);
        cfg.template_dir = j.value("template_dir", "templates");

        for (const auto& g : j.at("games")) {
            GameDef def;
            def.id = g.at("id").get<std::string>();
            def.family_key = g.value("family", def.id);
            const std::string family = g.value("type", "pd");
            if (family == "pd") {
                def.family = GameFamily::PrisonersDilemma;
            } else if (family == "coordination") {
                def.family = GameFamily::Coordination;
            } else {
                throw ConfigError("game " + def.id + ": unknown type '" + family + "'");
            }
            const std::string orientation = g.value("orientation", "penalty");
            if (orientation != "penalty" && orientation != "reward")
                throw ConfigError("game " + def.id + ": orientation must be penalty or reward");
            def.matrix = detail::parse_matrix(
                g.at("matrix"),
                orientation == "penalty" ? Orientation::Penalty : Orientation::Reward,
                "game " + def.id);
            if (g.contains("description"))
                for (const auto& [lang, text] : g.at("description").items())
                    def.description[lang] = text.get<std::string>();
            cfg.games.push_back(std::move(def));
        }

        cfg.languages = j.at("languages").get<std::vector<std::string>>();
        for (const auto& m : j.at("models")) cfg.models.push_back(detail::parse_model(m));
        cfg.personality_pairings =
            j.value("personality_pairings", std::vector<std::string>{"c_c"});
        cfg.communication_variants = j.value("communication", std::vector<bool>{false});
        cfg.rounds_known_variants = j.value("rounds_known", std::vector<bool>{true});
        cfg.game_lengths = j.value("game_lengths", std::vector<std::string>{"repeated"});

        if (j.contains("policies")) {
            cfg.policy_agent1 = j.at("policies").value("agent1", "model");
            cfg.policy_agent2 = j.at("policies").value("agent2", "model");
        }
        if (j.contains("localization"))
            for (const auto& [lang, pack] : j.at("localization").items())
                cfg.localization[lang] = detail::parse_language_pack(pack, lang);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config structure error: " + std::string(e.what()));
    }
    return cfg;
}

// Semantic violations, all collected. Template completeness is checked
// separately (validate_template_set) because it touches the filesystem.
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> violations;
    auto require = [&](bool ok, const std::string& message) {
        if (!ok) violations.push_back(message);
    };

    require(!cfg.games.empty(), "games: empty factor");
    require(!cfg.languages.empty(), "languages: empty factor");
    require(!cfg.models.empty(), "models: empty factor");
    require(!cfg.personality_pairings.empty(), "personality_pairings: empty factor");
    require(!cfg.communication_variants.empty(), "communication: empty factor");
    require(!cfg.rounds_known_variants.empty(), "rounds_known: empty factor");
    require(!cfg.game_lengths.empty(), "game_lengths: empty factor");
    require(cfg.repetitions >= 1, "repetitions must be >= 1");
    require(cfg.repeated_rounds >= 1, "repeated_rounds must be >= 1");
    require(cfg.workers >= 1, "workers must be >= 1");

    std::set<std::string> game_ids;
    for (const auto& g : cfg.games) {
        if (!game_ids.insert(g.id).second) violations.push_back("duplicate game id: " + g.id);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                if (g.matrix.cells[r][c].p1 < 0 || g.matrix.cells[r][c].p2 < 0)
                    violations.push_back("game " + g.id + ": payoff values must be non-negative");
            }
        if (g.family == GameFamily::PrisonersDilemma)
            for (const auto& v : validate_pd_structure(g.matrix))
                violations.push_back("game " + g.id + ": " + v);
        for (const auto& lang : cfg.languages)
            require(g.description.count(lang) > 0,
                    "game " + g.id + ": missing description for language " + lang);
    }

    for (const auto& m : cfg.models) {
        require(m.temperature >= 0.0, "model " + m.model_name + ": temperature must be >= 0");
        require(m.top_p > 0.0 && m.top_p <= 1.0,
                "model " + m.model_name + ": top_p must be in (0, 1]");
        require(m.max_retries >= 0, "model " + m.model_name + ": max_retries must be >= 0");
        if (m.provider != Provider::Mock)
            require(!m.endpoint_url.empty(),
                    "model " + m.model_name + ": remote provider requires an endpoint");
    }

    for (const auto& p : cfg.personality_pairings)
        require(p == "c_c" || p == "c_s" || p == "s_s",
                "personality_pairings: unknown pairing '" + p + "' (expected c_c, c_s or s_s)");
    for (const auto& l : cfg.game_lengths)
        require(l == "one_shot" || l == "repeated",
                "game_lengths: unknown value '" + l + "' (expected one_shot or repeated)");

    for (const auto& name : {cfg.policy_agent1, cfg.policy_agent2}) {
        if (name == "model") continue;
        const auto& known = builtin_policy_names();
        if (std::find(known.begin(), known.end(), name) == known.end())
            violations.push_back("policies: unknown policy '" + name + "'");
    }

    for (const auto& lang : cfg.languages) {
        auto it = cfg.localization.find(lang);
        if (it == cfg.localization.end()) {
            violations.push_back("localization: missing language pack for " + lang);
            continue;
        }
        const LanguagePack& pack = it->second;
        require(!pack.option_a.empty() && !pack.option_b.empty(),
                "localization." + lang + ": option labels must be nonempty");
        require(pack.option_a != pack.option_b,
                "localization." + lang + ": option labels must be distinct");
        require(!pack.no_history.empty(), "localization." + lang + ": missing no_history");
        require(!pack.history_line.empty(), "localization." + lang + ": missing history_line");
        require(!pack.payoff_line.empty(), "localization." + lang + ": missing payoff_line");
        require(!pack.penalty_word.empty() || !pack.reward_word.empty(),
                "localization." + lang + ": missing penalty/reward words");
        for (const char* trait : {"cooperative", "selfish"})
            require(pack.personality_text.count(trait) > 0,
                    "localization." + lang + ": missing personality text for " + std::string(trait));
    }

    return violations;
}

} // namespace agon
