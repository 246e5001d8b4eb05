// Factorial cell enumeration. Factor lists are canonicalized (sorted and
// deduplicated) before the cartesian product is taken, so cell ids are
// stable across config reorderings, and the enumeration order itself is
// deterministic. The expected game/decision/message counts come from the
// closed-form product, independent of the enumeration path.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "agon/config.hpp"
#include "agon/util.hpp"

namespace agon {

struct ExperimentCell {
    std::string cell_id;   // 16-hex hash of the canonical factor string
    std::string game_id;
    std::string family_key;
    std::string language;
    std::string model_name;
    std::string pairing;       // c_c, c_s, s_s
    bool communication = false;
    bool rounds_known = true;
    std::string game_length;   // one_shot | repeated
    int n_rounds = 1;
    int repetition = 1;        // 1-based
    std::uint64_t seed = 0;    // derived from run seed + factors
    std::size_t game_index = 0;
    std::size_t model_index = 0;

    std::string canonical_string() const {
        return "game=" + game_id + ";lang=" + language + ";model=" + model_name +
               ";pair=" + pairing + ";comm=" + (communication ? "1" : "0") +
               ";known=" + (rounds_known ? "1" : "0") + ";len=" + game_length +
               ";rep=" + std::to_string(repetition);
    }
};

namespace detail {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

inline std::vector<bool> sorted_flags(const std::vector<bool>& v) {
    std::vector<bool> out;
    if (std::find(v.begin(), v.end(), false) != v.end()) out.push_back(false);
    if (std::find(v.begin(), v.end(), true) != v.end()) out.push_back(true);
    return out;
}

} // namespace detail

inline std::vector<ExperimentCell> enumerate_cells(const ExperimentConfig& cfg) {
    auto fail_if_empty = [](bool empty, const char* name) {
        if (empty) throw ConfigError(std::string("empty factor: ") + name);
    };
    fail_if_empty(cfg.games.empty(), "games");
    fail_if_empty(cfg.languages.empty(), "languages");
    fail_if_empty(cfg.models.empty(), "models");
    fail_if_empty(cfg.personality_pairings.empty(), "personality_pairings");
    fail_if_empty(cfg.communication_variants.empty(), "communication");
    fail_if_empty(cfg.rounds_known_variants.empty(), "rounds_known");
    fail_if_empty(cfg.game_lengths.empty(), "game_lengths");
    if (cfg.repetitions < 1) throw ConfigError("repetitions must be >= 1");

    // Canonical factor orders: values sorted, booleans false before true.
    std::vector<std::size_t> game_order(cfg.games.size());
    for (std::size_t i = 0; i < game_order.size(); ++i) game_order[i] = i;
    std::sort(game_order.begin(), game_order.end(),
              [&](std::size_t a, std::size_t b) { return cfg.games[a].id < cfg.games[b].id; });
    std::vector<std::size_t> model_order(cfg.models.size());
    for (std::size_t i = 0; i < model_order.size(); ++i) model_order[i] = i;
    std::sort(model_order.begin(), model_order.end(), [&](std::size_t a, std::size_t b) {
        return cfg.models[a].model_name < cfg.models[b].model_name;
    });
    const auto languages = detail::sorted_unique(cfg.languages);
    const auto pairings = detail::sorted_unique(cfg.personality_pairings);
    const auto comm = detail::sorted_flags(cfg.communication_variants);
    const auto known = detail::sorted_flags(cfg.rounds_known_variants);
    const auto lengths = detail::sorted_unique(cfg.game_lengths);

    std::vector<ExperimentCell> cells;
    for (std::size_t gi : game_order)
        for (const auto& lang : languages)
            for (std::size_t mi : model_order)
                for (const auto& pairing : pairings)
                    for (bool c : comm)
                        for (bool k : known)
                            for (const auto& length : lengths)
                                for (int rep = 1; rep <= cfg.repetitions; ++rep) {
                                    ExperimentCell cell;
                                    cell.game_id = cfg.games[gi].id;
                                    cell.family_key = cfg.games[gi].family_key;
                                    cell.language = lang;
                                    cell.model_name = cfg.models[mi].model_name;
                                    cell.pairing = pairing;
                                    cell.communication = c;
                                    cell.rounds_known = k;
                                    cell.game_length = length;
                                    cell.n_rounds = length == "one_shot" ? 1 : cfg.repeated_rounds;
                                    cell.repetition = rep;
                                    cell.game_index = gi;
                                    cell.model_index = mi;
                                    const std::uint64_t h = fnv1a64(cell.canonical_string());
                                    cell.cell_id = to_hex16(h);
                                    cell.seed = mix_seeds({cfg.run_seed, h});
                                    cells.push_back(std::move(cell));
                                }
    return cells;
}

struct ExpectedCounts {
    long long games = 0;
    long long decisions = 0;
    long long messages = 0;
};

inline ExpectedCounts expected_counts(const ExperimentConfig& cfg) {
    const long long base = static_cast<long long>(cfg.games.size()) *
                           static_cast<long long>(cfg.languages.size()) *
                           static_cast<long long>(cfg.models.size()) *
                           static_cast<long long>(cfg.personality_pairings.size()) *
                           static_cast<long long>(cfg.rounds_known_variants.size()) *
                           static_cast<long long>(cfg.repetitions);
    long long rounds_per_length_sum = 0;
    for (const auto& length : cfg.game_lengths)
        rounds_per_length_sum += length == "one_shot" ? 1 : cfg.repeated_rounds;

    long long comm_on = 0;
    for (bool c : cfg.communication_variants) comm_on += c ? 1 : 0;

    ExpectedCounts out;
    out.games = base * static_cast<long long>(cfg.communication_variants.size()) *
                static_cast<long long>(cfg.game_lengths.size());
    out.decisions = base * static_cast<long long>(cfg.communication_variants.size()) * 2 *
                    rounds_per_length_sum;
    out.messages = base * comm_on * 2 * rounds_per_length_sum;
    return out;
}

} // namespace agon
