// Recomputes the metric families from run logs: payoff totals with 95%
// normal-approximation CIs, strategy-evolution and coordination series,
// message-length statistics, and stopword-filtered word frequencies.
// Every statistic is a pure function of the log records; failed games are
// excluded from all aggregates. Group keys map onto logged factor fields
// only, and all outputs are canonically ordered so emission is repeatable
// byte for byte.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "agon/game.hpp"
#include "agon/logrecord.hpp"
#include "agon/text.hpp"

namespace agon {

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// "game" is the family key (pools the PD variants into one game family);
// the rest are the factorial factors.
inline const std::vector<std::string>& groupable_factors() {
    static const std::vector<std::string> keys = {
        "communication", "game", "game_length", "game_variant",
        "language",      "model", "personality_pairing", "rounds_known"};
    return keys;
}

inline std::string factor_value(const GameLogRecord& rec, const std::string& key) {
    if (key == "model") return rec.model;
    if (key == "language") return rec.language;
    if (key == "game_variant") return rec.game_variant;
    if (key == "game") return rec.game;
    if (key == "personality_pairing") return rec.personality_pairing;
    if (key == "communication") return rec.communication ? "on" : "off";
    if (key == "rounds_known") return rec.rounds_known ? "known" : "unknown";
    if (key == "game_length") return rec.game_length;
    throw AnalysisError("unknown group-by factor: " + key);
}

inline std::vector<std::string> validate_group_keys(std::vector<std::string> keys) {
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    const auto& known = groupable_factors();
    for (const auto& k : keys)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw AnalysisError("unknown group-by factor: " + k);
    return keys;
}

inline std::vector<std::string> group_of(const GameLogRecord& rec,
                                         const std::vector<std::string>& keys) {
    std::vector<std::string> values;
    values.reserve(keys.size());
    for (const auto& k : keys) values.push_back(factor_value(rec, k));
    return values;
}

// ---- payoff totals ---------------------------------------------------------

struct PayoffTotalsRow {
    std::vector<std::string> group;
    double mean = 0.0;
    double sd = 0.0;       // sample (n-1) standard deviation; 0 when n == 1
    long long n = 0;
    double ci_half = 0.0;  // 1.96 * sd / sqrt(n)
};

inline std::vector<PayoffTotalsRow> payoff_totals(const std::vector<GameLogRecord>& records,
                                                  const std::vector<std::string>& keys) {
    std::map<std::vector<std::string>, std::vector<double>> groups;
    for (const auto& rec : records) {
        if (!rec.completed()) continue;
        groups[group_of(rec, keys)].push_back(
            static_cast<double>(rec.cumulative.p1 + rec.cumulative.p2));
    }
    if (groups.empty()) throw AnalysisError("no completed games");

    std::vector<PayoffTotalsRow> rows;
    for (const auto& [group, values] : groups) {
        PayoffTotalsRow row;
        row.group = group;
        row.n = static_cast<long long>(values.size());
        double sum = 0.0;
        for (double v : values) sum += v;
        row.mean = sum / static_cast<double>(row.n);
        if (row.n > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - row.mean) * (v - row.mean);
            row.sd = std::sqrt(ss / static_cast<double>(row.n - 1));
        }
        row.ci_half = 1.96 * row.sd / std::sqrt(static_cast<double>(row.n));
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- round series ----------------------------------------------------------

struct SeriesRow {
    std::vector<std::string> group;
    int round = 0;
    double mean = 0.0; // in [-1, +1]
    long long n = 0;
};

namespace detail {

template <typename PerGame>
std::vector<SeriesRow> round_series(const std::vector<GameLogRecord>& records,
                                    const std::vector<std::string>& keys, PerGame&& per_game,
                                    const char* what) {
    struct Acc {
        int n_rounds = 0;
        std::vector<double> sums;
        std::vector<long long> counts;
    };
    std::map<std::vector<std::string>, Acc> groups;
    for (const auto& rec : records) {
        auto& acc = groups[group_of(rec, keys)];
        if (acc.n_rounds == 0) {
            acc.n_rounds = rec.n_rounds;
            acc.sums.assign(static_cast<std::size_t>(rec.n_rounds), 0.0);
            acc.counts.assign(static_cast<std::size_t>(rec.n_rounds), 0);
        } else if (acc.n_rounds != rec.n_rounds) {
            throw AnalysisError(std::string(what) +
                                ": group mixes different round counts; the series is undefined");
        }
        per_game(rec, acc.sums, acc.counts);
    }
    std::vector<SeriesRow> rows;
    for (const auto& [group, acc] : groups) {
        for (int r = 0; r < acc.n_rounds; ++r) {
            const auto i = static_cast<std::size_t>(r);
            if (acc.counts[i] == 0) continue;
            rows.push_back({group, r + 1, acc.sums[i] / static_cast<double>(acc.counts[i]),
                            acc.counts[i]});
        }
    }
    return rows;
}

} // namespace detail

// Mean strategy value per round over games x 2 agents; A = +1, B = -1.
// Repeated games only.
inline std::vector<SeriesRow> strategy_series(const std::vector<GameLogRecord>& records,
                                              const std::vector<std::string>& keys) {
    std::vector<GameLogRecord> eligible;
    for (const auto& rec : records)
        if (rec.completed() && rec.n_rounds > 1) eligible.push_back(rec);
    return detail::round_series(
        eligible, keys,
        [](const GameLogRecord& rec, std::vector<double>& sums, std::vector<long long>& counts) {
            for (const auto& round : rec.rounds) {
                const auto i = static_cast<std::size_t>(round.round_index - 1);
                sums[i] += strategy_value(choice_from_letter(round.choice1));
                sums[i] += strategy_value(choice_from_letter(round.choice2));
                counts[i] += 2;
            }
        },
        "strategy_series");
}

// Mean coordination value per round over games: +1 when the choices differ
// (mismatch), -1 when they agree. Coordination-game logs only.
inline std::vector<SeriesRow> coordination_series(const std::vector<GameLogRecord>& records,
                                                  const std::vector<std::string>& keys) {
    std::vector<GameLogRecord> eligible;
    for (const auto& rec : records)
        if (rec.completed() && rec.n_rounds > 1 && rec.family == "coordination")
            eligible.push_back(rec);
    return detail::round_series(
        eligible, keys,
        [](const GameLogRecord& rec, std::vector<double>& sums, std::vector<long long>& counts) {
            for (const auto& round : rec.rounds) {
                const auto i = static_cast<std::size_t>(round.round_index - 1);
                sums[i] += round.choice1 != round.choice2 ? +1.0 : -1.0;
                counts[i] += 1;
            }
        },
        "coordination_series");
}

// ---- message lengths -------------------------------------------------------

struct MessageLengthRow {
    std::vector<std::string> group;
    double mean_chars = 0.0; // Unicode scalars per message; every message is one observation
    long long n_messages = 0;
};

inline std::vector<MessageLengthRow> message_length_stats(const std::vector<GameLogRecord>& records,
                                                          const std::vector<std::string>& keys) {
    std::map<std::vector<std::string>, std::pair<long long, long long>> groups; // chars, count
    for (const auto& rec : records) {
        if (!rec.completed() || !rec.communication) continue;
        auto& [chars, count] = groups[group_of(rec, keys)];
        for (const auto& round : rec.rounds)
            for (const auto& m : round.messages) {
                chars += m.chars;
                count += 1;
            }
    }
    std::vector<MessageLengthRow> rows;
    for (const auto& [group, acc] : groups) {
        if (acc.second == 0) continue;
        rows.push_back({group, static_cast<double>(acc.first) / static_cast<double>(acc.second),
                        acc.second});
    }
    return rows;
}

// Per round: mean over games of the summed character count of both agents'
// messages. Repeated communication-enabled games only.
inline std::vector<SeriesRow> message_length_by_round(const std::vector<GameLogRecord>& records,
                                                      const std::vector<std::string>& keys) {
    std::vector<GameLogRecord> eligible;
    for (const auto& rec : records)
        if (rec.completed() && rec.communication && rec.n_rounds > 1) eligible.push_back(rec);
    return detail::round_series(
        eligible, keys,
        [](const GameLogRecord& rec, std::vector<double>& sums, std::vector<long long>& counts) {
            for (const auto& round : rec.rounds) {
                const auto i = static_cast<std::size_t>(round.round_index - 1);
                long long total = 0;
                for (const auto& m : round.messages) total += m.chars;
                sums[i] += static_cast<double>(total);
                counts[i] += 1;
            }
        },
        "message_length_by_round");
}

// ---- word frequencies ------------------------------------------------------

struct LexiconConfig {
    std::map<std::string, std::set<std::string>> stopwords; // language -> lowercased words
    std::vector<std::string> extra_excluded;                // user-supplied terms
    int top_k = 5;
};

// One-word-per-line UTF-8 files named <lang>.txt.
inline LexiconConfig load_lexicons(const std::filesystem::path& dir,
                                   const std::vector<std::string>& languages) {
    LexiconConfig lex;
    for (const auto& lang : languages) {
        const auto path = dir / (lang + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw AnalysisError("missing stopword list for language '" + lang +
                                "': " + path.string());
        std::set<std::string> words;
        std::string line;
        while (std::getline(in, line)) {
            const auto w = trim(line);
            if (!w.empty()) words.insert(text::lower_utf8(w));
        }
        lex.stopwords[lang] = std::move(words);
    }
    return lex;
}

// Localized words for "choose" and "round"; the option labels come from the
// log records themselves.
inline std::vector<std::string> default_game_terms(const std::string& language) {
    if (language == "en") return {"Option A", "Option B", "choose", "round"};
    if (language == "ar") return {"الخيار أ", "الخيار ب", "اختر", "جولة"};
    if (language == "vn") return {"Lựa chọn A", "Lựa chọn B", "chọn", "vòng"};
    return {"Option A", "Option B", "choose", "round"};
}

struct WordFrequencyRow {
    std::string language;
    std::string game; // family key
    int rank = 0;     // 1-based
    std::string token;
    long long count = 0;
};

// Tokenize on word boundaries, lowercase, drop stopwords and game terms,
// rank by raw count with lexicographic tie-break. Grouped by language x game.
inline std::vector<WordFrequencyRow> word_frequencies(const std::vector<GameLogRecord>& records,
                                                      const LexiconConfig& lexicon) {
    struct GroupData {
        std::map<std::string, long long> counts;
        std::set<std::string> excluded;
    };
    std::map<std::pair<std::string, std::string>, GroupData> groups;

    for (const auto& rec : records) {
        if (!rec.completed() || !rec.communication) continue;
        auto stop_it = lexicon.stopwords.find(rec.language);
        if (stop_it == lexicon.stopwords.end())
            throw AnalysisError("missing stopword list for language '" + rec.language + "'");
        auto& data = groups[{rec.language, rec.game}];
        if (data.excluded.empty()) {
            auto add_term_tokens = [&](const std::string& term) {
                for (auto& tok : text::tokenize_words(term)) data.excluded.insert(std::move(tok));
            };
            for (const auto& term : default_game_terms(rec.language)) add_term_tokens(term);
            for (const auto& term : lexicon.extra_excluded) add_term_tokens(term);
            add_term_tokens(rec.option_label_a);
            add_term_tokens(rec.option_label_b);
        }
        for (const auto& round : rec.rounds) {
            for (const auto& m : round.messages) {
                for (auto& token : text::tokenize_words(m.text)) {
                    if (stop_it->second.count(token) || data.excluded.count(token)) continue;
                    data.counts[token] += 1;
                }
            }
        }
    }

    std::vector<WordFrequencyRow> rows;
    for (const auto& [key, data] : groups) {
        std::vector<std::pair<std::string, long long>> ranked(data.counts.begin(),
                                                              data.counts.end());
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first; // bytewise == codepoint order for UTF-8
        });
        const int k = std::min<int>(lexicon.top_k, static_cast<int>(ranked.size()));
        for (int i = 0; i < k; ++i)
            rows.push_back({key.first, key.second, i + 1, ranked[static_cast<std::size_t>(i)].first,
                            ranked[static_cast<std::size_t>(i)].second});
    }
    return rows;
}

} // namespace agon
