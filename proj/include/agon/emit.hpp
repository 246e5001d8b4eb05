// CSV and SVG emission for the metric families, plus the one-call analyze
// pipeline used by the CLI. Output is deterministic: rows are canonically
// ordered, numbers use a fixed format, and identical inputs produce
// byte-identical files.

#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "agon/analysis.hpp"

namespace agon {

inline std::string fmt_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt_coord(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw AnalysisError("cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
        out << (i ? "," : "") << csv_escape(header[i]);
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(row[i]);
        out << '\n';
    }
}

namespace svg {

inline const std::vector<std::string>& palette() {
    static const std::vector<std::string> colors = {
        "#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2",
        "#b279a2", "#9d755d", "#eeca3b", "#bab0ac", "#667788",
    };
    return colors;
}

inline std::string join_group(const std::vector<std::string>& group) {
    if (group.empty()) return "all";
    std::string out;
    for (const auto& g : group) {
        if (!out.empty()) out += "/";
        out += g;
    }
    return out;
}

// Line chart: one polyline per series, legend on the right.
inline void line_chart(const std::filesystem::path& path, const std::string& title,
                       const std::map<std::string, std::vector<std::pair<int, double>>>& series,
                       const std::string& y_label) {
    const double width = 960, height = 540;
    const double left = 70, right = width - 280, top = 50, bottom = height - 60;

    int x_min = 1, x_max = 1;
    double y_min = 0, y_max = 0;
    bool first = true;
    for (const auto& [name, points] : series) {
        for (const auto& [x, y] : points) {
            if (first) {
                x_min = x_max = x;
                y_min = y_max = y;
                first = false;
            }
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (first) return; // nothing to draw
    if (y_min == y_max) {
        y_min -= 1.0;
        y_max += 1.0;
    }
    const double y_pad = (y_max - y_min) * 0.08;
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) {
        return x_max == x_min ? (left + right) / 2
                              : left + (x - x_min) / (x_max - x_min) * (right - left);
    };
    auto sy = [&](double y) { return bottom - (y - y_min) / (y_max - y_min) * (bottom - top); };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw AnalysisError("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << fmt_coord(left) << "\" y=\"24\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(bottom) << "\" x2=\""
        << fmt_coord(right) << "\" y2=\"" << fmt_coord(bottom) << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(top) << "\" x2=\""
        << fmt_coord(left) << "\" y2=\"" << fmt_coord(bottom) << "\" stroke=\"#333\"/>\n";
    out << "<text x=\"16\" y=\"" << fmt_coord(top - 10) << "\">" << y_label << "</text>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double y_value = y_min + (y_max - y_min) * tick / 4.0;
        const double y = sy(y_value);
        out << "<line x1=\"" << fmt_coord(left - 4) << "\" y1=\"" << fmt_coord(y) << "\" x2=\""
            << fmt_coord(right) << "\" y2=\"" << fmt_coord(y)
            << "\" stroke=\"#ddd\" stroke-dasharray=\"3,3\"/>\n";
        out << "<text x=\"" << fmt_coord(left - 8) << "\" y=\"" << fmt_coord(y + 4)
            << "\" text-anchor=\"end\">" << fmt_number(y_value) << "</text>\n";
    }
    for (int x = x_min; x <= x_max; ++x) {
        out << "<text x=\"" << fmt_coord(sx(x)) << "\" y=\"" << fmt_coord(bottom + 18)
            << "\" text-anchor=\"middle\">" << x << "</text>\n";
    }

    std::size_t color_index = 0;
    double legend_y = top;
    for (const auto& [name, points] : series) {
        const std::string& color = palette()[color_index % palette().size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (i) out << ' ';
            out << fmt_coord(sx(points[i].first)) << ',' << fmt_coord(sy(points[i].second));
        }
        out << "\"/>\n";
        out << "<rect x=\"" << fmt_coord(right + 12) << "\" y=\"" << fmt_coord(legend_y)
            << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
        out << "<text x=\"" << fmt_coord(right + 30) << "\" y=\"" << fmt_coord(legend_y + 10)
            << "\">" << name << "</text>\n";
        legend_y += 18;
        ++color_index;
    }
    out << "</svg>\n";
}

// Bar chart with CI whiskers; bars are numbered and resolved in the legend.
inline void bar_chart(const std::filesystem::path& path, const std::string& title,
                      const std::vector<PayoffTotalsRow>& rows) {
    if (rows.empty()) return;
    const double width = 960, height = 540;
    const double left = 70, right = width - 320, top = 50, bottom = height - 60;

    double y_max = 0;
    for (const auto& row : rows) y_max = std::max(y_max, row.mean + row.ci_half);
    if (y_max <= 0) y_max = 1;
    y_max *= 1.08;

    auto sy = [&](double y) { return bottom - y / y_max * (bottom - top); };
    const double slot = (right - left) / static_cast<double>(rows.size());
    const double bar_width = std::min(40.0, slot * 0.7);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw AnalysisError("cannot write " + path.string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << " " << height
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<text x=\"" << fmt_coord(left) << "\" y=\"24\" font-size=\"15\">" << title
        << "</text>\n";
    out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(bottom) << "\" x2=\""
        << fmt_coord(right) << "\" y2=\"" << fmt_coord(bottom) << "\" stroke=\"#333\"/>\n";
    out << "<line x1=\"" << fmt_coord(left) << "\" y1=\"" << fmt_coord(top) << "\" x2=\""
        << fmt_coord(left) << "\" y2=\"" << fmt_coord(bottom) << "\" stroke=\"#333\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double y_value = y_max * tick / 4.0;
        out << "<text x=\"" << fmt_coord(left - 8) << "\" y=\"" << fmt_coord(sy(y_value) + 4)
            << "\" text-anchor=\"end\">" << fmt_number(y_value) << "</text>\n";
    }

    double legend_y = top;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string& color = palette()[i % palette().size()];
        const double cx = left + slot * (static_cast<double>(i) + 0.5);
        const double x0 = cx - bar_width / 2;
        out << "<rect x=\"" << fmt_coord(x0) << "\" y=\"" << fmt_coord(sy(row.mean))
            << "\" width=\"" << fmt_coord(bar_width) << "\" height=\""
            << fmt_coord(bottom - sy(row.mean)) << "\" fill=\"" << color << "\"/>\n";
        if (row.ci_half > 0) {
            const double y_lo = sy(row.mean - row.ci_half), y_hi = sy(row.mean + row.ci_half);
            out << "<line x1=\"" << fmt_coord(cx) << "\" y1=\"" << fmt_coord(y_lo) << "\" x2=\""
                << fmt_coord(cx) << "\" y2=\"" << fmt_coord(y_hi) << "\" stroke=\"#222\"/>\n";
            for (double y : {y_lo, y_hi})
                out << "<line x1=\"" << fmt_coord(cx - 6) << "\" y1=\"" << fmt_coord(y)
                    << "\" x2=\"" << fmt_coord(cx + 6) << "\" y2=\"" << fmt_coord(y)
                    << "\" stroke=\"#222\"/>\n";
        }
        out << "<text x=\"" << fmt_coord(cx) << "\" y=\"" << fmt_coord(bottom + 18)
            << "\" text-anchor=\"middle\">" << (i + 1) << "</text>\n";
        if (legend_y < bottom) {
            out << "<rect x=\"" << fmt_coord(right + 12) << "\" y=\"" << fmt_coord(legend_y)
                << "\" width=\"12\" height=\"12\" fill=\"" << color << "\"/>\n";
            out << "<text x=\"" << fmt_coord(right + 30) << "\" y=\"" << fmt_coord(legend_y + 10)
                << "\">" << (i + 1) << ": " << join_group(row.group) << "</text>\n";
            legend_y += 18;
        }
    }
    out << "</svg>\n";
}

} // namespace svg

struct AnalyzeOptions {
    std::vector<std::string> group_by; // empty -> per-metric defaults
    bool emit_svg = false;
    std::filesystem::path lexicon_dir = "lexicons";
    std::vector<std::string> extra_excluded;
    int top_k = 5;
};

namespace detail {

inline std::string keys_slug(const std::vector<std::string>& keys) {
    if (keys.empty()) return "all";
    std::string out;
    for (const auto& k : keys) {
        if (!out.empty()) out += "-";
        out += k;
    }
    return out;
}

inline std::map<std::string, std::vector<std::pair<int, double>>>
series_by_group(const std::vector<SeriesRow>& rows) {
    std::map<std::string, std::vector<std::pair<int, double>>> out;
    for (const auto& row : rows) out[svg::join_group(row.group)].push_back({row.round, row.mean});
    return out;
}

} // namespace detail

// Emits the full metric suite. Returns the list of written files.
inline std::vector<std::string> analyze_all(const std::vector<GameLogRecord>& records,
                                            const std::filesystem::path& out_dir,
                                            const AnalyzeOptions& options = {}) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit_path = [&](const std::string& metric, const std::vector<std::string>& keys,
                         const char* ext) {
        return out_dir / (metric + "__" + detail::keys_slug(keys) + ext);
    };
    auto note = [&](const std::filesystem::path& p) { written.push_back(p.string()); };

    const bool custom = !options.group_by.empty();
    auto keys_for = [&](std::vector<std::string> defaults) {
        return custom ? validate_group_keys(options.group_by) : std::move(defaults);
    };

    bool any_completed = false, any_comm = false, any_repeated = false, any_coordination = false;
    std::set<std::string> comm_languages;
    for (const auto& rec : records) {
        if (!rec.completed()) continue;
        any_completed = true;
        if (rec.n_rounds > 1) any_repeated = true;
        if (rec.family == "coordination" && rec.n_rounds > 1) any_coordination = true;
        if (rec.communication) {
            any_comm = true;
            comm_languages.insert(rec.language);
        }
    }
    if (!any_completed) throw AnalysisError("no completed games");

    { // payoff totals
        const auto keys = keys_for({"communication", "game_length", "game_variant", "language",
                                    "model", "personality_pairing", "rounds_known"});
        const auto rows = payoff_totals(records, keys);
        std::vector<std::string> header = keys;
        for (const char* c : {"mean", "sd", "n", "ci_low", "ci_high"}) header.push_back(c);
        std::vector<std::vector<std::string>> csv;
        for (const auto& row : rows) {
            auto line = row.group;
            line.push_back(fmt_number(row.mean));
            line.push_back(fmt_number(row.sd));
            line.push_back(std::to_string(row.n));
            line.push_back(fmt_number(row.mean - row.ci_half));
            line.push_back(fmt_number(row.mean + row.ci_half));
            csv.push_back(std::move(line));
        }
        const auto path = emit_path("payoff_totals", keys, ".csv");
        write_csv(path, header, csv);
        note(path);
        if (options.emit_svg) {
            const auto svg_path = emit_path("payoff_totals", keys, ".svg");
            svg::bar_chart(svg_path, "Total payoff per game (mean with 95% CI)", rows);
            note(svg_path);
        }
    }

    auto emit_series = [&](const char* metric, const std::vector<SeriesRow>& rows,
                           const std::vector<std::string>& keys, const char* value_column,
                           const char* chart_title) {
        std::vector<std::string> header = keys;
        header.push_back("round");
        header.push_back(value_column);
        header.push_back("n");
        std::vector<std::vector<std::string>> csv;
        for (const auto& row : rows) {
            auto line = row.group;
            line.push_back(std::to_string(row.round));
            line.push_back(fmt_number(row.mean));
            line.push_back(std::to_string(row.n));
            csv.push_back(std::move(line));
        }
        const auto path = emit_path(metric, keys, ".csv");
        write_csv(path, header, csv);
        note(path);
        if (options.emit_svg && !rows.empty()) {
            const auto svg_path = emit_path(metric, keys, ".svg");
            svg::line_chart(svg_path, chart_title, detail::series_by_group(rows), value_column);
            note(svg_path);
        }
    };

    if (any_repeated) {
        const auto keys = keys_for({"communication", "language", "model"});
        emit_series("strategy_series", strategy_series(records, keys), keys, "mean_strategy",
                    "Strategy evolution (+1 defect / -1 cooperate)");
    }
    if (any_coordination) {
        const auto keys = keys_for({"communication", "model"});
        emit_series("coordination_series", coordination_series(records, keys), keys,
                    "mean_coordination", "Coordination (+1 mismatch / -1 match)");
    }

    if (any_comm) {
        {
            const auto keys = keys_for({"game", "game_length", "language", "model", "rounds_known"});
            const auto rows = message_length_stats(records, keys);
            std::vector<std::string> header = keys;
            header.push_back("mean_chars");
            header.push_back("n_messages");
            std::vector<std::vector<std::string>> csv;
            for (const auto& row : rows) {
                auto line = row.group;
                line.push_back(fmt_number(row.mean_chars));
                line.push_back(std::to_string(row.n_messages));
                csv.push_back(std::move(line));
            }
            const auto path = emit_path("message_length_stats", keys, ".csv");
            write_csv(path, header, csv);
            note(path);
        }
        if (any_repeated) {
            const auto keys = keys_for({"game_variant", "model"});
            emit_series("message_length_by_round", message_length_by_round(records, keys), keys,
                        "mean_total_chars", "Total message length per round");
        }
        {
            LexiconConfig lexicon = load_lexicons(
                options.lexicon_dir,
                std::vector<std::string>(comm_languages.begin(), comm_languages.end()));
            lexicon.extra_excluded = options.extra_excluded;
            lexicon.top_k = options.top_k;
            const auto rows = word_frequencies(records, lexicon);
            std::vector<std::vector<std::string>> csv;
            for (const auto& row : rows)
                csv.push_back({row.language, row.game, std::to_string(row.rank), row.token,
                               std::to_string(row.count)});
            const auto path = out_dir / "word_frequencies__language-game.csv";
            write_csv(path, {"language", "game", "rank", "token", "count"}, csv);
            note(path);
        }
    }

    return written;
}

} // namespace agon
