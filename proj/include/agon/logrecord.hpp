// Run-log schema (JSONL, one self-contained record per game, schema version
// v=1) plus append/scan/read helpers. Records carry every factor value and
// the localized option labels so that the analysis needs no other source.
// The writer serializes appends and flushes per line; a crash can at worst
// leave one truncated trailing line, which the resume scan detects.

#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agon/game.hpp"
#include "agon/text.hpp"
#include "agon/util.hpp"

namespace agon {

struct LogParseError : std::runtime_error {
    int line;
    LogParseError(int line_number, const std::string& message)
        : std::runtime_error("log line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
};

struct LoggedMessage {
    std::string agent_id;
    std::string text;
    long long chars = 0; // Unicode scalar count, precomputed at log time
    int attempts = 0;
};

struct LoggedRound {
    int round_index = 0;
    std::vector<LoggedMessage> messages;
    char choice1 = 'A';
    char choice2 = 'A';
    PayoffPair payoffs;
    int attempts1 = 0;
    int attempts2 = 0;
};

struct GameLogRecord {
    std::string cell_id;
    std::uint64_t run_seed = 0;
    std::string started_at; // ISO-8601 UTC; stripped for determinism diffs
    std::string ended_at;

    // factors
    std::string game_variant; // full game id, e.g. pd_conventional
    std::string game;         // family key, e.g. pd
    std::string family;       // "pd" | "coordination"
    std::string language;
    std::string model;
    std::string personality_pairing;
    bool communication = false;
    bool rounds_known = true;
    std::string game_length;
    int n_rounds = 1;
    int repetition = 1;
    std::string orientation; // "penalty" | "reward"

    std::string option_label_a;
    std::string option_label_b;

    struct AgentInfo {
        std::string agent_id;
        std::string personality;
        std::string policy;
    };
    AgentInfo agent1, agent2;

    std::vector<LoggedRound> rounds;
    PayoffPair cumulative;
    std::string status; // "completed" | "failed"
    int failed_round = 0;
    std::string failure_reason;

    bool completed() const { return status == "completed"; }

    nlohmann::json to_json() const {
        nlohmann::json factors = {
            {"game_variant", game_variant},
            {"game", game},
            {"family", family},
            {"language", language},
            {"model", model},
            {"personality_pairing", personality_pairing},
            {"communication", communication},
            {"rounds_known", rounds_known},
            {"game_length", game_length},
            {"n_rounds", n_rounds},
            {"repetition", repetition},
            {"orientation", orientation},
        };
        nlohmann::json rounds_json = nlohmann::json::array();
        for (const auto& r : rounds) {
            nlohmann::json messages = nlohmann::json::array();
            for (const auto& m : r.messages)
                messages.push_back({{"agent", m.agent_id},
                                    {"text", m.text},
                                    {"chars", m.chars},
                                    {"attempts", m.attempts}});
            rounds_json.push_back({{"round", r.round_index},
                                   {"messages", std::move(messages)},
                                   {"choices", {std::string(1, r.choice1), std::string(1, r.choice2)}},
                                   {"payoffs", {r.payoffs.p1, r.payoffs.p2}},
                                   {"attempts", {r.attempts1, r.attempts2}}});
        }
        nlohmann::json j = {
            {"v", 1},
            {"cell_id", cell_id},
            {"run_seed", run_seed},
            {"started_at", started_at},
            {"ended_at", ended_at},
            {"factors", std::move(factors)},
            {"options", {{"a", option_label_a}, {"b", option_label_b}}},
            {"agents",
             {{{"id", agent1.agent_id}, {"personality", agent1.personality}, {"policy", agent1.policy}},
              {{"id", agent2.agent_id}, {"personality", agent2.personality}, {"policy", agent2.policy}}}},
            {"rounds", std::move(rounds_json)},
            {"cumulative", {cumulative.p1, cumulative.p2}},
            {"status", status},
        };
        if (status == "failed")
            j["failure"] = {{"round", failed_round}, {"reason", failure_reason}};
        return j;
    }

    static GameLogRecord from_json(const nlohmann::json& j) {
        GameLogRecord rec;
        if (j.value("v", 0) != 1) throw std::runtime_error("unsupported log schema version");
        rec.cell_id = j.at("cell_id").get<std::string>();
        rec.run_seed = j.value("run_seed", 0ull);
        rec.started_at = j.value("started_at", "");
        rec.ended_at = j.value("ended_at", "");
        const auto& f = j.at("factors");
        rec.game_variant = f.at("game_variant").get<std::string>();
        rec.game = f.value("game", rec.game_variant);
        rec.family = f.value("family", "pd");
        rec.language = f.at("language").get<std::string>();
        rec.model = f.at("model").get<std::string>();
        rec.personality_pairing = f.at("personality_pairing").get<std::string>();
        rec.communication = f.at("communication").get<bool>();
        rec.rounds_known = f.at("rounds_known").get<bool>();
        rec.game_length = f.at("game_length").get<std::string>();
        rec.n_rounds = f.at("n_rounds").get<int>();
        rec.repetition = f.value("repetition", 1);
        rec.orientation = f.value("orientation", "penalty");
        rec.option_label_a = j.at("options").at("a").get<std::string>();
        rec.option_label_b = j.at("options").at("b").get<std::string>();
        const auto& agents = j.at("agents");
        rec.agent1 = {agents.at(0).at("id").get<std::string>(),
                      agents.at(0).value("personality", ""), agents.at(0).value("policy", "")};
        rec.agent2 = {agents.at(1).at("id").get<std::string>(),
                      agents.at(1).value("personality", ""), agents.at(1).value("policy", "")};
        for (const auto& r : j.at("rounds")) {
            LoggedRound round;
            round.round_index = r.at("round").get<int>();
            for (const auto& m : r.value("messages", nlohmann::json::array())) {
                LoggedMessage msg;
                msg.agent_id = m.at("agent").get<std::string>();
                msg.text = m.at("text").get<std::string>();
                msg.chars = m.value("chars",
                                    static_cast<long long>(text::count_scalars(msg.text)));
                msg.attempts = m.value("attempts", 0);
                round.messages.push_back(std::move(msg));
            }
            round.choice1 = r.at("choices").at(0).get<std::string>().at(0);
            round.choice2 = r.at("choices").at(1).get<std::string>().at(0);
            round.payoffs = {r.at("payoffs").at(0).get<PayoffValue>(),
                             r.at("payoffs").at(1).get<PayoffValue>()};
            if (r.contains("attempts")) {
                round.attempts1 = r.at("attempts").at(0).get<int>();
                round.attempts2 = r.at("attempts").at(1).get<int>();
            }
            rec.rounds.push_back(std::move(round));
        }
        rec.cumulative = {j.at("cumulative").at(0).get<PayoffValue>(),
                          j.at("cumulative").at(1).get<PayoffValue>()};
        rec.status = j.at("status").get<std::string>();
        if (j.contains("failure")) {
            rec.failed_round = j.at("failure").value("round", 0);
            rec.failure_reason = j.at("failure").value("reason", "");
        }
        return rec;
    }
};

class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path)
        : out_(path, std::ios::binary | std::ios::app) {
        if (!out_) throw std::runtime_error("cannot open log for append: " + path.string());
    }

    void append(const GameLogRecord& rec) {
        const std::string line = rec.to_json().dump();
        std::lock_guard<std::mutex> lock(mutex_);
        out_ << line << '\n';
        out_.flush();
        if (!out_) throw std::runtime_error("log write failed");
    }

private:
    std::ofstream out_;
    std::mutex mutex_;
};

struct LogScan {
    std::set<std::string> completed_cells; // status == completed
    std::set<std::string> seen_cells;      // any parseable record
    long long valid_bytes = 0;             // offset past the last full line
    int lines = 0;
    bool trailing_partial = false;
};

// Tolerates exactly one unterminated/unparseable trailing line (the crash
// case); garbage earlier in the file is a hard error.
inline LogScan scan_log(const std::filesystem::path& path) {
    LogScan scan;
    std::ifstream in(path, std::ios::binary);
    if (!in) return scan;
    std::string line;
    long long offset = 0;
    while (std::getline(in, line)) {
        const bool complete_line = !in.eof();
        const long long line_bytes = static_cast<long long>(line.size()) + (complete_line ? 1 : 0);
        if (!complete_line && line.empty()) break;
        try {
            auto rec = GameLogRecord::from_json(nlohmann::json::parse(line));
            if (!complete_line) {
                // JSON happened to parse but the newline is missing: treat as
                // partial so the resume path rewrites it cleanly.
                scan.trailing_partial = true;
                break;
            }
            scan.seen_cells.insert(rec.cell_id);
            if (rec.completed()) scan.completed_cells.insert(rec.cell_id);
            scan.lines += 1;
            offset += line_bytes;
            scan.valid_bytes = offset;
        } catch (const std::exception&) {
            scan.trailing_partial = true;
            // Anything after a bad line would be unreachable on resume; the
            // caller decides whether that is fatal.
            break;
        }
    }
    return scan;
}

inline std::vector<GameLogRecord> read_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open log: " + path.string());
    std::vector<GameLogRecord> records;
    std::string line;
    int line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (trim(line).empty()) continue;
        try {
            records.push_back(GameLogRecord::from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw LogParseError(line_number, e.what());
        }
    }
    return records;
}

} // namespace agon
