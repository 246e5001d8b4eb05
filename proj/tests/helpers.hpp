// Shared test fixtures: repo paths, scratch directories, a minimal English
// language pack, canonical matrices, and a tiny subprocess wrapper for
// exercising the CLI.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "agon/game.hpp"
#include "agon/prompt.hpp"

namespace testutil {

inline std::filesystem::path repo_dir() { return AGON_REPO_DIR; }
inline std::filesystem::path cli_path() { return AGON_CLI_PATH; }

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("agon_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

private:
    static int& counter() {
        static int n = 0;
        return n;
    }
};

struct CommandResult {
    int exit_code = -1;
    std::string output; // stdout only
};

inline CommandResult run_command(const std::string& command, bool merge_stderr = false) {
    const auto out_path = std::filesystem::temp_directory_path() /
                          ("agon_cmd_out_" + std::to_string(::getpid()) + ".txt");
    const std::string full = command + " > " + out_path.string() +
                             (merge_stderr ? " 2>&1" : " 2>/dev/null");
    const int status = std::system(full.c_str());
    CommandResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    result.output = buf.str();
    std::filesystem::remove(out_path);
    return result;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// ---- canonical matrices ----------------------------------------------------

inline agon::PayoffMatrix pd_matrix(agon::PayoffValue mutual_defect, agon::PayoffValue mutual_coop) {
    agon::PayoffMatrix m;
    m.orientation = agon::Orientation::Penalty;
    m.cells[0][0] = {mutual_defect, mutual_defect};
    m.cells[0][1] = {0, 10};
    m.cells[1][0] = {10, 0};
    m.cells[1][1] = {mutual_coop, mutual_coop};
    return m;
}

inline agon::PayoffMatrix conventional_pd() { return pd_matrix(6, 2); }
inline agon::PayoffMatrix harsh_pd() { return pd_matrix(8, 5); }
inline agon::PayoffMatrix mild_pd() { return pd_matrix(8, 2); }

inline agon::PayoffMatrix bos_matrix() {
    agon::PayoffMatrix m;
    m.orientation = agon::Orientation::Reward;
    m.cells[0][0] = {10, 7};
    m.cells[0][1] = {0, 0};
    m.cells[1][0] = {0, 0};
    m.cells[1][1] = {7, 10};
    return m;
}

inline agon::LanguagePack en_pack() {
    agon::LanguagePack pack;
    pack.option_a = "Option A";
    pack.option_b = "Option B";
    pack.no_history = "No previous rounds.";
    pack.history_line =
        "Round {round}: {agent1} chose {choice1}, {agent2} chose {choice2}; "
        "{value_word}: {payoff1} for {agent1}, {payoff2} for {agent2}.";
    pack.message_line = "{agent}: {text}";
    pack.payoff_line =
        "If you choose {self_option} and {opponent_id} chooses {other_option}, your "
        "{value_word} is {self_value} and {opponent_id}'s {value_word} is {other_value}.";
    pack.penalty_word = "penalty";
    pack.reward_word = "reward";
    pack.personality_text = {{"cooperative", "You are cooperative."},
                             {"selfish", "You are selfish."}};
    return pack;
}

} // namespace testutil
