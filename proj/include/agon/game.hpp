// Deterministic model of two-player normal-form games: payoff matrices,
// round records, and game-state progression. Payoff values are exact
// integers, so cumulative totals carry no accumulation error and oracle
// tests can assert equality. All types are plain values; apply_round is
// copy-on-write, so states can be shared across threads freely.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace agon {

enum class Choice { A, B };

inline char choice_letter(Choice c) { return c == Choice::A ? 'A' : 'B'; }

inline Choice choice_from_letter(char l) {
    if (l == 'A' || l == 'a') return Choice::A;
    if (l == 'B' || l == 'b') return Choice::B;
    throw std::invalid_argument(std::string("not a choice letter: ") + l);
}

// Series encoding used by the analysis: A (defection in PD) is +1,
// B (cooperation) is -1.
inline int strategy_value(Choice c) { return c == Choice::A ? +1 : -1; }

enum class Orientation { Penalty, Reward };
enum class GameFamily { PrisonersDilemma, Coordination };

using PayoffValue = std::int64_t;

struct PayoffPair {
    PayoffValue p1 = 0;
    PayoffValue p2 = 0;
    friend bool operator==(const PayoffPair&, const PayoffPair&) = default;
};

// Row is player1's choice, column is player2's; index 0 = Option A.
// Orientation is metadata only: the engine never negates values, the
// analysis decides whether lower or higher is better.
struct PayoffMatrix {
    PayoffPair cells[2][2] = {};
    Orientation orientation = Orientation::Penalty;

    const PayoffPair& at(Choice c1, Choice c2) const {
        return cells[c1 == Choice::A ? 0 : 1][c2 == Choice::A ? 0 : 1];
    }
};

inline PayoffPair payoff(const PayoffMatrix& m, Choice c1, Choice c2) {
    return m.at(c1, c2);
}

// Mutual-defection penalty minus mutual-cooperation penalty. Only defined
// for penalty-oriented matrices where Option A is defection.
inline PayoffValue dilemma_strength(const PayoffMatrix& m) {
    if (m.orientation != Orientation::Penalty)
        throw std::invalid_argument("dilemma_strength: matrix is not penalty-oriented");
    return m.at(Choice::A, Choice::A).p1 - m.at(Choice::B, Choice::B).p1;
}

// Checks the standard PD penalty ordering for player1
// (defect-vs-cooperate < mutual-cooperate < mutual-defect < cooperate-vs-defect)
// plus player symmetry. Violations are returned, never thrown.
inline std::vector<std::string> validate_pd_structure(const PayoffMatrix& m) {
    std::vector<std::string> violations;
    if (m.orientation != Orientation::Penalty) {
        violations.push_back("matrix is not penalty-oriented");
        return violations;
    }
    const PayoffValue defect_vs_coop = m.at(Choice::A, Choice::B).p1;
    const PayoffValue mutual_coop = m.at(Choice::B, Choice::B).p1;
    const PayoffValue mutual_defect = m.at(Choice::A, Choice::A).p1;
    const PayoffValue coop_vs_defect = m.at(Choice::B, Choice::A).p1;
    if (!(defect_vs_coop < mutual_coop))
        violations.push_back("defect-vs-cooperate penalty must be below mutual-cooperation penalty");
    if (!(mutual_coop < mutual_defect))
        violations.push_back("mutual-cooperation penalty must be below mutual-defection penalty");
    if (!(mutual_defect < coop_vs_defect))
        violations.push_back("mutual-defection penalty must be below cooperate-vs-defect penalty");
    const auto& aa = m.at(Choice::A, Choice::A);
    const auto& bb = m.at(Choice::B, Choice::B);
    const auto& ab = m.at(Choice::A, Choice::B);
    const auto& ba = m.at(Choice::B, Choice::A);
    if (aa.p1 != aa.p2 || bb.p1 != bb.p2 || ab.p1 != ba.p2 || ab.p2 != ba.p1)
        violations.push_back("matrix is not symmetric across players");
    return violations;
}

struct GameSpec {
    std::string game_id;
    GameFamily family = GameFamily::PrisonersDilemma;
    PayoffMatrix matrix;
    int n_rounds = 1;
    bool rounds_known = true;
    bool communication_enabled = false;
};

struct Message {
    std::string agent_id;
    std::string text;
};

struct RoundRecord {
    int round_index = 0; // 1-based
    std::vector<Message> messages;
    Choice choice1 = Choice::A;
    Choice choice2 = Choice::A;
    PayoffPair payoffs;
};

enum class GameStatus { InProgress, Completed, Failed };

struct GameState {
    GameSpec spec;
    std::vector<RoundRecord> history;
    PayoffPair cumulative;
    GameStatus status = GameStatus::InProgress;
    std::string failure_reason;
};

// Appends one round, updating totals and status. Rejects out-of-order
// rounds, payoffs inconsistent with the matrix, and message counts that
// contradict the communication flag.
inline GameState apply_round(GameState state, RoundRecord record) {
    if (state.status != GameStatus::InProgress)
        throw std::invalid_argument("apply_round: game is not in progress");
    const int expected = static_cast<int>(state.history.size()) + 1;
    if (record.round_index != expected)
        throw std::invalid_argument("apply_round: expected round " + std::to_string(expected) +
                                    ", got " + std::to_string(record.round_index));
    if (record.payoffs != payoff(state.spec.matrix, record.choice1, record.choice2))
        throw std::invalid_argument("apply_round: payoffs inconsistent with matrix");
    if (state.spec.communication_enabled) {
        if (record.messages.size() != 2 ||
            record.messages[0].agent_id == record.messages[1].agent_id)
            throw std::invalid_argument("apply_round: expected one message per agent");
    } else if (!record.messages.empty()) {
        throw std::invalid_argument("apply_round: messages present but communication disabled");
    }
    state.cumulative.p1 += record.payoffs.p1;
    state.cumulative.p2 += record.payoffs.p2;
    state.history.push_back(std::move(record));
    if (static_cast<int>(state.history.size()) == state.spec.n_rounds)
        state.status = GameStatus::Completed;
    return state;
}

} // namespace agon
