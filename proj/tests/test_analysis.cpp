#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "agon/analysis.hpp"
#include "agon/emit.hpp"
#include "agon/runner.hpp"
#include "agon/text.hpp"
#include "helpers.hpp"

using namespace agon;
using Catch::Approx;

namespace {

// Minimal completed record with the given per-round choices; payoffs follow
// the conventional PD unless a matrix is supplied.
GameLogRecord make_record(const std::string& cell_id,
                          const std::vector<std::pair<char, char>>& choices,
                          const std::string& language = "en", const std::string& family = "pd",
                          const PayoffMatrix& matrix = testutil::conventional_pd()) {
    GameLogRecord rec;
    rec.cell_id = cell_id;
    rec.game_variant = family == "pd" ? "pd_conventional" : "bos";
    rec.game = family;
    rec.family = family == "pd" ? "pd" : "coordination";
    rec.language = language;
    rec.model = "mock-a";
    rec.personality_pairing = "c_c";
    rec.communication = false;
    rec.rounds_known = true;
    rec.game_length = choices.size() > 1 ? "repeated" : "one_shot";
    rec.n_rounds = static_cast<int>(choices.size());
    rec.orientation = matrix.orientation == Orientation::Penalty ? "penalty" : "reward";
    rec.option_label_a = "Option A";
    rec.option_label_b = "Option B";
    rec.agent1 = {"agent1", "cooperative", "scripted"};
    rec.agent2 = {"agent2", "cooperative", "scripted"};
    rec.status = "completed";
    for (std::size_t i = 0; i < choices.size(); ++i) {
        LoggedRound round;
        round.round_index = static_cast<int>(i) + 1;
        round.choice1 = choices[i].first;
        round.choice2 = choices[i].second;
        round.payoffs = payoff(matrix, choice_from_letter(round.choice1),
                               choice_from_letter(round.choice2));
        rec.cumulative.p1 += round.payoffs.p1;
        rec.cumulative.p2 += round.payoffs.p2;
        rec.rounds.push_back(std::move(round));
    }
    return rec;
}

// Communication-enabled record carrying the given message texts each round.
GameLogRecord make_comm_record(const std::string& cell_id,
                               const std::vector<std::pair<std::string, std::string>>& messages,
                               const std::string& language = "en",
                               const std::string& family = "pd") {
    std::vector<std::pair<char, char>> choices(messages.size(), {'A', 'A'});
    auto rec = make_record(cell_id, choices, language, family,
                           family == "pd" ? testutil::conventional_pd() : testutil::bos_matrix());
    rec.communication = true;
    if (language == "ar") {
        rec.option_label_a = "الخيار أ";
        rec.option_label_b = "الخيار ب";
    } else if (language == "vn") {
        rec.option_label_a = "Lựa chọn A";
        rec.option_label_b = "Lựa chọn B";
    }
    for (std::size_t i = 0; i < messages.size(); ++i) {
        auto& round = rec.rounds[i];
        round.messages = {
            {"agent1", messages[i].first,
             static_cast<long long>(text::count_scalars(messages[i].first)), 1},
            {"agent2", messages[i].second,
             static_cast<long long>(text::count_scalars(messages[i].second)), 1}};
    }
    return rec;
}

std::vector<std::pair<char, char>> repeat_choice(char c1, char c2, int n) {
    return std::vector<std::pair<char, char>>(static_cast<std::size_t>(n), {c1, c2});
}

} // namespace

TEST_CASE("payoff_totals computes mean, sd and the 95% CI") {
    SECTION("two games totaling 40 and 60") {
        // 40 = 10 rounds of (2,2); 60 = 10 rounds of (6,6) halved... use direct rounds:
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('B', 'B', 10)),
                                           make_record("b", repeat_choice('A', 'A', 5))};
        // totals: a = 10*(2+2) = 40, b = 5*(6+6) = 60
        const auto rows = payoff_totals(logs, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].n == 2);
        CHECK(rows[0].mean == Approx(50.0));
        CHECK(rows[0].sd == Approx(std::sqrt(200.0)));
        CHECK(rows[0].ci_half == Approx(19.6).margin(0.01));
    }
    SECTION("zero variance yields a zero-width CI") {
        std::vector<GameLogRecord> logs;
        for (int i = 0; i < 10; ++i)
            logs.push_back(make_record("g" + std::to_string(i), repeat_choice('B', 'B', 10)));
        const auto rows = payoff_totals(logs, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].mean == 40.0);
        CHECK(rows[0].sd == 0.0);
        CHECK(rows[0].ci_half == 0.0);
        CHECK(rows[0].n == 10);
    }
    SECTION("mutual defection fixtures total 120") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'A', 10))};
        const auto rows = payoff_totals(logs, {});
        CHECK(rows[0].mean == 120.0);
    }
    SECTION("groups are split and empty groups are absent") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'A', 10), "en"),
                                           make_record("b", repeat_choice('B', 'B', 10), "vn")};
        const auto rows = payoff_totals(logs, {"language"});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].group == std::vector<std::string>{"en"});
        CHECK(rows[0].mean == 120.0);
        CHECK(rows[1].group == std::vector<std::string>{"vn"});
        CHECK(rows[1].mean == 40.0);
    }
    SECTION("failed games are excluded everywhere") {
        auto failed = make_record("x", repeat_choice('A', 'A', 10));
        failed.status = "failed";
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('B', 'B', 10)), failed};
        const auto rows = payoff_totals(logs, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].n == 1);
        CHECK_THROWS_AS(payoff_totals({failed}, {}), AnalysisError);
    }
}

TEST_CASE("strategy_series closed forms") {
    SECTION("mutual defection is +1 everywhere") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'A', 10))};
        const auto rows = strategy_series(logs, {});
        REQUIRE(rows.size() == 10);
        for (const auto& row : rows) {
            CHECK(row.mean == 1.0);
            CHECK(row.n == 2);
        }
    }
    SECTION("cooperator pair is -1 everywhere") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('B', 'B', 10))};
        for (const auto& row : strategy_series(logs, {})) CHECK(row.mean == -1.0);
    }
    SECTION("tit-for-tat vs always-defect: 0 then +1") {
        auto choices = repeat_choice('A', 'A', 10);
        choices[0] = {'B', 'A'};
        std::vector<GameLogRecord> logs = {make_record("a", choices)};
        const auto rows = strategy_series(logs, {});
        REQUIRE(rows.size() == 10);
        CHECK(rows[0].round == 1);
        CHECK(rows[0].mean == 0.0);
        for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].mean == 1.0);
    }
    SECTION("one-shot games are excluded; mixed round counts are an error") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'A', 1))};
        CHECK(strategy_series(logs, {}).empty());
        logs.push_back(make_record("b", repeat_choice('A', 'A', 10)));
        logs.push_back(make_record("c", repeat_choice('A', 'A', 5)));
        CHECK_THROWS_AS(strategy_series(logs, {}), AnalysisError);
    }
}

TEST_CASE("coordination_series closed forms") {
    const auto bos = testutil::bos_matrix();
    SECTION("fixed-A vs fixed-B mismatches: +1") {
        std::vector<GameLogRecord> logs = {
            make_record("a", repeat_choice('A', 'B', 10), "en", "bos", bos)};
        const auto rows = coordination_series(logs, {});
        REQUIRE(rows.size() == 10);
        for (const auto& row : rows) CHECK(row.mean == 1.0);
    }
    SECTION("fixed-A pair aligns: -1") {
        std::vector<GameLogRecord> logs = {
            make_record("a", repeat_choice('A', 'A', 10), "en", "bos", bos)};
        for (const auto& row : coordination_series(logs, {})) CHECK(row.mean == -1.0);
    }
    SECTION("4 of 10 games mismatched gives -0.2") {
        std::vector<GameLogRecord> logs;
        for (int i = 0; i < 4; ++i)
            logs.push_back(make_record("m" + std::to_string(i), repeat_choice('A', 'B', 10), "en",
                                       "bos", bos));
        for (int i = 0; i < 6; ++i)
            logs.push_back(make_record("s" + std::to_string(i), repeat_choice('B', 'B', 10), "en",
                                       "bos", bos));
        const auto rows = coordination_series(logs, {});
        REQUIRE(rows.size() == 10);
        for (const auto& row : rows) {
            CHECK(row.mean == Approx(-0.2).margin(1e-12));
            CHECK(row.n == 10);
        }
    }
    SECTION("PD logs are not coordination observations") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'B', 10))};
        CHECK(coordination_series(logs, {}).empty());
    }
}

TEST_CASE("message_length_stats counts Unicode scalars per message") {
    SECTION("basic mean") {
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"ab", "abcd"}})};
        const auto rows = message_length_stats(logs, {});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].mean_chars == Approx(3.0));
        CHECK(rows[0].n_messages == 2);
    }
    SECTION("scripted empty messages average zero") {
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"", ""}, {"", ""}})};
        const auto rows = message_length_stats(logs, {});
        CHECK(rows[0].mean_chars == 0.0);
        CHECK(rows[0].n_messages == 4);
    }
    SECTION("multi-byte scripts count scalars, not bytes") {
        CHECK(text::count_scalars("héllo") == 5);
        CHECK(text::count_scalars("الخيار") == 6);
        CHECK(text::count_scalars("Lựa chọn") == 8);
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"héllo", "Lựa"}}, "vn")};
        const auto rows = message_length_stats(logs, {});
        CHECK(rows[0].mean_chars == Approx(4.0)); // (5 + 3) / 2
    }
    SECTION("non-communication logs contribute nothing") {
        std::vector<GameLogRecord> logs = {make_record("a", repeat_choice('A', 'A', 10))};
        CHECK(message_length_stats(logs, {}).empty());
    }
    SECTION("supports personality-pairing and variant groupings") {
        auto a = make_comm_record("a", {{"xx", "xxxx"}});
        auto b = make_comm_record("b", {{"xxxxxx", "xxxxxxxx"}});
        b.personality_pairing = "s_s";
        b.game_variant = "pd_mild";
        std::vector<GameLogRecord> logs = {a, b};
        const auto by_pairing = message_length_stats(logs, {"personality_pairing"});
        REQUIRE(by_pairing.size() == 2);
        CHECK(by_pairing[0].group == std::vector<std::string>{"c_c"});
        CHECK(by_pairing[0].mean_chars == Approx(3.0));
        CHECK(by_pairing[1].group == std::vector<std::string>{"s_s"});
        CHECK(by_pairing[1].mean_chars == Approx(7.0));
        const auto by_variant = message_length_stats(logs, {"game_variant"});
        REQUIRE(by_variant.size() == 2);
        CHECK(by_variant[0].group == std::vector<std::string>{"pd_conventional"});
        CHECK(by_variant[1].group == std::vector<std::string>{"pd_mild"});
    }
}

TEST_CASE("message_length_by_round sums both agents per game") {
    std::vector<GameLogRecord> logs = {
        make_comm_record("a", {{"12345", "1234567"}, {"12345", "1234567"}})};
    const auto rows = message_length_by_round(logs, {});
    REQUIRE(rows.size() == 2);
    for (const auto& row : rows) {
        CHECK(row.mean == Approx(12.0));
        CHECK(row.n == 1);
    }
    SECTION("failed games are excluded entirely") {
        auto failed = make_comm_record("b", {{"xxxxxxxxxx", "y"}, {"z", "w"}});
        failed.status = "failed";
        logs.push_back(failed);
        const auto filtered = message_length_by_round(logs, {});
        REQUIRE(filtered.size() == 2);
        CHECK(filtered[0].mean == Approx(12.0));
        CHECK(filtered[0].n == 1);
    }
}

TEST_CASE("tokenizer splits on word boundaries and lowercases") {
    const auto tokens = text::tokenize_words("Hello, world! Đây là... العقوبة 12x");
    const std::vector<std::string> expected = {"hello", "world", "đây", "là", "العقوبة", "12x"};
    CHECK(tokens == expected);
    CHECK(text::lower_utf8("TRUST Chọn Ơ Ư") == "trust chọn ơ ư");
}

TEST_CASE("word_frequencies filters, ranks and breaks ties") {
    LexiconConfig lexicon;
    lexicon.stopwords["en"] = {};
    lexicon.top_k = 5;

    SECTION("raw counting") {
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"trust trust penalty", ""}})};
        const auto rows = word_frequencies(logs, lexicon);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].token == "trust");
        CHECK(rows[0].count == 2);
        CHECK(rows[0].rank == 1);
        CHECK(rows[1].token == "penalty");
        CHECK(rows[1].count == 1);
    }
    SECTION("game terms and option labels never appear") {
        std::vector<GameLogRecord> logs = {make_comm_record(
            "a", {{"I choose Option A this round", "Option B round choose trust"}})};
        const auto rows = word_frequencies(logs, lexicon);
        for (const auto& row : rows) {
            CHECK(row.token != "choose");
            CHECK(row.token != "round");
            CHECK(row.token != "option");
            CHECK(row.token != "a");
            CHECK(row.token != "b");
        }
        REQUIRE(rows.size() == 3); // i, this, trust
    }
    SECTION("stopwords are dropped") {
        lexicon.stopwords["en"] = {"i", "this"};
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"I trust this plan", ""}})};
        const auto rows = word_frequencies(logs, lexicon);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].token == "plan");
        CHECK(rows[1].token == "trust");
    }
    SECTION("ties break lexicographically") {
        std::vector<GameLogRecord> logs = {
            make_comm_record("a", {{"good bad good bad good bad", ""}})};
        const auto rows = word_frequencies(logs, lexicon);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].token == "bad");
        CHECK(rows[1].token == "good");
    }
    SECTION("missing stopword list names the language") {
        std::vector<GameLogRecord> logs = {make_comm_record("a", {{"xin chào", ""}}, "vn")};
        try {
            word_frequencies(logs, lexicon);
            FAIL("expected AnalysisError");
        } catch (const AnalysisError& e) {
            CHECK(std::string(e.what()).find("'vn'") != std::string::npos);
        }
    }
    SECTION("localized labels are excluded via their tokens") {
        lexicon.stopwords["vn"] = {};
        std::vector<GameLogRecord> logs = {
            make_comm_record("a", {{"tôi chọn Lựa chọn A và tin tưởng", ""}}, "vn")};
        const auto rows = word_frequencies(logs, lexicon);
        for (const auto& row : rows) {
            CHECK(row.token != "chọn");
            CHECK(row.token != "lựa");
            CHECK(row.token != "vòng");
        }
    }
}

TEST_CASE("lexicon loading reads the shipped lists and errors on gaps") {
    const auto lex = load_lexicons(testutil::repo_dir() / "lexicons", {"en", "ar", "vn"});
    CHECK(lex.stopwords.at("en").count("the") == 1);
    CHECK(lex.stopwords.at("ar").count("في") == 1);
    CHECK(lex.stopwords.at("vn").count("và") == 1);
    CHECK_THROWS_AS(load_lexicons(testutil::repo_dir() / "lexicons", {"xx"}), AnalysisError);
}

TEST_CASE("emission is deterministic and structurally sound") {
    testutil::TempDir dir("emit");
    std::vector<GameLogRecord> logs;
    for (int i = 0; i < 4; ++i)
        logs.push_back(make_record("a" + std::to_string(i),
                                   repeat_choice(i % 2 ? 'A' : 'B', 'A', 10),
                                   i < 2 ? "en" : "vn"));
    logs.push_back(make_comm_record("c0", {{"trust me now", "agree and commit"},
                                           {"steady plan", "keep the plan"}}));

    AnalyzeOptions options;
    options.emit_svg = true;
    options.lexicon_dir = testutil::repo_dir() / "lexicons";
    const auto first = analyze_all(logs, dir.path / "out1", options);
    const auto second = analyze_all(logs, dir.path / "out2", options);
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
        CHECK(testutil::read_file(first[i]) == testutil::read_file(second[i]));
    }

    SECTION("payoff CSV has one header and one row per group") {
        const auto csv = testutil::read_file(dir.path / "out1" /
                                             "payoff_totals__communication-game_length-"
                                             "game_variant-language-model-personality_pairing-"
                                             "rounds_known.csv");
        // groups: (off,en), (off,vn), (on,en) -> 3 data rows + header
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
        CHECK(csv.rfind("communication,", 0) == 0);
    }
    SECTION("series SVG carries one vertex per round") {
        const auto svg = testutil::read_file(dir.path / "out1" /
                                             "strategy_series__communication-language-model.svg");
        const auto start = svg.find("points=\"");
        REQUIRE(start != std::string::npos);
        const auto end = svg.find('"', start + 8);
        const auto points = svg.substr(start + 8, end - start - 8);
        CHECK(std::count(points.begin(), points.end(), ',') == 10);
    }
    SECTION("payoff SVG has bars") {
        const auto svg = testutil::read_file(dir.path / "out1" /
                                             "payoff_totals__communication-game_length-"
                                             "game_variant-language-model-personality_pairing-"
                                             "rounds_known.svg");
        CHECK(svg.find("<rect") != std::string::npos);
    }
}

TEST_CASE("independent recount script agrees with the pipeline") {
    // Generate a real mock run, then have the Python oracle recount it.
    auto cfg = load_config(testutil::repo_dir() / "configs/mock_demo.json");
    cfg.repetitions = 1;
    cfg.communication_variants = {true};
    testutil::TempDir dir("recount");
    const auto log = dir.path / "log.jsonl";
    Gateway gateway;
    GameRunner runner(cfg, gateway);
    const auto summary = runner.run(log, {});
    REQUIRE(summary.completed == 12);

    const auto records = read_log(log);
    auto lexicon = load_lexicons(testutil::repo_dir() / "lexicons", {"en", "vn"});
    lexicon.top_k = 8;
    const auto ours = word_frequencies(records, lexicon);
    REQUIRE_FALSE(ours.empty());

    const std::string script = (testutil::repo_dir() / "tools/recount_words.py").string();
    const auto result = testutil::run_command(
        "python3 " + script + " " + log.string() + " --lexicons " +
        (testutil::repo_dir() / "lexicons").string() + " --top-k 8");
    REQUIRE(result.exit_code == 0);

    std::string expected = "language,game,rank,token,count\n";
    for (const auto& row : ours)
        expected += row.language + "," + row.game + "," + std::to_string(row.rank) + "," +
                    row.token + "," + std::to_string(row.count) + "\n";
    CHECK(result.output.find(expected) != std::string::npos);

    // Message-length recount: exact sums and counts per (game, language).
    const auto stats = message_length_stats(records, {"game", "language"});
    for (const auto& row : stats) {
        const std::string needle = "msglen," + row.group[0] + "," + row.group[1] + "," +
                                   std::to_string(static_cast<long long>(
                                       row.mean_chars * static_cast<double>(row.n_messages) + 0.5)) +
                                   "," + std::to_string(row.n_messages) + "\n";
        CHECK(result.output.find(needle) != std::string::npos);
    }
}
