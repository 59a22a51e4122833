#include "lexiscope/crowd.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace lexiscope;
using namespace lexiscope::crowd;

namespace {

Category numbered(std::size_t n) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back("t" + std::to_string(i));
    return testing::make_category("social media", words);
}

// One response per worker per task, labels drawn by `pick(worker, word)`.
template <class Pick>
std::vector<WorkerResponse> fill(const std::vector<LabelTask>& tasks, int workers, Pick pick) {
    std::vector<WorkerResponse> out;
    for (const auto& t : tasks)
        for (int w = 0; w < workers; ++w) {
            WorkerResponse r{t.task_id, "worker" + std::to_string(w), {}};
            for (const auto& word : t.words) r.labels[word] = pick(w, word);
            out.push_back(std::move(r));
        }
    return out;
}

std::vector<WorkerResponse> triple(Label a, Label b, Label c) {
    return {{"t", "w1", {{"word", a}}}, {"t", "w2", {{"word", b}}}, {"t", "w3", {{"word", c}}}};
}

}  // namespace

TEST_CASE("labels parse and print") {
    for (Label l : all_labels) CHECK(parse_label(to_string(l)) == l);
    CHECK(parse_label("Strongly") == Label::strongly);
    CHECK_FALSE(parse_label("kinda"));
}

TEST_CASE("chunking") {
    const auto two_hundred = chunk_tasks(numbered(200));
    CHECK(two_hundred.size() == 10);
    const auto twenty_one = chunk_tasks(numbered(21));
    REQUIRE(twenty_one.size() == 2);
    CHECK(twenty_one[0].words.size() == 20);
    CHECK(twenty_one[1].words.size() == 1);
    CHECK(twenty_one[0].task_id == "social_media-001");
    CHECK(twenty_one[1].task_id == "social_media-002");
    CHECK(twenty_one[0].category == "social media");
    CHECK(twenty_one[0].prompt.find("social media") != std::string::npos);
    CHECK(chunk_tasks(numbered(20)).size() == 1);
    CHECK(chunk_tasks(numbered(0)).empty());
    CHECK_THROWS_AS(chunk_tasks(numbered(3), 0), Error);
}

TEST_CASE("property: chunks partition the member list in order") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto c = numbered(rng.below(120));
        const std::size_t per = 1 + rng.below(25);
        const auto tasks = chunk_tasks(c, per);
        CHECK(tasks.size() == (c.members.size() + per - 1) / per);
        std::vector<std::string> joined;
        for (const auto& t : tasks) {
            CHECK(!t.words.empty());
            CHECK(t.words.size() <= per);
            joined.insert(joined.end(), t.words.begin(), t.words.end());
        }
        CHECK(joined == c.member_words());
    }
}

TEST_CASE("cost arithmetic is exact") {
    CHECK(estimate_cost(10, 3, Money::parse("0.14")).to_string() == "4.20");
    CHECK(estimate_cost(10).to_string() == "4.20");
    CHECK(estimate_cost(0, 3, Money::parse("0.14")).to_string() == "0.00");
    CHECK(estimate_cost(7, 3, Money::parse("0.14")).to_string() == "2.94");
    CHECK(estimate_cost(10, 3, Money::parse("0.14")) == Money::from_units(42000));
    // 0.1 has no exact binary form; ten of them still make exactly 1
    CHECK(estimate_cost(10, 1, Money::parse("$0.10")).to_string() == "1.00");
    CHECK(Money::parse("0.0125").to_string() == "0.0125");
    CHECK(Money::parse("4").to_string() == "4.00");
    CHECK_THROWS_AS(Money::parse("0.00001"), Error);
    CHECK_THROWS_AS(Money::parse("abc"), Error);
    CHECK_THROWS_AS(Money::parse(""), Error);
}

TEST_CASE("examples of the two-of-three rule") {
    CHECK(aggregate(triple(Label::related, Label::strongly, Label::unrelated)).words[0].verdict == Verdict::keep);
    CHECK(aggregate(triple(Label::unrelated, Label::unrelated, Label::strongly)).words[0].verdict == Verdict::remove);
}

TEST_CASE("all 64 label triples match the enumerated rule") {
    int kept = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                // independent oracle: count the labels that are not "unrelated"
                const int relevant = (a > 0) + (b > 0) + (c > 0);
                const Verdict expected = relevant >= 2 ? Verdict::keep : Verdict::remove;
                const auto report = aggregate(triple(Label(a), Label(b), Label(c)));
                CHECK(report.words[0].verdict == expected);
                CHECK(report.words[0].relevant_votes == relevant);
                kept += expected == Verdict::keep;
            }
    // 27 triples with no "unrelated" + 27 with exactly one
    CHECK(kept == 54);
}

TEST_CASE("stricter keep boundary") {
    const auto r = aggregate(triple(Label::weakly, Label::weakly, Label::related), {3, Label::related});
    CHECK(r.words[0].verdict == Verdict::remove);
    CHECK(r.words[0].relevant_votes == 1);
}

TEST_CASE("larger quorums use a strict majority") {
    auto votes = [](std::initializer_list<Label> labels) {
        std::vector<WorkerResponse> out;
        int i = 0;
        for (Label l : labels) out.push_back({"t", "w" + std::to_string(i++), {{"x", l}}});
        return out;
    };
    using L = Label;
    CHECK(aggregate(votes({L::weakly, L::weakly, L::unrelated, L::unrelated}), {4}).kept() == 0);
    CHECK(aggregate(votes({L::weakly, L::weakly, L::weakly, L::unrelated}), {4}).kept() == 1);
    CHECK(aggregate(votes({L::weakly, L::weakly, L::weakly, L::unrelated, L::unrelated}), {5}).kept() == 1);
    CHECK(aggregate(votes({L::weakly}), {1}).kept() == 1);
}

TEST_CASE("quorum violations name the word") {
    std::vector<WorkerResponse> two{{"t", "a", {{"lonely", Label::weakly}}}, {"t", "b", {{"lonely", Label::weakly}}}};
    try {
        aggregate(two);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::quorum);
        CHECK(std::string(e.what()).find("lonely") != std::string::npos);
    }
}

TEST_CASE("rates") {
    using L = Label;
    std::vector<WorkerResponse> r{
        {"t", "1", {{"a", L::strongly}, {"b", L::weakly}, {"c", L::unrelated}, {"d", L::unrelated}}},
        {"t", "2", {{"a", L::related}, {"b", L::unrelated}, {"c", L::unrelated}, {"d", L::unrelated}}},
        {"t", "3", {{"a", L::weakly}, {"b", L::related}, {"c", L::weakly}, {"d", L::unrelated}}},
    };
    const auto report = aggregate(r);
    // a keep (3/3), b keep (2/3), c remove (1/3), d remove (0/3)
    CHECK(report.kept() == 2);
    CHECK(report.acceptance_rate == 0.5);
    CHECK(report.unanimity_rate == 0.5);
    CHECK(report.minority_relevance_rate == 0.5);
    const auto v = report.verdicts();
    CHECK(v.at("b") == Verdict::keep);
    CHECK(v.at("c") == Verdict::remove);
    CHECK(report.words.front().word == "a");

    const auto tasks = chunk_tasks(numbered(45));
    const auto all_strong = aggregate(fill(tasks, 3, [](int, const std::string&) { return L::strongly; }));
    CHECK(all_strong.acceptance_rate == 1.0);
    CHECK(all_strong.unanimity_rate == 1.0);
    CHECK(all_strong.minority_relevance_rate == 0.0);
}

TEST_CASE("property: worker order and raised labels") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        Label l[3];
        for (auto& x : l) x = Label(rng.below(4));
        const auto base = aggregate(triple(l[0], l[1], l[2])).words[0];
        CHECK(aggregate(triple(l[2], l[0], l[1])).words[0].verdict == base.verdict);
        CHECK(aggregate(triple(l[1], l[2], l[0])).words[0].verdict == base.verdict);
        const auto i = rng.below(3);
        if (l[i] != Label::strongly) {
            Label raised[3] = {l[0], l[1], l[2]};
            raised[i] = Label(static_cast<int>(l[i]) + 1 + static_cast<int>(rng.below(3 - static_cast<int>(l[i]))));
            const auto after = aggregate(triple(raised[0], raised[1], raised[2])).words[0];
            if (base.verdict == Verdict::keep) CHECK(after.verdict == Verdict::keep);
        }
        const auto report = aggregate(triple(l[0], l[1], l[2]));
        CHECK(report.acceptance_rate == static_cast<double>(report.kept()) / report.words.size());
    }
}

TEST_CASE("task CSV round-trip") {
    const auto tasks = chunk_tasks(numbered(40));
    const auto text = format_tasks_csv(tasks);
    CHECK(std::count(text.begin(), text.end(), '\n') == 41);
    CHECK(text.rfind("task_id,category,word,prompt\n", 0) == 0);
    const auto back = parse_tasks_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].words == tasks[0].words);
    CHECK(back[1].prompt == tasks[1].prompt);
    CHECK(back[1].task_id == tasks[1].task_id);
}

TEST_CASE("response CSV validation") {
    const auto tasks = chunk_tasks(testing::make_category("war", {"war", "kill"}));
    const std::string header = "task_id,worker_id,word,label\n";
    auto error_of = [&](const std::string& body) -> std::string {
        try {
            parse_responses_csv(header + body, tasks);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::parse_error);
            return e.what();
        }
        FAIL("expected a parse error");
        return {};
    };
    const std::string ok = "war-001,w1,war,related\nwar-001,w1,kill,strongly\n";
    CHECK(parse_responses_csv(header + ok, tasks).size() == 1);
    CHECK(error_of("war-001,w1,war,kinda\nwar-001,w1,kill,weakly\n") == "row 2: unknown label 'kinda'");
    CHECK(error_of(ok + "war-001,w1,tank,weakly\n").find("row 4: word 'tank'") == 0);
    CHECK(error_of(ok + "war-002,w1,war,weakly\n").find("row 4: unknown task") == 0);
    CHECK(error_of(ok + "war-001,w1,war,weakly\n").find("row 4: duplicate") == 0);
    CHECK(error_of("war-001,w1,war,related\n").find("did not label 'kill'") != std::string::npos);
    CHECK_THROWS_AS(parse_responses_csv("task,worker,word,label\n", tasks), Error);
    CHECK_THROWS_AS(parse_responses_csv(header + "war-001,w1,war\n", tasks), Error);
}

TEST_CASE("export, synthetic fill, import, aggregate, filter") {
    testing::TempDir dir("crowd");
    auto cat = numbered(45);
    const auto tasks = chunk_tasks(cat);
    export_tasks(tasks, dir.file("tasks.csv"));
    const auto reread = parse_tasks_csv(read_file(dir.file("tasks.csv")));
    Rng rng(4);
    const auto responses = fill(reread, 3, [&](int, const std::string&) { return Label(rng.below(4)); });
    write_file(dir.file("responses.csv"), format_responses_csv(responses, reread));
    const auto imported = import_responses(dir.file("responses.csv"), reread);
    CHECK(imported.size() == responses.size());
    const auto report = aggregate(imported);
    CHECK(report.words.size() == 45);
    const auto filtered = apply_crowd_filter(cat, report.verdicts());
    CHECK(filtered.members.size() == report.kept());
    CHECK(filtered.status == CategoryStatus::crowd_filtered);

    const auto csv_report = format_report_csv(report);
    CHECK(csv_report.rfind("word,verdict,relevant_votes,total_votes\n", 0) == 0);
    const auto json = report_to_json(report);
    CHECK(json["judged"] == 45);
    CHECK(json["kept"] == report.kept());
}
