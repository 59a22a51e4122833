#include "lexiscope/csv.hpp"
#include "lexiscope/service.hpp"

#include "support.hpp"

#include <doctest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <thread>

using namespace lexiscope;
using nlohmann::json;

namespace {

std::shared_ptr<const Space> shared_space() {
    static const auto space = [] {
        Rng rng(11);
        return std::make_shared<const Space>(testing::random_space(200, 12, rng));
    }();
    return space;
}

struct Fixture {
    std::shared_ptr<service::CategoryStore> store = std::make_shared<service::CategoryStore>();
    service::Service svc{shared_space(), store, {}};

    Fixture() {
        ::setenv("SOURCE_DATE_EPOCH", "1462622400", 1);
        store->put_generated(testing::make_category("war", {"war", "soldier", "kill"}));
    }

    service::Response post(const std::string& path, const json& body) const {
        return svc.handle("POST", path, body.dump());
    }
};

json body_of(const service::Response& r) { return json::parse(r.body); }

void check_error(const service::Response& r, int status, const std::string& code) {
    CHECK(r.status == status);
    CHECK(r.content_type == "application/json");
    const auto j = body_of(r);
    REQUIRE(j.contains("error"));
    CHECK(j["error"]["code"] == code);
    CHECK(j["error"]["message"].is_string());
    CHECK_FALSE(j["error"]["message"].get<std::string>().empty());
}

// Every label in the response CSV is `label`.
std::string fill_responses(const std::string& tasks_csv, const std::string& label, int workers = 3) {
    const auto tasks = crowd::parse_tasks_csv(tasks_csv);
    std::vector<crowd::WorkerResponse> responses;
    for (const auto& t : tasks)
        for (int w = 0; w < workers; ++w) {
            crowd::WorkerResponse r{t.task_id, "worker" + std::to_string(w), {}};
            for (const auto& word : t.words) r.labels[word] = *crowd::parse_label(label);
            responses.push_back(std::move(r));
        }
    return crowd::format_responses_csv(responses, tasks);
}

}  // namespace

TEST_CASE("analyze counts one raw hit with its span") {
    Fixture f;
    const auto r = f.post("/analyze", {{"text", "the war"}});
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["per_category"]["war"]["raw"] == 1);
    CHECK(j["total_tokens"] == 2);
    REQUIRE(j["matches"].size() == 1);
    CHECK(j["matches"][0]["start"] == 4);
    CHECK(j["matches"][0]["end"] == 7);
    CHECK(j["matches"][0]["word"] == "war");
}

TEST_CASE("analyze on empty text gives zeros") {
    Fixture f;
    const auto j = body_of(f.post("/analyze", {{"text", ""}}));
    CHECK(j["per_category"]["war"]["raw"] == 0);
    CHECK(j["per_category"]["war"]["normalized"] == 0.0);
    CHECK(j["matches"].empty());
    CHECK(j["total_tokens"] == 0);
}

TEST_CASE("analyze output equals the library result byte for byte") {
    Fixture f;
    const std::string text = "Soldiers KILLED the war-weary, and the war went on.";
    const auto r = f.post("/analyze", {{"text", text}, {"categories", {"war"}}});
    const auto expected = analysis_to_json(analyze(text, {*f.store->get("war")}));
    CHECK(r.body == expected.dump());
}

TEST_CASE("analyze rejects unknown categories, oversize text and bad bodies") {
    Fixture f;
    check_error(f.post("/analyze", {{"text", "x"}, {"categories", {"nope"}}}), 400, "unknown_category");
    check_error(f.svc.handle("POST", "/analyze", "{not json"), 400, "bad_request");
    check_error(f.post("/analyze", {{"text", 5}}), 400, "bad_request");

    service::Service small(shared_space(), f.store, {16, 20});
    CHECK(small.handle("POST", "/analyze", json{{"text", std::string(16, 'a')}}.dump()).status == 200);
    check_error(small.handle("POST", "/analyze", json{{"text", std::string(17, 'a')}}.dump()), 413,
                "payload_too_large");
}

TEST_CASE("generate stores the library result and bumps versions") {
    Fixture f;
    const auto r = f.post("/categories/generate", {{"name", "topic"}, {"seeds", {"w3", "w9"}}, {"threshold", 0.3}});
    REQUIRE(r.status == 200);
    const auto stored = category_from_json(body_of(r));
    auto expected = generate({"topic", {"w3", "w9"}, 0.3, 200}, *shared_space());
    CHECK(stored.spec == expected.spec);
    CHECK(stored.members == expected.members);
    CHECK(stored.provenance == expected.provenance);
    CHECK(stored.version == 1);

    const auto again = category_from_json(body_of(f.post("/categories/generate", {{"name", "topic"}, {"seeds", {"w3"}}})));
    CHECK(again.version == 2);
    CHECK(f.store->get("topic")->version == 2);
}

TEST_CASE("generate with every seed out of vocabulary lists them") {
    Fixture f;
    const auto r = f.post("/categories/generate", {{"name", "t"}, {"seeds", {"qqq", "zzz"}}});
    check_error(r, 400, "no_seed_in_vocabulary");
    CHECK(body_of(r)["error"]["out_of_vocabulary"] == json({"qqq", "zzz"}));
    CHECK_FALSE(f.store->get("t"));

    // one known seed is enough
    CHECK(f.post("/categories/generate", {{"name", "t"}, {"seeds", {"qqq", "w1"}}}).status == 200);
}

TEST_CASE("generate validates its fields") {
    Fixture f;
    check_error(f.post("/categories/generate", {{"seeds", {"w1"}}}), 400, "bad_request");
    check_error(f.post("/categories/generate", {{"name", "t"}, {"seeds", json::array()}}), 400, "bad_request");
    check_error(f.post("/categories/generate", {{"name", "t"}, {"seeds", {"w1"}}, {"threshold", 1.5}}), 400,
                "invalid_argument");
    check_error(f.post("/categories/generate", {{"name", "t"}, {"seeds", {"w1"}}, {"max_terms", -3}}), 400,
                "bad_request");
}

TEST_CASE("a stale expected_version is a conflict") {
    Fixture f;
    CHECK(f.post("/categories/generate", {{"name", "war"}, {"seeds", {"w1"}}, {"expected_version", 1}}).status == 200);
    const auto r = f.post("/categories/generate", {{"name", "war"}, {"seeds", {"w2"}}, {"expected_version", 1}});
    check_error(r, 409, "version_conflict");
    CHECK(f.store->get("war")->version == 2);
    CHECK(f.store->get("war")->spec.seeds == std::vector<std::string>{"w1"});
}

TEST_CASE("list and fetch return stored documents") {
    Fixture f;
    const auto list = body_of(f.svc.handle("GET", "/categories", ""));
    REQUIRE(list["categories"].size() == 1);
    CHECK(list["categories"][0]["name"] == "war");
    CHECK(list["categories"][0]["size"] == 3);
    CHECK(list["categories"][0]["status"] == "unvalidated");

    const auto fetched = f.svc.handle("GET", "/categories/war", "");
    REQUIRE(fetched.status == 200);
    CHECK(category_from_json(body_of(fetched)) == *f.store->get("war"));

    check_error(f.svc.handle("GET", "/categories/nope", ""), 404, "not_found");
    check_error(f.svc.handle("GET", "/nowhere", ""), 404, "not_found");
    check_error(f.svc.handle("DELETE", "/categories", ""), 405, "method_not_allowed");
    check_error(f.svc.handle("GET", "/analyze", ""), 405, "method_not_allowed");
}

TEST_CASE("GET does not change state") {
    Fixture f;
    const auto before = f.store->list();
    for (int i = 0; i < 3; ++i) {
        f.svc.handle("GET", "/categories", "");
        f.svc.handle("GET", "/categories/war", "");
    }
    CHECK(f.store->list() == before);
}

TEST_CASE("crowd export and import through the API") {
    Fixture f;
    std::vector<std::string> words;
    for (int i = 0; i < 40; ++i) words.push_back("w" + std::to_string(i));
    f.store->put_generated(testing::make_category("forty", words));

    const auto exported = f.svc.handle("POST", "/crowd/export/forty", "");
    REQUIRE(exported.status == 200);
    CHECK(exported.content_type == "text/csv");
    const auto tasks = crowd::parse_tasks_csv(exported.body);
    CHECK(tasks.size() == 2);
    CHECK(csv::parse(exported.body).size() == 41);

    SUBCASE("all unrelated empties the category") {
        const auto csv_body = fill_responses(exported.body, "unrelated");
        const auto r = f.svc.handle("POST", "/crowd/import/forty", csv_body);
        REQUIRE(r.status == 200);
        const auto j = body_of(r);
        CHECK(j["category"]["status"] == "crowd-filtered");
        CHECK(j["report"]["kept"] == 0);
        CHECK(j["report"]["judged"] == 40);

        const auto fetched = category_from_json(body_of(f.svc.handle("GET", "/categories/forty", "")));
        CHECK(fetched.members.empty());
        CHECK(fetched.status == CategoryStatus::crowd_filtered);
        CHECK(fetched.version == 2);

        // repeated import: same content, next version
        const auto again = category_from_json(
            body_of(f.svc.handle("POST", "/crowd/import/forty", csv_body))["category"]);
        CHECK(again.members == fetched.members);
        CHECK(again.status == fetched.status);
        CHECK(again.version == 3);

        // export still works from the unfiltered generation
        CHECK(crowd::parse_tasks_csv(f.svc.handle("POST", "/crowd/export/forty", "").body).size() == 2);
    }
    SUBCASE("all strongly keeps everything") {
        const auto r = f.svc.handle("POST", "/crowd/import/forty", fill_responses(exported.body, "strongly"));
        const auto c = category_from_json(body_of(r)["category"]);
        CHECK(c.member_words() == words);
        CHECK(c.status == CategoryStatus::crowd_filtered);
    }
    SUBCASE("malformed CSV is 422 with a row number") {
        auto csv_body = fill_responses(exported.body, "related");
        const auto pos = csv_body.find("related");
        csv_body.replace(pos, 7, "kinda");
        const auto r = f.svc.handle("POST", "/crowd/import/forty", csv_body);
        check_error(r, 422, "malformed_csv");
        CHECK(body_of(r)["error"]["message"].get<std::string>().find("row 2") != std::string::npos);
        CHECK(f.store->get("forty")->version == 1);

        check_error(f.svc.handle("POST", "/crowd/import/forty", "task_id,worker_id\n"), 422, "malformed_csv");
        // a worker skipping one task's word breaks the quorum
        const auto partial = fill_responses(exported.body, "related", 2);
        check_error(f.svc.handle("POST", "/crowd/import/forty", partial), 422, "malformed_csv");
    }
    SUBCASE("unknown names are 404") {
        check_error(f.svc.handle("POST", "/crowd/export/nope", ""), 404, "not_found");
        check_error(f.svc.handle("POST", "/crowd/import/nope", "x"), 404, "not_found");
    }
}

TEST_CASE("a file-backed store survives a restart") {
    testing::TempDir dir("store");
    {
        auto store = std::make_shared<service::CategoryStore>(dir.path().string());
        service::Service svc(shared_space(), store);
        CHECK(svc.handle("POST", "/categories/generate", json{{"name", "Social Media"}, {"seeds", {"w4"}}}.dump())
                  .status == 200);
        const auto tasks_csv = svc.handle("POST", "/crowd/export/Social Media", "").body;
        CHECK(svc.handle("POST", "/crowd/import/Social Media", fill_responses(tasks_csv, "unrelated")).status == 200);
    }
    CHECK(std::filesystem::exists(dir.file("social_media.json")));
    CHECK(std::filesystem::exists(dir.file("social_media.generated.json")));
    service::CategoryStore reopened(dir.path().string());
    const auto c = reopened.get("Social Media");
    REQUIRE(c);
    CHECK(c->version == 2);
    CHECK(c->members.empty());
    REQUIRE(reopened.base("Social Media"));
    CHECK_FALSE(reopened.base("Social Media")->members.empty());
}

TEST_CASE("the HTTP server forwards to handle") {
    Fixture f;
    service::Service svc(shared_space(), f.store);
    const int port = svc.bind_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server([&] { svc.listen_after_bind(); });

    httplib::Client client("127.0.0.1", port);
    client.set_connection_timeout(5);
    const std::string body = json{{"text", "the war"}}.dump();
    auto res = client.Post("/analyze", body, "application/json");
    for (int i = 0; !res && i < 50; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        res = client.Post("/analyze", body, "application/json");
    }
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body == f.svc.handle("POST", "/analyze", body).body);

    auto missing = client.Get("/categories/nope");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"]["code"] == "not_found");

    svc.stop();
    server.join();
}

TEST_CASE("resolve_port reads the environment") {
    ::unsetenv("LEXISCOPE_PORT");
    CHECK(service::resolve_port(8080) == 8080);
    ::setenv("LEXISCOPE_PORT", "9123", 1);
    CHECK(service::resolve_port(8080) == 9123);
    ::unsetenv("LEXISCOPE_PORT");
}
