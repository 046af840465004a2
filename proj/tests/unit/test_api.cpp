#include "pairscore/api.hpp"
#include "pairscore/json_io.hpp"
#include "pairscore/pipeline.hpp"
#include "pairscore/ranking.hpp"

#include <doctest.h>
#include <httplib.h>

#include <fstream>
#include <sstream>
#include <thread>

using namespace pairscore;
using namespace pairscore::api;
using json = nlohmann::json;

namespace {

const std::string kFixtures = PAIRSCORE_FIXTURE_DIR;

struct Harness {
    Datastore store;
    Timestamp now = 1704240000;
    Service service;

    explicit Harness(Config c = make_config()) : service(store, std::move(c), [this] { return now; }) {}

    static Config make_config() {
        Config c;
        c.admin_token = "root";
        c.trusted_domains_file = std::string(kFixtures) + "/trusted_domains.txt";
        return c;
    }

    Response call(const std::string& method, const std::string& path, const json& body = nullptr,
                  std::optional<std::string> token = std::nullopt,
                  std::map<std::string, std::string> query = {}) {
        Request r{method, path, std::move(query), body.is_null() ? "" : body.dump(), std::move(token)};
        return service.handle(r);
    }

    std::string account(const std::string& name, const std::optional<std::string>& email = std::nullopt) {
        auto res = call("POST", "/admin/accounts", {{"name", name}}, "root");
        REQUIRE(res.status == 201);
        const auto token = json::parse(res.body)["token"].get<std::string>();
        if (email) {
            REQUIRE(call("POST", "/auth/email-verified", {{"account", name}, {"email", *email}}, "root").status ==
                    200);
        }
        return token;
    }

    json compare(const std::string& token, const std::string& a, const std::string& b, int slider,
                 int criterion = 1, int expect = 201) {
        auto res = call("POST", "/comparisons",
                        {{"entity_a", a}, {"entity_b", b}, {"slider", slider}, {"criterion", criterion}}, token);
        CHECK(res.status == expect);
        return json::parse(res.body);
    }
};

json body(const Response& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("every JSON response carries the schema version") {
    Harness h;
    for (const auto& r : {h.call("GET", "/health"), h.call("GET", "/nope"), h.call("POST", "/comparisons"),
                          h.call("GET", "/recommendations", nullptr, std::nullopt, {{"weights", "zz"}})}) {
        CHECK(body(r)["schema_version"] == json_io::kSchemaVersion);
    }
    CHECK(h.call("GET", "/nope").status == 404);
}

TEST_CASE("POST /comparisons") {
    Harness h;
    const auto ann = h.account("ann");
    const auto res = h.compare(ann, "x", "y", 100);
    CHECK(res["rating"] == 1.0);
    CHECK(res["comparison"]["submitted_at"] == h.now);
    const auto again = h.compare(ann, "y", "x", 0);
    CHECK(again["id"] == res["id"]);
    CHECK(again["rating"] == -1.0);
    h.compare(ann, "x", "x", 50, 1, 400);
    h.compare(ann, "x", "y", 101, 1, 400);
    h.compare(ann, "x", "y", 50, 0, 400);
    CHECK(h.call("POST", "/comparisons", {{"entity_a", "x"}, {"entity_b", "y"}, {"slider", 1}}).status == 401);
    CHECK(h.call("POST", "/comparisons", {{"entity_a", "x"}, {"entity_b", "y"}, {"slider", 1}}, "bogus").status ==
          401);
    auto raw = Request{"POST", "/comparisons", {}, "{not json", ann};
    CHECK(h.service.handle(raw).status == 400);
    CHECK(h.store.comparison_count() == 1);
}

TEST_CASE("refit is admin only and publishes a complete snapshot") {
    Harness h;
    const auto ann = h.account("ann", "ann@epfl.ch");
    CHECK(h.call("POST", "/admin/refit").status == 401);
    CHECK(h.call("POST", "/admin/refit", nullptr, ann).status == 403);

    auto empty = h.call("POST", "/admin/refit", nullptr, "root");
    CHECK(empty.status == 200);
    CHECK(body(empty)["converged"] == true);

    h.compare(ann, "x", "y", 90);
    h.compare(ann, "y", "z", 80);
    const auto res = body(h.call("POST", "/admin/refit", nullptr, "root"));
    CHECK(res["verified_contributors"] == 1);
    CHECK(res["diagnostics"].size() == 10);
    CHECK(h.store.read_current_scoreboards()->id == res["snapshot_id"]);
    CHECK(body(h.call("GET", "/health"))["snapshot_id"] == res["snapshot_id"]);
}

TEST_CASE("recommendations follow the published snapshot") {
    Harness h;
    const auto ann = h.account("ann", "ann@who.int");
    const auto bob = h.account("bob", "bob@rsf.org");
    h.compare(ann, "x", "y", 95);
    h.compare(ann, "y", "z", 90);
    h.compare(bob, "x", "z", 99);
    h.compare(bob, "x", "y", 10, 5);
    h.call("POST", "/admin/refit", nullptr, "root");

    const auto snap = h.store.read_current_scoreboards();
    const auto expected = weighted_rank(snap->score_matrix(), CriterionWeights::parse("q1:1,q5:0.5"));
    const auto got = body(h.call("GET", "/recommendations", nullptr, std::nullopt, {{"weights", "q1:1,q5:0.5"}}));
    REQUIRE(got["items"].size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(got["items"][i]["entity"] == expected[i].entity.value);
        CHECK(got["items"][i]["score"].get<double>() == expected[i].score);
    }
    CHECK(got["items"][0]["entity"] == "z");

    // Scale invariance of the order.
    const auto one = body(h.call("GET", "/recommendations", nullptr, std::nullopt, {{"weights", "q1:1"}}));
    const auto two = body(h.call("GET", "/recommendations", nullptr, std::nullopt, {{"weights", "q1:2"}}));
    for (std::size_t i = 0; i < one["items"].size(); ++i) {
        CHECK(one["items"][i]["entity"] == two["items"][i]["entity"]);
    }
    // Default weights are criterion 1 only.
    CHECK(body(h.call("GET", "/recommendations"))["items"] == one["items"]);

    // Pagination is a window on the same order.
    const auto page = body(h.call("GET", "/recommendations", nullptr, std::nullopt,
                                  {{"weights", "q1:1"}, {"limit", "1"}, {"offset", "1"}}));
    REQUIRE(page["items"].size() == 1);
    CHECK(page["items"][0] == one["items"][1]);
    CHECK(page["total"] == 3);

    // New comparisons do not move recommendations until the next refit.
    h.compare(ann, "z", "x", 100);
    CHECK(body(h.call("GET", "/recommendations"))["items"] == one["items"]);

    for (const char* bad : {"q0:1", "q1:0", "q1:-1", "x", "q1:1,q1:2"}) {
        CAPTURE(bad);
        CHECK(h.call("GET", "/recommendations", nullptr, std::nullopt, {{"weights", bad}}).status == 400);
    }
    CHECK(h.call("GET", "/recommendations", nullptr, std::nullopt, {{"limit", "-3"}}).status == 400);
}

TEST_CASE("entity scores") {
    Harness h;
    const auto ann = h.account("ann", "ann@epfl.ch");
    h.compare(ann, "x", "y", 80);
    h.call("POST", "/rate-later", {{"entity", "fresh"}}, ann);
    h.call("POST", "/admin/refit", nullptr, "root");
    const auto x = body(h.call("GET", "/entities/x/scores"));
    REQUIRE(x["criteria"].size() == 10);
    const auto& board = h.store.read_current_scoreboards()->board(Criterion(1));
    CHECK(x["criteria"][0]["score"].get<double>() == board.rho.at({"x"}));
    CHECK(x["criteria"][0]["comparison_count"] == 1);
    CHECK(x["criteria"][0]["score"].get<double>() < 0.0);
    const auto fresh = body(h.call("GET", "/entities/fresh/scores"));
    for (const auto& c : fresh["criteria"]) {
        CHECK(c["score"] == 0.0);
        CHECK(c["comparison_count"] == 0);
    }
    CHECK(h.call("GET", "/entities/ghost/scores").status == 404);
}

TEST_CASE("individual scores for verified and non-verified contributors") {
    Harness h;
    const auto ann = h.account("ann", "ann@epfl.ch");
    const auto eve = h.account("eve", "eve@gmail.com");
    CHECK(h.call("GET", "/me/scores").status == 401);
    CHECK(body(h.call("GET", "/me/scores", nullptr, eve))["criteria"].empty());

    h.compare(ann, "x", "y", 90);
    h.compare(ann, "y", "z", 70);
    h.compare(eve, "x", "z", 10);
    h.call("POST", "/admin/refit", nullptr, "root");
    const auto snap = h.store.read_current_scoreboards();

    const auto mine = body(h.call("GET", "/me/scores", nullptr, ann));
    CHECK(mine["verified"] == true);
    REQUIRE(mine["criteria"].size() == 1);
    for (const auto& [e, v] : snap->board(Criterion(1)).theta.at({"ann"})) {
        CHECK(mine["criteria"][0]["scores"][e.value].get<double>() == v);
    }

    const auto theirs = body(h.call("GET", "/me/scores", nullptr, eve));
    CHECK(theirs["verified"] == false);
    REQUIRE(theirs["criteria"].size() == 1);
    ContributorData d{{"eve"}, {{{"x"}, {"z"}, -0.8, 1.0}}};
    const auto expect = fit_nonverified(d, snap->board(Criterion(1)), snap->hyperparams);
    CHECK(theirs["criteria"][0]["scores"]["x"].get<double>() == doctest::Approx(expect.at({"x"})).epsilon(1e-12));
    CHECK(theirs["criteria"][0]["scores"]["z"].get<double>() == doctest::Approx(expect.at({"z"})).epsilon(1e-12));
}

TEST_CASE("vouching") {
    Harness h;
    const auto v1 = h.account("v1", "a@epfl.ch");
    const auto v2 = h.account("v2", "b@epfl.ch");
    const auto u = h.account("u");
    const auto w = h.account("w");
    CHECK(h.call("POST", "/vouch", {{"to", "u"}}).status == 401);
    CHECK(h.call("POST", "/vouch", {{"to", "v1"}}, v1).status == 400);
    CHECK(h.call("POST", "/vouch", {{"to", "ghost"}}, v1).status == 404);
    CHECK(h.call("POST", "/vouch", {{"to", "w"}}, u).status == 400);  // no power yet

    auto first = body(h.call("POST", "/vouch", {{"to", "u"}}, v1));
    CHECK(first["created"] == true);
    CHECK(first["vouchee_certified"] == false);
    CHECK(body(h.call("POST", "/vouch", {{"to", "u"}}, v1))["created"] == false);
    CHECK(body(h.call("POST", "/vouch", {{"to", "u"}}, v2))["vouchee_certified"] == true);
    CHECK(h.call("POST", "/vouch", {{"to", "w"}}, u).status == 200);
    CHECK(h.store.trust_state().certified() == std::set<ContributorId>{{"v1"}, {"v2"}, {"u"}});
}

TEST_CASE("email verification callback and trusted domains") {
    Harness h;
    h.account("ann", "ann@EPFL.ch");
    h.account("bob", "bob@gmail.com");
    CHECK(h.store.account({"ann"})->email_verified);
    CHECK_FALSE(h.store.account({"bob"})->email_verified);
    const auto ann = h.store.account_for_token(
        json::parse(h.call("POST", "/admin/accounts", {{"name", "ann"}, {"token", "t-ann"}}, "root").body)["token"]);
    CHECK(ann == ContributorId{"ann"});
    CHECK(h.call("POST", "/auth/email-verified", {{"account", "ann"}, {"email", "x@epfl.ch"}}, "t-ann").status ==
          403);
    CHECK(h.call("POST", "/auth/email-verified", {{"account", "ann"}, {"email", "nope"}}, "root").status == 400);

    // Editing the list in memory only (no file configured).
    Config c;
    c.admin_token = "root";
    Harness g(c);
    g.account("bob", "bob@gmail.com");
    CHECK_FALSE(g.store.account({"bob"})->email_verified);
    const auto res = g.call("PUT", "/admin/trusted-domains", {{"domains", {"gmail.com", "@Who.int"}}}, "root");
    CHECK(res.status == 200);
    CHECK(body(res)["domains"] == json::array({"gmail.com", "who.int"}));
    CHECK(g.store.account({"bob"})->email_verified);
    CHECK(g.call("PUT", "/admin/trusted-domains", {{"domains", {"*.edu"}}}, "root").status == 400);
}

TEST_CASE("privacy toggles feed the export") {
    Harness h;
    const auto ann = h.account("ann");
    h.compare(ann, "x", "y", 70);
    const std::string header = std::string(csv::kPublicHeader) + "\n";
    CHECK(h.call("GET", "/export/public.csv").body == header);
    CHECK(h.call("POST", "/privacy", {{"entity", "x"}, {"visibility", "public"}}, ann).status == 200);
    CHECK(h.call("POST", "/privacy", {{"entity", "y"}, {"visibility", "public"}}, ann).status == 200);
    const auto open = h.call("GET", "/export/public.csv");
    CHECK(open.content_type.rfind("text/csv", 0) == 0);
    CHECK(open.body == header + "ann,x,y,Should be largely recommended,70,3,2024-01-01\n");
    h.call("POST", "/privacy", {{"entity", "y"}, {"visibility", "private"}}, ann);
    CHECK(h.call("GET", "/export/public.csv").body == header);
    h.call("POST", "/privacy", {{"entity", "y"}, {"visibility", "public"}}, ann);
    CHECK(h.call("GET", "/export/public.csv").body == open.body);
    CHECK(h.call("POST", "/privacy", {{"entity", "y"}, {"visibility", "open"}}, ann).status == 400);
    CHECK(h.call("POST", "/privacy", {{"entity", "ghost"}, {"visibility", "public"}}, ann).status == 404);
}

TEST_CASE("personal information") {
    Harness h;
    const auto ann = h.account("ann");
    CHECK(h.call("POST", "/me/personal-info", {{"name", "degrees"}, {"value", "MSc"}, {"public", true}}, ann).status ==
          200);
    h.call("POST", "/me/personal-info", {{"name", "age_range"}, {"value", "30-39"}}, ann);
    CHECK(body(h.call("GET", "/me/personal-info", nullptr, ann))["fields"].size() == 2);
    const auto pub = body(h.call("GET", "/contributors/ann/personal-info"));
    CHECK(pub["fields"] == json{{"degrees", "MSc"}});
    CHECK(h.call("GET", "/contributors/ghost/personal-info").status == 404);
}

TEST_CASE("rate-later and pair suggestions") {
    Harness h;
    const auto ann = h.account("ann");
    CHECK(h.call("GET", "/suggestions/pair", nullptr, ann).status == 409);
    CHECK(h.call("GET", "/suggestions/pair").status == 401);

    CHECK(body(h.call("POST", "/rate-later", {{"entity", "b"}}, ann))["added"] == true);
    h.now += 1;
    CHECK(body(h.call("POST", "/rate-later", {{"entity", "a"}}, ann))["added"] == true);
    CHECK(body(h.call("POST", "/rate-later", {{"entity", "b"}}, ann))["added"] == false);
    CHECK(body(h.call("GET", "/rate-later", nullptr, ann))["items"].size() == 2);

    auto s = body(h.call("GET", "/suggestions/pair", nullptr, ann));
    CHECK(s["entity_a"] == "b");
    CHECK(s["entity_b"] == "a");
    CHECK(s["reason"] == "rate_later");

    h.compare(ann, "a", "b", 60);
    CHECK(body(h.call("DELETE", "/rate-later/a", nullptr, ann))["removed"] == true);
    CHECK(body(h.call("DELETE", "/rate-later/a", nullptr, ann))["removed"] == false);
    CHECK(body(h.call("DELETE", "/rate-later/b", nullptr, ann))["removed"] == true);

    // Densify: anchor on a rated entity, partner with the least-compared one.
    const auto bob = h.account("bob");
    h.compare(bob, "c", "d", 50);
    h.compare(bob, "c", "a", 50);
    // degrees: a 2, b 1, c 2, d 1; ann rated a, b.
    s = body(h.call("GET", "/suggestions/pair", nullptr, ann));
    CHECK(s["reason"] == "densify");
    CHECK(s["entity_a"] == "b");
    CHECK(s["entity_b"] == "d");
    CHECK(body(h.call("GET", "/suggestions/pair", nullptr, ann)) == s);  // deterministic
}

TEST_CASE("stats endpoint") {
    Harness h;
    const auto ann = h.account("ann", "ann@epfl.ch");
    h.compare(ann, "x", "y", 80);
    h.compare(ann, "p", "q", 20);
    h.call("POST", "/admin/refit", nullptr, "root");
    const auto s = body(h.call("GET", "/stats"));
    CHECK(s["total_comparisons"] == 2);
    CHECK(s["component_count"] == 2);
    CHECK(s["contribution_counts"]["ann"] == 2);
    CHECK(s["correlations"]["matrix"].size() == 10);
    CHECK(s["pareto_rank_histogram"].is_object());
}

TEST_CASE("per-token write cap") {
    Config c = Harness::make_config();
    c.write_cap_per_minute = 3;
    Harness h(c);
    const auto ann = h.account("ann");
    for (int i = 0; i < 3; ++i) h.compare(ann, "x", "y", 50 + i);
    h.compare(ann, "x", "y", 60, 1, 429);
    h.now += 60;
    h.compare(ann, "x", "y", 61);
}

TEST_CASE("config file and environment overrides") {
    const auto dir = std::filesystem::temp_directory_path() / "pairscore_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "config.json");
        out << R"({"port": 9099, "data_dir": "data", "trusted_domains_file": "/etc/domains.txt",
                   "hyperparams": {"lambda": 0.5}, "write_cap_per_minute": 10})";
    }
    auto c = load_config(dir / "config.json");
    CHECK(c.port == 9099);
    CHECK(c.data_dir == dir / "data");
    CHECK(c.trusted_domains_file == std::filesystem::path("/etc/domains.txt"));
    CHECK(c.hyperparams.lambda == 0.5);
    CHECK(c.hyperparams.nu == 1.0);

    std::map<std::string, std::string> env{{"PAIRSCORE_PORT", "7000"}, {"PAIRSCORE_NU", "0.25"},
                                           {"PAIRSCORE_DATA_DIR", "/tmp/x"}};
    apply_env_overrides(c, [&](const char* k) -> const char* {
        auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    CHECK(c.port == 7000);
    CHECK(c.hyperparams.nu == 0.25);
    CHECK(c.data_dir == std::filesystem::path("/tmp/x"));

    env = {{"PAIRSCORE_LAMBDA", "-1"}};
    CHECK_THROWS_AS(apply_env_overrides(c, [&](const char* k) -> const char* {
                        auto it = env.find(k);
                        return it == env.end() ? nullptr : it->second.c_str();
                    }),
                    ValidationError);
    {
        std::ofstream out(dir / "bad.json");
        out << R"({"prot": 1})";
    }
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ValidationError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("HTTP transport round trip") {
    Harness h;
    HttpServer server(h.service);
    REQUIRE(server.bind("127.0.0.1", 0));
    std::thread t([&] { server.run(); });
    httplib::Client client("127.0.0.1", server.port());
    for (int i = 0; i < 100; ++i) {
        if (client.Get("/health")) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    auto health = client.Get("/health");
    REQUIRE(health);
    CHECK(health->status == 200);

    httplib::Headers auth{{"Authorization", "Bearer root"}};
    auto acc = client.Post("/admin/accounts", auth, R"({"name":"ann","token":"tok"})", "application/json");
    REQUIRE(acc);
    CHECK(acc->status == 201);
    auto cmp = client.Post("/comparisons", {{"Authorization", "Bearer tok"}},
                           R"({"entity_a":"x","entity_b":"y","slider":75})", "application/json");
    REQUIRE(cmp);
    CHECK(cmp->status == 201);
    auto rec = client.Get("/recommendations?weights=q1%3A1&limit=5");
    REQUIRE(rec);
    CHECK(rec->status == 200);

    HttpServer clash(h.service);
    CHECK_FALSE(clash.bind("127.0.0.1", server.port()));

    server.stop();
    t.join();
}
