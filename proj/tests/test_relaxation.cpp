#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "certqr/relaxation.hpp"
#include "support.hpp"

using certqr::EntityId;
using certqr::PriorityMode;

namespace {

std::set<std::string> name_set(const certqr::EntityGraph& g, const std::vector<EntityId>& es) {
    std::set<std::string> out;
    for (auto e : es) out.insert(g.entity_name(e));
    return out;
}

} // namespace

TEST_CASE("certqr on the fixture") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);

    SECTION("failing 4-entity query relaxes to 3, visiting all 11 entities") {
        auto out = certqr::certqr(g, 4, support::ids(g, {"Alice", "Bob", "Dan", "Gary"}), dist);
        REQUIRE(out.q_max.size() == 3);
        auto names = name_set(g, out.q_max);
        bool ok = names == std::set<std::string>{"Alice", "Bob", "Dan"} ||
                  names == std::set<std::string>{"Bob", "Dan", "Gary"};
        CHECK(ok);
        CHECK(out.stats.opt_with_cert_calls == 11);
        CHECK(out.stats.entities_visited == 11);
        REQUIRE(out.certificate);
        CHECK(certqr::verify_certificate(g, 4, out.q_max, *out.certificate, dist));
    }
    SECTION("successful query returns itself") {
        auto q = support::ids(g, {"Alice", "Bob", "Dan"});
        auto out = certqr::certqr(g, 4, q, dist);
        CHECK(name_set(g, out.q_max) == std::set<std::string>{"Alice", "Bob", "Dan"});
    }
    SECTION("triangle under D=1 keeps only a pair") {
        auto t = support::triangle();
        certqr::BfsDistances tdist(t);
        auto out = certqr::certqr(t, 1, support::ids(t, {"a", "b", "c"}), tdist);
        CHECK(out.q_max.size() == 2);
    }
    SECTION("entities in different components give an empty outcome") {
        auto g2 = support::graph_from_tsv("a\tr\tb\nc\tr\td\n");
        certqr::BfsDistances d2(g2);
        auto out = certqr::certqr(g2, 6, support::ids(g2, {"a", "c"}), d2);
        CHECK(out.q_max.empty());
        CHECK_FALSE(out.certificate.has_value());
    }
    SECTION("argument errors") {
        CHECK_THROWS_AS(certqr::certqr(g, 4, std::vector<EntityId>{0}, dist),
                        certqr::ArgumentError);
        CHECK_THROWS_AS(certqr::certqr(g, 4, std::vector<EntityId>{0, 99}, dist),
                        certqr::ArgumentError);
        CHECK_THROWS_AS(certqr::certqr(g, 0, support::ids(g, {"Alice", "Bob"}), dist),
                        certqr::ArgumentError);
        // duplicates collapse; a query that is one entity repeated is invalid
        CHECK_THROWS_AS(certqr::certqr(g, 4, std::vector<EntityId>{0, 0}, dist),
                        certqr::ArgumentError);
    }
}

TEST_CASE("est on the fixture at D=4") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);
    auto q = support::ids(g, {"Alice", "Bob", "Dan", "Gary"});
    auto bob = support::id(g, "Bob");

    CHECK(certqr::est(bob, bob, q, 4, dist).size() == 4);
    CHECK(certqr::est(support::id(g, "Erin"), bob, q, 4, dist).size() == 1);
    CHECK(certqr::est(support::id(g, "ISWC2019"), bob, q, 4, dist).size() == 3);

    SECTION("unreachable entities never enter the estimate") {
        auto g2 = support::graph_from_tsv("a\tr\tb\nc\tr\td\n");
        certqr::BfsDistances d2(g2);
        auto q2 = support::ids(g2, {"a", "c", "d"});
        auto e = certqr::est(support::id(g2, "b"), support::id(g2, "a"), q2, 10, d2);
        CHECK(e == std::vector<certqr::EntityId>{support::id(g2, "a")});
    }
}

TEST_CASE("priority modes on the fixture at D=4") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);
    auto q = support::ids(g, {"Alice", "Bob", "Dan", "Gary"});
    auto bob = support::id(g, "Bob");
    auto dan = support::id(g, "Dan");
    auto iswc = support::id(g, "ISWC2019");

    CHECK(certqr::priority(g, dan, dan, q, 4, dist, PriorityMode::plain) == 4.0);
    // hp(Bob|Bob) = dist(Bob,Alice) - 2 = 2, so ds adds 1/2^3
    CHECK(certqr::priority(g, bob, bob, q, 4, dist, PriorityMode::ds) == 4.0 + 1.0 / 8.0);
    // deg(ISWC2019) = 4, so dg adds 1/6
    CHECK(certqr::priority(g, iswc, dan, q, 4, dist, PriorityMode::dg) == 4.0 + 1.0 / 6.0);

    SECTION("floor of every mode equals the plain value") {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 60; ++trial) {
            auto g2 = support::random_graph(rng, 3 + rng() % 10, 1 + rng() % 20);
            certqr::BfsDistances d2(g2);
            auto q2 = support::random_query(rng, g2, 2 + rng() % 3);
            EntityId e = rng() % g2.entity_count();
            EntityId sqe = q2[rng() % q2.size()];
            std::uint32_t D = 1 + rng() % 5;
            double plain = certqr::priority(g2, e, sqe, q2, D, d2, PriorityMode::plain);
            for (auto mode : {PriorityMode::dg, PriorityMode::ds, PriorityMode::dgs}) {
                double pr = certqr::priority(g2, e, sqe, q2, D, d2, mode);
                CHECK(std::floor(pr) == plain);
                CHECK(pr > plain);
                CHECK(pr - plain <= 0.5);
            }
        }
    }
}

TEST_CASE("certqr_plus reproduces the documented fixture run") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);
    auto q = support::ids(g, {"Alice", "Bob", "Dan", "Gary"});

    std::vector<std::tuple<std::string, std::string, double>> enqueued;
    std::vector<std::string> checked;
    certqr::RelaxTrace trace;
    trace.on_enqueue = [&](EntityId e, EntityId sqe, double pr) {
        enqueued.emplace_back(g.entity_name(e), g.entity_name(sqe), pr);
    };
    trace.on_opt_with_cert = [&](EntityId c) { checked.push_back(g.entity_name(c)); };
    certqr::RelaxOptions opts;
    opts.trace = &trace;

    auto out = certqr::certqr_plus(g, 4, q, dist, PriorityMode::plain, opts);

    CHECK(name_set(g, out.q_max) == std::set<std::string>{"Bob", "Dan", "Gary"});
    CHECK(out.stats.opt_with_cert_calls == 4);
    CHECK(checked == std::vector<std::string>{"Bob", "Dan", "Paper02", "ISWC2019"});

    // the twelve frontier elements with their exact priorities
    std::map<std::pair<std::string, std::string>, double> expected{
        {{"Alice", "Alice"}, 3}, {{"Bob", "Bob"}, 4},      {{"Dan", "Dan"}, 4},
        {{"Gary", "Gary"}, 3},   {{"Paper02", "Bob"}, 4},  {{"ISWC2019", "Bob"}, 3},
        {{"Erin", "Bob"}, 1},    {{"Frank", "Bob"}, 2},    {{"ISWC2019", "Dan"}, 4},
        {{"Paper01", "Dan"}, 2}, {{"Paper02", "Dan"}, 3},  {{"Paper03", "Dan"}, 1}};
    REQUIRE(enqueued.size() == 12);
    for (auto& [e, sqe, pr] : enqueued) {
        auto it = expected.find({e, sqe});
        REQUIRE(it != expected.end());
        CHECK(pr == it->second);
        expected.erase(it);
    }
    CHECK(expected.empty());

    // Carol is never visited by any search
    for (auto& [e, sqe, pr] : enqueued) CHECK(e != "Carol");
}

TEST_CASE("certqr_plus fixture cases") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);

    SECTION("2-entity query that is already successful") {
        for (auto mode :
             {PriorityMode::plain, PriorityMode::dg, PriorityMode::ds, PriorityMode::dgs}) {
            auto out = certqr::certqr_plus(g, 4, support::ids(g, {"Alice", "Dan"}), dist, mode);
            CHECK(name_set(g, out.q_max) == std::set<std::string>{"Alice", "Dan"});
        }
    }
    SECTION("disconnected query entities") {
        auto g2 = support::graph_from_tsv("a\tr\tb\nc\tr\td\n");
        certqr::BfsDistances d2(g2);
        auto out = certqr::certqr_plus(g2, 5, support::ids(g2, {"a", "c"}), d2);
        CHECK(out.q_max.empty());
    }
}

TEST_CASE("is_successful") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);
    CHECK(certqr::is_successful(g, 4, support::ids(g, {"Alice", "Bob", "Dan"}), dist));
    CHECK_FALSE(certqr::is_successful(g, 4, support::ids(g, {"Alice", "Bob", "Dan", "Gary"}), dist));
    CHECK_FALSE(certqr::is_successful(g, 3, support::ids(g, {"Alice", "Bob", "Dan"}), dist));
}

TEST_CASE("all priority modes agree with plain on random instances") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 3 + rng() % 14;
        auto g = support::random_graph(rng, n, 1 + rng() % (3 * n));
        certqr::BfsDistances dist(g);
        std::uint32_t D = 1 + rng() % 6;
        auto q = support::random_query(rng, g, 2 + std::min<std::size_t>(rng() % 4, n - 2));

        auto plain = certqr::certqr_plus(g, D, q, dist, PriorityMode::plain);
        auto bfs = certqr::certqr(g, D, q, dist);
        CHECK(plain.q_max.size() == bfs.q_max.size());
        CHECK(plain.stats.opt_with_cert_calls <= plain.stats.entities_visited);
        CHECK(bfs.stats.opt_with_cert_calls <= bfs.stats.entities_visited);
        for (auto mode : {PriorityMode::dg, PriorityMode::ds, PriorityMode::dgs}) {
            auto out = certqr::certqr_plus(g, D, q, dist, mode);
            CHECK(out.q_max.size() == plain.q_max.size());
            if (!out.q_max.empty()) {
                REQUIRE(out.certificate);
                CHECK(certqr::verify_certificate(g, D, out.q_max, *out.certificate, dist));
            }
        }
        CHECK(plain.q_max.size() != 1);
    }
}

TEST_CASE("success is monotone in D") {
    std::mt19937_64 rng(888);
    for (int trial = 0; trial < 80; ++trial) {
        std::size_t n = 3 + rng() % 10;
        auto g = support::random_graph(rng, n, 1 + rng() % (2 * n));
        certqr::BfsDistances dist(g);
        auto q = support::random_query(rng, g, 2 + rng() % 2);
        bool succeeded = false;
        for (std::uint32_t d = 1; d <= 7; ++d) {
            bool s = certqr::is_successful(g, d, q, dist);
            if (succeeded) CHECK(s);
            succeeded = succeeded || s;
        }
    }
}

TEST_CASE("witness materialization on request") {
    auto g = support::fixture();
    certqr::BfsDistances dist(g);
    certqr::RelaxOptions opts;
    opts.materialize_witness = true;
    auto q = support::ids(g, {"Alice", "Bob", "Dan", "Gary"});
    auto out = certqr::certqr_plus(g, 4, q, dist, PriorityMode::plain, opts);
    REQUIRE(out.witness);
    CHECK(out.witness->diameter <= 4);
    CHECK_FALSE(certqr::check_sa_invariants(g, 4, out.q_max, *out.witness).has_value());

    auto plain = certqr::certqr_plus(g, 4, q, dist);
    CHECK_FALSE(plain.witness.has_value());
}
