#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "certqr/distance.hpp"
#include "support.hpp"

using certqr::Distance;
using certqr::EntityId;

TEST_CASE("Distance ordering treats unreachable as greatest") {
    CHECK(Distance::hops(3) < Distance::unreachable());
    CHECK(Distance::hops(0).within(0));
    CHECK_FALSE(Distance::unreachable().within(1000));
    CHECK(Distance::hops(2).plus(Distance::hops(3)) == Distance::hops(5));
    CHECK_FALSE(Distance::hops(2).plus(Distance::unreachable()).reachable());
}

TEST_CASE("bfs_distance on the fixture") {
    auto g = support::fixture();
    auto d = [&](const char* a, const char* b) {
        return certqr::bfs_distance(g, support::id(g, a), support::id(g, b));
    };
    CHECK(d("ISWC2019", "Alice") == Distance::hops(2));
    CHECK(d("Alice", "Gary") == Distance::hops(5));
    CHECK(d("Alice", "Alice") == Distance::hops(0));
    CHECK_THROWS_AS(certqr::bfs_distance(g, 0, 99), certqr::ArgumentError);
}

TEST_CASE("bounded_bfs frontiers") {
    auto g = support::fixture();
    SECTION("radius 0") {
        auto f = certqr::bounded_bfs(g, support::id(g, "Gary"), 0);
        CHECK(f.size() == 1);
        CHECK(f.distance_to(support::id(g, "Gary")) == Distance::hops(0));
    }
    SECTION("invalid origin") {
        CHECK_THROWS_AS(certqr::bounded_bfs(g, 99, 2), certqr::ArgumentError);
    }
    SECTION("Gary radius 2") {
        auto f = certqr::bounded_bfs(g, support::id(g, "Gary"), 2);
        REQUIRE(f.size() == 3);
        CHECK(f.distance_to(support::id(g, "Frank")) == Distance::hops(1));
        CHECK(f.distance_to(support::id(g, "Paper02")) == Distance::hops(2));
        CHECK_FALSE(f.contains(support::id(g, "Bob")));
    }
    SECTION("ISWC2019 radius 2 reaches everything but Gary") {
        auto f = certqr::bounded_bfs(g, support::id(g, "ISWC2019"), 2);
        CHECK(f.size() == 10);
        CHECK_FALSE(f.contains(support::id(g, "Gary")));
        for (auto [e, dist] : f.entries())
            CHECK(certqr::bfs_distance(g, support::id(g, "ISWC2019"), e) == Distance::hops(dist));
    }
    SECTION("frontier distances match the all-pairs oracle on random graphs") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 10; ++trial) {
            auto g2 = support::random_graph(rng, 3 + rng() % 15, 1 + rng() % 30);
            auto fw = support::fw_distances(g2);
            EntityId origin = rng() % g2.entity_count();
            std::uint32_t radius = rng() % 4;
            auto f = certqr::bounded_bfs(g2, origin, radius);
            for (EntityId e = 0; e < g2.entity_count(); ++e) {
                bool expect = fw[origin][e] != support::kUnreachable && fw[origin][e] <= radius;
                CHECK(f.contains(e) == expect);
                if (expect) CHECK(f.distance_to(e) == Distance::hops(fw[origin][e]));
            }
        }
    }
}

TEST_CASE("landmark index answers exactly like BFS") {
    SECTION("triangle") {
        auto g = support::triangle();
        auto index = certqr::build_index(g);
        for (EntityId u = 0; u < 3; ++u)
            for (EntityId v = 0; v < 3; ++v)
                CHECK(index.query(u, v) == (u == v ? Distance::hops(0) : Distance::hops(1)));
    }
    SECTION("fixture, all 55 unordered pairs") {
        auto g = support::fixture();
        auto index = certqr::build_index(g);
        for (EntityId u = 0; u < g.entity_count(); ++u)
            for (EntityId v = u; v < g.entity_count(); ++v) {
                CHECK(index.query(u, v) == certqr::bfs_distance(g, u, v));
                CHECK(index.query(u, v) == index.query(v, u));
            }
    }
    SECTION("disconnected pair is unreachable") {
        auto g = support::graph_from_tsv("a\tr\tb\nc\tr\td\n");
        auto index = certqr::build_index(g);
        CHECK_FALSE(index.query(support::id(g, "a"), support::id(g, "c")).reachable());
        CHECK(index.query(support::id(g, "a"), support::id(g, "b")) == Distance::hops(1));
    }
    SECTION("random graphs up to n=200") {
        std::mt19937_64 rng(101);
        for (int trial = 0; trial < 12; ++trial) {
            std::size_t n = 5 + rng() % 196;
            std::size_t m = n / 2 + rng() % (3 * n);
            auto g = support::random_graph(rng, n, m);
            auto index = certqr::build_index(g);
            certqr::BfsDistances bfs(g);
            for (int probe = 0; probe < 400; ++probe) {
                EntityId u = rng() % n, v = rng() % n;
                CHECK(index.query(u, v) == bfs.distance(u, v));
            }
        }
    }
    SECTION("mismatched index rejects out-of-range entities") {
        auto g = support::triangle();
        auto index = certqr::build_index(g);
        CHECK_THROWS_AS(index.query(0, 17), certqr::ArgumentError);
    }
}

TEST_CASE("index persistence") {
    auto g = support::fixture();
    auto index = certqr::build_index(g);
    std::string path = "test_index.bin";

    SECTION("round trip answers identically") {
        certqr::persist_index(index, path);
        auto loaded = certqr::load_index(path, g);
        for (EntityId u = 0; u < g.entity_count(); ++u)
            for (EntityId v = 0; v < g.entity_count(); ++v)
                CHECK(loaded.query(u, v) == index.query(u, v));
    }
    SECTION("loading against a different graph is a stale-index error") {
        certqr::persist_index(index, path);
        auto other = support::triangle();
        CHECK_THROWS_AS(certqr::load_index(path, other), certqr::StaleIndexError);
    }
    SECTION("truncated file is a format error") {
        certqr::persist_index(index, path);
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        in.close();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        out.close();
        CHECK_THROWS_AS(certqr::load_index(path, g), certqr::ParseError);
    }
    std::remove(path.c_str());
}

TEST_CASE("distance properties: symmetry, triangle inequality, adjacency") {
    std::mt19937_64 rng(303);
    for (int trial = 0; trial < 8; ++trial) {
        std::size_t n = 4 + rng() % 20;
        auto g = support::random_graph(rng, n, 2 * n);
        auto index = certqr::build_index(g);
        for (EntityId u = 0; u < n; ++u) {
            for (EntityId v = 0; v < n; ++v) {
                auto duv = index.query(u, v);
                CHECK(duv == index.query(v, u));
                if (u != v) {
                    const auto& nb = g.neighbors(u);
                    bool adjacent = std::binary_search(nb.begin(), nb.end(), v);
                    CHECK(duv.exactly(1) == adjacent);
                }
                for (EntityId w = 0; w < n; ++w) {
                    auto duw = index.query(u, w);
                    auto dvw = index.query(v, w);
                    if (duv.reachable() && dvw.reachable())
                        CHECK(duw <= duv.plus(dvw));
                }
            }
        }
    }
}
