#pragma once

#include <algorithm>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "certqr/graph.hpp"

namespace support {

inline certqr::EntityGraph graph_from_tsv(const std::string& tsv) {
    std::istringstream in(tsv);
    return certqr::load_edge_list(in);
}

// The 11-entity academic graph used as the golden fixture everywhere:
// two conference papers with authors, a third paper, a PC member, and an
// advisee hanging off one author.
inline certqr::EntityGraph fixture() {
    return graph_from_tsv("Alice\tcreatorOf\tPaper01\n"
                          "Carol\tcreatorOf\tPaper01\n"
                          "Paper01\tacceptedAt\tISWC2019\n"
                          "Paper02\tacceptedAt\tISWC2019\n"
                          "Paper03\tacceptedAt\tISWC2019\n"
                          "Dan\tpcMemberOf\tISWC2019\n"
                          "Bob\tcreatorOf\tPaper02\n"
                          "Erin\tcreatorOf\tPaper02\n"
                          "Frank\tcreatorOf\tPaper02\n"
                          "Frank\tadvisorOf\tGary\n");
}

inline certqr::EntityGraph triangle() {
    return graph_from_tsv("a\tr\tb\nb\tr\tc\nc\tr\ta\n");
}

inline certqr::EntityId id(const certqr::EntityGraph& g, const std::string& name) {
    auto e = g.find_entity(name);
    REQUIRE(e.has_value());
    return *e;
}

inline std::vector<certqr::EntityId> ids(const certqr::EntityGraph& g,
                                         const std::vector<std::string>& names) {
    std::vector<certqr::EntityId> out;
    for (const auto& n : names) out.push_back(id(g, n));
    return out;
}

inline std::vector<std::string> names(const certqr::EntityGraph& g,
                                      const std::vector<certqr::EntityId>& es) {
    std::vector<std::string> out;
    for (auto e : es) out.push_back(g.entity_name(e));
    std::sort(out.begin(), out.end());
    return out;
}

constexpr std::uint32_t kUnreachable = static_cast<std::uint32_t>(-1);

// Independent all-pairs oracle: Floyd-Warshall over the undirected simple view.
inline std::vector<std::vector<std::uint32_t>> fw_distances(const certqr::EntityGraph& g) {
    const std::size_t n = g.entity_count();
    std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kUnreachable));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (std::size_t a = 0; a < g.arc_count(); ++a) {
        const auto& arc = g.arc(static_cast<certqr::ArcId>(a));
        if (arc.tail == arc.head) continue;
        d[arc.tail][arc.head] = 1;
        d[arc.head][arc.tail] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            if (d[i][k] == kUnreachable) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (d[k][j] == kUnreachable) continue;
                d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
            }
        }
    return d;
}

// Random multigraph with n vertices and m arcs; occasionally emits parallel
// arcs and self-loops so the multigraph rules get exercised.
inline certqr::EntityGraph random_graph(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::ostringstream tsv;
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t a = rng() % n;
        std::size_t b = rng() % n;
        tsv << 'v' << a << "\tr" << (rng() % 3) << "\tv" << b << '\n';
    }
    // self-loop padding keeps every vertex present (indices cover 0..n-1)
    // without adding traversable edges, so disconnected shapes still occur
    for (std::size_t v = 0; v < n; ++v) tsv << 'v' << v << "\tpad\tv" << v << '\n';
    std::istringstream in(tsv.str());
    return certqr::load_edge_list(in);
}

inline std::vector<certqr::EntityId> random_query(std::mt19937_64& rng,
                                                  const certqr::EntityGraph& g, std::size_t k) {
    std::vector<certqr::EntityId> all(g.entity_count());
    k = std::min(k, all.size());
    for (certqr::EntityId e = 0; e < all.size(); ++e) all[e] = e;
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + rng() % (all.size() - i);
        std::swap(all[i], all[j]);
    }
    all.resize(k);
    return all;
}

} // namespace support
