#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "certqr/certificate.hpp"
#include "certqr/distance.hpp"
#include "certqr/errors.hpp"
#include "certqr/graph.hpp"
#include "certqr/relaxation.hpp"

namespace certqr {

/// Bounds for the exhaustive search. max_extra limits how many non-query
/// vertices a candidate vertex set may add (default D * (|Q| - 1), which any
/// association respects); step_cap aborts runaway enumerations loudly.
struct BruteForceConfig {
    std::optional<std::size_t> max_extra;
    std::uint64_t step_cap = 1'000'000'000ull;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

namespace detail {

struct FoundTree {
    std::vector<EntityId> vertices;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges; // indices into vertices
};

// Union-find without path compression so include/exclude branches can undo.
struct Dsu {
    std::vector<std::uint32_t> parent, size;
    explicit Dsu(std::uint32_t n) : parent(n), size(n, 1) {
        for (std::uint32_t i = 0; i < n; ++i) parent[i] = i;
    }
    std::uint32_t find(std::uint32_t x) const {
        while (parent[x] != x) x = parent[x];
        return x;
    }
    // returns the absorbed root, or nothing if already joined
    std::optional<std::uint32_t> unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return std::nullopt;
        if (size[a] < size[b]) std::swap(a, b);
        parent[b] = a;
        size[a] += size[b];
        return b;
    }
    void undo(std::uint32_t absorbed) {
        std::uint32_t root = find(absorbed);
        size[root] -= size[absorbed];
        parent[absorbed] = absorbed;
    }
};

// Exhaustive spanning-tree search over one induced vertex set: every tree
// whose leaves are all query vertices and whose diameter fits the bound.
struct SpanningTreeSearch {
    const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges;
    const std::vector<char>& is_query;
    const std::vector<std::uint32_t>& last_edge; // last edge index touching v
    std::uint32_t n;
    std::uint32_t diameter_bound;
    std::uint64_t& steps;
    std::uint64_t step_cap;
    const std::optional<std::chrono::steady_clock::time_point>& deadline;

    Dsu dsu;
    std::vector<std::uint32_t> deg;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> chosen;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> result;

    SpanningTreeSearch(const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges_,
                       const std::vector<char>& is_query_,
                       const std::vector<std::uint32_t>& last_edge_, std::uint32_t n_,
                       std::uint32_t diameter_bound_, std::uint64_t& steps_, std::uint64_t cap,
                       const std::optional<std::chrono::steady_clock::time_point>& deadline_)
        : edges(edges_), is_query(is_query_), last_edge(last_edge_), n(n_),
          diameter_bound(diameter_bound_), steps(steps_), step_cap(cap), deadline(deadline_),
          dsu(n_), deg(n_, 0) {}

    void tick() {
        if (++steps > step_cap)
            throw InconclusiveError("brute force enumeration exceeded its step cap");
        if ((steps & 1023) == 0 && deadline && std::chrono::steady_clock::now() >= *deadline)
            throw TimeoutError("brute force enumeration hit its deadline");
    }

    bool tree_ok() const {
        for (std::uint32_t v = 0; v < n; ++v)
            if (deg[v] <= 1 && !is_query[v]) return false;
        std::vector<std::vector<std::uint32_t>> t(n);
        for (auto [a, b] : chosen) {
            t[a].push_back(b);
            t[b].push_back(a);
        }
        auto far = [&](std::uint32_t src) {
            std::vector<std::int32_t> dist(n, -1);
            std::vector<std::uint32_t> order{src};
            dist[src] = 0;
            std::pair<std::uint32_t, std::uint32_t> best{src, 0};
            for (std::size_t i = 0; i < order.size(); ++i) {
                std::uint32_t u = order[i];
                for (std::uint32_t w : t[u]) {
                    if (dist[w] >= 0) continue;
                    dist[w] = dist[u] + 1;
                    if (static_cast<std::uint32_t>(dist[w]) > best.second)
                        best = {w, static_cast<std::uint32_t>(dist[w])};
                    order.push_back(w);
                }
            }
            return best;
        };
        auto far1 = far(0);
        auto far2 = far(far1.first);
        return far2.second <= diameter_bound;
    }

    // Vertices whose incident edges are all decided must already look viable.
    bool viable_after(std::uint32_t decided) const {
        auto [a, b] = edges[decided];
        for (std::uint32_t v : {a, b}) {
            if (last_edge[v] != decided) continue;
            if (deg[v] == 0) return false;
            if (deg[v] == 1 && !is_query[v]) return false;
        }
        return true;
    }

    bool search(std::uint32_t idx, std::uint32_t picked) {
        tick();
        if (picked == n - 1) {
            if (!tree_ok()) return false;
            result = chosen;
            return true;
        }
        if (idx >= edges.size()) return false;
        if (picked + (edges.size() - idx) < n - 1) return false;

        auto [a, b] = edges[idx];
        if (auto absorbed = dsu.unite(a, b)) {
            deg[a] += 1;
            deg[b] += 1;
            chosen.push_back(edges[idx]);
            bool ok = viable_after(idx) && search(idx + 1, picked + 1);
            chosen.pop_back();
            deg[a] -= 1;
            deg[b] -= 1;
            dsu.undo(*absorbed);
            if (ok) return true;
        }
        return viable_after(idx) && search(idx + 1, picked);
    }
};

// Tries vertex sets S = query + (up to max_extra pool vertices) in increasing
// size, each screened by cheap necessary conditions before the tree search.
inline std::optional<FoundTree> brute_find(const EntityGraph& g, std::uint32_t D,
                                           std::span<const EntityId> query,
                                           const BruteForceConfig& cfg, std::uint64_t& steps) {
    const std::vector<EntityId> q = checked_query(g, query, D);

    // Pool: vertices within D of every query entity. Any vertex of a
    // diameter-D tree containing the query satisfies this in G.
    std::vector<BoundedBfsFrontier> balls;
    balls.reserve(q.size());
    for (EntityId qe : q) balls.push_back(bounded_bfs(g, qe, D));
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = i + 1; j < q.size(); ++j)
            if (!balls[i].distance_to(q[j]).within(D)) return std::nullopt;

    std::size_t smallest = 0;
    for (std::size_t i = 1; i < q.size(); ++i)
        if (balls[i].size() < balls[smallest].size()) smallest = i;
    std::vector<EntityId> pool;
    for (auto [e, d] : balls[smallest].entries()) {
        if (std::find(q.begin(), q.end(), e) != q.end()) continue;
        bool in_all = true;
        for (std::size_t i = 0; i < balls.size() && in_all; ++i)
            if (i != smallest && !balls[i].distance_to(e).within(D)) in_all = false;
        if (in_all) pool.push_back(e);
    }
    std::sort(pool.begin(), pool.end());

    const std::size_t max_extra = std::min<std::size_t>(
        cfg.max_extra.value_or(static_cast<std::size_t>(D) * (q.size() - 1)), pool.size());

    std::optional<FoundTree> found;
    std::vector<EntityId> verts;

    auto consider = [&](std::span<const EntityId> extra) -> bool {
        if (++steps > cfg.step_cap)
            throw InconclusiveError("brute force enumeration exceeded its step cap");
        if (cfg.deadline && std::chrono::steady_clock::now() >= *cfg.deadline)
            throw TimeoutError("brute force enumeration hit its deadline");

        verts = q;
        verts.insert(verts.end(), extra.begin(), extra.end());
        const auto n = static_cast<std::uint32_t>(verts.size());

        std::vector<std::vector<std::uint32_t>> adj(n);
        std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
        for (std::uint32_t i = 0; i < n; ++i) {
            const auto& nb = g.neighbors(verts[i]);
            for (std::uint32_t j = i + 1; j < n; ++j) {
                if (std::binary_search(nb.begin(), nb.end(), verts[j])) {
                    adj[i].push_back(j);
                    adj[j].push_back(i);
                    edges.emplace_back(i, j);
                }
            }
        }
        std::vector<char> is_query(n, 0);
        for (std::size_t i = 0; i < q.size(); ++i) is_query[i] = 1;
        // a non-query vertex with fewer than 2 induced edges would end a leaf
        for (std::uint32_t i = 0; i < n; ++i)
            if (!is_query[i] && adj[i].size() < 2) return false;
        if (edges.size() + 1 < n) return false;

        // induced-graph distances bound tree distances from below
        for (std::uint32_t s = 0; s < n; ++s) {
            std::vector<std::int32_t> dist(n, -1);
            std::vector<std::uint32_t> order{s};
            dist[s] = 0;
            for (std::size_t i = 0; i < order.size(); ++i)
                for (std::uint32_t w : adj[order[i]])
                    if (dist[w] < 0) {
                        dist[w] = dist[order[i]] + 1;
                        order.push_back(w);
                    }
            for (std::uint32_t t = 0; t < n; ++t)
                if (dist[t] < 0 || static_cast<std::uint32_t>(dist[t]) > D) return false;
        }

        std::vector<std::uint32_t> last_edge(n, 0);
        for (std::uint32_t i = 0; i < edges.size(); ++i) {
            last_edge[edges[i].first] = i;
            last_edge[edges[i].second] = i;
        }

        SpanningTreeSearch s(edges, is_query, last_edge, n, D, steps, cfg.step_cap,
                             cfg.deadline);
        if (!s.search(0, 0)) return false;
        found = FoundTree{verts, std::move(s.result)};
        return true;
    };

    std::vector<std::uint32_t> comb;
    std::vector<EntityId> extra;
    for (std::size_t k = 0; k <= max_extra; ++k) {
        comb.resize(k);
        for (std::size_t i = 0; i < k; ++i) comb[i] = static_cast<std::uint32_t>(i);
        bool more = true;
        while (more) {
            extra.clear();
            for (std::uint32_t idx : comb) extra.push_back(pool[idx]);
            if (consider(extra)) return found;
            // advance to the next k-combination of the pool
            more = false;
            for (std::size_t i = k; i-- > 0;) {
                if (comb[i] + (k - i) < pool.size()) {
                    ++comb[i];
                    for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    return std::nullopt;
}

// Certificate and witness recovered from a concrete tree, per the necessity
// direction: the tree's central vertex certifies the query it spans.
inline std::pair<Certificate, SemanticAssociation> tree_to_certificate(const EntityGraph& g,
                                                                       std::uint32_t D,
                                                                       const FoundTree& tree) {
    const auto n = static_cast<std::uint32_t>(tree.vertices.size());
    std::vector<std::vector<std::uint32_t>> adj(n);
    for (auto [a, b] : tree.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    // all-pairs tree distances (n is tiny here)
    std::vector<std::vector<std::uint32_t>> dist(n, std::vector<std::uint32_t>(n, 0));
    for (std::uint32_t s = 0; s < n; ++s) {
        std::vector<std::int32_t> d(n, -1);
        std::vector<std::uint32_t> order{s};
        d[s] = 0;
        for (std::size_t i = 0; i < order.size(); ++i)
            for (std::uint32_t w : adj[order[i]])
                if (d[w] < 0) {
                    d[w] = d[order[i]] + 1;
                    order.push_back(w);
                }
        for (std::uint32_t t = 0; t < n; ++t) dist[s][t] = static_cast<std::uint32_t>(d[t]);
    }
    std::uint32_t center = 0;
    std::uint32_t best_ecc = static_cast<std::uint32_t>(-1);
    for (std::uint32_t v = 0; v < n; ++v) {
        std::uint32_t ecc = *std::max_element(dist[v].begin(), dist[v].end());
        std::uint32_t tie = tree.vertices[v];
        if (ecc < best_ecc || (ecc == best_ecc && tie < tree.vertices[center])) {
            best_ecc = ecc;
            center = v;
        }
    }
    const std::uint32_t r = cert_radius(D);
    std::optional<EntityId> companion;
    if ((D % 2) != 0) {
        // any vertex at tree distance exactly r from the center lies behind a
        // single shared neighbor of the center (else the diameter would break)
        for (std::uint32_t v = 0; v < n; ++v) {
            if (dist[center][v] != r) continue;
            for (std::uint32_t w : adj[center])
                if (dist[w][v] == r - 1) {
                    companion = tree.vertices[w];
                    break;
                }
            break;
        }
    }

    SemanticAssociation sa;
    sa.vertices = tree.vertices;
    std::sort(sa.vertices.begin(), sa.vertices.end());
    for (auto [a, b] : tree.edges) {
        EntityId u = tree.vertices[a], v = tree.vertices[b];
        ArcId arc = static_cast<ArcId>(-1);
        for (auto [nb, id] : g.incident(u))
            if (nb == v) {
                arc = id;
                break;
            }
        if (arc == static_cast<ArcId>(-1))
            throw InternalError("tree edge without a graph arc");
        sa.arcs.push_back(arc);
    }
    std::sort(sa.arcs.begin(), sa.arcs.end());
    sa.diameter = sa_diameter(g, sa.arcs, sa.vertices);
    return {Certificate{tree.vertices[center], companion}, std::move(sa)};
}

} // namespace detail

/// True iff some subset S of vertices containing the query (with at most
/// max_extra additions) induces a spanning tree whose leaves are all query
/// entities and whose diameter is at most D. Exhaustive; independent of the
/// certificate machinery by construction.
inline bool brute_success(const EntityGraph& g, std::uint32_t D, std::span<const EntityId> query,
                          const BruteForceConfig& cfg = {}) {
    std::uint64_t steps = 0;
    return detail::brute_find(g, D, query, cfg, steps).has_value();
}

/// Maximum successful sub-query by descending-size enumeration (ties in
/// ascending lexicographic order of member indices); empty if none succeeds.
inline std::vector<EntityId> brute_relax(const EntityGraph& g, std::uint32_t D,
                                         std::span<const EntityId> query,
                                         const BruteForceConfig& cfg = {}) {
    std::vector<EntityId> q = detail::checked_query(g, query, D);
    std::sort(q.begin(), q.end());
    std::uint64_t steps = 0;
    for (std::size_t k = q.size(); k >= 2; --k) {
        std::vector<std::uint32_t> comb(k);
        for (std::size_t i = 0; i < k; ++i) comb[i] = static_cast<std::uint32_t>(i);
        bool more = true;
        while (more) {
            std::vector<EntityId> sub;
            sub.reserve(k);
            for (std::uint32_t idx : comb) sub.push_back(q[idx]);
            if (detail::brute_find(g, D, sub, cfg, steps)) return sub;
            more = false;
            for (std::size_t i = k; i-- > 0;) {
                if (comb[i] + (k - i) < q.size()) {
                    ++comb[i];
                    for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    return {};
}

/// The exhaustive baseline: sub-queries in non-increasing cardinality, each
/// verified by searching for an actual association. A pairwise-distance
/// screen (necessary for success) runs first on each sub-query. Hitting the
/// timeout yields an empty, timeout-flagged outcome.
inline RelaxationOutcome bsl(const EntityGraph& g, std::uint32_t D,
                             std::span<const EntityId> query, const DistanceProvider& dist,
                             std::chrono::milliseconds timeout,
                             const BruteForceConfig& cfg = {}, const RelaxOptions& opts = {}) {
    detail::Stopwatch clock;
    std::vector<EntityId> q = detail::checked_query(g, query, D);
    std::sort(q.begin(), q.end());

    RelaxationOutcome out;
    CountingDistances cdist(dist, out.stats.distance_calls);
    BruteForceConfig bounded = cfg;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    bounded.deadline = bounded.deadline ? std::min(*bounded.deadline, deadline) : deadline;
    if (opts.deadline) bounded.deadline = std::min(*bounded.deadline, *opts.deadline);

    std::uint64_t steps = 0;
    try {
        for (std::size_t k = q.size(); k >= 2; --k) {
            std::vector<std::uint32_t> comb(k);
            for (std::size_t i = 0; i < k; ++i) comb[i] = static_cast<std::uint32_t>(i);
            bool more = true;
            while (more) {
                std::vector<EntityId> sub;
                sub.reserve(k);
                for (std::uint32_t idx : comb) sub.push_back(q[idx]);
                if (opts.trace && opts.trace->on_subquery_check)
                    opts.trace->on_subquery_check(sub);
                if (std::chrono::steady_clock::now() >= *bounded.deadline)
                    throw TimeoutError("bsl hit its timeout");

                // necessary condition: pairwise distances within D
                bool plausible = true;
                for (std::size_t i = 0; i < sub.size() && plausible; ++i)
                    for (std::size_t j = i + 1; j < sub.size() && plausible; ++j)
                        if (!cdist.distance(sub[i], sub[j]).within(D)) plausible = false;

                if (plausible) {
                    if (auto tree = detail::brute_find(g, D, sub, bounded, steps)) {
                        auto [cert, sa] = detail::tree_to_certificate(g, D, *tree);
                        out.q_max = std::move(sub);
                        std::sort(out.q_max.begin(), out.q_max.end());
                        out.certificate = cert;
                        if (opts.materialize_witness) out.witness = std::move(sa);
                        out.stats.wall_ms = clock.ms();
                        return out;
                    }
                }
                more = false;
                for (std::size_t i = k; i-- > 0;) {
                    if (comb[i] + (k - i) < q.size()) {
                        ++comb[i];
                        for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                        more = true;
                        break;
                    }
                }
            }
        }
    } catch (const TimeoutError&) {
        out.q_max.clear();
        out.certificate.reset();
        out.stats.terminated_early = true;
    }
    out.stats.wall_ms = clock.ms();
    return out;
}

/// brute_relax wrapped as an outcome, for the bench harness and CLI.
inline RelaxationOutcome brute_outcome(const EntityGraph& g, std::uint32_t D,
                                       std::span<const EntityId> query,
                                       const BruteForceConfig& cfg = {},
                                       const RelaxOptions& opts = {}) {
    detail::Stopwatch clock;
    RelaxationOutcome out;
    BruteForceConfig bounded = cfg;
    if (opts.deadline)
        bounded.deadline = bounded.deadline ? std::min(*bounded.deadline, *opts.deadline)
                                            : *opts.deadline;
    try {
        std::vector<EntityId> best = brute_relax(g, D, query, bounded);
        if (!best.empty()) {
            std::uint64_t steps = 0;
            auto tree = detail::brute_find(g, D, best, bounded, steps);
            if (!tree) throw InternalError("brute_relax result did not re-verify");
            auto [cert, sa] = detail::tree_to_certificate(g, D, *tree);
            out.q_max = std::move(best);
            out.certificate = cert;
            if (opts.materialize_witness) out.witness = std::move(sa);
        }
    } catch (const TimeoutError&) {
        out.q_max.clear();
        out.certificate.reset();
        out.stats.terminated_early = true;
    }
    out.stats.wall_ms = clock.ms();
    return out;
}

} // namespace certqr
