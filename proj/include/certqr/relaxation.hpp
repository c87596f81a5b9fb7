#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "certqr/certificate.hpp"
#include "certqr/distance.hpp"
#include "certqr/errors.hpp"
#include "certqr/graph.hpp"

namespace certqr {

enum class PriorityMode { plain, dg, ds, dgs };

inline const char* to_string(PriorityMode m) {
    switch (m) {
    case PriorityMode::plain: return "plain";
    case PriorityMode::dg: return "dg";
    case PriorityMode::ds: return "ds";
    case PriorityMode::dgs: return "dgs";
    }
    return "?";
}

struct RunStats {
    std::uint64_t entities_visited = 0;
    std::uint64_t opt_with_cert_calls = 0;
    std::uint64_t priority_computations = 0;
    std::uint64_t distance_calls = 0;
    std::uint64_t queue_ops = 0;
    double wall_ms = 0.0;
    bool terminated_early = false;
};

struct RelaxationOutcome {
    std::vector<EntityId> q_max; // sorted; empty when no sub-query succeeds
    std::optional<Certificate> certificate;
    std::optional<SemanticAssociation> witness;
    RunStats stats;
};

/// Observation hooks for tests and trace dumps; all optional.
struct RelaxTrace {
    std::function<void(EntityId e, EntityId sqe, double pr)> on_enqueue;
    std::function<void(EntityId c)> on_opt_with_cert;
    std::function<void(std::span<const EntityId>)> on_subquery_check; // bsl only
};

struct RelaxOptions {
    bool materialize_witness = false;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    const RelaxTrace* trace = nullptr;
};

namespace detail {

inline std::vector<EntityId> checked_query(const EntityGraph& g, std::span<const EntityId> query,
                                           std::uint32_t D) {
    if (D < 1) throw ArgumentError("diameter constraint must be >= 1");
    std::vector<EntityId> q;
    for (EntityId qe : query) {
        if (qe >= g.entity_count())
            throw ArgumentError("query entity index " + std::to_string(qe) + " out of range");
        if (std::find(q.begin(), q.end(), qe) == q.end()) q.push_back(qe);
    }
    if (q.size() < 2) throw ArgumentError("a relationship query needs at least 2 distinct entities");
    return q;
}

inline bool past(const std::optional<std::chrono::steady_clock::time_point>& deadline) {
    return deadline && std::chrono::steady_clock::now() >= *deadline;
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    }
};

// est plus the distances it computed, so the hp heuristic reuses them.
struct Estimate {
    std::vector<EntityId> members;       // query entities, order of the input query
    std::vector<std::uint32_t> dists;    // dist(e, member), aligned with members
};

inline Estimate estimate(EntityId e, EntityId sqe, std::uint32_t dist_to_sqe,
                         std::span<const EntityId> query, std::uint32_t D,
                         const DistanceProvider& dist) {
    Estimate est;
    est.members.push_back(sqe);
    est.dists.push_back(dist_to_sqe);
    for (EntityId qe : query) {
        if (qe == sqe) continue;
        Distance d = dist.distance(qe, e);
        if (d.reachable() && dist_to_sqe + d.value() <= D) {
            est.members.push_back(qe);
            est.dists.push_back(d.value());
        }
    }
    return est;
}

inline double score(const Estimate& est, EntityId e, std::uint32_t D, const EntityGraph& g,
                    PriorityMode mode) {
    const double base = static_cast<double>(est.members.size());
    if (mode == PriorityMode::plain) return base;
    const std::uint32_t r = cert_radius(D);
    auto hop_gap = [&est, r]() {
        std::uint32_t hp = 0;
        for (std::uint32_t d : est.dists)
            if (d > r) hp = std::max(hp, d - r);
        return hp;
    };
    switch (mode) {
    case PriorityMode::dg:
        return base + 1.0 / (2.0 + g.degree(e));
    case PriorityMode::ds:
        return base + 1.0 / std::pow(2.0, 1.0 + hop_gap());
    case PriorityMode::dgs:
        return base + 1.0 / std::pow(2.0 + g.degree(e), 1.0 + hop_gap());
    default:
        return base;
    }
}

} // namespace detail

/// Query entities a descendant of e (searched from sqe) could still certify:
/// {sqe} plus every qe with dist(e,sqe) + dist(e,qe) <= D. Unreachable
/// entities never qualify.
inline std::vector<EntityId> est(EntityId e, EntityId sqe, std::span<const EntityId> query,
                                 std::uint32_t D, const DistanceProvider& dist) {
    Distance d0 = dist.distance(sqe, e);
    if (!d0.reachable()) return {sqe};
    return detail::estimate(e, sqe, d0.value(), query, D, dist).members;
}

/// Search priority of e within the search started at sqe. The integer part is
/// |est|; dg/ds/dgs add a fractional tie-breaker from the degree of e and/or
/// the hop gap to the nearest possible certificate.
inline double priority(const EntityGraph& g, EntityId e, EntityId sqe,
                       std::span<const EntityId> query, std::uint32_t D,
                       const DistanceProvider& dist, PriorityMode mode) {
    Distance d0 = dist.distance(sqe, e);
    if (!d0.reachable()) {
        detail::Estimate only{{sqe}, {0}};
        return detail::score(only, e, D, g, mode);
    }
    auto est = detail::estimate(e, sqe, d0.value(), query, D, dist);
    return detail::score(est, e, D, g, mode);
}

/// Breadth-first relaxation: one shared multi-source BFS from all query
/// entities, every dequeued entity screened as a candidate certificate, and
/// expansion cut off at ceil(D/2) hops from the entity's start.
inline RelaxationOutcome certqr(const EntityGraph& g, std::uint32_t D,
                                std::span<const EntityId> query, const DistanceProvider& dist,
                                const RelaxOptions& opts = {}) {
    detail::Stopwatch clock;
    const std::vector<EntityId> q = detail::checked_query(g, query, D);
    const std::uint32_t r = cert_radius(D);

    RelaxationOutcome out;
    CountingDistances cdist(dist, out.stats.distance_calls);

    struct Item {
        EntityId e;
        EntityId sqe;
        std::uint32_t depth; // equals dist(e, sqe): sqe is the first start to reach e
    };
    std::deque<Item> qu;
    std::vector<char> visited(g.entity_count(), 0);
    for (EntityId qe : q) {
        qu.push_back({qe, qe, 0});
        visited[qe] = 1;
        out.stats.entities_visited += 1;
        out.stats.queue_ops += 1;
        if (opts.trace && opts.trace->on_enqueue) opts.trace->on_enqueue(qe, qe, 0.0);
    }

    std::optional<Certificate> best_cert;
    std::vector<EntityId> best;
    while (!qu.empty()) {
        if (detail::past(opts.deadline)) {
            out.stats.terminated_early = true;
            break;
        }
        Item it = qu.front();
        qu.pop_front();
        out.stats.queue_ops += 1;

        out.stats.opt_with_cert_calls += 1;
        if (opts.trace && opts.trace->on_opt_with_cert) opts.trace->on_opt_with_cert(it.e);
        if (auto found = opt_with_cert(g, D, q, it.e, best.size(), cdist)) {
            // the certified sub-query can shrink below Q1 after the critical
            // filter, so the size test cannot be left to the callee alone
            if (found->sub_query.size() > best.size()) {
                best = std::move(found->sub_query);
                best_cert = found->certificate;
            }
        }

        if (it.depth < r) {
            for (EntityId nb : g.neighbors(it.e)) {
                if (visited[nb]) continue;
                visited[nb] = 1;
                qu.push_back({nb, it.sqe, it.depth + 1});
                out.stats.entities_visited += 1;
                out.stats.queue_ops += 1;
                if (opts.trace && opts.trace->on_enqueue)
                    opts.trace->on_enqueue(nb, it.sqe, 0.0);
            }
        }
    }

    out.q_max = std::move(best);
    out.certificate = best_cert;
    if (opts.materialize_witness && !out.q_max.empty())
        out.witness = materialize_sa(g, D, out.q_max, *out.certificate, cdist);
    out.stats.wall_ms = clock.ms();
    return out;
}

/// Best-first relaxation: |Q| independent searches share one max-priority
/// queue and one checked set; each search only walks shortest paths from its
/// start. Terminates once the top priority's integer part cannot beat the
/// best sub-query found (or cannot reach 2). Exact priority ties pop in
/// insertion order.
inline RelaxationOutcome certqr_plus(const EntityGraph& g, std::uint32_t D,
                                     std::span<const EntityId> query,
                                     const DistanceProvider& dist,
                                     PriorityMode mode = PriorityMode::plain,
                                     const RelaxOptions& opts = {}) {
    detail::Stopwatch clock;
    const std::vector<EntityId> q = detail::checked_query(g, query, D);
    const std::uint32_t r = cert_radius(D);

    RelaxationOutcome out;
    CountingDistances cdist(dist, out.stats.distance_calls);

    struct Item {
        double pr;
        std::uint64_t seq;
        EntityId e;
        std::uint32_t search; // slot of sqe in q
        std::uint32_t depth;  // dist(e, q[search])
    };
    struct Worse {
        bool operator()(const Item& a, const Item& b) const {
            if (a.pr != b.pr) return a.pr < b.pr;
            return a.seq > b.seq;
        }
    };
    std::priority_queue<Item, std::vector<Item>, Worse> pq;
    std::uint64_t seq = 0;

    std::vector<std::vector<char>> visited(q.size(), std::vector<char>(g.entity_count(), 0));
    std::vector<char> checked(g.entity_count(), 0);

    auto enqueue = [&](EntityId e, std::uint32_t search, std::uint32_t depth) {
        auto est = detail::estimate(e, q[search], depth, q, D, cdist);
        double pr = detail::score(est, e, D, g, mode);
        out.stats.priority_computations += 1;
        pq.push({pr, seq++, e, search, depth});
        visited[search][e] = 1;
        out.stats.entities_visited += 1;
        out.stats.queue_ops += 1;
        if (opts.trace && opts.trace->on_enqueue) opts.trace->on_enqueue(e, q[search], pr);
    };

    for (std::uint32_t s = 0; s < q.size(); ++s) enqueue(q[s], s, 0);

    std::optional<Certificate> best_cert;
    std::vector<EntityId> best;
    while (!pq.empty()) {
        if (detail::past(opts.deadline)) {
            out.stats.terminated_early = true;
            break;
        }
        Item it = pq.top();
        pq.pop();
        out.stats.queue_ops += 1;

        const auto bound = static_cast<std::size_t>(std::floor(it.pr));
        if (bound <= best.size() || bound <= 1) break;

        if (!checked[it.e]) {
            checked[it.e] = 1;
            out.stats.opt_with_cert_calls += 1;
            if (opts.trace && opts.trace->on_opt_with_cert) opts.trace->on_opt_with_cert(it.e);
            if (auto found = opt_with_cert(g, D, q, it.e, best.size(), cdist)) {
                if (found->sub_query.size() > best.size()) {
                    best = std::move(found->sub_query);
                    best_cert = found->certificate;
                }
            }
        }

        if (it.depth < r && bound > best.size()) {
            for (EntityId nb : g.neighbors(it.e)) {
                if (visited[it.search][nb]) continue;
                if (!cdist.distance(q[it.search], nb).exactly(it.depth + 1)) continue;
                enqueue(nb, it.search, it.depth + 1);
            }
        }
    }

    out.q_max = std::move(best);
    out.certificate = best_cert;
    if (opts.materialize_witness && !out.q_max.empty())
        out.witness = materialize_sa(g, D, out.q_max, *out.certificate, cdist);
    out.stats.wall_ms = clock.ms();
    return out;
}

/// True iff the query itself succeeds under D (no relaxation needed).
inline bool is_successful(const EntityGraph& g, std::uint32_t D, std::span<const EntityId> query,
                          const DistanceProvider& dist) {
    auto q = detail::checked_query(g, query, D);
    return certqr_plus(g, D, q, dist).q_max.size() == q.size();
}

} // namespace certqr
