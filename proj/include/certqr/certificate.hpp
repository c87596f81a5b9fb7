#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "certqr/distance.hpp"
#include "certqr/errors.hpp"
#include "certqr/graph.hpp"

namespace certqr {

/// Search radius around a candidate certificate: ceil(D / 2).
inline constexpr std::uint32_t cert_radius(std::uint32_t d) { return (d + 1) / 2; }

/// A certificate of success: a center entity, plus a qualifying neighbor when
/// the diameter bound is odd and the certified sub-query has critical entities
/// (entities at distance exactly ceil(D/2) from the center).
struct Certificate {
    EntityId center;
    std::optional<EntityId> companion;
};

struct CertifiedSubQuery {
    std::vector<EntityId> sub_query; // sorted ascending
    Certificate certificate;
};

/// A tree subgraph connecting a sub-query: all leaves are query entities and
/// the diameter respects the bound it was built under.
struct SemanticAssociation {
    std::vector<EntityId> vertices; // sorted ascending
    std::vector<ArcId> arcs;        // sorted ascending
    std::uint32_t diameter = 0;
};

/// Maximum sub-query of `query` that `c` certifies, given that a successful
/// sub-query of size `known_size` is already in hand (0 if none). Returns
/// nothing when c certifies no sub-query larger than that, or none of size 2.
/// Ties among qualifying neighbors go to the smallest entity index.
inline std::optional<CertifiedSubQuery> opt_with_cert(const EntityGraph& g, std::uint32_t D,
                                                      std::span<const EntityId> query, EntityId c,
                                                      std::size_t known_size,
                                                      const DistanceProvider& dist) {
    if (c >= g.entity_count())
        throw ArgumentError("opt_with_cert: candidate entity out of range");
    const std::uint32_t r = cert_radius(D);
    const bool odd = (D % 2) != 0;

    std::vector<EntityId> q1, q2;
    for (EntityId qe : query) {
        Distance d = dist.distance(qe, c);
        if (!d.within(r)) continue;
        q1.push_back(qe);
        if (d.exactly(r)) q2.push_back(qe);
    }
    if (q1.size() <= known_size) return std::nullopt;

    std::vector<EntityId> result;
    std::optional<EntityId> companion;
    if (!odd || q2.size() <= 1) {
        result = q1;
        if (odd && q2.size() == 1) {
            // One critical entity: a neighbor on one of its shortest paths to
            // c always qualifies.
            for (EntityId cp : g.neighbors(c)) {
                if (dist.distance(q2.front(), cp).exactly(r - 1)) {
                    companion = cp;
                    break;
                }
            }
            if (!companion)
                throw InternalError("opt_with_cert: no companion next to a critical entity");
        }
    } else {
        std::vector<EntityId> best;
        EntityId best_cp = kNoEntity;
        for (EntityId cp : g.neighbors(c)) {
            std::vector<EntityId> covered;
            for (EntityId qe : q2)
                if (dist.distance(qe, cp).exactly(r - 1)) covered.push_back(qe);
            if (covered.size() > best.size()) {
                best = std::move(covered);
                best_cp = cp;
            }
        }
        for (EntityId qe : q1)
            if (std::find(q2.begin(), q2.end(), qe) == q2.end()) result.push_back(qe);
        result.insert(result.end(), best.begin(), best.end());
        if (!best.empty()) companion = best_cp;
    }
    if (result.size() < 2) return std::nullopt;
    std::sort(result.begin(), result.end());
    return CertifiedSubQuery{std::move(result), Certificate{c, companion}};
}

/// True iff the certificate's distance conditions hold for every entity of
/// the sub-query (including the companion condition for critical entities
/// when D is odd).
inline bool verify_certificate(const EntityGraph& g, std::uint32_t D,
                               std::span<const EntityId> subquery, const Certificate& cert,
                               const DistanceProvider& dist) {
    if (cert.center >= g.entity_count()) return false;
    const std::uint32_t r = cert_radius(D);
    bool any_critical = false;
    for (EntityId qe : subquery) {
        Distance d = dist.distance(qe, cert.center);
        if (!d.within(r)) return false;
        if (d.exactly(r)) any_critical = true;
    }
    if ((D % 2) != 0 && any_critical) {
        if (!cert.companion) return false;
        const auto& nb = g.neighbors(cert.center);
        if (!std::binary_search(nb.begin(), nb.end(), *cert.companion)) return false;
        for (EntityId qe : subquery) {
            if (dist.distance(qe, cert.center).exactly(r) &&
                !dist.distance(qe, *cert.companion).exactly(r - 1))
                return false;
        }
    }
    return true;
}

namespace detail {

struct TreeView {
    // adjacency restricted to the association's arcs
    std::unordered_map<EntityId, std::vector<std::pair<EntityId, ArcId>>> adj;

    explicit TreeView(const EntityGraph& g, std::span<const ArcId> arcs) {
        for (ArcId a : arcs) {
            const Arc& arc = g.arc(a);
            adj[arc.tail].emplace_back(arc.head, a);
            adj[arc.head].emplace_back(arc.tail, a);
        }
    }
};

inline std::pair<EntityId, std::uint32_t> farthest_from(const TreeView& t, EntityId src) {
    std::unordered_map<EntityId, std::uint32_t> dist;
    std::queue<EntityId> qu;
    dist.emplace(src, 0);
    qu.push(src);
    EntityId far = src;
    std::uint32_t far_d = 0;
    while (!qu.empty()) {
        EntityId e = qu.front();
        qu.pop();
        std::uint32_t d = dist[e];
        if (d > far_d || (d == far_d && e < far)) {
            far = e;
            far_d = d;
        }
        auto it = t.adj.find(e);
        if (it == t.adj.end()) continue;
        for (auto [nb, a] : it->second) {
            if (dist.count(nb)) continue;
            dist.emplace(nb, d + 1);
            qu.push(nb);
        }
    }
    return {far, far_d};
}

} // namespace detail

/// Exact diameter of a tree-shaped association via double BFS.
inline std::uint32_t sa_diameter(const EntityGraph& g, std::span<const ArcId> arcs,
                                 std::span<const EntityId> vertices) {
    if (vertices.empty()) throw ArgumentError("sa_diameter: empty association");
    if (arcs.size() + 1 != vertices.size())
        throw ArgumentError("sa_diameter: arc/vertex count is not a tree");
    detail::TreeView t(g, arcs);
    auto [far, d1] = detail::farthest_from(t, vertices.front());
    // connectivity check rides along: the first sweep must reach every vertex
    std::size_t reached = 1;
    {
        std::unordered_set<EntityId> seen{vertices.front()};
        std::queue<EntityId> qu;
        qu.push(vertices.front());
        while (!qu.empty()) {
            EntityId e = qu.front();
            qu.pop();
            auto it = t.adj.find(e);
            if (it == t.adj.end()) continue;
            for (auto [nb, a] : it->second)
                if (seen.insert(nb).second) {
                    ++reached;
                    qu.push(nb);
                }
        }
    }
    if (reached != vertices.size()) throw ArgumentError("sa_diameter: association not connected");
    auto [far2, d2] = detail::farthest_from(t, far);
    (void)far2;
    return d2;
}

inline std::uint32_t sa_diameter(const EntityGraph& g, const SemanticAssociation& sa) {
    return sa_diameter(g, sa.arcs, sa.vertices);
}

/// Structural check of all association invariants against a sub-query and
/// bound; returns a description of the first violation, or nothing.
inline std::optional<std::string> check_sa_invariants(const EntityGraph& g, std::uint32_t D,
                                                      std::span<const EntityId> subquery,
                                                      const SemanticAssociation& sa) {
    if (sa.vertices.empty()) return "association is empty";
    if (sa.arcs.size() + 1 != sa.vertices.size()) return "arc count does not match a tree";
    std::unordered_map<EntityId, std::uint32_t> deg;
    for (EntityId v : sa.vertices) deg[v] = 0;
    for (ArcId a : sa.arcs) {
        const Arc& arc = g.arc(a);
        if (!deg.count(arc.tail) || !deg.count(arc.head)) return "arc endpoint outside vertex set";
        deg[arc.tail] += 1;
        deg[arc.head] += 1;
    }
    std::unordered_set<EntityId> verts(sa.vertices.begin(), sa.vertices.end());
    for (EntityId qe : subquery)
        if (!verts.count(qe)) return "missing query entity " + g.entity_name(qe);
    std::unordered_set<EntityId> q(subquery.begin(), subquery.end());
    for (auto [v, d] : deg)
        if (d <= 1 && !q.count(v)) return "non-query leaf " + g.entity_name(v);
    std::uint32_t diam;
    try {
        diam = sa_diameter(g, sa.arcs, sa.vertices);
    } catch (const ArgumentError& e) {
        return std::string(e.what());
    }
    if (diam != sa.diameter) return "stored diameter is wrong";
    if (diam > D) return "diameter exceeds bound";
    return std::nullopt;
}

/// Materializes a witness association for a verified certificate, following
/// the constructive argument: each entity walks a deterministic shortest path
/// to the center (critical entities walk to the companion first, then take
/// one arc to the center). At every step the walk takes the descent neighbor
/// reachable via the smallest arc index, and it stops as soon as it touches
/// the tree built so far, so the merge stays a tree with unchanged depths.
inline SemanticAssociation materialize_sa(const EntityGraph& g, std::uint32_t D,
                                          std::span<const EntityId> subquery,
                                          const Certificate& cert,
                                          const DistanceProvider& dist) {
    if (!verify_certificate(g, D, subquery, cert, dist))
        throw ArgumentError("materialize_sa: certificate does not verify the sub-query");
    const std::uint32_t r = cert_radius(D);
    const EntityId c = cert.center;
    const bool odd = (D % 2) != 0;

    std::vector<EntityId> critical, regular;
    for (EntityId qe : subquery) {
        if (odd && cert.companion && dist.distance(qe, c).exactly(r))
            critical.push_back(qe);
        else
            regular.push_back(qe);
    }
    std::sort(critical.begin(), critical.end());
    std::sort(regular.begin(), regular.end());

    std::unordered_set<EntityId> in_tree{c};
    std::vector<ArcId> arcs;

    auto walk = [&g, &in_tree, &arcs](EntityId start, const BoundedBfsFrontier& layers) {
        EntityId u = start;
        while (!in_tree.count(u)) {
            std::uint32_t du = layers.distance_to(u).value();
            EntityId next = kNoEntity;
            ArcId via = 0;
            for (auto [nb, a] : g.incident(u)) {
                if (layers.distance_to(nb).exactly(du - 1)) {
                    next = nb;
                    via = a;
                    break;
                }
            }
            if (next == kNoEntity)
                throw InternalError("materialize_sa: walk has no descent neighbor");
            in_tree.insert(u);
            arcs.push_back(via);
            u = next;
        }
    };

    if (!critical.empty()) {
        const EntityId cp = *cert.companion;
        if (!in_tree.count(cp)) {
            ArcId link = kNoEntity;
            for (auto [nb, a] : g.incident(c)) {
                if (nb == cp) {
                    link = a;
                    break;
                }
            }
            if (link == kNoEntity) throw InternalError("materialize_sa: companion not adjacent");
            in_tree.insert(cp);
            arcs.push_back(link);
        }
        BoundedBfsFrontier to_cp = bounded_bfs(g, cp, r - 1);
        for (EntityId qe : critical) walk(qe, to_cp);
    }
    if (!regular.empty()) {
        BoundedBfsFrontier to_c = bounded_bfs(g, c, r);
        for (EntityId qe : regular) walk(qe, to_c);
    }

    // Prune leaves that are not query entities (repeatedly; the center or the
    // companion can end up pendant when no walk needed them).
    std::unordered_set<EntityId> q(subquery.begin(), subquery.end());
    std::unordered_map<EntityId, std::vector<ArcId>> incidence;
    for (ArcId a : arcs) {
        incidence[g.arc(a).tail].push_back(a);
        incidence[g.arc(a).head].push_back(a);
    }
    std::unordered_set<ArcId> removed;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [v, inc] : incidence) {
            if (q.count(v)) continue;
            std::vector<ArcId> live;
            for (ArcId a : inc)
                if (!removed.count(a)) live.push_back(a);
            if (live.size() == 1) {
                removed.insert(live.front());
                changed = true;
            }
        }
    }

    SemanticAssociation sa;
    for (ArcId a : arcs)
        if (!removed.count(a)) sa.arcs.push_back(a);
    std::sort(sa.arcs.begin(), sa.arcs.end());
    std::unordered_set<EntityId> verts;
    for (ArcId a : sa.arcs) {
        verts.insert(g.arc(a).tail);
        verts.insert(g.arc(a).head);
    }
    if (sa.arcs.empty()) verts.insert(c); // degenerate: single-entity tree cannot occur (|subquery| >= 2)
    sa.vertices.assign(verts.begin(), verts.end());
    std::sort(sa.vertices.begin(), sa.vertices.end());
    sa.diameter = sa_diameter(g, sa.arcs, sa.vertices);

    if (auto bad = check_sa_invariants(g, D, subquery, sa))
        throw InternalError("materialize_sa: " + *bad);
    return sa;
}

} // namespace certqr
