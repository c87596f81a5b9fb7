#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "certqr/errors.hpp"
#include "certqr/graph.hpp"

namespace certqr {

/// Exact hop count or Unreachable. Unreachable compares greater than every
/// finite distance, so threshold tests against a diameter bound stay safe.
class Distance {
public:
    constexpr Distance() : v_(kInf) {}

    static constexpr Distance unreachable() { return Distance(); }
    static constexpr Distance hops(std::uint32_t h) {
        Distance d;
        d.v_ = h;
        return d;
    }

    constexpr bool reachable() const { return v_ != kInf; }
    constexpr std::uint32_t value() const {
        assert(reachable());
        return v_;
    }

    constexpr bool within(std::uint32_t bound) const { return reachable() && v_ <= bound; }
    constexpr bool under(std::uint32_t bound) const { return reachable() && v_ < bound; }
    constexpr bool exactly(std::uint32_t h) const { return reachable() && v_ == h; }

    constexpr Distance plus(Distance o) const {
        if (!reachable() || !o.reachable()) return unreachable();
        return hops(v_ + o.v_);
    }

    friend constexpr bool operator==(Distance a, Distance b) { return a.v_ == b.v_; }
    friend constexpr bool operator<(Distance a, Distance b) { return a.v_ < b.v_; }
    friend constexpr bool operator<=(Distance a, Distance b) { return a.v_ <= b.v_; }

private:
    static constexpr std::uint32_t kInf = static_cast<std::uint32_t>(-1);
    std::uint32_t v_;
};

/// Exact unweighted shortest-path distance on the undirected view.
inline Distance bfs_distance(const EntityGraph& g, EntityId u, EntityId v) {
    if (u >= g.entity_count() || v >= g.entity_count())
        throw ArgumentError("bfs_distance: entity index out of range");
    if (u == v) return Distance::hops(0);
    std::vector<std::uint32_t> dist(g.entity_count(), static_cast<std::uint32_t>(-1));
    std::queue<EntityId> qu;
    dist[u] = 0;
    qu.push(u);
    while (!qu.empty()) {
        EntityId e = qu.front();
        qu.pop();
        for (EntityId nb : g.neighbors(e)) {
            if (dist[nb] != static_cast<std::uint32_t>(-1)) continue;
            dist[nb] = dist[e] + 1;
            if (nb == v) return Distance::hops(dist[nb]);
            qu.push(nb);
        }
    }
    return Distance::unreachable();
}

/// Entities within `radius` hops of an origin, each with its exact distance.
class BoundedBfsFrontier {
public:
    BoundedBfsFrontier(EntityId origin, std::vector<std::pair<EntityId, std::uint32_t>> entries)
        : origin_(origin), entries_(std::move(entries)) {
        std::sort(entries_.begin(), entries_.end());
    }

    EntityId origin() const { return origin_; }
    std::size_t size() const { return entries_.size(); }

    /// (entity, distance) pairs sorted by entity index.
    const std::vector<std::pair<EntityId, std::uint32_t>>& entries() const { return entries_; }

    Distance distance_to(EntityId e) const {
        auto it = std::lower_bound(entries_.begin(), entries_.end(),
                                   std::make_pair(e, std::uint32_t{0}));
        if (it == entries_.end() || it->first != e) return Distance::unreachable();
        return Distance::hops(it->second);
    }

    bool contains(EntityId e) const { return distance_to(e).reachable(); }

private:
    EntityId origin_;
    std::vector<std::pair<EntityId, std::uint32_t>> entries_;
};

inline BoundedBfsFrontier bounded_bfs(const EntityGraph& g, EntityId origin, std::uint32_t radius) {
    if (origin >= g.entity_count())
        throw ArgumentError("bounded_bfs: origin out of range");
    std::vector<std::pair<EntityId, std::uint32_t>> out;
    std::unordered_map<EntityId, std::uint32_t> dist;
    dist.emplace(origin, 0);
    out.emplace_back(origin, 0);
    std::queue<EntityId> qu;
    qu.push(origin);
    while (!qu.empty()) {
        EntityId e = qu.front();
        qu.pop();
        std::uint32_t d = dist[e];
        if (d >= radius) continue;
        for (EntityId nb : g.neighbors(e)) {
            if (dist.count(nb)) continue;
            dist.emplace(nb, d + 1);
            out.emplace_back(nb, d + 1);
            qu.push(nb);
        }
    }
    return BoundedBfsFrontier(origin, std::move(out));
}

/// Common interface for the on-demand BFS path and the prebuilt landmark
/// labeling, so the algorithms never care which one they run on.
class DistanceProvider {
public:
    virtual ~DistanceProvider() = default;
    virtual Distance distance(EntityId u, EntityId v) const = 0;
};

struct IndexBuildStats {
    std::uint64_t label_entries = 0;
    double build_ms = 0.0;
};

/// Pruned landmark labeling: per-entity lists of (landmark, hop distance)
/// pairs such that every connected pair shares a landmark on one of its
/// shortest paths. Queries take a merge scan over two sorted label lists and
/// return exact distances.
class DistanceIndex {
public:
    struct Entry {
        EntityId landmark;
        std::uint32_t dist;
    };

    DistanceIndex() = default;
    DistanceIndex(std::uint64_t graph_hash, std::vector<std::vector<Entry>> labels,
                  IndexBuildStats stats)
        : graph_hash_(graph_hash), labels_(std::move(labels)), stats_(stats) {}

    std::size_t entity_count() const { return labels_.size(); }
    std::uint64_t graph_hash() const { return graph_hash_; }
    const IndexBuildStats& build_stats() const { return stats_; }
    const std::vector<std::vector<Entry>>& labels() const { return labels_; }

    Distance query(EntityId u, EntityId v) const {
        if (u >= labels_.size() || v >= labels_.size())
            throw ArgumentError("index query: entity index out of range");
        if (u == v) return Distance::hops(0);
        const auto& lu = labels_[u];
        const auto& lv = labels_[v];
        std::uint32_t best = static_cast<std::uint32_t>(-1);
        std::size_t i = 0, j = 0;
        while (i < lu.size() && j < lv.size()) {
            if (lu[i].landmark == lv[j].landmark) {
                std::uint32_t d = lu[i].dist + lv[j].dist;
                best = std::min(best, d);
                ++i;
                ++j;
            } else if (lu[i].landmark < lv[j].landmark) {
                ++i;
            } else {
                ++j;
            }
        }
        if (best == static_cast<std::uint32_t>(-1)) return Distance::unreachable();
        return Distance::hops(best);
    }

private:
    std::uint64_t graph_hash_ = 0;
    std::vector<std::vector<Entry>> labels_;
    IndexBuildStats stats_;
};

/// Builds the labeling with pruned BFS from every vertex in descending degree
/// order (ties by ascending entity index). Pruning: a visit that is already
/// covered by earlier landmarks neither labels nor expands.
inline DistanceIndex build_index(const EntityGraph& g) {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = g.entity_count();

    std::vector<EntityId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&g](EntityId a, EntityId b) {
        if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
        return a < b;
    });
    std::vector<std::uint32_t> rank(n);
    for (std::size_t k = 0; k < n; ++k) rank[order[k]] = static_cast<std::uint32_t>(k);

    // Build-time labels keyed by landmark rank so both sides of the pruning
    // query stay sorted as entries are appended.
    std::vector<std::vector<DistanceIndex::Entry>> labels(n);

    std::vector<std::uint32_t> root_dist(n, static_cast<std::uint32_t>(-1));
    std::vector<std::uint32_t> seen(n, static_cast<std::uint32_t>(-1));
    std::vector<EntityId> frontier, next;

    for (std::size_t k = 0; k < n; ++k) {
        const EntityId root = order[k];
        // O(1) lookup of the root's label during pruning queries.
        for (const auto& e : labels[root]) root_dist[e.landmark] = e.dist;

        auto covered = [&](EntityId u, std::uint32_t d) {
            for (const auto& e : labels[u]) {
                std::uint32_t rd = root_dist[e.landmark];
                if (rd != static_cast<std::uint32_t>(-1) && rd + e.dist <= d) return true;
            }
            return false;
        };

        frontier.clear();
        frontier.push_back(root);
        seen[root] = static_cast<std::uint32_t>(k);
        std::uint32_t depth = 0;
        while (!frontier.empty()) {
            next.clear();
            for (EntityId u : frontier) {
                if (covered(u, depth)) continue;
                labels[u].push_back({static_cast<EntityId>(k), depth});
                for (EntityId nb : g.neighbors(u)) {
                    if (seen[nb] == static_cast<std::uint32_t>(k)) continue;
                    seen[nb] = static_cast<std::uint32_t>(k);
                    next.push_back(nb);
                }
            }
            frontier.swap(next);
            ++depth;
        }

        for (const auto& e : labels[root]) root_dist[e.landmark] = static_cast<std::uint32_t>(-1);
    }

    // Re-key entries from rank to entity index; queries merge on entity index.
    IndexBuildStats stats;
    for (auto& lab : labels) {
        for (auto& e : lab) e.landmark = order[e.landmark];
        std::sort(lab.begin(), lab.end(),
                  [](const auto& a, const auto& b) { return a.landmark < b.landmark; });
        stats.label_entries += lab.size();
    }
    stats.build_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
    return DistanceIndex(g.content_hash(), std::move(labels), stats);
}

inline Distance query(const DistanceIndex& index, EntityId u, EntityId v) {
    return index.query(u, v);
}

namespace detail {

inline void write_varint(std::ostream& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.put(static_cast<char>((v & 0x7f) | 0x80));
        v >>= 7;
    }
    out.put(static_cast<char>(v));
}

inline std::uint64_t read_varint(std::istream& in) {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
        int c = in.get();
        if (c == EOF) throw ParseError("index file truncated");
        v |= static_cast<std::uint64_t>(c & 0x7f) << shift;
        if (!(c & 0x80)) return v;
        shift += 7;
        if (shift > 63) throw ParseError("index file corrupt: varint overflow");
    }
}

inline constexpr char kIndexMagic[8] = {'C', 'Q', 'R', 'I', 'D', 'X', '0', '\n'};
inline constexpr std::uint8_t kIndexVersion = 1;

} // namespace detail

inline void persist_index(const DistanceIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open index file for writing: " + path);
    out.write(detail::kIndexMagic, sizeof(detail::kIndexMagic));
    out.put(static_cast<char>(detail::kIndexVersion));
    std::uint64_t h = index.graph_hash();
    for (int i = 0; i < 8; ++i) out.put(static_cast<char>((h >> (8 * i)) & 0xff));
    detail::write_varint(out, index.entity_count());
    for (const auto& lab : index.labels()) {
        detail::write_varint(out, lab.size());
        for (const auto& e : lab) {
            detail::write_varint(out, e.landmark);
            detail::write_varint(out, e.dist);
        }
    }
    if (!out) throw ParseError("failed writing index file: " + path);
}

/// Loads an index persisted by persist_index and checks it against the graph
/// it will serve; an index built from any other graph is rejected as stale.
inline DistanceIndex load_index(const std::string& path, const EntityGraph& g) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open index file: " + path);
    char magic[sizeof(detail::kIndexMagic)];
    if (!in.read(magic, sizeof(magic)) ||
        !std::equal(std::begin(magic), std::end(magic), std::begin(detail::kIndexMagic)))
        throw ParseError("not an index file: " + path);
    int version = in.get();
    if (version == EOF) throw ParseError("index file truncated");
    if (version != detail::kIndexVersion)
        throw ParseError("unsupported index format version " + std::to_string(version));
    std::uint64_t h = 0;
    for (int i = 0; i < 8; ++i) {
        int c = in.get();
        if (c == EOF) throw ParseError("index file truncated");
        h |= static_cast<std::uint64_t>(c & 0xff) << (8 * i);
    }
    if (h != g.content_hash())
        throw StaleIndexError("stale index: graph content hash mismatch (rebuild required)");
    std::uint64_t n = detail::read_varint(in);
    if (n != g.entity_count())
        throw StaleIndexError("stale index: entity count mismatch");
    std::vector<std::vector<DistanceIndex::Entry>> labels(n);
    for (std::uint64_t e = 0; e < n; ++e) {
        std::uint64_t cnt = detail::read_varint(in);
        labels[e].reserve(cnt);
        for (std::uint64_t i = 0; i < cnt; ++i) {
            std::uint64_t lm = detail::read_varint(in);
            std::uint64_t d = detail::read_varint(in);
            if (lm >= n) throw ParseError("index file corrupt: landmark out of range");
            labels[e].push_back({static_cast<EntityId>(lm), static_cast<std::uint32_t>(d)});
        }
    }
    return DistanceIndex(h, std::move(labels), IndexBuildStats{});
}

/// On-demand BFS distances with a per-source memo. The memo keys on the first
/// argument (falling back to a second-argument hit via symmetry), so callers
/// that keep a small set of entities on one side stay cheap. Not safe for
/// concurrent use; build a DistanceIndex for that.
class BfsDistances final : public DistanceProvider {
public:
    explicit BfsDistances(const EntityGraph& g) : g_(&g) {}

    Distance distance(EntityId u, EntityId v) const override {
        if (u >= g_->entity_count() || v >= g_->entity_count())
            throw ArgumentError("distance: entity index out of range");
        if (u == v) return Distance::hops(0);
        if (auto it = memo_.find(v); it != memo_.end()) return lookup(it->second, u);
        auto it = memo_.find(u);
        if (it == memo_.end()) it = memo_.emplace(u, full_bfs(u)).first;
        return lookup(it->second, v);
    }

private:
    static Distance lookup(const std::vector<std::uint32_t>& d, EntityId e) {
        return d[e] == static_cast<std::uint32_t>(-1) ? Distance::unreachable()
                                                      : Distance::hops(d[e]);
    }

    std::vector<std::uint32_t> full_bfs(EntityId src) const {
        std::vector<std::uint32_t> dist(g_->entity_count(), static_cast<std::uint32_t>(-1));
        std::queue<EntityId> qu;
        dist[src] = 0;
        qu.push(src);
        while (!qu.empty()) {
            EntityId e = qu.front();
            qu.pop();
            for (EntityId nb : g_->neighbors(e)) {
                if (dist[nb] != static_cast<std::uint32_t>(-1)) continue;
                dist[nb] = dist[e] + 1;
                qu.push(nb);
            }
        }
        return dist;
    }

    const EntityGraph* g_;
    mutable std::unordered_map<EntityId, std::vector<std::uint32_t>> memo_;
};

class IndexDistances final : public DistanceProvider {
public:
    explicit IndexDistances(const DistanceIndex& index) : index_(&index) {}
    Distance distance(EntityId u, EntityId v) const override { return index_->query(u, v); }

private:
    const DistanceIndex* index_;
};

/// Pass-through provider that counts calls; the relaxation run stats use it.
class CountingDistances final : public DistanceProvider {
public:
    CountingDistances(const DistanceProvider& inner, std::uint64_t& counter)
        : inner_(&inner), counter_(&counter) {}
    Distance distance(EntityId u, EntityId v) const override {
        ++*counter_;
        return inner_->distance(u, v);
    }

private:
    const DistanceProvider* inner_;
    std::uint64_t* counter_;
};

} // namespace certqr
