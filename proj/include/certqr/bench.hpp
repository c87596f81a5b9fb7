#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "certqr/distance.hpp"
#include "certqr/errors.hpp"
#include "certqr/graph.hpp"
#include "certqr/oracle.hpp"
#include "certqr/relaxation.hpp"

namespace certqr {

enum class Algo { certqr, certqr_plus, dg, ds, dgs, bsl, brute };

inline const char* to_string(Algo a) {
    switch (a) {
    case Algo::certqr: return "certqr";
    case Algo::certqr_plus: return "certqr+";
    case Algo::dg: return "dg";
    case Algo::ds: return "ds";
    case Algo::dgs: return "dgs";
    case Algo::bsl: return "bsl";
    case Algo::brute: return "brute";
    }
    return "?";
}

inline Algo parse_algo(std::string_view name) {
    if (name == "certqr") return Algo::certqr;
    if (name == "certqr+") return Algo::certqr_plus;
    if (name == "dg") return Algo::dg;
    if (name == "ds") return Algo::ds;
    if (name == "dgs") return Algo::dgs;
    if (name == "bsl") return Algo::bsl;
    if (name == "brute") return Algo::brute;
    throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

struct WorkloadQuery {
    std::uint32_t id = 0;
    std::string kind; // "random" | "clustered"
    std::vector<EntityId> entities;
};

struct Workload {
    std::vector<WorkloadQuery> queries;
};

namespace detail {

// Engine-stable bounded draw; std::uniform_int_distribution is
// implementation-defined, and workloads must reproduce bit-for-bit.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
    return rng() % bound;
}

inline std::vector<EntityId> sample_without_replacement(std::mt19937_64& rng,
                                                        std::vector<EntityId> pool,
                                                        std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(draw(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

} // namespace detail

/// Seeded uniform queries: `count` queries of `n` distinct entities each.
inline Workload gen_random_queries(const EntityGraph& g, std::uint32_t count, std::uint32_t n,
                                   std::uint64_t seed) {
    if (n < 2) throw ArgumentError("queries need at least 2 entities");
    if (n > g.entity_count())
        throw ArgumentError("query size exceeds the number of entities in the graph");
    std::mt19937_64 rng(seed);
    std::vector<EntityId> all(g.entity_count());
    for (EntityId e = 0; e < all.size(); ++e) all[e] = e;

    Workload w;
    for (std::uint32_t i = 0; i < count; ++i) {
        WorkloadQuery q;
        q.id = i;
        q.kind = "random";
        q.entities = detail::sample_without_replacement(rng, all, n);
        w.queries.push_back(std::move(q));
    }
    return w;
}

/// Seeded neighborhood queries: a uniformly drawn seed entity plus n-1
/// companions from its <= h hop neighborhood; seeds with too-small
/// neighborhoods are redrawn up to a retry cap.
inline Workload gen_clustered_queries(const EntityGraph& g, std::uint32_t count, std::uint32_t n,
                                      std::uint32_t hops, std::uint64_t seed) {
    if (n < 2) throw ArgumentError("queries need at least 2 entities");
    if (hops < 1) throw ArgumentError("clustered generation needs hop radius >= 1");
    if (n > g.entity_count())
        throw ArgumentError("query size exceeds the number of entities in the graph");
    std::mt19937_64 rng(seed);

    Workload w;
    constexpr std::uint32_t kRetriesPerQuery = 1000;
    for (std::uint32_t i = 0; i < count; ++i) {
        bool placed = false;
        for (std::uint32_t attempt = 0; attempt < kRetriesPerQuery && !placed; ++attempt) {
            EntityId seed_entity =
                static_cast<EntityId>(detail::draw(rng, g.entity_count()));
            auto frontier = bounded_bfs(g, seed_entity, hops);
            std::vector<EntityId> hood;
            for (auto [e, d] : frontier.entries())
                if (e != seed_entity) hood.push_back(e);
            if (hood.size() + 1 < n) continue;
            WorkloadQuery q;
            q.id = i;
            q.kind = "clustered";
            q.entities = detail::sample_without_replacement(rng, std::move(hood), n - 1);
            q.entities.insert(q.entities.begin(), seed_entity);
            w.queries.push_back(std::move(q));
            placed = true;
        }
        if (!placed)
            throw GenerationError("clustered query generation exhausted retries: no seed entity "
                                  "has " +
                                  std::to_string(n - 1) + " entities within " +
                                  std::to_string(hops) + " hops");
    }
    return w;
}

/// D_min (smallest bound making the query succeed, scanned upward so the
/// predecessor is a guaranteed failure witness) and N_min (entities removed
/// by relaxation at the reference bound). Unset fields mean unattainable.
struct QualityRecord {
    std::uint32_t query_id = 0;
    std::optional<std::uint32_t> d_min;
    std::optional<std::uint32_t> n_min;
};

inline QualityRecord compute_quality(const EntityGraph& g, const DistanceProvider& dist,
                                     std::span<const EntityId> query, std::uint32_t reference_d,
                                     std::uint32_t ceiling, std::uint32_t query_id = 0) {
    if (ceiling < reference_d)
        throw ArgumentError("quality ceiling must be >= the reference diameter");
    QualityRecord rec;
    rec.query_id = query_id;
    for (std::uint32_t d = 1; d <= ceiling; ++d) {
        if (is_successful(g, d, query, dist)) {
            rec.d_min = d;
            break;
        }
    }
    auto outcome = certqr_plus(g, reference_d, query, dist);
    if (!outcome.q_max.empty())
        rec.n_min = static_cast<std::uint32_t>(detail::checked_query(g, query, reference_d).size() -
                                               outcome.q_max.size());
    return rec;
}

struct BenchRecord {
    std::uint32_t query_id = 0;
    std::string algo;
    std::uint32_t d = 0;
    double time_ms = 0.0;
    bool timeout = false;
    std::uint64_t qmax_size = 0;
    RunStats stats;
};

inline RelaxationOutcome run_algorithm(const EntityGraph& g, Algo algo, std::uint32_t d,
                                       std::span<const EntityId> query,
                                       const DistanceProvider& dist,
                                       std::chrono::milliseconds timeout,
                                       const RelaxOptions& base_opts = {}) {
    RelaxOptions opts = base_opts;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    opts.deadline = opts.deadline ? std::min(*opts.deadline, deadline) : deadline;
    switch (algo) {
    case Algo::certqr: return certqr(g, d, query, dist, opts);
    case Algo::certqr_plus: return certqr_plus(g, d, query, dist, PriorityMode::plain, opts);
    case Algo::dg: return certqr_plus(g, d, query, dist, PriorityMode::dg, opts);
    case Algo::ds: return certqr_plus(g, d, query, dist, PriorityMode::ds, opts);
    case Algo::dgs: return certqr_plus(g, d, query, dist, PriorityMode::dgs, opts);
    case Algo::bsl: return bsl(g, d, query, dist, timeout, {}, opts);
    case Algo::brute: return brute_outcome(g, d, query, {}, opts);
    }
    throw ArgumentError("unhandled algorithm");
}

/// Per (query, algorithm, D) cell: `repetitions` timed runs, keeping the
/// median wall time and that run's counters. Timed-out runs report the
/// timeout value as their time.
inline std::vector<BenchRecord> run_bench(const EntityGraph& g, const DistanceProvider& dist,
                                          const Workload& workload, std::span<const Algo> algos,
                                          std::span<const std::uint32_t> d_list,
                                          std::chrono::milliseconds timeout,
                                          std::uint32_t repetitions) {
    if (repetitions < 1) throw ArgumentError("bench needs at least 1 repetition");
    std::vector<BenchRecord> records;
    for (const auto& wq : workload.queries) {
        for (Algo algo : algos) {
            for (std::uint32_t d : d_list) {
                std::vector<std::pair<double, RelaxationOutcome>> runs;
                runs.reserve(repetitions);
                for (std::uint32_t rep = 0; rep < repetitions; ++rep) {
                    auto outcome = run_algorithm(g, algo, d, wq.entities, dist, timeout);
                    double t = outcome.stats.terminated_early
                                   ? static_cast<double>(timeout.count())
                                   : outcome.stats.wall_ms;
                    runs.emplace_back(t, std::move(outcome));
                }
                std::sort(runs.begin(), runs.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });
                auto& median = runs[runs.size() / 2];
                BenchRecord rec;
                rec.query_id = wq.id;
                rec.algo = to_string(algo);
                rec.d = d;
                rec.time_ms = median.first;
                rec.timeout = median.second.stats.terminated_early;
                rec.qmax_size = median.second.q_max.size();
                rec.stats = median.second.stats;
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

inline void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
    out << "query_id,algo,d,time_ms,timeout,qmax_size,entities_visited,opt_with_cert_calls,"
           "priority_computations,distance_calls,queue_ops\n";
    for (const auto& r : records) {
        out << r.query_id << ',' << r.algo << ',' << r.d << ',' << r.time_ms << ','
            << (r.timeout ? 1 : 0) << ',' << r.qmax_size << ',' << r.stats.entities_visited << ','
            << r.stats.opt_with_cert_calls << ',' << r.stats.priority_computations << ','
            << r.stats.distance_calls << ',' << r.stats.queue_ops << '\n';
    }
}

inline std::vector<BenchRecord> parse_bench_csv(std::istream& in) {
    std::vector<BenchRecord> records;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("bench csv: missing header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 11) throw ParseError("bench csv: expected 11 fields", lineno);
        try {
            BenchRecord r;
            r.query_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
            r.algo = fields[1];
            r.d = static_cast<std::uint32_t>(std::stoul(fields[2]));
            r.time_ms = std::stod(fields[3]);
            r.timeout = fields[4] == "1";
            r.qmax_size = std::stoull(fields[5]);
            r.stats.entities_visited = std::stoull(fields[6]);
            r.stats.opt_with_cert_calls = std::stoull(fields[7]);
            r.stats.priority_computations = std::stoull(fields[8]);
            r.stats.distance_calls = std::stoull(fields[9]);
            r.stats.queue_ops = std::stoull(fields[10]);
            r.stats.wall_ms = r.time_ms;
            r.stats.terminated_early = r.timeout;
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            throw ParseError("bench csv: malformed field", lineno);
        }
    }
    return records;
}

inline void write_quality_csv(std::ostream& out, std::span<const QualityRecord> records) {
    out << "query_id,d_min,n_min\n";
    for (const auto& r : records) {
        out << r.query_id << ',';
        if (r.d_min) out << *r.d_min;
        else out << "unattainable";
        out << ',';
        if (r.n_min) out << *r.n_min;
        else out << "inf";
        out << '\n';
    }
}

} // namespace certqr
