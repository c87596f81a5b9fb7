#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "certqr/bench.hpp"
#include "certqr/certificate.hpp"
#include "certqr/graph.hpp"
#include "certqr/relaxation.hpp"

namespace certqr {

using nlohmann::json;

inline json graph_stats_json(const EntityGraph& g) {
    std::map<std::uint32_t, std::uint64_t> degree_histogram;
    for (EntityId e = 0; e < g.entity_count(); ++e) degree_histogram[g.degree(e)] += 1;
    json j;
    j["entities"] = g.entity_count();
    j["arcs"] = g.arc_count();
    const auto& s = g.load_stats();
    j["skipped"] = {{"literal", s.skipped_literal},
                    {"rdf_type", s.skipped_rdf_type},
                    {"non_iri", s.skipped_non_iri},
                    {"total", s.skipped()}};
    json hist = json::object();
    for (auto [deg, cnt] : degree_histogram) hist[std::to_string(deg)] = cnt;
    j["degree_distribution"] = hist;
    return j;
}

inline json sa_json(const EntityGraph& g, const SemanticAssociation& sa) {
    json j;
    j["vertices"] = json::array();
    for (EntityId v : sa.vertices) j["vertices"].push_back(g.entity_name(v));
    j["arcs"] = json::array();
    for (ArcId a : sa.arcs) {
        const Arc& arc = g.arc(a);
        j["arcs"].push_back({{"tail", g.entity_name(arc.tail)},
                             {"label", g.relation_name(arc.label)},
                             {"head", g.entity_name(arc.head)}});
    }
    j["diameter"] = sa.diameter;
    return j;
}

inline json stats_json(const RunStats& s) {
    return json{{"entities_visited", s.entities_visited},
                {"opt_with_cert_calls", s.opt_with_cert_calls},
                {"priority_computations", s.priority_computations},
                {"distance_calls", s.distance_calls},
                {"queue_ops", s.queue_ops},
                {"wall_ms", s.wall_ms},
                {"terminated_early", s.terminated_early}};
}

inline json outcome_json(const EntityGraph& g, std::span<const EntityId> query,
                         const RelaxationOutcome& out) {
    json j;
    if (out.q_max.empty())
        j["status"] = "no_solution";
    else if (out.q_max.size() == query.size())
        j["status"] = "success";
    else
        j["status"] = "relaxed";
    j["q_max"] = json::array();
    for (EntityId e : out.q_max) j["q_max"].push_back(g.entity_name(e));
    j["removed"] = json::array();
    for (EntityId e : query)
        if (!std::binary_search(out.q_max.begin(), out.q_max.end(), e))
            j["removed"].push_back(g.entity_name(e));
    if (out.certificate) {
        json cert;
        cert["center"] = g.entity_name(out.certificate->center);
        if (out.certificate->companion)
            cert["companion"] = g.entity_name(*out.certificate->companion);
        j["certificate"] = cert;
    }
    if (out.witness) j["witness"] = sa_json(g, *out.witness);
    j["stats"] = stats_json(out.stats);
    return j;
}

inline json workload_json(const EntityGraph& g, const Workload& w) {
    json arr = json::array();
    for (const auto& q : w.queries) {
        json e = json::array();
        for (EntityId id : q.entities) e.push_back(g.entity_name(id));
        arr.push_back({{"id", q.id}, {"kind", q.kind}, {"n", q.entities.size()}, {"entities", e}});
    }
    return json{{"queries", arr}};
}

inline Workload workload_from_json(const EntityGraph& g, const json& j) {
    Workload w;
    if (!j.contains("queries") || !j["queries"].is_array())
        throw ParseError("workload file: missing 'queries' array");
    for (const auto& jq : j["queries"]) {
        WorkloadQuery q;
        q.id = jq.at("id").get<std::uint32_t>();
        q.kind = jq.value("kind", "random");
        for (const auto& name : jq.at("entities")) {
            auto id = g.find_entity(name.get<std::string>());
            if (!id)
                throw ParseError("workload file: entity '" + name.get<std::string>() +
                                 "' not in graph");
            q.entities.push_back(*id);
        }
        w.queries.push_back(std::move(q));
    }
    return w;
}

inline json bench_json(std::span<const BenchRecord> records) {
    json arr = json::array();
    for (const auto& r : records) {
        arr.push_back({{"query_id", r.query_id},
                       {"algo", r.algo},
                       {"d", r.d},
                       {"time_ms", r.time_ms},
                       {"timeout", r.timeout},
                       {"qmax_size", r.qmax_size},
                       {"stats", stats_json(r.stats)}});
    }
    return json{{"records", arr}};
}

inline json quality_json(std::span<const QualityRecord> records) {
    json arr = json::array();
    for (const auto& r : records) {
        json jr;
        jr["query_id"] = r.query_id;
        if (r.d_min) jr["d_min"] = *r.d_min;
        else jr["d_min"] = nullptr;
        if (r.n_min) jr["n_min"] = *r.n_min;
        else jr["n_min"] = nullptr;
        arr.push_back(jr);
    }
    return json{{"records", arr}};
}

} // namespace certqr
