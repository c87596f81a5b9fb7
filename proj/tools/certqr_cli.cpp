// Command-line front end: graph/index management, single-query relaxation,
// workload generation, quality metrics, and the bench harness.
//
// Exit codes: 0 ok, 1 usage error, 2 data/format error, 3 no solution.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "certqr/bench.hpp"
#include "certqr/certificate.hpp"
#include "certqr/distance.hpp"
#include "certqr/errors.hpp"
#include "certqr/graph.hpp"
#include "certqr/json_io.hpp"
#include "certqr/oracle.hpp"
#include "certqr/relaxation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoSolution = 3;

certqr::EntityGraph load_graph(const std::string& path, std::string format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw certqr::ParseError("cannot open graph file: " + path);
    if (format.empty()) {
        if (path.ends_with(".nt") || path.ends_with(".ntriples")) {
            format = "nt";
        } else if (path.ends_with(".tsv") || path.ends_with(".edges")) {
            format = "tsv";
        } else {
            // sniff: a tab before any '<' means an edge list
            std::string first;
            std::getline(in, first);
            in.clear();
            in.seekg(0);
            format = first.find('\t') != std::string::npos ? "tsv" : "nt";
        }
    }
    if (format == "nt") return certqr::load_ntriples(in);
    if (format == "tsv") return certqr::load_edge_list(in);
    throw certqr::ArgumentError("unknown graph format '" + format + "'");
}

std::vector<certqr::EntityId> resolve_query(const certqr::EntityGraph& g,
                                            const std::string& spec) {
    std::vector<certqr::EntityId> q;
    std::stringstream ss(spec);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        auto id = g.find_entity(name);
        if (!id) throw certqr::ArgumentError("query entity '" + name + "' not in graph");
        q.push_back(*id);
    }
    return q;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

struct IndexHolder {
    std::optional<certqr::DistanceIndex> index;
    std::optional<certqr::BfsDistances> bfs;
    const certqr::DistanceProvider* provider = nullptr;
    std::optional<certqr::IndexDistances> index_provider;

    void init(const certqr::EntityGraph& g, const std::string& index_path) {
        if (!index_path.empty()) {
            index = certqr::load_index(index_path, g);
            index_provider.emplace(*index);
            provider = &*index_provider;
        } else {
            bfs.emplace(g);
            provider = &*bfs;
        }
    }
};

void print_outcome_text(const certqr::EntityGraph& g, std::span<const certqr::EntityId> query,
                        const certqr::RelaxationOutcome& out) {
    if (out.q_max.empty()) {
        std::cout << "no successful sub-query\n";
    } else if (out.q_max.size() == query.size()) {
        std::cout << "query is successful (no relaxation needed)\n";
    } else {
        std::cout << "relaxed to " << out.q_max.size() << " of " << query.size()
                  << " entities\n";
    }
    if (!out.q_max.empty()) {
        std::cout << "q_max:";
        for (auto e : out.q_max) std::cout << ' ' << g.entity_name(e);
        std::cout << '\n';
        std::cout << "removed:";
        for (auto e : query)
            if (!std::binary_search(out.q_max.begin(), out.q_max.end(), e))
                std::cout << ' ' << g.entity_name(e);
        std::cout << '\n';
        if (out.certificate) {
            std::cout << "certificate: " << g.entity_name(out.certificate->center);
            if (out.certificate->companion)
                std::cout << " (companion " << g.entity_name(*out.certificate->companion) << ")";
            std::cout << '\n';
        }
    }
    if (out.witness) {
        std::cout << "witness (diameter " << out.witness->diameter << "):\n";
        for (auto a : out.witness->arcs) {
            const auto& arc = g.arc(a);
            std::cout << "  " << g.entity_name(arc.tail) << " -[" << g.relation_name(arc.label)
                      << "]-> " << g.entity_name(arc.head) << '\n';
        }
    }
    std::cout << "stats: visited=" << out.stats.entities_visited
              << " opt_with_cert=" << out.stats.opt_with_cert_calls
              << " dist_calls=" << out.stats.distance_calls << " time_ms=" << out.stats.wall_ms
              << (out.stats.terminated_early ? " (timed out)" : "") << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relationship query relaxation over entity-relation graphs"};
    app.require_subcommand(1);

    std::string graph_path, format, index_path, out_path, workload_path;
    std::string query_spec, algo_name = "certqr+", kind = "random", algos_list, d_list_spec;
    std::uint32_t diameter = 4, count = 100, n = 3, hops = 2, ref_d = 4, ceiling = 8, reps = 3;
    std::uint64_t seed = 1;
    double timeout_s = 60.0;
    bool want_witness = false, want_json = false;

    auto* load_stats = app.add_subcommand("load-stats", "load a graph and dump statistics");
    load_stats->add_option("--graph", graph_path)->required();
    load_stats->add_option("--format", format)->check(CLI::IsMember({"nt", "tsv"}));

    auto* build = app.add_subcommand("build-index", "build and persist a distance index");
    build->add_option("--graph", graph_path)->required();
    build->add_option("--out", out_path)->required();

    auto* relax = app.add_subcommand("relax", "relax one relationship query");
    relax->add_option("--graph", graph_path)->required();
    relax->add_option("--index", index_path);
    relax->add_option("--query", query_spec, "comma-separated entity names")->required();
    relax->add_option("--diameter", diameter)->required();
    relax->add_option("--algo", algo_name)
        ->check(CLI::IsMember({"certqr", "certqr+", "dg", "ds", "dgs", "bsl", "brute"}));
    relax->add_flag("--witness", want_witness, "materialize a witness association");
    relax->add_flag("--json", want_json);

    auto* gen = app.add_subcommand("gen-queries", "generate a query workload");
    gen->add_option("--graph", graph_path)->required();
    gen->add_option("--kind", kind)->check(CLI::IsMember({"random", "clustered"}));
    gen->add_option("--count", count)->required();
    gen->add_option("--n", n)->required();
    gen->add_option("--hops", hops);
    gen->add_option("--seed", seed)->required();
    gen->add_option("--out", out_path)->required();

    auto* quality = app.add_subcommand("quality", "D_min / N_min per workload query");
    quality->add_option("--graph", graph_path)->required();
    quality->add_option("--index", index_path);
    quality->add_option("--workload", workload_path)->required();
    quality->add_option("--ref-d", ref_d)->required();
    quality->add_option("--ceiling", ceiling)->required();
    quality->add_option("--out", out_path)->required();

    auto* bench = app.add_subcommand("bench", "time algorithms over a workload");
    bench->add_option("--graph", graph_path)->required();
    bench->add_option("--index", index_path);
    bench->add_option("--workload", workload_path)->required();
    bench->add_option("--algos", algos_list, "comma-separated algorithm names")->required();
    bench->add_option("--d-list", d_list_spec, "comma-separated diameter bounds")->required();
    bench->add_option("--timeout", timeout_s, "per-run timeout in seconds");
    bench->add_option("--reps", reps);
    bench->add_option("--out", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (load_stats->parsed()) {
            auto g = load_graph(graph_path, format);
            std::cout << certqr::graph_stats_json(g).dump(2) << '\n';
            return kExitOk;
        }

        if (build->parsed()) {
            auto g = load_graph(graph_path, format);
            auto index = certqr::build_index(g);
            certqr::persist_index(index, out_path);
            std::cout << "index: " << index.build_stats().label_entries << " label entries, "
                      << index.build_stats().build_ms << " ms build, written to " << out_path
                      << '\n';
            return kExitOk;
        }

        if (relax->parsed()) {
            auto g = load_graph(graph_path, format);
            IndexHolder dist;
            dist.init(g, index_path);
            auto q = resolve_query(g, query_spec);

            certqr::RelaxOptions opts;
            opts.materialize_witness = want_witness;
            auto algo = certqr::parse_algo(algo_name);
            auto timeout =
                std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0));
            auto outcome =
                certqr::run_algorithm(g, algo, diameter, q, *dist.provider, timeout, opts);

            if (want_json)
                std::cout << certqr::outcome_json(g, q, outcome).dump(2) << '\n';
            else
                print_outcome_text(g, q, outcome);
            return outcome.q_max.empty() ? kExitNoSolution : kExitOk;
        }

        if (gen->parsed()) {
            auto g = load_graph(graph_path, format);
            certqr::Workload w = kind == "random"
                                     ? certqr::gen_random_queries(g, count, n, seed)
                                     : certqr::gen_clustered_queries(g, count, n, hops, seed);
            std::ofstream out(out_path);
            if (!out) throw certqr::ParseError("cannot open output file: " + out_path);
            out << certqr::workload_json(g, w).dump(2) << '\n';
            std::cout << "wrote " << w.queries.size() << " queries to " << out_path << '\n';
            return kExitOk;
        }

        if (quality->parsed()) {
            auto g = load_graph(graph_path, format);
            IndexHolder dist;
            dist.init(g, index_path);
            std::ifstream win(workload_path);
            if (!win) throw certqr::ParseError("cannot open workload file: " + workload_path);
            certqr::json wj;
            win >> wj;
            auto w = certqr::workload_from_json(g, wj);

            std::vector<certqr::QualityRecord> records;
            for (const auto& q : w.queries)
                records.push_back(certqr::compute_quality(g, *dist.provider, q.entities, ref_d,
                                                          ceiling, q.id));
            std::ofstream out(out_path);
            if (!out) throw certqr::ParseError("cannot open output file: " + out_path);
            certqr::write_quality_csv(out, records);
            std::cout << "wrote " << records.size() << " quality records to " << out_path << '\n';
            return kExitOk;
        }

        if (bench->parsed()) {
            auto g = load_graph(graph_path, format);
            IndexHolder dist;
            dist.init(g, index_path);
            std::ifstream win(workload_path);
            if (!win) throw certqr::ParseError("cannot open workload file: " + workload_path);
            certqr::json wj;
            win >> wj;
            auto w = certqr::workload_from_json(g, wj);

            std::vector<certqr::Algo> algos;
            for (const auto& name : split_list(algos_list))
                algos.push_back(certqr::parse_algo(name));
            std::vector<std::uint32_t> d_list;
            for (const auto& d : split_list(d_list_spec))
                d_list.push_back(static_cast<std::uint32_t>(std::stoul(d)));
            if (algos.empty() || d_list.empty())
                throw certqr::ArgumentError("bench needs at least one algorithm and one D");

            auto timeout =
                std::chrono::milliseconds(static_cast<std::int64_t>(timeout_s * 1000.0));
            auto records = certqr::run_bench(g, *dist.provider, w, algos, d_list, timeout, reps);

            std::ofstream out(out_path);
            if (!out) throw certqr::ParseError("cannot open output file: " + out_path);
            certqr::write_bench_csv(out, records);
            std::string json_path = out_path + ".json";
            std::ofstream jout(json_path);
            jout << certqr::bench_json(records).dump(2) << '\n';
            std::cout << "wrote " << records.size() << " bench records to " << out_path
                      << " and " << json_path << '\n';
            return kExitOk;
        }
    } catch (const certqr::ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const certqr::EmptyGraphError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}
