#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "certqr/errors.hpp"

namespace certqr {

using EntityId = std::uint32_t;
using ArcId = std::uint32_t;
using LabelId = std::uint32_t;

inline constexpr EntityId kNoEntity = static_cast<EntityId>(-1);

struct Arc {
    EntityId tail;
    EntityId head;
    LabelId label;
};

struct LoadStats {
    std::uint64_t lines = 0;
    std::uint64_t arcs = 0;
    std::uint64_t skipped_literal = 0;
    std::uint64_t skipped_rdf_type = 0;
    std::uint64_t skipped_non_iri = 0;

    std::uint64_t skipped() const {
        return skipped_literal + skipped_rdf_type + skipped_non_iri;
    }
};

/// Immutable directed labeled multigraph over interned entities. All search
/// semantics use the undirected simple view: neighbors() deduplicates parallel
/// arcs and self-loops never yield a neighbor. Arc direction and labels are
/// kept only so results can be reported in the input's terms. Entity indices
/// are assigned in first-appearance order and never change afterwards; ties
/// everywhere in the library are broken on these indices (or on arc indices,
/// which follow input order).
class EntityGraph {
public:
    std::size_t entity_count() const { return entity_names_.size(); }
    std::size_t arc_count() const { return arcs_.size(); }

    const Arc& arc(ArcId a) const { return arcs_[a]; }

    const std::string& entity_name(EntityId e) const {
        check_entity(e);
        return entity_names_[e];
    }
    const std::string& relation_name(LabelId l) const { return relation_names_[l]; }

    std::optional<EntityId> find_entity(std::string_view name) const {
        auto it = entity_ids_.find(std::string(name));
        if (it == entity_ids_.end()) return std::nullopt;
        return it->second;
    }

    /// Deduplicated undirected neighbor set, ascending entity index.
    const std::vector<EntityId>& neighbors(EntityId e) const {
        check_entity(e);
        return neighbor_sets_[e];
    }

    /// Incident (neighbor, arc) pairs in ascending arc order; self-loops excluded.
    const std::vector<std::pair<EntityId, ArcId>>& incident(EntityId e) const {
        check_entity(e);
        return incidence_[e];
    }

    /// Number of incident arcs (not neighbors); a self-loop counts twice.
    std::uint32_t degree(EntityId e) const {
        check_entity(e);
        return degrees_[e];
    }

    const LoadStats& load_stats() const { return load_stats_; }

    /// FNV-1a over the interned names and arc list; used to pair persisted
    /// distance indexes with the exact graph they were built from.
    std::uint64_t content_hash() const {
        std::uint64_t h = 14695981039346656037ull;
        auto mix = [&h](std::string_view s) {
            for (unsigned char c : s) {
                h ^= c;
                h *= 1099511628211ull;
            }
            h ^= 0xff;
            h *= 1099511628211ull;
        };
        for (const auto& n : entity_names_) mix(n);
        for (const auto& n : relation_names_) mix(n);
        for (const auto& a : arcs_) {
            mix(std::to_string(a.tail));
            mix(std::to_string(a.head));
            mix(std::to_string(a.label));
        }
        return h;
    }

    class Builder;

private:
    void check_entity(EntityId e) const {
        if (e >= entity_names_.size())
            throw ArgumentError("entity index " + std::to_string(e) + " out of range");
    }

    std::vector<std::string> entity_names_;
    std::unordered_map<std::string, EntityId> entity_ids_;
    std::vector<std::string> relation_names_;
    std::unordered_map<std::string, LabelId> relation_ids_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::pair<EntityId, ArcId>>> incidence_;
    std::vector<std::vector<EntityId>> neighbor_sets_;
    std::vector<std::uint32_t> degrees_;
    LoadStats load_stats_;
};

class EntityGraph::Builder {
public:
    EntityId intern_entity(std::string_view name) {
        auto [it, inserted] = g_.entity_ids_.try_emplace(std::string(name),
                                                         static_cast<EntityId>(g_.entity_names_.size()));
        if (inserted) g_.entity_names_.emplace_back(name);
        return it->second;
    }

    void add_arc(std::string_view tail, std::string_view label, std::string_view head) {
        EntityId t = intern_entity(tail);
        EntityId h = intern_entity(head);
        auto [it, inserted] = g_.relation_ids_.try_emplace(std::string(label),
                                                           static_cast<LabelId>(g_.relation_names_.size()));
        if (inserted) g_.relation_names_.emplace_back(label);
        g_.arcs_.push_back(Arc{t, h, it->second});
    }

    LoadStats& stats() { return g_.load_stats_; }

    EntityGraph finish() {
        const std::size_t n = g_.entity_names_.size();
        g_.incidence_.assign(n, {});
        g_.degrees_.assign(n, 0);
        for (ArcId a = 0; a < g_.arcs_.size(); ++a) {
            const Arc& arc = g_.arcs_[a];
            g_.degrees_[arc.tail] += 1;
            g_.degrees_[arc.head] += 1;
            if (arc.tail != arc.head) {
                g_.incidence_[arc.tail].emplace_back(arc.head, a);
                g_.incidence_[arc.head].emplace_back(arc.tail, a);
            }
        }
        g_.neighbor_sets_.assign(n, {});
        for (std::size_t e = 0; e < n; ++e) {
            auto& set = g_.neighbor_sets_[e];
            set.reserve(g_.incidence_[e].size());
            for (auto [nb, a] : g_.incidence_[e]) set.push_back(nb);
            std::sort(set.begin(), set.end());
            set.erase(std::unique(set.begin(), set.end()), set.end());
        }
        return std::move(g_);
    }

private:
    EntityGraph g_;
};

namespace detail {

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r'; }

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
    return s;
}

enum class TermKind { iri, literal, blank };

struct Term {
    TermKind kind;
    std::string_view text; // IRI without angle brackets
};

// Scans one N-Triples term starting at pos; advances pos past it.
inline Term scan_term(std::string_view line, std::size_t& pos, std::size_t lineno) {
    while (pos < line.size() && is_ws(line[pos])) ++pos;
    if (pos >= line.size()) throw ParseError("expected term, found end of line", lineno);
    char c = line[pos];
    if (c == '<') {
        std::size_t end = line.find('>', pos + 1);
        if (end == std::string_view::npos) throw ParseError("unterminated IRI", lineno);
        Term t{TermKind::iri, line.substr(pos + 1, end - pos - 1)};
        pos = end + 1;
        return t;
    }
    if (c == '"') {
        std::size_t i = pos + 1;
        while (i < line.size()) {
            if (line[i] == '\\') {
                i += 2;
                continue;
            }
            if (line[i] == '"') break;
            ++i;
        }
        if (i >= line.size()) throw ParseError("unterminated literal", lineno);
        ++i; // past closing quote
        // optional datatype or language tag
        if (i < line.size() && line[i] == '^' && i + 1 < line.size() && line[i + 1] == '^') {
            i += 2;
            if (i >= line.size() || line[i] != '<') throw ParseError("malformed datatype IRI", lineno);
            std::size_t end = line.find('>', i);
            if (end == std::string_view::npos) throw ParseError("unterminated datatype IRI", lineno);
            i = end + 1;
        } else if (i < line.size() && line[i] == '@') {
            while (i < line.size() && !is_ws(line[i]) && line[i] != '.') ++i;
        }
        Term t{TermKind::literal, line.substr(pos, i - pos)};
        pos = i;
        return t;
    }
    if (c == '_' && pos + 1 < line.size() && line[pos + 1] == ':') {
        std::size_t i = pos;
        while (i < line.size() && !is_ws(line[i])) ++i;
        Term t{TermKind::blank, line.substr(pos, i - pos)};
        pos = i;
        return t;
    }
    throw ParseError(std::string("unexpected character '") + c + "' in term", lineno);
}

} // namespace detail

inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// Reads the line-oriented N-Triples subset: one triple per line, terminated
/// by " .". Keeps only IRI-to-IRI triples whose predicate is not rdf:type;
/// everything else is counted and dropped.
inline EntityGraph load_ntriples(std::istream& in) {
    EntityGraph::Builder b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = detail::trim(line);
        if (s.empty() || s.front() == '#') continue;
        b.stats().lines += 1;

        std::size_t pos = 0;
        detail::Term subj = detail::scan_term(s, pos, lineno);
        detail::Term pred = detail::scan_term(s, pos, lineno);
        detail::Term obj = detail::scan_term(s, pos, lineno);
        std::string_view rest = detail::trim(s.substr(pos));
        if (rest != ".")
            throw ParseError("triple must end with '.'", lineno);
        if (pred.kind != detail::TermKind::iri)
            throw ParseError("predicate must be an IRI", lineno);

        if (pred.text == kRdfType) {
            b.stats().skipped_rdf_type += 1;
        } else if (obj.kind == detail::TermKind::literal) {
            b.stats().skipped_literal += 1;
        } else if (subj.kind != detail::TermKind::iri || obj.kind != detail::TermKind::iri) {
            b.stats().skipped_non_iri += 1;
        } else {
            b.add_arc(subj.text, pred.text, obj.text);
            b.stats().arcs += 1;
        }
    }
    if (b.stats().arcs == 0)
        throw EmptyGraphError("empty graph: no arcs remain after filtering", b.stats().skipped());
    return b.finish();
}

/// Reads "tail<TAB>label<TAB>head" lines; same graph semantics as N-Triples
/// without the IRI syntax.
inline EntityGraph load_edge_list(std::istream& in) {
    EntityGraph::Builder b;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = line;
        if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
        if (detail::trim(s).empty()) continue;
        b.stats().lines += 1;

        std::size_t t1 = s.find('\t');
        std::size_t t2 = t1 == std::string_view::npos ? t1 : s.find('\t', t1 + 1);
        if (t1 == std::string_view::npos || t2 == std::string_view::npos ||
            s.find('\t', t2 + 1) != std::string_view::npos)
            throw ParseError("expected 3 tab-separated columns", lineno);
        std::string_view tail = s.substr(0, t1);
        std::string_view label = s.substr(t1 + 1, t2 - t1 - 1);
        std::string_view head = s.substr(t2 + 1);
        if (tail.empty() || label.empty() || head.empty())
            throw ParseError("empty column", lineno);
        b.add_arc(tail, label, head);
        b.stats().arcs += 1;
    }
    if (b.stats().arcs == 0)
        throw EmptyGraphError("empty graph: no arcs loaded", b.stats().skipped());
    return b.finish();
}

inline const std::vector<EntityId>& neighbors(const EntityGraph& g, EntityId e) {
    return g.neighbors(e);
}

inline std::uint32_t degree(const EntityGraph& g, EntityId e) {
    return g.degree(e);
}

} // namespace certqr
