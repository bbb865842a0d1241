#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridcode/errors.hpp"
#include "gridcode/pairgraph.hpp"

namespace gridcode {

// The peeling routines are templated over a digraph interface so that the
// same code runs on pair graphs and on plain test fixtures. A graph G must
// provide:
//   vertex_id_space()            dense id range [0, ...)
//   for_each_vertex(fn)          real vertices, ascending id
//   out_degree(v)
//   for_each_succ(v, fn) / for_each_pred(v, fn)

/// Maximal vertex set in which every vertex keeps >= t out-neighbours inside
/// the set; computed by deleting violating vertices to a fixpoint. The
/// result is unique regardless of deletion order. Returns ascending ids;
/// empty if nothing survives. t = 0 returns every vertex.
template <class G>
std::vector<std::uint64_t> peel_to_threshold(const G& g, std::uint64_t t) {
    const std::uint64_t n = g.vertex_id_space();
    std::vector<char> alive(n, 0);
    std::vector<std::uint64_t> deg(n, 0);
    std::vector<std::uint64_t> work;
    g.for_each_vertex([&](std::uint64_t v) {
        alive[v] = 1;
        deg[v] = g.out_degree(v);
        if (t > 0 && deg[v] < t) work.push_back(v);
    });

    std::size_t head = 0;
    while (head < work.size()) {
        std::uint64_t v = work[head++];
        alive[v] = 0;
        g.for_each_pred(v, [&](std::uint64_t u) {
            if (alive[u] && --deg[u] == t - 1) work.push_back(u);
        });
    }

    std::vector<std::uint64_t> survivors;
    g.for_each_vertex([&](std::uint64_t v) {
        if (alive[v]) survivors.push_back(v);
    });
    return survivors;
}

/// Subgraph with the largest possible minimum out-degree.
struct CoreResult {
    std::uint64_t k = 0;
    std::vector<std::uint64_t> vertices; // ascending ids
    bool is_exact_max = false;
};

namespace detail {

/// Min-bucket peel in degeneracy order: repeatedly remove a vertex of
/// minimum current out-degree (ascending id among ties); the answer is the
/// largest minimum seen. Lazy decrement: stale bucket entries are skipped.
template <class G> std::uint64_t degeneracy_max_min_out_degree(const G& g) {
    const std::uint64_t n = g.vertex_id_space();
    std::vector<char> alive(n, 0);
    std::vector<std::uint64_t> deg(n, 0);
    std::uint64_t max_deg = 0;
    std::uint64_t remaining = 0;
    g.for_each_vertex([&](std::uint64_t v) {
        alive[v] = 1;
        deg[v] = g.out_degree(v);
        max_deg = std::max(max_deg, deg[v]);
        ++remaining;
    });

    std::vector<std::vector<std::uint64_t>> buckets(max_deg + 1);
    std::vector<std::size_t> heads(max_deg + 1, 0);
    g.for_each_vertex([&](std::uint64_t v) { buckets[deg[v]].push_back(v); });

    std::uint64_t best = 0;
    std::uint64_t cur = 0;
    while (remaining > 0) {
        while (cur <= max_deg && heads[cur] >= buckets[cur].size()) ++cur;
        assert(cur <= max_deg);
        std::uint64_t v = buckets[cur][heads[cur]++];
        if (!alive[v] || deg[v] != cur) continue; // stale entry
        best = std::max(best, cur);
        alive[v] = 0;
        --remaining;
        g.for_each_pred(v, [&](std::uint64_t u) {
            if (alive[u]) {
                std::uint64_t d = --deg[u];
                buckets[d].push_back(u);
                if (d < cur) cur = d;
            }
        });
    }
    return best;
}

} // namespace detail

/// Exact max over induced subgraphs of the minimum out-degree, with the
/// (unique, maximal) witness set. The result is verified at runtime: the
/// witness is re-peeled at k, its induced min out-degree is recounted, and
/// the (k+1)-peel is checked to be empty.
template <class G> CoreResult max_min_out_degree(const G& g) {
    CoreResult res;
    res.k = detail::degeneracy_max_min_out_degree(g);
    res.vertices = peel_to_threshold(g, res.k);
    if (res.vertices.empty()) throw Error("internal: k-peel lost its witness");
    if (!peel_to_threshold(g, res.k + 1).empty()) {
        throw Error("internal: (k+1)-core non-empty, k is not maximal");
    }

    if (res.k > 0) {
        std::vector<char> in_set(g.vertex_id_space(), 0);
        for (std::uint64_t v : res.vertices) in_set[v] = 1;
        std::uint64_t min_induced = UINT64_MAX;
        for (std::uint64_t v : res.vertices) {
            std::uint64_t d = 0;
            g.for_each_succ(v, [&](std::uint64_t w) { d += in_set[w] ? 1 : 0; });
            min_induced = std::min(min_induced, d);
        }
        if (min_induced != res.k) {
            throw Error("internal: recounted core min out-degree disagrees with k");
        }
    }
    res.is_exact_max = true;
    return res;
}

/// Exact finite-N rate of a pair graph together with the bounds around it.
struct RateReport {
    int n = 0;
    std::uint64_t k = 0;
    double rate = 0.0;                   // log2(k) / (N log2 q)
    Density density;                     // of the built graph
    std::uint64_t density_bound_k = 0;   // pruning guarantee: k >= ceil(density)
    std::optional<double> alpha_bound;   // spectral lower bound on the limit rate
    std::uint64_t core_size = 0;
};

inline RateReport rate_exact(const PairGraph& g, const CoreResult& core, const Density& dens,
                             std::optional<double> alpha_bound = std::nullopt) {
    if (core.k == 0) {
        throw DegenerateCoreError("no subgraph with positive min out-degree: rate undefined");
    }
    RateReport r;
    r.n = g.n();
    r.k = core.k;
    r.rate = std::log2(double(core.k)) / (double(g.n()) * std::log2(double(g.q())));
    r.density = dens;
    r.density_bound_k = dens.mirror_mode ? dens.ceil_bound() : 0;
    r.alpha_bound = alpha_bound;
    r.core_size = core.vertices.size();
    return r;
}

} // namespace gridcode
