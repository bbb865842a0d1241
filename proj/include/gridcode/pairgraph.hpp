#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gridcode/constraint.hpp"
#include "gridcode/errors.hpp"

namespace gridcode {

using BigInt = boost::multiprecision::cpp_int;

/// Bit packing of height-N columns over an alphabet of size q. The symbol in
/// row i (top = 0) occupies bits [i*b, (i+1)*b) of the key, b = ceil(log2 q).
struct ColumnLayout {
    int q = 2;
    int n = 1;
    int bits = 1;

    ColumnLayout() = default;
    ColumnLayout(int q_, int n_)
        : q(q_), n(n_), bits(std::max(1, int(std::bit_width(unsigned(q_ - 1))))) {
        if (n < 1) throw std::invalid_argument("column height must be >= 1");
        if (n * bits > 31) {
            throw std::invalid_argument("column of height " + std::to_string(n) + " over q=" +
                                        std::to_string(q) + " does not fit the key budget");
        }
    }

    std::uint64_t column_count() const { return detail::ipow(q, n); }
    std::uint64_t column_id_space() const { return std::uint64_t(1) << (n * bits); }
    std::uint64_t vertex_id_space() const { return std::uint64_t(1) << (2 * n * bits); }
    std::uint64_t vertex_count() const { return column_count() * column_count(); }

    int symbol(std::uint32_t key, int row) const {
        return int(key >> (row * bits)) & ((1 << bits) - 1);
    }

    std::uint32_t pack(std::span<const std::uint8_t> symbols) const {
        assert(int(symbols.size()) == n);
        std::uint32_t key = 0;
        for (int i = 0; i < n; ++i) key |= std::uint32_t(symbols[i]) << (i * bits);
        return key;
    }

    std::vector<std::uint8_t> unpack(std::uint32_t key) const {
        std::vector<std::uint8_t> out(n);
        for (int i = 0; i < n; ++i) out[i] = std::uint8_t(symbol(key, i));
        return out;
    }

    /// All valid column keys, ascending.
    std::vector<std::uint32_t> all_columns() const {
        std::vector<std::uint32_t> keys;
        keys.reserve(column_count());
        std::vector<int> syms(n, 0);
        for (;;) {
            std::uint32_t key = 0;
            for (int i = 0; i < n; ++i) key |= std::uint32_t(syms[i]) << (i * bits);
            keys.push_back(key);
            int i = 0;
            while (i < n && ++syms[i] == q) syms[i++] = 0;
            if (i == n) break;
        }
        std::sort(keys.begin(), keys.end());
        return keys;
    }

    std::uint64_t vertex_id(std::uint32_t left, std::uint32_t right) const {
        return (std::uint64_t(left) << (n * bits)) | right;
    }
    std::uint32_t left_of(std::uint64_t vid) const { return std::uint32_t(vid >> (n * bits)); }
    std::uint32_t right_of(std::uint64_t vid) const {
        return std::uint32_t(vid & (column_id_space() - 1));
    }
};

/// True iff the N x 3 grid with columns (x, y, z) avoids the constraint.
inline bool triple_valid(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y,
                         std::span<const std::uint8_t> z, const Constraint& c) {
    if (x.size() != y.size() || y.size() != z.size()) {
        throw std::invalid_argument("columns of a triple must have equal height");
    }
    const int n = int(x.size());
    Grid g(n, 3);
    for (int r = 0; r < n; ++r) {
        g.at(r, 0) = x[r];
        g.at(r, 1) = y[r];
        g.at(r, 2) = z[r];
    }
    return !contains(g, c);
}

struct PairGraphOptions {
    /// Maximum log2 of the number of triple checks, q^(3N) <= 2^budget_log2.
    int budget_log2 = 30;
    /// 0 = use GRIDCODE_THREADS, falling back to hardware concurrency.
    int threads = 0;
};

namespace detail {

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GRIDCODE_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

} // namespace detail

/// Maximal valid pair graph: vertices are column pairs (x, y) identified by
/// the key left||right, and (x, y) -> (y, z) is a transition exactly when the
/// triple (x, y, z) is valid. Immutable after build; adjacency is CSR with
/// successor z-keys sorted ascending, plus the reverse (predecessor x-keys).
class PairGraph {
public:
    ColumnLayout layout;
    std::array<std::uint8_t, 32> fhash{};
    std::vector<std::uint64_t> offsets;  // vertex id -> range in succ
    std::vector<std::uint32_t> succ;     // successor right-column keys z
    std::vector<std::uint64_t> roffsets; // vertex id -> range in pred
    std::vector<std::uint32_t> pred;     // predecessor left-column keys x
    std::uint64_t transitions = 0;       // L
    std::uint64_t self_loops = 0;        // K

    int q() const { return layout.q; }
    int n() const { return layout.n; }

    std::uint64_t vertex_id_space() const { return layout.vertex_id_space(); }
    std::uint64_t vertex_count() const { return layout.vertex_count(); }

    std::uint64_t out_degree(std::uint64_t vid) const { return offsets[vid + 1] - offsets[vid]; }
    std::uint64_t in_degree(std::uint64_t vid) const { return roffsets[vid + 1] - roffsets[vid]; }

    std::span<const std::uint32_t> successors(std::uint64_t vid) const {
        return {succ.data() + offsets[vid], succ.data() + offsets[vid + 1]};
    }
    std::span<const std::uint32_t> predecessors(std::uint64_t vid) const {
        return {pred.data() + roffsets[vid], pred.data() + roffsets[vid + 1]};
    }

    template <class F> void for_each_vertex(F&& fn) const {
        const auto cols = layout.all_columns();
        for (std::uint32_t x : cols) {
            for (std::uint32_t y : cols) fn(layout.vertex_id(x, y));
        }
    }

    /// Successor vertex ids of (x, y): (y, z) for each stored z.
    template <class F> void for_each_succ(std::uint64_t vid, F&& fn) const {
        const std::uint64_t y = layout.right_of(vid);
        for (std::uint32_t z : successors(vid)) fn((y << (layout.n * layout.bits)) | z);
    }

    /// Predecessor vertex ids of (y, z): (x, y) for each stored x.
    template <class F> void for_each_pred(std::uint64_t vid, F&& fn) const {
        const std::uint64_t y = layout.left_of(vid);
        for (std::uint32_t x : predecessors(vid)) {
            fn((std::uint64_t(x) << (layout.n * layout.bits)) | y);
        }
    }

    /// Minimum out-degree over the whole vertex universe.
    std::uint64_t min_out_degree() const {
        std::uint64_t m = UINT64_MAX;
        for_each_vertex([&](std::uint64_t v) { m = std::min(m, out_degree(v)); });
        return m;
    }

    std::uint64_t max_out_degree() const {
        std::uint64_t m = 0;
        for_each_vertex([&](std::uint64_t v) { m = std::max(m, out_degree(v)); });
        return m;
    }
};

/// Exact simple-graph density in mirror mode, directed density otherwise,
/// as the rational num/den.
struct Density {
    std::int64_t num = 0;
    std::uint64_t den = 1;
    bool mirror_mode = false;

    double value() const { return double(num) / double(den); }

    /// Smallest integer k with k >= num/den (clamped at 0): the min-degree
    /// guarantee that pruning extracts from the density.
    std::uint64_t ceil_bound() const {
        if (num <= 0) return 0;
        return (std::uint64_t(num) + den - 1) / den;
    }
};

inline Density density(const PairGraph& g, bool mirror_symmetric) {
    Density d;
    d.mirror_mode = mirror_symmetric;
    const std::uint64_t v = g.vertex_count();
    if (mirror_symmetric) {
        // (L/2 - K) / q^(2N) without rounding: (L - 2K) / (2 q^(2N))
        d.num = std::int64_t(g.transitions) - 2 * std::int64_t(g.self_loops);
        d.den = 2 * v;
    } else {
        d.num = std::int64_t(g.transitions);
        d.den = v;
    }
    return d;
}

inline Density density(const PairGraph& g, const Constraint& c) {
    if (c.hash() != g.fhash) {
        throw std::invalid_argument("constraint does not match the graph it is paired with");
    }
    bool mirror = c.q() <= 8 ? is_mirror_symmetric(c) : false;
    return density(g, mirror);
}

/// Builds the maximal valid pair graph for column height n. Enumerates the
/// q^(3n) triples, guarded by options.budget_log2.
inline PairGraph build_pair_graph(int n, const Constraint& c, const PairGraphOptions& options = {}) {
    const int q = c.q();
    {
        BigInt required = boost::multiprecision::pow(BigInt(q), unsigned(3 * n));
        BigInt budget = BigInt(1) << options.budget_log2;
        if (required > budget) {
            throw BudgetExceededError(required.str(),
                                      "pair graph build at q=" + std::to_string(q) +
                                          " N=" + std::to_string(n) + " exceeds the 2^" +
                                          std::to_string(options.budget_log2) + " triple budget");
        }
    }

    PairGraph g;
    g.layout = ColumnLayout(q, n);
    g.fhash = c.hash();

    const std::vector<bool> forbidden = forbidden_window_table(c);
    const std::vector<std::uint32_t> cols = g.layout.all_columns();
    const std::uint64_t ncols = cols.size();
    const int windows = std::max(0, n - 2);
    const std::uint64_t q3 = detail::ipow(q, 3);
    const std::uint64_t q6 = q3 * q3;

    // per-column window slices: slice r = sym(r)*q^2 + sym(r+1)*q + sym(r+2)
    std::vector<std::uint32_t> slices(ncols * std::max(1, windows));
    for (std::uint64_t ci = 0; ci < ncols; ++ci) {
        for (int r = 0; r < windows; ++r) {
            slices[ci * windows + r] =
                std::uint32_t(g.layout.symbol(cols[ci], r)) * q * q +
                std::uint32_t(g.layout.symbol(cols[ci], r + 1)) * q +
                std::uint32_t(g.layout.symbol(cols[ci], r + 2));
        }
    }

    const std::uint64_t id_space = g.layout.vertex_id_space();
    std::vector<std::uint32_t> counts(id_space, 0);

    auto triple_ok = [&](std::uint64_t xi, std::uint64_t yi, std::uint64_t zi) {
        for (int r = 0; r < windows; ++r) {
            std::uint64_t key = std::uint64_t(slices[xi * windows + r]) * q6 +
                                std::uint64_t(slices[yi * windows + r]) * q3 +
                                slices[zi * windows + r];
            if (forbidden[key]) return false;
        }
        return true;
    };

    const int nthreads = std::min<int>(detail::effective_threads(options.threads), int(ncols));
    auto count_range = [&](std::uint64_t xi_lo, std::uint64_t xi_hi) {
        for (std::uint64_t xi = xi_lo; xi < xi_hi; ++xi) {
            for (std::uint64_t yi = 0; yi < ncols; ++yi) {
                std::uint32_t cnt = 0;
                if (windows == 0) {
                    cnt = std::uint32_t(ncols);
                } else {
                    for (std::uint64_t zi = 0; zi < ncols; ++zi) {
                        cnt += triple_ok(xi, yi, zi) ? 1 : 0;
                    }
                }
                counts[g.layout.vertex_id(cols[xi], cols[yi])] = cnt;
            }
        }
    };
    if (nthreads <= 1) {
        count_range(0, ncols);
    } else {
        std::vector<std::thread> workers;
        for (int t = 0; t < nthreads; ++t) {
            std::uint64_t lo = ncols * t / nthreads;
            std::uint64_t hi = ncols * (t + 1) / nthreads;
            workers.emplace_back(count_range, lo, hi);
        }
        for (auto& w : workers) w.join();
    }

    g.offsets.assign(id_space + 1, 0);
    for (std::uint64_t v = 0; v < id_space; ++v) g.offsets[v + 1] = g.offsets[v] + counts[v];
    g.transitions = g.offsets[id_space];
    g.succ.resize(g.transitions);

    auto fill_range = [&](std::uint64_t xi_lo, std::uint64_t xi_hi) {
        for (std::uint64_t xi = xi_lo; xi < xi_hi; ++xi) {
            for (std::uint64_t yi = 0; yi < ncols; ++yi) {
                std::uint64_t cursor = g.offsets[g.layout.vertex_id(cols[xi], cols[yi])];
                if (windows == 0) {
                    for (std::uint64_t zi = 0; zi < ncols; ++zi) g.succ[cursor++] = cols[zi];
                } else {
                    for (std::uint64_t zi = 0; zi < ncols; ++zi) {
                        if (triple_ok(xi, yi, zi)) g.succ[cursor++] = cols[zi];
                    }
                }
            }
        }
    };
    if (nthreads <= 1) {
        fill_range(0, ncols);
    } else {
        std::vector<std::thread> workers;
        for (int t = 0; t < nthreads; ++t) {
            std::uint64_t lo = ncols * t / nthreads;
            std::uint64_t hi = ncols * (t + 1) / nthreads;
            workers.emplace_back(fill_range, lo, hi);
        }
        for (auto& w : workers) w.join();
    }

    // reverse adjacency: predecessors of (y, z) are the (x, y) with z stored
    std::vector<std::uint32_t> rcounts(id_space, 0);
    for (std::uint64_t xi = 0; xi < ncols; ++xi) {
        for (std::uint64_t yi = 0; yi < ncols; ++yi) {
            std::uint64_t v = g.layout.vertex_id(cols[xi], cols[yi]);
            for (std::uint32_t z : g.successors(v)) {
                ++rcounts[g.layout.vertex_id(cols[yi], z)];
            }
        }
    }
    g.roffsets.assign(id_space + 1, 0);
    for (std::uint64_t v = 0; v < id_space; ++v) g.roffsets[v + 1] = g.roffsets[v] + rcounts[v];
    g.pred.resize(g.transitions);
    {
        std::vector<std::uint64_t> cursor(g.roffsets.begin(), g.roffsets.end() - 1);
        for (std::uint64_t xi = 0; xi < ncols; ++xi) {
            for (std::uint64_t yi = 0; yi < ncols; ++yi) {
                std::uint64_t v = g.layout.vertex_id(cols[xi], cols[yi]);
                for (std::uint32_t z : g.successors(v)) {
                    g.pred[cursor[g.layout.vertex_id(cols[yi], z)]++] = cols[xi];
                }
            }
        }
    }

    // self loops: (c, c) -> (c, c), i.e. valid constant triples
    for (std::uint64_t ci = 0; ci < ncols; ++ci) {
        bool ok = true;
        for (int r = 0; r < windows; ++r) {
            std::uint64_t s = slices[ci * windows + r];
            if (forbidden[s * q6 + s * q3 + s]) {
                ok = false;
                break;
            }
        }
        if (ok) ++g.self_loops;
    }
    return g;
}

// --- VPG1 binary cache ------------------------------------------------------
//
// magic "VPG1", u32 q, u32 N, 32-byte constraint hash, u64 L, u64 K,
// u64 id_space, (id_space+1) x u64 offsets, L x u32 successor keys.
// All integers little-endian. Bit-reproducible for a given (constraint, N).

namespace detail {

template <class T> void write_le(std::ostream& os, T v) {
    std::uint8_t buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = std::uint8_t(std::uint64_t(v) >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T> T read_le(std::istream& is) {
    std::uint8_t buf[sizeof(T)] = {};
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= std::uint64_t(buf[i]) << (8 * i);
    return T(v);
}

} // namespace detail

inline void dump_pair_graph(const PairGraph& g, std::ostream& os) {
    os.write("VPG1", 4);
    detail::write_le<std::uint32_t>(os, std::uint32_t(g.q()));
    detail::write_le<std::uint32_t>(os, std::uint32_t(g.n()));
    os.write(reinterpret_cast<const char*>(g.fhash.data()), 32);
    detail::write_le<std::uint64_t>(os, g.transitions);
    detail::write_le<std::uint64_t>(os, g.self_loops);
    detail::write_le<std::uint64_t>(os, g.vertex_id_space());
    for (std::uint64_t off : g.offsets) detail::write_le<std::uint64_t>(os, off);
    for (std::uint32_t z : g.succ) detail::write_le<std::uint32_t>(os, z);
}

inline PairGraph load_pair_graph(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "VPG1") {
        throw ParseError(1, "bad graph cache magic");
    }
    PairGraph g;
    const int q = int(detail::read_le<std::uint32_t>(is));
    const int n = int(detail::read_le<std::uint32_t>(is));
    if (q < 2 || q > 16) throw ParseError(1, "bad alphabet in graph cache");
    g.layout = ColumnLayout(q, n);
    is.read(reinterpret_cast<char*>(g.fhash.data()), 32);
    g.transitions = detail::read_le<std::uint64_t>(is);
    g.self_loops = detail::read_le<std::uint64_t>(is);
    const std::uint64_t id_space = detail::read_le<std::uint64_t>(is);
    if (!is) throw ParseError(1, "truncated graph cache");
    if (id_space != g.layout.vertex_id_space()) throw ParseError(1, "bad id space in graph cache");
    if (g.transitions > (std::uint64_t(1) << 40)) throw ParseError(1, "bad edge count in cache");
    g.offsets.resize(id_space + 1);
    for (auto& off : g.offsets) off = detail::read_le<std::uint64_t>(is);
    g.succ.resize(g.transitions);
    for (auto& z : g.succ) z = detail::read_le<std::uint32_t>(is);
    if (!is) throw ParseError(1, "truncated graph cache");
    if (g.offsets.back() != g.transitions) throw ParseError(1, "inconsistent graph cache");

    const auto cols = g.layout.all_columns();
    std::vector<std::uint32_t> rcounts(id_space, 0);
    for (std::uint32_t x : cols) {
        for (std::uint32_t y : cols) {
            for (std::uint32_t z : g.successors(g.layout.vertex_id(x, y))) {
                ++rcounts[g.layout.vertex_id(y, z)];
            }
        }
    }
    g.roffsets.assign(id_space + 1, 0);
    for (std::uint64_t v = 0; v < id_space; ++v) g.roffsets[v + 1] = g.roffsets[v] + rcounts[v];
    g.pred.resize(g.transitions);
    std::vector<std::uint64_t> cursor(g.roffsets.begin(), g.roffsets.end() - 1);
    for (std::uint32_t x : cols) {
        for (std::uint32_t y : cols) {
            for (std::uint32_t z : g.successors(g.layout.vertex_id(x, y))) {
                g.pred[cursor[g.layout.vertex_id(y, z)]++] = x;
            }
        }
    }
    return g;
}

} // namespace gridcode
