#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gridcode/constraint.hpp"
#include "gridcode/errors.hpp"
#include "gridcode/pairgraph.hpp"

namespace gridcode {

/// Counting graph on 2x3 row-pair states. State (r1, r2) has key r1*q^3 + r2
/// where a row (a, b, c), left to right, has key a*q^2 + b*q + c. There is an
/// edge (r1, r2) -> (r2, r3) exactly when the 3x3 stack r1; r2; r3 avoids the
/// constraint. Walks of length N-2 are in bijection with the constraint-free
/// N x 3 grids, i.e. with the valid pairs of the height-N pair graph.
struct TransferMatrix {
    int q = 2;
    std::uint32_t dim = 0; // q^6
    std::vector<std::uint64_t> offsets;
    std::vector<std::uint32_t> succ; // target states, ascending per row
    std::array<std::uint8_t, 32> fhash{};

    std::uint64_t edge_count() const { return succ.size(); }
    std::uint64_t row_degree(std::uint32_t u) const { return offsets[u + 1] - offsets[u]; }
};

inline TransferMatrix build_counting_graph(const Constraint& c) {
    const int q = c.q();
    if (q > 8) {
        throw AlphabetTooLargeError("counting graph needs q <= 8, got q=" + std::to_string(q));
    }
    const std::vector<bool> forbidden = forbidden_window_table(c);
    const std::uint64_t q3 = detail::ipow(q, 3);

    TransferMatrix m;
    m.q = q;
    m.dim = std::uint32_t(q3 * q3);
    m.fhash = c.hash();

    // column-major window key of the stack r1; r2; r3, split into a part that
    // depends on (r1, r2) and a part that depends on r3 alone
    std::vector<std::array<int, 3>> row_syms(q3);
    for (std::uint64_t r = 0; r < q3; ++r) {
        row_syms[r] = {int(r / (q * q)), int(r / q) % q, int(r % q)};
    }
    std::vector<std::uint64_t> base(m.dim);
    std::vector<std::uint64_t> low(q3);
    for (std::uint64_t r1 = 0; r1 < q3; ++r1) {
        for (std::uint64_t r2 = 0; r2 < q3; ++r2) {
            std::uint64_t b = 0;
            for (int col = 0; col < 3; ++col) {
                b += (std::uint64_t(row_syms[r1][col]) * q + row_syms[r2][col]) * q *
                     detail::ipow(q, 3 * (2 - col));
            }
            base[r1 * q3 + r2] = b;
        }
    }
    for (std::uint64_t r3 = 0; r3 < q3; ++r3) {
        std::uint64_t w = 0;
        for (int col = 0; col < 3; ++col) {
            w += std::uint64_t(row_syms[r3][col]) * detail::ipow(q, 3 * (2 - col));
        }
        low[r3] = w;
    }

    m.offsets.assign(m.dim + 1, 0);
    std::vector<std::uint32_t> counts(m.dim, 0);
    for (std::uint64_t u = 0; u < m.dim; ++u) {
        std::uint32_t cnt = 0;
        for (std::uint64_t r3 = 0; r3 < q3; ++r3) {
            cnt += forbidden[base[u] + low[r3]] ? 0 : 1;
        }
        counts[u] = cnt;
    }
    for (std::uint64_t u = 0; u < m.dim; ++u) m.offsets[u + 1] = m.offsets[u] + counts[u];
    m.succ.resize(m.offsets[m.dim]);
    for (std::uint64_t u = 0; u < m.dim; ++u) {
        const std::uint64_t r2 = u % q3;
        std::uint64_t cursor = m.offsets[u];
        for (std::uint64_t r3 = 0; r3 < q3; ++r3) {
            if (!forbidden[base[u] + low[r3]]) {
                m.succ[cursor++] = std::uint32_t(r2 * q3 + r3);
            }
        }
    }
    return m;
}

/// Exact number of constraint-free N x 3 grids: 1^T M^(N-2) 1. N >= 3.
inline BigInt walk_count(const TransferMatrix& m, int n) {
    if (n < 3) throw std::invalid_argument("walk_count needs N >= 3");
    std::vector<BigInt> v(m.dim, 1), next(m.dim);
    for (int step = 0; step < n - 2; ++step) {
        for (auto& x : next) x = 0;
        for (std::uint32_t u = 0; u < m.dim; ++u) {
            if (v[u] == 0) continue;
            for (std::uint64_t i = m.offsets[u]; i < m.offsets[u + 1]; ++i) {
                next[m.succ[i]] += v[u];
            }
        }
        v.swap(next);
    }
    BigInt total = 0;
    for (const BigInt& x : v) total += x;
    return total;
}

/// Number of height-N columns c whose constant triple (c, c, c) is valid:
/// the self-loop count K of the height-N pair graph, via walks over the q^2
/// states (a, b) of consecutive symbol pairs.
inline BigInt self_loop_count(const Constraint& c, int n) {
    if (n < 3) return detail::ipow(c.q(), n); // no window constrains anything
    const int q = c.q();
    const std::vector<bool> forbidden = forbidden_window_table(c);
    const std::uint64_t q3 = detail::ipow(q, 3);
    const std::uint64_t q6 = q3 * q3;

    const std::uint64_t dim = std::uint64_t(q) * q;
    std::vector<BigInt> v(dim, 1), next(dim);
    for (int step = 0; step < n - 2; ++step) {
        for (auto& x : next) x = 0;
        for (std::uint64_t a = 0; a < std::uint64_t(q); ++a) {
            for (std::uint64_t b = 0; b < std::uint64_t(q); ++b) {
                if (v[a * q + b] == 0) continue;
                for (std::uint64_t cc = 0; cc < std::uint64_t(q); ++cc) {
                    const std::uint64_t slice = a * q * q + b * q + cc;
                    if (!forbidden[slice * q6 + slice * q3 + slice]) {
                        next[b * q + cc] += v[a * q + b];
                    }
                }
            }
        }
        v.swap(next);
    }
    BigInt total = 0;
    for (const BigInt& x : v) total += x;
    return total;
}

struct PowerIterationResult {
    double lambda = 0.0;
    std::uint64_t iterations = 0;
    double residual = 0.0;          // last relative change of the estimate
    std::vector<double> vector;     // final 1-normalised iterate
};

/// Growth-ratio power iteration: x0 = all ones, estimate = ||M x||_1 with x
/// 1-normalised, stop when successive estimates agree to 1e-10 relative.
/// Valid for non-negative, possibly reducible matrices since the positive
/// start overlaps every component.
inline PowerIterationResult spectral_radius(const TransferMatrix& m) {
    if (m.edge_count() == 0) throw NoEdgesError("counting graph has no edges");

    constexpr double kRelTol = 1e-10;
    constexpr std::uint64_t kMaxIters = 100000;

    std::vector<double> x(m.dim, 1.0 / double(m.dim)), y(m.dim);
    double prev = -1.0;
    double rel = 1.0;
    for (std::uint64_t it = 1; it <= kMaxIters; ++it) {
        std::fill(y.begin(), y.end(), 0.0);
        for (std::uint32_t u = 0; u < m.dim; ++u) {
            const double xu = x[u];
            if (xu == 0.0) continue;
            for (std::uint64_t i = m.offsets[u]; i < m.offsets[u + 1]; ++i) y[m.succ[i]] += xu;
        }
        double norm = 0.0;
        for (double v : y) norm += v;
        if (norm == 0.0) {
            throw NoEdgesError("walk counts die out: spectral radius is zero");
        }
        const double est = norm;
        rel = prev < 0 ? 1.0 : std::abs(est - prev) / est;
        for (std::uint32_t i = 0; i < m.dim; ++i) x[i] = y[i] / norm;
        if (rel < kRelTol) {
            // Perron bounds for a non-negative matrix
            std::uint64_t dmin = UINT64_MAX, dmax = 0;
            for (std::uint32_t u = 0; u < m.dim; ++u) {
                dmin = std::min(dmin, m.row_degree(u));
                dmax = std::max(dmax, m.row_degree(u));
            }
            if (est < double(dmin) - 1e-6 || est > double(dmax) + 1e-6) {
                throw Error("internal: spectral radius outside row-sum bounds");
            }
            return {est, it, rel, std::move(x)};
        }
        prev = est;
    }
    throw NonConvergenceError("power iteration did not converge in " +
                              std::to_string(kMaxIters) + " iterations (last residual " +
                              std::to_string(rel) + ")");
}

namespace detail {

inline double log2_big(const BigInt& v) {
    if (v <= 0) return -std::numeric_limits<double>::infinity();
    const std::size_t bits = boost::multiprecision::msb(v) + 1;
    if (bits <= 62) return std::log2(v.convert_to<double>());
    const BigInt top = v >> (bits - 62);
    return std::log2(top.convert_to<double>()) + double(bits - 62);
}

} // namespace detail

/// Asymptotic analysis of a constraint.
struct SpectralReport {
    int q = 2;
    double lambda_max = 0.0;
    double alpha = 0.0;               // log2(lambda) - 2 log2(q)
    double rate_lower_bound = 0.0;    // alpha / log2(q)
    std::uint64_t iterations = 0;
    double residual = 0.0;
    std::map<int, BigInt> walk_counts;           // N in {3,4,5,20,21}
    double growth_gap = 0.0;                     // |log2(L21/L20) - log2 lambda|
    double self_loop_ratio_small = 0.0;          // 2 K_N / L_N at N = 12
    double self_loop_ratio_large = 0.0;          //            at N = 21
    bool alpha_supported = true;                 // self loops negligible vs edges
};

inline SpectralReport spectral_report(const Constraint& c) {
    const TransferMatrix m = build_counting_graph(c);
    const PowerIterationResult pi = spectral_radius(m);
    const double log2q = std::log2(double(c.q()));

    SpectralReport r;
    r.q = c.q();
    r.lambda_max = pi.lambda;
    r.alpha = std::log2(pi.lambda) - 2.0 * log2q;
    r.rate_lower_bound = r.alpha / log2q;
    r.iterations = pi.iterations;
    r.residual = pi.residual;

    for (int n : {3, 4, 5, 20, 21}) r.walk_counts.emplace(n, walk_count(m, n));
    const BigInt& l20 = r.walk_counts.at(20);
    const BigInt& l21 = r.walk_counts.at(21);
    if (l20 > 0 && l21 > 0) {
        r.growth_gap = std::abs(detail::log2_big(l21) - detail::log2_big(l20) -
                                std::log2(pi.lambda));
    } else {
        r.growth_gap = std::numeric_limits<double>::infinity();
    }

    const BigInt l12 = walk_count(m, 12);
    const BigInt k12 = self_loop_count(c, 12);
    const BigInt k21 = self_loop_count(c, 21);
    r.self_loop_ratio_small =
        l12 > 0 ? std::exp2(detail::log2_big(2 * k12) - detail::log2_big(l12)) : 0.0;
    r.self_loop_ratio_large =
        l21 > 0 ? std::exp2(detail::log2_big(2 * k21) - detail::log2_big(l21)) : 0.0;
    if (k21 == 0) {
        r.self_loop_ratio_large = 0.0;
    }
    if (k12 == 0) {
        r.self_loop_ratio_small = 0.0;
    }
    r.alpha_supported = r.self_loop_ratio_large <= 1e-9 ||
                        r.self_loop_ratio_large < r.self_loop_ratio_small;
    return r;
}

} // namespace gridcode
