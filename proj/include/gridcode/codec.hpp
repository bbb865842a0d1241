#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridcode/constraint.hpp"
#include "gridcode/errors.hpp"
#include "gridcode/pairgraph.hpp"
#include "gridcode/subopt.hpp"

namespace gridcode {

/// Deterministic realisation of a code subgraph S: for every state v in S the
/// label map phi_v sends message m to the m-th smallest in-S successor, and
/// encoding starts from the smallest state of S. Message values are 1-based
/// in [1, M] with M = min in-S out-degree.
struct Codebook {
    ColumnLayout layout;
    std::array<std::uint8_t, 32> fhash{};
    std::vector<std::uint64_t> vertices;      // S, ascending vertex keys
    std::vector<std::uint64_t> succ_offsets;  // per S-rank
    std::vector<std::uint32_t> succ_z;        // in-S successor z-keys, ascending
    std::uint64_t message_count = 0;          // M
    std::uint64_t v_init = 0;

    int q() const { return layout.q; }
    int n() const { return layout.n; }

    std::optional<std::size_t> rank_of(std::uint64_t vid) const {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), vid);
        if (it == vertices.end() || *it != vid) return std::nullopt;
        return std::size_t(it - vertices.begin());
    }

    std::span<const std::uint32_t> successors_of_rank(std::size_t rank) const {
        return {succ_z.data() + succ_offsets[rank], succ_z.data() + succ_offsets[rank + 1]};
    }

    bool operator==(const Codebook& other) const {
        return layout.q == other.layout.q && layout.n == other.layout.n &&
               fhash == other.fhash && vertices == other.vertices &&
               succ_offsets == other.succ_offsets && succ_z == other.succ_z &&
               message_count == other.message_count && v_init == other.v_init;
    }
};

inline Codebook build_codebook(const PairGraph& g, const CoreResult& core) {
    if (core.k == 0 || core.vertices.empty()) {
        throw EmptyCoreError("cannot build a codebook from an empty core");
    }
    Codebook cb;
    cb.layout = g.layout;
    cb.fhash = g.fhash;
    cb.vertices = core.vertices; // ascending by construction
    cb.v_init = cb.vertices.front();

    std::vector<char> in_set(g.vertex_id_space(), 0);
    for (std::uint64_t v : cb.vertices) in_set[v] = 1;

    cb.succ_offsets.assign(cb.vertices.size() + 1, 0);
    for (std::size_t i = 0; i < cb.vertices.size(); ++i) {
        const std::uint64_t v = cb.vertices[i];
        const std::uint64_t y = g.layout.right_of(v);
        std::uint64_t cnt = 0;
        for (std::uint32_t z : g.successors(v)) {
            if (in_set[g.layout.vertex_id(std::uint32_t(y), z)]) ++cnt;
        }
        cb.succ_offsets[i + 1] = cb.succ_offsets[i] + cnt;
    }
    cb.succ_z.resize(cb.succ_offsets.back());
    std::uint64_t min_deg = UINT64_MAX;
    for (std::size_t i = 0; i < cb.vertices.size(); ++i) {
        const std::uint64_t v = cb.vertices[i];
        const std::uint64_t y = g.layout.right_of(v);
        std::uint64_t cursor = cb.succ_offsets[i];
        for (std::uint32_t z : g.successors(v)) {
            if (in_set[g.layout.vertex_id(std::uint32_t(y), z)]) cb.succ_z[cursor++] = z;
        }
        min_deg = std::min(min_deg, cb.succ_offsets[i + 1] - cb.succ_offsets[i]);
    }
    cb.message_count = min_deg;
    assert(cb.message_count == core.k);
    return cb;
}

inline double code_rate(const Codebook& cb) {
    if (cb.message_count < 1) throw EmptyCoreError("codebook has no messages");
    return std::log2(double(cb.message_count)) /
           (double(cb.n()) * std::log2(double(cb.q())));
}

/// An encoded N x N array plus the two initial columns that seed the
/// recursion. Columns are stored as packed keys.
struct EncodedArray {
    ColumnLayout layout;
    std::array<std::uint8_t, 32> fhash{};
    std::uint32_t init_left = 0;  // X(-1)
    std::uint32_t init_right = 0; // X(0)
    std::vector<std::uint32_t> columns; // X(1) ... X(N)

    Grid grid() const {
        const int n = layout.n;
        Grid g(n, int(columns.size()));
        for (int j = 0; j < int(columns.size()); ++j) {
            for (int r = 0; r < n; ++r) g.at(r, j) = std::uint8_t(layout.symbol(columns[j], r));
        }
        return g;
    }

    /// Grid with the two initial columns prepended.
    Grid extended_grid() const {
        const int n = layout.n;
        Grid g(n, int(columns.size()) + 2);
        for (int r = 0; r < n; ++r) {
            g.at(r, 0) = std::uint8_t(layout.symbol(init_left, r));
            g.at(r, 1) = std::uint8_t(layout.symbol(init_right, r));
        }
        for (int j = 0; j < int(columns.size()); ++j) {
            for (int r = 0; r < n; ++r) g.at(r, j + 2) = std::uint8_t(layout.symbol(columns[j], r));
        }
        return g;
    }
};

/// Runs the column-by-column recursion from the initial state. Messages are
/// 1-based and there must be exactly N of them.
inline EncodedArray encode(const Codebook& cb, std::span<const std::uint64_t> messages) {
    if (messages.size() != std::size_t(cb.n())) {
        throw std::invalid_argument("expected exactly " + std::to_string(cb.n()) +
                                    " messages, got " + std::to_string(messages.size()));
    }
    EncodedArray arr;
    arr.layout = cb.layout;
    arr.fhash = cb.fhash;
    arr.init_left = cb.layout.left_of(cb.v_init);
    arr.init_right = cb.layout.right_of(cb.v_init);
    arr.columns.reserve(messages.size());

    std::uint64_t v = cb.v_init;
    std::size_t rank = cb.rank_of(v).value();
    for (std::size_t i = 0; i < messages.size(); ++i) {
        const std::uint64_t m = messages[i];
        if (m < 1 || m > cb.message_count) {
            throw MessageOutOfRangeError(i, "message " + std::to_string(m) + " at position " +
                                                std::to_string(i) + " outside [1, " +
                                                std::to_string(cb.message_count) + "]");
        }
        const auto succ = cb.successors_of_rank(rank);
        const std::uint32_t z = succ[m - 1];
        arr.columns.push_back(z);
        v = cb.layout.vertex_id(cb.layout.right_of(v), z);
        auto next_rank = cb.rank_of(v);
        assert(next_rank.has_value()); // closure: the walk never leaves S
        rank = next_rank.value();
    }
    return arr;
}

/// Inverse of encode for arrays produced with the same codebook.
inline std::vector<std::uint64_t> decode(const Codebook& cb, const EncodedArray& arr) {
    if (arr.fhash != cb.fhash) {
        throw CodecError(CodecError::Kind::HashMismatch,
                         "array was encoded under a different constraint");
    }
    if (arr.layout.q != cb.layout.q || arr.layout.n != cb.layout.n) {
        throw CodecError(CodecError::Kind::HashMismatch,
                         "array geometry does not match the codebook");
    }
    std::uint64_t v = cb.layout.vertex_id(arr.init_left, arr.init_right);
    auto rank = cb.rank_of(v);
    if (!rank) {
        throw CodecError(CodecError::Kind::UnknownState, "initial column pair is not a code state");
    }
    std::vector<std::uint64_t> messages;
    messages.reserve(arr.columns.size());
    for (std::size_t i = 0; i < arr.columns.size(); ++i) {
        const std::uint32_t z = arr.columns[i];
        const auto succ = cb.successors_of_rank(*rank);
        const auto it = std::lower_bound(succ.begin(), succ.end(), z);
        if (it == succ.end() || *it != z) {
            throw CodecError(CodecError::Kind::UnknownTransition,
                             "column " + std::to_string(i + 1) + " is not a labelled successor");
        }
        const std::uint64_t m = std::uint64_t(it - succ.begin()) + 1;
        if (m > cb.message_count) {
            throw CodecError(CodecError::Kind::UnknownTransition,
                             "column " + std::to_string(i + 1) +
                                 " uses a label index above the message alphabet");
        }
        messages.push_back(m);
        v = cb.layout.vertex_id(cb.layout.right_of(std::uint64_t(v)), z);
        rank = cb.rank_of(v);
        if (!rank) {
            throw CodecError(CodecError::Kind::UnknownState,
                             "column pair after column " + std::to_string(i + 1) +
                                 " is not a code state");
        }
    }
    return messages;
}

struct Violation {
    int row = 0;
    int col = 0;
    int pattern_index = 0;
};

struct VerifyReport {
    bool grid_clean = true;
    bool extended_clean = true;
    std::optional<Violation> first_violation; // in the extended grid's frame
};

/// Checks the array (and the extended array including the initial columns)
/// against a constraint; reports the first violating window if any, in
/// window order (row, then column), 0-based in the extended grid.
inline VerifyReport verify_array(const EncodedArray& arr, const Constraint& c) {
    VerifyReport rep;
    const Grid ext = arr.extended_grid();
    for (int i = 0; i + 3 <= ext.n_rows && !rep.first_violation; ++i) {
        for (int j = 0; j + 3 <= ext.n_cols && !rep.first_violation; ++j) {
            for (std::size_t p = 0; p < c.patterns().size(); ++p) {
                if (matches_at(ext, c.patterns()[p], i, j)) {
                    rep.first_violation = Violation{i, j, int(p)};
                    rep.extended_clean = false;
                    if (j >= 2) rep.grid_clean = false;
                    break;
                }
            }
        }
    }
    if (rep.extended_clean) {
        rep.grid_clean = true;
    } else if (rep.grid_clean) {
        // violation touched an initial column; the bare grid needs its own scan
        rep.grid_clean = !contains(arr.grid(), c);
    }
    return rep;
}

// --- .g2d text format -------------------------------------------------------
//
// line 1:  N=<n> q=<q> fhash=<64 hex chars>
// line 2:  init=<X(-1) symbols> <X(0) symbols>     (columns, top to bottom)
// then N lines of N symbols: the array row by row.

inline std::string write_g2d(const EncodedArray& arr) {
    const int n = arr.layout.n;
    std::string out = "N=" + std::to_string(n) + " q=" + std::to_string(arr.layout.q) +
                      " fhash=" + detail::hex_digest(arr.fhash) + "\n";
    auto col_text = [&](std::uint32_t key) {
        std::string s(n, '0');
        for (int r = 0; r < n; ++r) s[r] = detail::symbol_char(arr.layout.symbol(key, r));
        return s;
    };
    out += "init=" + col_text(arr.init_left) + " " + col_text(arr.init_right) + "\n";
    for (int r = 0; r < n; ++r) {
        for (std::uint32_t col : arr.columns) {
            out += detail::symbol_char(arr.layout.symbol(col, r));
        }
        out += '\n';
    }
    return out;
}

inline EncodedArray parse_g2d(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view body =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        lines.push_back(body);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.size() < 2) throw ParseError(1, "truncated array file");

    int n = 0, q = 0;
    std::array<std::uint8_t, 32> fhash{};
    {
        std::string_view head = lines[0];
        auto take_int = [&](std::string_view prefix) {
            if (!head.starts_with(prefix)) {
                throw ParseError(1, "expected '" + std::string(prefix) + "'");
            }
            head.remove_prefix(prefix.size());
            int value = 0;
            std::size_t used = 0;
            while (used < head.size() && head[used] >= '0' && head[used] <= '9') {
                value = value * 10 + (head[used] - '0');
                ++used;
            }
            if (used == 0) throw ParseError(1, "bad integer after '" + std::string(prefix) + "'");
            head.remove_prefix(used);
            if (!head.empty() && head.front() == ' ') head.remove_prefix(1);
            return value;
        };
        n = take_int("N=");
        q = take_int("q=");
        if (!head.starts_with("fhash=")) throw ParseError(1, "expected 'fhash='");
        head.remove_prefix(6);
        if (head.size() != 64) throw ParseError(1, "constraint hash must be 64 hex characters");
        for (int i = 0; i < 32; ++i) {
            int hi = detail::symbol_value(head[2 * i]);
            int lo = detail::symbol_value(head[2 * i + 1]);
            if (hi < 0 || lo < 0) throw ParseError(1, "bad constraint hash");
            fhash[i] = std::uint8_t(hi << 4 | lo);
        }
    }
    if (q < 2 || q > 16) throw AlphabetOutOfRangeError(1, q);
    if (n < 1) throw ParseError(1, "bad array height");

    EncodedArray arr;
    arr.layout = ColumnLayout(q, n);
    arr.fhash = fhash;

    auto parse_col = [&](std::string_view s, int line) {
        if (int(s.size()) != n) {
            throw ParseError(line, "column must have exactly " + std::to_string(n) + " symbols");
        }
        std::uint32_t key = 0;
        for (int r = 0; r < n; ++r) {
            int v = detail::symbol_value(s[r]);
            if (v < 0 || v >= q) {
                throw ParseError(line, std::string("bad symbol '") + s[r] + "'");
            }
            key |= std::uint32_t(v) << (r * arr.layout.bits);
        }
        return key;
    };
    {
        std::string_view init = lines[1];
        if (!init.starts_with("init=")) throw ParseError(2, "expected 'init='");
        init.remove_prefix(5);
        std::size_t sp = init.find(' ');
        if (sp == std::string_view::npos) throw ParseError(2, "expected two initial columns");
        arr.init_left = parse_col(init.substr(0, sp), 2);
        arr.init_right = parse_col(init.substr(sp + 1), 2);
    }
    if (int(lines.size()) != n + 2) {
        throw ParseError(int(lines.size()), "expected " + std::to_string(n) + " grid rows");
    }
    arr.columns.assign(n, 0);
    for (int r = 0; r < n; ++r) {
        std::string_view row = lines[2 + r];
        if (int(row.size()) != n) {
            throw ParseError(3 + r, "grid row must have exactly " + std::to_string(n) + " symbols");
        }
        for (int j = 0; j < n; ++j) {
            int v = detail::symbol_value(row[j]);
            if (v < 0 || v >= q) {
                throw ParseError(3 + r, std::string("bad symbol '") + row[j] + "'");
            }
            arr.columns[j] |= std::uint32_t(v) << (r * arr.layout.bits);
        }
    }
    return arr;
}

// --- message files ----------------------------------------------------------
//
// One integer per line, 0-based on disk; in memory messages are 1-based.

inline std::vector<std::uint64_t> parse_message_file(std::string_view text) {
    std::vector<std::uint64_t> out;
    std::size_t pos = 0;
    int line = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view body =
            text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        ++line;
        if (!body.empty()) {
            std::uint64_t value = 0;
            auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
            if (ec != std::errc{} || ptr != body.data() + body.size()) {
                throw ParseError(line, "bad message value '" + std::string(body) + "'");
            }
            out.push_back(value + 1);
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

inline std::string write_message_file(std::span<const std::uint64_t> messages) {
    std::string out;
    for (std::uint64_t m : messages) {
        out += std::to_string(m - 1);
        out += '\n';
    }
    return out;
}

} // namespace gridcode
