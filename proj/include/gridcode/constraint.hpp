#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridcode/errors.hpp"
#include "gridcode/sha256.hpp"

namespace gridcode {

/// Cell value marking a position a pattern does not constrain.
inline constexpr int kDontCare = -1;

/// Channel alphabet {0, ..., q-1}. Symbols are written as single lowercase
/// hex digits in all text formats, which bounds q at 16.
struct Alphabet {
    int q;

    explicit Alphabet(int q_) : q(q_) {
        if (q < 2 || q > 16) {
            throw std::invalid_argument("alphabet size " + std::to_string(q) +
                                        " out of range [2,16]");
        }
    }
};

namespace detail {

inline int symbol_value(char ch) {
    if (ch >= '0' && ch <= '9') return ch - '0';
    if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
    return -1;
}

inline char symbol_char(int v) {
    return v < 10 ? char('0' + v) : char('a' + v - 10);
}

} // namespace detail

/// A 3x3 forbidden pattern. Cells are row-major; each cell is either a
/// symbol value or kDontCare. At least one cell must be constrained.
class Pattern {
public:
    explicit Pattern(const std::array<int, 9>& cells) {
        bool any = false;
        for (int i = 0; i < 9; ++i) {
            if (cells[i] != kDontCare) {
                if (cells[i] < 0 || cells[i] > 15) {
                    throw std::invalid_argument("pattern cell value out of range");
                }
                any = true;
            }
            cells_[i] = static_cast<std::int8_t>(cells[i]);
        }
        if (!any) throw std::invalid_argument("pattern has no constrained cell");
    }

    /// Builds a pattern from three 3-character rows like "*1*", "101", "*1*".
    static Pattern from_rows(std::string_view r0, std::string_view r1, std::string_view r2) {
        std::array<int, 9> cells{};
        const std::string_view rows[3] = {r0, r1, r2};
        for (int r = 0; r < 3; ++r) {
            if (rows[r].size() != 3) throw std::invalid_argument("pattern row must have 3 cells");
            for (int c = 0; c < 3; ++c) {
                char ch = rows[r][c];
                if (ch == '*') {
                    cells[3 * r + c] = kDontCare;
                } else {
                    int v = detail::symbol_value(ch);
                    if (v < 0) throw std::invalid_argument("bad pattern symbol");
                    cells[3 * r + c] = v;
                }
            }
        }
        return Pattern(cells);
    }

    int cell(int r, int c) const { return cells_[3 * r + c]; }
    bool is_dont_care(int r, int c) const { return cells_[3 * r + c] == kDontCare; }

    int max_symbol() const {
        int m = -1;
        for (int v : cells_) m = std::max(m, int(v));
        return m;
    }

    /// Canonical 9-character form, e.g. "*1*101*1*". Defines pattern order.
    std::string flat() const {
        std::string s(9, '*');
        for (int i = 0; i < 9; ++i) {
            if (cells_[i] != kDontCare) s[i] = detail::symbol_char(cells_[i]);
        }
        return s;
    }

    Pattern transposed() const {
        std::array<int, 9> t{};
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) t[3 * c + r] = cells_[3 * r + c];
        return Pattern(t);
    }

    friend bool operator==(const Pattern& a, const Pattern& b) { return a.cells_ == b.cells_; }
    friend bool operator<(const Pattern& a, const Pattern& b) { return a.flat() < b.flat(); }

private:
    std::array<std::int8_t, 9> cells_{};
};

/// A forbidden constraint: an alphabet plus a set of 3x3 patterns, stored
/// sorted by canonical form with duplicates removed. The set may be empty.
class Constraint {
public:
    Constraint(Alphabet alphabet, std::vector<Pattern> patterns)
        : alphabet_(alphabet), patterns_(std::move(patterns)) {
        for (const Pattern& p : patterns_) {
            if (p.max_symbol() >= alphabet_.q) {
                throw std::invalid_argument("pattern symbol " + std::to_string(p.max_symbol()) +
                                            " not in alphabet of size " +
                                            std::to_string(alphabet_.q));
            }
        }
        std::sort(patterns_.begin(), patterns_.end());
        patterns_.erase(std::unique(patterns_.begin(), patterns_.end()), patterns_.end());
    }

    int q() const { return alphabet_.q; }
    const std::vector<Pattern>& patterns() const { return patterns_; }
    bool empty() const { return patterns_.empty(); }

    std::array<std::uint8_t, 32> hash() const;
    std::string hash_hex() const { return detail::hex_digest(hash()); }

    friend bool operator==(const Constraint& a, const Constraint& b) {
        return a.q() == b.q() && a.patterns_ == b.patterns_;
    }

private:
    Alphabet alphabet_;
    std::vector<Pattern> patterns_;
};

/// Row-major symbol grid.
struct Grid {
    int n_rows = 0;
    int n_cols = 0;
    std::vector<std::uint8_t> cells; // size n_rows * n_cols

    Grid() = default;
    Grid(int rows, int cols) : n_rows(rows), n_cols(cols), cells(std::size_t(rows) * cols, 0) {}

    std::uint8_t at(int r, int c) const { return cells[std::size_t(r) * n_cols + c]; }
    std::uint8_t& at(int r, int c) { return cells[std::size_t(r) * n_cols + c]; }
};

/// True iff `pattern` matches `grid` with its top-left cell at (i, j); both
/// 0-based. The full 3x3 window must fit.
inline bool matches_at(const Grid& grid, const Pattern& pattern, int i, int j) {
    if (i < 0 || j < 0 || i + 3 > grid.n_rows || j + 3 > grid.n_cols) {
        throw std::out_of_range("pattern window (" + std::to_string(i) + "," + std::to_string(j) +
                                ") does not fit in " + std::to_string(grid.n_rows) + "x" +
                                std::to_string(grid.n_cols) + " grid");
    }
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            int v = pattern.cell(r, c);
            if (v != kDontCare && grid.at(i + r, j + c) != v) return false;
        }
    }
    return true;
}

/// True iff some pattern of the constraint occurs somewhere in the grid.
/// Grids smaller than 3x3 contain nothing.
inline bool contains(const Grid& grid, const Constraint& constraint) {
    if (grid.n_rows < 3 || grid.n_cols < 3) return false;
    for (int i = 0; i + 3 <= grid.n_rows; ++i) {
        for (int j = 0; j + 3 <= grid.n_cols; ++j) {
            for (const Pattern& p : constraint.patterns()) {
                if (matches_at(grid, p, i, j)) return true;
            }
        }
    }
    return false;
}

inline std::vector<std::string> builtin_names() {
    return {"nib-asym", "nib-sym", "ici-q4"};
}

/// Built-in constraints:
///   nib-asym  binary; forbids a 0 whose four orthogonal neighbours are 1
///   nib-sym   nib-asym plus the complementary isolated-1 pattern
///   ici-q4    quaternary; forbids a cell v in {0,1,2} whose four orthogonal
///             neighbours are all 3 (one crisscross pattern per value)
inline Constraint builtin_constraint(std::string_view name) {
    if (name == "nib-asym") {
        return Constraint(Alphabet(2), {Pattern::from_rows("*1*", "101", "*1*")});
    }
    if (name == "nib-sym") {
        return Constraint(Alphabet(2), {Pattern::from_rows("*1*", "101", "*1*"),
                                        Pattern::from_rows("*0*", "010", "*0*")});
    }
    if (name == "ici-q4") {
        std::vector<Pattern> pats;
        for (int v = 0; v < 3; ++v) {
            std::string mid = {'3', detail::symbol_char(v), '3'};
            pats.push_back(Pattern::from_rows("*3*", mid, "*3*"));
        }
        return Constraint(Alphabet(4), std::move(pats));
    }
    throw std::invalid_argument("unknown builtin constraint: " + std::string(name));
}

// --- .fct text format ------------------------------------------------------
//
// line 1:   alphabet=<q>
// then pattern blocks of exactly 3 lines, 3 characters each from {0-9a-f,*},
// blocks separated by blank lines; '#'-prefixed lines are comments.

inline Constraint parse_constraint(std::string_view text) {
    struct Line {
        int no;
        std::string_view body;
    };
    std::vector<Line> lines; // non-comment lines, blank kept as separators
    int no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view body = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        if (nl == std::string_view::npos && body.empty() && pos == text.size()) break;
        ++no;
        if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
        if (!body.starts_with("#")) lines.push_back({no, body});
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }

    std::size_t idx = 0;
    while (idx < lines.size() && lines[idx].body.empty()) ++idx;
    if (idx == lines.size()) throw ParseError(no ? no : 1, "missing alphabet line");
    {
        std::string_view head = lines[idx].body;
        if (!head.starts_with("alphabet=")) {
            throw ParseError(lines[idx].no, "expected 'alphabet=<q>'");
        }
        head.remove_prefix(9);
        int q = 0;
        if (head.empty() || head.size() > 2) throw ParseError(lines[idx].no, "bad alphabet size");
        for (char ch : head) {
            if (ch < '0' || ch > '9') throw ParseError(lines[idx].no, "bad alphabet size");
            q = q * 10 + (ch - '0');
        }
        if (q < 2 || q > 16) throw AlphabetOutOfRangeError(lines[idx].no, q);
        ++idx;

        std::vector<Pattern> pats;
        while (idx < lines.size()) {
            if (lines[idx].body.empty()) {
                ++idx;
                continue;
            }
            std::array<int, 9> cells{};
            int first_line = lines[idx].no;
            for (int r = 0; r < 3; ++r) {
                if (idx == lines.size() || lines[idx].body.empty()) {
                    throw ParseError(idx == lines.size() ? lines.back().no : lines[idx].no,
                                     "pattern block starting at line " +
                                         std::to_string(first_line) + " has fewer than 3 rows");
                }
                std::string_view row = lines[idx].body;
                if (row.size() != 3) {
                    throw ParseError(lines[idx].no, "pattern row must have exactly 3 cells");
                }
                for (int c = 0; c < 3; ++c) {
                    char ch = row[c];
                    if (ch == '*') {
                        cells[3 * r + c] = kDontCare;
                    } else {
                        int v = detail::symbol_value(ch);
                        if (v < 0) {
                            throw ParseError(lines[idx].no,
                                             std::string("bad symbol '") + ch + "'");
                        }
                        if (v >= q) {
                            throw ParseError(lines[idx].no,
                                             std::string("symbol '") + ch +
                                                 "' not in alphabet of size " + std::to_string(q));
                        }
                        cells[3 * r + c] = v;
                    }
                }
                ++idx;
            }
            if (idx < lines.size() && !lines[idx].body.empty()) {
                throw ParseError(lines[idx].no, "pattern block has more than 3 rows");
            }
            bool any = std::any_of(cells.begin(), cells.end(),
                                   [](int v) { return v != kDontCare; });
            if (!any) {
                throw ParseError(first_line, "pattern has no constrained cell");
            }
            pats.push_back(Pattern(cells));
        }
        return Constraint(Alphabet(q), std::move(pats));
    }
}

/// Canonical text form: patterns in canonical order, one blank line before
/// each block, single trailing newline.
inline std::string serialize_constraint(const Constraint& c) {
    std::string out = "alphabet=" + std::to_string(c.q()) + "\n";
    for (const Pattern& p : c.patterns()) {
        std::string flat = p.flat();
        out += '\n';
        for (int r = 0; r < 3; ++r) {
            out.append(flat, 3 * r, 3);
            out += '\n';
        }
    }
    return out;
}

inline std::array<std::uint8_t, 32> Constraint::hash() const {
    return detail::sha256(serialize_constraint(*this));
}

// --- 3x3 window machinery ---------------------------------------------------
//
// A window is keyed column-major: key = sx*q^6 + sy*q^3 + sz where each
// column slice is top*q^2 + mid*q + bot. Cell (r,c) therefore has weight
// q^((2-r) + 3*(2-c)).

namespace detail {

inline std::uint64_t ipow(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    while (e-- > 0) r *= b;
    return r;
}

} // namespace detail

/// Bitmap over all q^9 windows; true = forbidden (matches some pattern).
/// Requires q <= 10 so the table stays desk-sized.
inline std::vector<bool> forbidden_window_table(const Constraint& c) {
    const int q = c.q();
    if (q > 10) {
        throw AlphabetTooLargeError("window table needs q <= 10, got q=" + std::to_string(q));
    }
    std::vector<bool> tbl(detail::ipow(q, 9), false);
    for (const Pattern& p : c.patterns()) {
        std::uint64_t base = 0;
        std::vector<std::uint64_t> free_weights;
        for (int i = 0; i < 9; ++i) {
            int r = i / 3, col = i % 3;
            std::uint64_t w = detail::ipow(q, (2 - r) + 3 * (2 - col));
            if (p.cell(r, col) == kDontCare) {
                free_weights.push_back(w);
            } else {
                base += std::uint64_t(p.cell(r, col)) * w;
            }
        }
        // odometer over the unconstrained cells
        std::vector<int> digits(free_weights.size(), 0);
        for (;;) {
            std::uint64_t key = base;
            for (std::size_t i = 0; i < digits.size(); ++i) {
                key += std::uint64_t(digits[i]) * free_weights[i];
            }
            tbl[key] = true;
            std::size_t i = 0;
            while (i < digits.size() && ++digits[i] == q) digits[i++] = 0;
            if (i == digits.size()) break;
        }
    }
    return tbl;
}

/// True iff the set of 3x3 matrices matching some pattern is closed under
/// column reversal. Exhaustive over q^9 windows; requires q <= 8.
inline bool is_mirror_symmetric(const Constraint& c) {
    const int q = c.q();
    if (q > 8) {
        throw AlphabetTooLargeError("mirror symmetry check needs q <= 8, got q=" +
                                    std::to_string(q));
    }
    const std::vector<bool> tbl = forbidden_window_table(c);
    const std::uint64_t q3 = detail::ipow(q, 3);
    const std::uint64_t q6 = q3 * q3;
    for (std::uint64_t key = 0; key < tbl.size(); ++key) {
        if (!tbl[key]) continue;
        std::uint64_t sx = key / q6;
        std::uint64_t sy = (key / q3) % q3;
        std::uint64_t sz = key % q3;
        if (!tbl[sz * q6 + sy * q3 + sx]) return false;
    }
    return true;
}

} // namespace gridcode
