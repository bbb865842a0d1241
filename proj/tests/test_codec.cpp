#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "gridcode/codec.hpp"
#include "gridcode/pairgraph.hpp"
#include "gridcode/subopt.hpp"

using namespace gridcode;

namespace {

struct Pipeline {
    Constraint constraint;
    PairGraph graph;
    CoreResult core;
    Codebook codebook;
};

Pipeline make_pipeline(const std::string& name, int n) {
    Constraint c = name == "empty" ? Constraint(Alphabet(2), {}) : builtin_constraint(name);
    PairGraph g = build_pair_graph(n, c);
    CoreResult core = max_min_out_degree(g);
    Codebook cb = build_codebook(g, core);
    return {std::move(c), std::move(g), std::move(core), std::move(cb)};
}

std::vector<std::uint64_t> random_messages(std::mt19937& rng, int n, std::uint64_t m_max) {
    std::uniform_int_distribution<std::uint64_t> dist(1, m_max);
    std::vector<std::uint64_t> msgs(n);
    for (auto& m : msgs) m = dist(rng);
    return msgs;
}

} // namespace

TEST_CASE("codebook construction") {
    Pipeline p = make_pipeline("nib-sym", 4);
    CHECK(p.codebook.message_count == 12);
    CHECK(p.codebook.message_count == p.core.k);
    CHECK(p.codebook.v_init == p.core.vertices.front());
    CHECK(p.codebook.v_init == 0); // the all-zero pair is in the core
    CHECK(code_rate(p.codebook) == Catch::Approx(0.896240625180289).epsilon(1e-12));

    SECTION("label maps list in-core successors ascending") {
        for (std::size_t rank = 0; rank < p.codebook.vertices.size(); ++rank) {
            const auto succ = p.codebook.successors_of_rank(rank);
            REQUIRE(succ.size() >= p.codebook.message_count);
            CHECK(std::is_sorted(succ.begin(), succ.end()));
            const std::uint64_t v = p.codebook.vertices[rank];
            const std::uint64_t y = p.codebook.layout.right_of(v);
            for (std::uint32_t z : succ) {
                CHECK(p.codebook.rank_of(p.codebook.layout.vertex_id(std::uint32_t(y), z))
                          .has_value());
            }
        }
    }

    SECTION("empty core is refused") {
        const Constraint total(Alphabet(2), {Pattern::from_rows("***", "*0*", "***"),
                                             Pattern::from_rows("***", "*1*", "***")});
        const PairGraph g = build_pair_graph(3, total);
        const CoreResult core = max_min_out_degree(g);
        CHECK_THROWS_AS(build_codebook(g, core), EmptyCoreError);
    }

    SECTION("two builds are identical") {
        Pipeline p2 = make_pipeline("nib-sym", 4);
        CHECK(p.codebook == p2.codebook);
    }
}

TEST_CASE("encode fixtures") {
    Pipeline p = make_pipeline("nib-sym", 4);

    SECTION("all-ones message walks the smallest successors") {
        const std::vector<std::uint64_t> msgs(4, 1);
        const EncodedArray arr = encode(p.codebook, msgs);
        CHECK(arr.init_left == 0);
        CHECK(arr.init_right == 0);
        for (std::uint32_t col : arr.columns) CHECK(col == 0);

        const Grid g = arr.grid();
        for (auto cell : g.cells) CHECK(cell == 0);

        CHECK(decode(p.codebook, arr) == msgs);
    }

    SECTION("message range is checked with its position") {
        std::vector<std::uint64_t> msgs = {1, 13, 1, 1};
        try {
            encode(p.codebook, msgs);
            FAIL("expected MessageOutOfRangeError");
        } catch (const MessageOutOfRangeError& e) {
            CHECK(e.index() == 1);
        }
        msgs = {1, 1, 0, 1};
        CHECK_THROWS_AS(encode(p.codebook, msgs), MessageOutOfRangeError);
    }

    SECTION("message count must equal N") {
        CHECK_THROWS_AS(encode(p.codebook, std::vector<std::uint64_t>{1, 1, 1}),
                        std::invalid_argument);
    }

    SECTION("differing positions produce differing columns") {
        std::mt19937 rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            auto a = random_messages(rng, 4, p.codebook.message_count);
            auto b = a;
            const int pos = trial % 4;
            b[pos] = a[pos] % p.codebook.message_count + 1;
            if (a[pos] == b[pos]) continue;
            const EncodedArray ea = encode(p.codebook, a);
            const EncodedArray eb = encode(p.codebook, b);
            CHECK(ea.columns[pos] != eb.columns[pos]);
        }
    }
}

TEST_CASE("roundtrip and constraint safety") {
    std::mt19937 rng(20240818);
    for (const char* name : {"nib-sym", "nib-asym"}) {
        Pipeline p = make_pipeline(name, 5);
        for (int trial = 0; trial < 300; ++trial) {
            const auto msgs = random_messages(rng, 5, p.codebook.message_count);
            const EncodedArray arr = encode(p.codebook, msgs);
            REQUIRE(decode(p.codebook, arr) == msgs);
            const VerifyReport rep = verify_array(arr, p.constraint);
            REQUIRE(rep.grid_clean);
            REQUIRE(rep.extended_clean);
        }
    }
}

TEST_CASE("the code reaches exactly M^N arrays") {
    Pipeline p = make_pipeline("nib-sym", 3);
    const std::uint64_t m = p.codebook.message_count;
    CHECK(m == 7);
    std::set<std::string> arrays;
    std::vector<std::uint64_t> msgs(3, 1);
    for (;;) {
        arrays.insert(write_g2d(encode(p.codebook, msgs)));
        std::size_t i = 0;
        while (i < msgs.size() && ++msgs[i] > m) msgs[i++] = 1;
        if (i == msgs.size()) break;
    }
    CHECK(arrays.size() == 343); // 7^3
}

TEST_CASE("decode rejects tampered arrays") {
    Pipeline p = make_pipeline("nib-sym", 4);
    std::mt19937 rng(5);
    const auto msgs = random_messages(rng, 4, p.codebook.message_count);
    const EncodedArray good = encode(p.codebook, msgs);

    SECTION("hash mismatch") {
        EncodedArray bad = good;
        bad.fhash[0] ^= 1;
        try {
            decode(p.codebook, bad);
            FAIL("expected CodecError");
        } catch (const CodecError& e) {
            CHECK(e.kind() == CodecError::Kind::HashMismatch);
        }
    }

    SECTION("tampered initial column") {
        EncodedArray bad = good;
        bad.init_right = 0b0101; // (0000, 0101) is not a core state
        bool ok = false;
        try {
            decode(p.codebook, bad);
        } catch (const CodecError& e) {
            ok = e.kind() == CodecError::Kind::UnknownState ||
                 e.kind() == CodecError::Kind::UnknownTransition;
        }
        CHECK(ok);
    }

    SECTION("tampered grid column") {
        EncodedArray bad = good;
        bad.columns[2] = 0b0100; // break the walk mid-way
        bool threw = false;
        try {
            decode(p.codebook, bad);
        } catch (const CodecError&) {
            threw = true;
        }
        // either an error, or a legal but different codeword
        if (!threw) CHECK(decode(p.codebook, bad) != msgs);
    }

    SECTION("transitions above the message alphabet are refused") {
        // find a core state with more in-core successors than M
        bool exercised = false;
        for (std::size_t rank = 0; rank < p.codebook.vertices.size() && !exercised; ++rank) {
            const auto succ = p.codebook.successors_of_rank(rank);
            if (succ.size() <= p.codebook.message_count) continue;
            EncodedArray bad;
            bad.layout = p.codebook.layout;
            bad.fhash = p.codebook.fhash;
            const std::uint64_t v = p.codebook.vertices[rank];
            bad.init_left = p.codebook.layout.left_of(v);
            bad.init_right = std::uint32_t(p.codebook.layout.right_of(v));
            bad.columns.assign(4, 0);
            bad.columns[0] = succ[p.codebook.message_count]; // label M+1
            try {
                decode(p.codebook, bad);
                FAIL("expected CodecError");
            } catch (const CodecError& e) {
                CHECK(e.kind() == CodecError::Kind::UnknownTransition);
                exercised = true;
            }
        }
        CHECK(exercised);
    }
}

TEST_CASE("verify_array") {
    const Constraint sym = builtin_constraint("nib-sym");

    SECTION("planted isolated bit") {
        EncodedArray arr;
        arr.layout = ColumnLayout(2, 4);
        arr.fhash = sym.hash();
        arr.init_left = 0;
        arr.init_right = 0;
        // column keys for a grid with an isolated 1 at row 1, column 1
        arr.columns = {0b0000, 0b0010, 0b0000, 0b0000};
        const VerifyReport rep = verify_array(arr, sym);
        CHECK_FALSE(rep.grid_clean);
        CHECK_FALSE(rep.extended_clean);
        REQUIRE(rep.first_violation.has_value());
        CHECK(rep.first_violation->row == 0);
        CHECK(rep.first_violation->col == 2); // window starts at the isolated bit's column - 1
    }

    SECTION("violation only through the initial columns") {
        EncodedArray arr;
        arr.layout = ColumnLayout(2, 3);
        arr.fhash = sym.hash();
        arr.init_left = 0b000;
        arr.init_right = 0b010; // X(0) carries the isolated 1
        arr.columns = {0b000, 0b000, 0b000};
        const VerifyReport rep = verify_array(arr, sym);
        CHECK_FALSE(rep.extended_clean);
        CHECK(rep.grid_clean);
    }

    SECTION("arrays too small for a window are clean") {
        EncodedArray arr;
        arr.layout = ColumnLayout(2, 2);
        arr.columns = {0b01, 0b10};
        arr.init_left = 0b01;
        arr.init_right = 0b10;
        const VerifyReport rep = verify_array(arr, sym);
        CHECK(rep.grid_clean);
        CHECK(rep.extended_clean);
    }
}

TEST_CASE("g2d round trip and errors") {
    Pipeline p = make_pipeline("nib-sym", 4);
    std::mt19937 rng(99);
    const auto msgs = random_messages(rng, 4, p.codebook.message_count);
    const EncodedArray arr = encode(p.codebook, msgs);

    const std::string text = write_g2d(arr);
    const EncodedArray back = parse_g2d(text);
    CHECK(back.fhash == arr.fhash);
    CHECK(back.init_left == arr.init_left);
    CHECK(back.init_right == arr.init_right);
    CHECK(back.columns == arr.columns);
    CHECK(write_g2d(back) == text);
    CHECK(decode(p.codebook, back) == msgs);

    SECTION("format errors") {
        CHECK_THROWS_AS(parse_g2d(""), ParseError);
        CHECK_THROWS_AS(parse_g2d("N=4 q=2 fhash=zz\ninit=0000 0000\n"), ParseError);
        // bad symbol for the alphabet, first cell of the first grid row
        std::string bad = text;
        std::size_t row_start = bad.find('\n');
        row_start = bad.find('\n', row_start + 1) + 1;
        bad[row_start] = '3';
        CHECK_THROWS_AS(parse_g2d(bad), ParseError);
        // wrong number of rows
        std::string truncated = text.substr(0, text.rfind("\n", text.size() - 2) + 1);
        CHECK_THROWS_AS(parse_g2d(truncated), ParseError);
        CHECK_THROWS_AS(parse_g2d("N=4 q=99 fhash=" + std::string(64, '0') +
                                  "\ninit=0000 0000\n"),
                        AlphabetOutOfRangeError);
    }
}

TEST_CASE("message files") {
    const std::vector<std::uint64_t> msgs = {1, 5, 12, 3};
    const std::string text = write_message_file(msgs);
    CHECK(text == "0\n4\n11\n2\n");
    CHECK(parse_message_file(text) == msgs);
    CHECK(parse_message_file("0\n").front() == 1); // disk values are 0-based
    CHECK_THROWS_AS(parse_message_file("0\nx\n"), ParseError);
    CHECK_THROWS_AS(parse_message_file("-1\n"), ParseError);
}

TEST_CASE("trivial code rates") {
    Pipeline p = make_pipeline("empty", 3);
    CHECK(p.codebook.message_count == 8);
    CHECK(code_rate(p.codebook) == 1.0);

    // with nothing forbidden, message m simply selects the column with key m-1
    const EncodedArray arr = encode(p.codebook, std::vector<std::uint64_t>{3, 5, 8});
    CHECK(arr.columns == std::vector<std::uint32_t>{2, 4, 7});

    Codebook unit;
    unit.layout = ColumnLayout(2, 4);
    unit.message_count = 1;
    CHECK(code_rate(unit) == 0.0);
}
