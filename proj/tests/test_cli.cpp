#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridcode/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

CliResult run(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"gridcode"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::ostringstream out, err;
    int code = gridcode::cli::run_cli(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gridcode-test-" + std::to_string(Catch::rngSeed()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cli constraints listing") {
    const CliResult r = run({"constraints"});
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("nib-asym") != std::string::npos);
    CHECK(r.out.find("nib-sym") != std::string::npos);
    CHECK(r.out.find("ici-q4") != std::string::npos);
}

TEST_CASE("cli bound") {
    const CliResult r = run({"bound", "--constraint", "nib-asym", "--json"});
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["q"] == 2);
    CHECK(std::abs(double(j["spectral"]["rate_lower_bound"]) - 0.954245) < 5e-4);

    SECTION("human output carries three decimals") {
        const CliResult h = run({"bound", "--constraint", "nib-asym"});
        CHECK(h.exit_code == 0);
        CHECK(h.out.find("7.750") != std::string::npos);
        CHECK(h.out.find("0.954") != std::string::npos);
    }
}

TEST_CASE("cli exact") {
    const CliResult r = run({"exact", "--constraint", "nib-sym", "--n", "3", "--json"});
    REQUIRE(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["exact"]["L"] == 480);
    CHECK(j["exact"]["K"] == 8);
    CHECK(j["exact"]["k"] == 7);
    CHECK(j["exact"]["mode"] == "mirror");
    CHECK(j["codec"]["M"] == 7);
    CHECK(std::abs(double(j["exact"]["density"]) - 3.625) < 1e-12);

    SECTION("budget guard exits 3") {
        const CliResult b = run({"exact", "--constraint", "nib-asym", "--n", "12"});
        CHECK(b.exit_code == 3);
        CHECK(b.err.find("68719476736") != std::string::npos);
    }

    SECTION("n below 3 is rejected") {
        CHECK(run({"exact", "--constraint", "nib-sym", "--n", "2"}).exit_code == 2);
    }
}

TEST_CASE("cli input errors") {
    CHECK(run({"bound", "--constraint", "no-such-thing"}).exit_code == 2);
    CHECK(run({"bogus-subcommand"}).exit_code == 2);
    CHECK(run({"bound"}).exit_code == 2); // missing required option

    TempDir tmp;
    std::ofstream(tmp.file("bad.fct")) << "alphabet=17\n";
    CHECK(run({"bound", "--constraint", tmp.file("bad.fct").c_str()}).exit_code == 2);

    SECTION("a constraint file is accepted") {
        std::ofstream(tmp.file("nib.fct")) << "alphabet=2\n\n*1*\n101\n*1*\n";
        const CliResult r = run({"bound", "--constraint", tmp.file("nib.fct").c_str(), "--json"});
        REQUIRE(r.exit_code == 0);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(std::abs(double(j["spectral"]["lambda_max"]) - 7.750260) < 5e-4);
    }
}

TEST_CASE("cli encode decode verify") {
    TempDir tmp;
    const std::string msgs = tmp.file("msgs.txt");
    const std::string arr = tmp.file("arr.g2d");
    const std::string back = tmp.file("back.txt");
    std::ofstream(msgs) << "0\n5\n11\n3\n";

    REQUIRE(run({"encode", "--constraint", "nib-sym", "--n", "4", "--in", msgs.c_str(), "--out",
                 arr.c_str()})
                .exit_code == 0);
    REQUIRE(run({"decode", "--constraint", "nib-sym", "--in", arr.c_str(), "--out", back.c_str()})
                .exit_code == 0);
    CHECK(slurp(msgs) == slurp(back)); // byte-for-byte after 0-based normalisation

    SECTION("verify accepts the encoder output") {
        const CliResult v = run({"verify", "--constraint", "nib-sym", "--in", arr.c_str()});
        CHECK(v.exit_code == 0);
        CHECK(v.out == "clean\n");
    }

    SECTION("verify flags a planted violation with coordinates") {
        // 4x4 array with an isolated one; init columns all-zero
        std::string hash = gridcode::builtin_constraint("nib-sym").hash_hex();
        std::ofstream(tmp.file("bad.g2d"))
            << "N=4 q=2 fhash=" << hash << "\ninit=0000 0000\n0000\n0100\n0000\n0000\n";
        const CliResult v =
            run({"verify", "--constraint", "nib-sym", "--in", tmp.file("bad.g2d").c_str()});
        CHECK(v.exit_code == 1);
        CHECK(v.out.find("violation") != std::string::npos);
        CHECK(v.out.find("(0, 2)") != std::string::npos);
    }

    SECTION("decode under the wrong constraint exits 4") {
        const CliResult d =
            run({"decode", "--constraint", "nib-asym", "--in", arr.c_str(), "--out", back.c_str()});
        CHECK(d.exit_code == 4);
    }

    SECTION("messages out of range exit 2") {
        std::ofstream(msgs) << "0\n99\n0\n0\n";
        const CliResult e = run({"encode", "--constraint", "nib-sym", "--n", "4", "--in",
                                 msgs.c_str(), "--out", arr.c_str()});
        CHECK(e.exit_code == 2);
    }

    SECTION("wrong message count exits 2") {
        std::ofstream(msgs) << "0\n1\n";
        const CliResult e = run({"encode", "--constraint", "nib-sym", "--n", "4", "--in",
                                 msgs.c_str(), "--out", arr.c_str()});
        CHECK(e.exit_code == 2);
    }
}

TEST_CASE("cli graph cache") {
    TempDir tmp;
    const std::string cache = tmp.file("g.vpg");
    const CliResult a = run({"exact", "--constraint", "nib-sym", "--n", "4", "--json",
                             "--dump-graph", cache.c_str()});
    REQUIRE(a.exit_code == 0);
    REQUIRE(fs::exists(cache));

    const CliResult b = run({"exact", "--constraint", "nib-sym", "--n", "4", "--json",
                             "--dump-graph", cache.c_str()});
    CHECK(b.exit_code == 0);
    CHECK(a.out == b.out); // cached and rebuilt runs agree byte for byte

    SECTION("stale caches are rebuilt") {
        std::ofstream(cache, std::ios::trunc) << "garbage";
        const CliResult c = run({"exact", "--constraint", "nib-sym", "--n", "4", "--json",
                                 "--dump-graph", cache.c_str()});
        CHECK(c.exit_code == 0);
        CHECK(c.out == a.out);
        CHECK(c.err.find("stale") != std::string::npos);
    }

    SECTION("a cache for another height is ignored") {
        const CliResult c = run({"exact", "--constraint", "nib-sym", "--n", "5", "--json",
                                 "--dump-graph", cache.c_str()});
        CHECK(c.exit_code == 0);
        const auto j = nlohmann::json::parse(c.out);
        CHECK(j["exact"]["N"] == 5);
    }
}

TEST_CASE("cli reports are deterministic") {
    const CliResult a = run({"bound", "--constraint", "ici-q4", "--json"});
    const CliResult b = run({"bound", "--constraint", "ici-q4", "--json"});
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    const CliResult c = run({"exact", "--constraint", "nib-sym", "--n", "4", "--json"});
    const CliResult d = run({"exact", "--constraint", "nib-sym", "--n", "4", "--json"});
    REQUIRE(c.exit_code == 0);
    CHECK(c.out == d.out);
}

TEST_CASE("cli help") {
    CHECK(run({"--help"}).exit_code == 0);
}
