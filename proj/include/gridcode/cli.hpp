#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridcode/codec.hpp"
#include "gridcode/constraint.hpp"
#include "gridcode/pairgraph.hpp"
#include "gridcode/report.hpp"
#include "gridcode/spectral.hpp"
#include "gridcode/subopt.hpp"

namespace gridcode::cli {

inline std::string fixed3(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(1, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path);
    out.write(content.data(), std::streamsize(content.size()));
}

/// Resolves --constraint: a builtin name or a .fct path.
inline Constraint load_constraint(const std::string& source) {
    for (const std::string& name : builtin_names()) {
        if (source == name) return builtin_constraint(source);
    }
    return parse_constraint(read_file(source));
}

inline void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
    if (out_path.empty()) {
        out << text;
    } else {
        write_file(out_path, text);
    }
}

struct ExactRun {
    PairGraph graph;
    Density dens;
    CoreResult core;
    RateReport rate;
    Codebook codebook;
};

/// Shared pipeline: build (or reload) the pair graph, take the best core,
/// derive the rate report and the codebook.
inline ExactRun run_exact_pipeline(const Constraint& c, int n, int budget_log2,
                                   const std::string& dump_path,
                                   std::optional<double> alpha_bound, std::ostream& err) {
    ExactRun run;
    PairGraphOptions opts;
    opts.budget_log2 = budget_log2;

    bool loaded = false;
    if (!dump_path.empty() && std::filesystem::exists(dump_path)) {
        try {
            std::ifstream in(dump_path, std::ios::binary);
            PairGraph g = load_pair_graph(in);
            if (g.q() == c.q() && g.n() == n && g.fhash == c.hash()) {
                run.graph = std::move(g);
                loaded = true;
            }
        } catch (const std::exception& e) {
            err << "ignoring stale graph cache " << dump_path << ": " << e.what() << "\n";
        }
    }
    if (!loaded) {
        run.graph = build_pair_graph(n, c, opts);
        if (!dump_path.empty()) {
            std::ostringstream buf;
            dump_pair_graph(run.graph, buf);
            write_file(dump_path, buf.str());
        }
    }

    const bool mirror = c.q() <= 8 && is_mirror_symmetric(c);
    run.dens = density(run.graph, mirror);
    run.core = max_min_out_degree(run.graph);
    run.rate = rate_exact(run.graph, run.core, run.dens, alpha_bound);
    if (mirror && run.rate.density_bound_k > run.core.k) {
        throw Error("internal: core min out-degree " + std::to_string(run.core.k) +
                    " below the density guarantee " + std::to_string(run.rate.density_bound_k));
    }
    run.codebook = build_codebook(run.graph, run.core);
    return run;
}

inline int cmd_bound(const std::string& src, bool as_json, const std::string& out_path,
                     std::ostream& out) {
    const Constraint c = load_constraint(src);
    const SpectralReport rep = spectral_report(c);
    if (as_json) {
        emit(bound_report(src, c, rep).dump(2) + "\n", out_path, out);
    } else {
        std::ostringstream t;
        t << "constraint        " << src << " (q=" << c.q() << ")\n";
        t << "lambda_max        " << fixed3(rep.lambda_max) << "\n";
        t << "alpha             " << fixed3(rep.alpha) << "\n";
        t << "rate_lower_bound  " << fixed3(rep.rate_lower_bound) << "\n";
        if (!rep.alpha_supported) {
            t << "warning: self-loop count is not negligible against edges;"
                 " alpha may be unsupported\n";
        }
        emit(t.str(), out_path, out);
    }
    return 0;
}

inline int cmd_exact(const std::string& src, int n, int budget_log2, bool as_json,
                     const std::string& out_path, const std::string& dump_path,
                     std::ostream& out, std::ostream& err) {
    const Constraint c = load_constraint(src);
    const SpectralReport spec = spectral_report(c);
    ExactRun run = run_exact_pipeline(c, n, budget_log2, dump_path, spec.rate_lower_bound, err);
    if (as_json) {
        emit(exact_report(src, c, run.graph, run.dens, run.rate, run.codebook, spec).dump(2) +
                 "\n",
             out_path, out);
    } else {
        std::ostringstream t;
        t << "constraint        " << src << " (q=" << c.q() << ", N=" << n << ")\n";
        t << "transitions L     " << run.graph.transitions << "\n";
        t << "self loops K      " << run.graph.self_loops << "\n";
        t << "density           " << fixed3(run.dens.value()) << " ("
          << (run.dens.mirror_mode ? "mirror" : "directed") << " mode)\n";
        t << "k (exact)         " << run.core.k << "\n";
        t << "R_N               " << fixed3(run.rate.rate) << "\n";
        t << "density bound k   " << run.rate.density_bound_k << "\n";
        t << "spectral bound    " << fixed3(spec.rate_lower_bound) << " (asymptotic)\n";
        emit(t.str(), out_path, out);
    }
    return 0;
}

inline int cmd_encode(const std::string& src, int n, int budget_log2, const std::string& in_path,
                      const std::string& out_path, std::ostream& out, std::ostream& err) {
    const Constraint c = load_constraint(src);
    ExactRun run = run_exact_pipeline(c, n, budget_log2, "", std::nullopt, err);
    const std::vector<std::uint64_t> messages = parse_message_file(read_file(in_path));
    const EncodedArray arr = encode(run.codebook, messages);
    emit(write_g2d(arr), out_path, out);
    err << "encoded " << messages.size() << " messages at rate " << fixed3(code_rate(run.codebook))
        << " (M=" << run.codebook.message_count << ")\n";
    return 0;
}

inline int cmd_decode(const std::string& src, int budget_log2, const std::string& in_path,
                      const std::string& out_path, std::ostream& out, std::ostream& err) {
    const Constraint c = load_constraint(src);
    const EncodedArray arr = parse_g2d(read_file(in_path));
    if (arr.fhash != c.hash()) {
        throw CodecError(CodecError::Kind::HashMismatch,
                         "array was encoded under a different constraint");
    }
    ExactRun run = run_exact_pipeline(c, arr.layout.n, budget_log2, "", std::nullopt, err);
    const std::vector<std::uint64_t> messages = decode(run.codebook, arr);
    emit(write_message_file(messages), out_path, out);
    return 0;
}

inline int cmd_verify(const std::string& src, const std::string& in_path, std::ostream& out,
                      std::ostream& err) {
    const Constraint c = load_constraint(src);
    const EncodedArray arr = parse_g2d(read_file(in_path));
    if (arr.fhash != c.hash()) {
        err << "note: array was written under a different constraint hash\n";
    }
    const VerifyReport rep = verify_array(arr, c);
    if (rep.extended_clean) {
        out << "clean\n";
        return 0;
    }
    const Violation& v = *rep.first_violation;
    out << "violation: pattern " << v.pattern_index << " at window (" << v.row << ", "
        << v.col << ") of the extended array"
        << (rep.grid_clean ? " (initial columns only)" : "") << "\n";
    return 1;
}

inline int cmd_constraints(std::ostream& out) {
    for (const std::string& name : builtin_names()) {
        const Constraint c = builtin_constraint(name);
        out << name << "  q=" << c.q() << "  patterns=" << c.patterns().size() << "\n";
    }
    return 0;
}

inline int cmd_paper_table(int budget_log2, std::ostream& out, std::ostream& err) {
    struct Row {
        const char* name;
        std::optional<double> ref_lambda;
        std::optional<double> ref_alpha;
        double ref_bound;
        const char* note;
    };
    const Row rows[] = {
        {"nib-asym", 7.750, std::nullopt, 0.954, ""},
        {"nib-sym", std::nullopt, std::nullopt, 0.861, "reference capacity 0.923"},
        {"ici-q4", std::nullopt, 1.996, 0.998, ""},
    };

    out << "constraint  q  lambda_max  alpha   bound   ref:bound  |dev|   note\n";
    for (const Row& row : rows) {
        const Constraint c = builtin_constraint(row.name);
        const SpectralReport rep = spectral_report(c);
        char line[256];
        std::snprintf(line, sizeof line, "%-10s  %d  %-10s  %-6s  %-6s  %-9s  %-6s  %s\n",
                      row.name, c.q(), fixed3(rep.lambda_max).c_str(), fixed3(rep.alpha).c_str(),
                      fixed3(rep.rate_lower_bound).c_str(), fixed3(row.ref_bound).c_str(),
                      fixed3(std::abs(rep.rate_lower_bound - row.ref_bound)).c_str(), row.note);
        out << line;
        if (row.ref_lambda) {
            out << "            lambda deviation: "
                << fixed3(std::abs(rep.lambda_max - *row.ref_lambda)) << "\n";
        }
        if (row.ref_alpha) {
            out << "            alpha deviation:  "
                << fixed3(std::abs(rep.alpha - *row.ref_alpha)) << "\n";
        }
    }

    out << "\nexact rates, nib-sym:\n";
    out << "N   k      R_N     density  bound_k\n";
    const Constraint sym = builtin_constraint("nib-sym");
    for (int n = 4; n <= 8; ++n) {
        ExactRun run = run_exact_pipeline(sym, n, budget_log2, "", std::nullopt, err);
        char line[128];
        std::snprintf(line, sizeof line, "%-3d %-6llu %-7s %-8s %llu\n", n,
                      static_cast<unsigned long long>(run.core.k), fixed3(run.rate.rate).c_str(),
                      fixed3(run.dens.value()).c_str(),
                      static_cast<unsigned long long>(run.rate.density_bound_k));
        out << line;
    }
    return 0;
}

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 verification failure, 2 input/format errors, 3 resource or convergence
/// errors, 4 decoder errors.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"column-by-column encoders and rate bounds for 2D forbidden-pattern "
                 "constraints"};
    app.require_subcommand(1);

    std::string src, in_path, out_path, dump_path;
    int n = 0;
    int budget = 30;
    bool as_json = false;

    CLI::App* bound = app.add_subcommand("bound", "asymptotic rate lower bound");
    bound->add_option("--constraint", src, "builtin name or .fct path")->required();
    bound->add_flag("--json", as_json, "emit a JSON report");
    bound->add_option("--out", out_path, "write the report to a file");

    CLI::App* exact = app.add_subcommand("exact", "exact rate for a column height N");
    exact->add_option("--constraint", src, "builtin name or .fct path")->required();
    exact->add_option("--n", n, "column height N (>= 3)")->required();
    exact->add_option("--budget", budget, "log2 budget for triple enumeration (default 30)");
    exact->add_flag("--json", as_json, "emit a JSON report");
    exact->add_option("--out", out_path, "write the report to a file");
    exact->add_option("--dump-graph", dump_path, "binary graph cache, reused when it matches");

    CLI::App* encode_cmd = app.add_subcommand("encode", "encode a message file into an array");
    encode_cmd->add_option("--constraint", src, "builtin name or .fct path")->required();
    encode_cmd->add_option("--n", n, "column height N (>= 3)")->required();
    encode_cmd->add_option("--in", in_path, "message file, one 0-based integer per line")
        ->required();
    encode_cmd->add_option("--out", out_path, "output .g2d path (stdout when omitted)");
    encode_cmd->add_option("--budget", budget, "log2 budget for triple enumeration");

    CLI::App* decode_cmd = app.add_subcommand("decode", "decode an array back into messages");
    decode_cmd->add_option("--constraint", src, "builtin name or .fct path")->required();
    decode_cmd->add_option("--in", in_path, ".g2d path")->required();
    decode_cmd->add_option("--out", out_path, "output message file (stdout when omitted)");
    decode_cmd->add_option("--budget", budget, "log2 budget for triple enumeration");

    CLI::App* verify_cmd = app.add_subcommand("verify", "check an array against a constraint");
    verify_cmd->add_option("--constraint", src, "builtin name or .fct path")->required();
    verify_cmd->add_option("--in", in_path, ".g2d path")->required();

    CLI::App* table_cmd = app.add_subcommand("paper-table", "summary table for the builtins");
    table_cmd->add_option("--budget", budget, "log2 budget for triple enumeration");

    app.add_subcommand("constraints", "list builtin constraints");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    try {
        if (app.got_subcommand("bound")) return cmd_bound(src, as_json, out_path, out);
        if (app.got_subcommand("exact")) {
            if (n < 3) throw std::invalid_argument("graph commands need --n >= 3");
            return cmd_exact(src, n, budget, as_json, out_path, dump_path, out, err);
        }
        if (app.got_subcommand("encode")) {
            if (n < 3) throw std::invalid_argument("graph commands need --n >= 3");
            return cmd_encode(src, n, budget, in_path, out_path, out, err);
        }
        if (app.got_subcommand("decode")) return cmd_decode(src, budget, in_path, out_path, out, err);
        if (app.got_subcommand("verify")) return cmd_verify(src, in_path, out, err);
        if (app.got_subcommand("paper-table")) return cmd_paper_table(budget, out, err);
        if (app.got_subcommand("constraints")) return cmd_constraints(out);
        err << "no subcommand\n";
        return 2;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const MessageOutOfRangeError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const CodecError& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    } catch (const BudgetExceededError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const AlphabetTooLargeError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const NoEdgesError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace gridcode::cli
