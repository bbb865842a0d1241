#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "gridcode/codec.hpp"
#include "gridcode/constraint.hpp"
#include "gridcode/pairgraph.hpp"
#include "gridcode/spectral.hpp"
#include "gridcode/subopt.hpp"

namespace gridcode {

// Reports use ordered_json and contain no timestamps, so identical inputs
// produce byte-identical output.
using Json = nlohmann::ordered_json;

inline Json spectral_json(const SpectralReport& r) {
    Json j;
    j["lambda_max"] = r.lambda_max;
    j["alpha"] = r.alpha;
    j["rate_lower_bound"] = r.rate_lower_bound;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["growth_gap"] = r.growth_gap;
    j["self_loop_ratio_small_n"] = r.self_loop_ratio_small;
    j["self_loop_ratio_large_n"] = r.self_loop_ratio_large;
    j["alpha_supported"] = r.alpha_supported;
    Json walks = Json::object();
    for (const auto& [n, count] : r.walk_counts) walks[std::to_string(n)] = count.str();
    j["walk_counts"] = walks;
    return j;
}

inline Json bound_report(const std::string& source, const Constraint& c,
                         const SpectralReport& spec) {
    Json j;
    j["constraint"] = source;
    j["q"] = c.q();
    j["fhash"] = c.hash_hex();
    j["spectral"] = spectral_json(spec);
    return j;
}

inline Json exact_json(const PairGraph& g, const Density& dens, const RateReport& rate) {
    Json j;
    j["N"] = g.n();
    j["L"] = g.transitions;
    j["K"] = g.self_loops;
    j["mode"] = dens.mirror_mode ? "mirror" : "directed";
    j["density"] = dens.value();
    j["density_num"] = dens.num;
    j["density_den"] = dens.den;
    j["k"] = rate.k;
    j["R_N"] = rate.rate;
    j["density_bound_k"] = rate.density_bound_k;
    j["core_size"] = rate.core_size;
    return j;
}

inline Json codec_json(const Codebook& cb) {
    Json j;
    j["M"] = cb.message_count;
    j["code_rate"] = code_rate(cb);
    auto col_text = [&](std::uint32_t key) {
        std::string s;
        for (int r = 0; r < cb.n(); ++r) s += detail::symbol_char(cb.layout.symbol(key, r));
        return s;
    };
    j["v_init"] = col_text(cb.layout.left_of(cb.v_init)) + " " +
                  col_text(cb.layout.right_of(cb.v_init));
    return j;
}

inline Json exact_report(const std::string& source, const Constraint& c, const PairGraph& g,
                         const Density& dens, const RateReport& rate, const Codebook& cb,
                         const std::optional<SpectralReport>& spec) {
    Json j;
    j["constraint"] = source;
    j["q"] = c.q();
    j["N"] = g.n();
    j["fhash"] = c.hash_hex();
    if (spec) j["spectral"] = spectral_json(*spec);
    j["exact"] = exact_json(g, dens, rate);
    j["codec"] = codec_json(cb);
    return j;
}

} // namespace gridcode
