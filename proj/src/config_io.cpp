#include "lmsv/config_io.hpp"

#include "lmsv/errors.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace lmsv {

namespace {

// The first word of a DomainError message from validate() names the offending key.
std::string first_word(const std::string& s) {
    return s.substr(0, s.find(' '));
}

class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }

    std::string field(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    bool has(const std::string& key) {
        known_.insert(key);
        return j_.contains(key) && !j_.at(key).is_null();
    }

    const json& at(const std::string& key) {
        if (!has(key)) throw ConfigError(field(key), "required");
        return j_.at(key);
    }

    double number(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number()) throw ConfigError(field(key), "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x)) throw ConfigError(field(key), "must be finite");
        return x;
    }

    double number(const std::string& key, double fallback) {
        return has(key) ? number(key) : fallback;
    }

    std::uint64_t unsigned_int(const std::string& key) {
        const json& v = at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                       v.get<std::int64_t>() < 0)) {
            throw ConfigError(field(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
        return has(key) ? unsigned_int(key) : fallback;
    }

    std::string string(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(field(key), "expected a string");
        return v.get<std::string>();
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!known_.count(key)) throw ConfigError(field(key), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

InnovationLaw law_from(Reader& r, const std::string& key, InnovationLaw fallback) {
    if (!r.has(key)) return fallback;
    try {
        return innovation_law_from_string(r.string(key));
    } catch (const DomainError& e) {
        throw ConfigError(r.field(key), e.what());
    }
}

std::vector<std::size_t> size_list(const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path, "expected an array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
        if (!e.is_number_unsigned()) throw ConfigError(path, "expected non-negative integers");
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

McConfig mc_from_json(const json& j, const ModelSpec& spec, const SimConfig& sim) {
    McConfig mc;
    mc.spec = spec;
    mc.sim = sim;
    Reader r(j, "mc");
    if (r.has("n_grid")) mc.n_grid = size_list(r.at("n_grid"), "mc.n_grid");
    mc.replications = r.unsigned_int("replications", mc.replications);
    mc.master_seed = r.unsigned_int("master_seed", mc.master_seed);
    mc.workers = r.unsigned_int("workers", mc.workers);
    mc.normality_replications = r.unsigned_int("normality_replications", mc.normality_replications);
    if (r.has("normality_n")) mc.normality_n = r.unsigned_int("normality_n");
    if (r.has("sigma_y2")) mc.sigma_y2 = r.number("sigma_y2");
    r.finish();
    validate(mc);
    return mc;
}

json* walk(json& root, const std::string& dotted, std::string& last) {
    json* node = &root;
    std::size_t start = 0;
    for (;;) {
        const std::size_t dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot - start);
        if (part.empty()) throw ConfigError(dotted, "empty path component");
        if (dot == std::string::npos) {
            last = part;
            return node;
        }
        if (!node->is_object()) throw ConfigError(dotted, "path crosses a non-object");
        node = &(*node)[part];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

}  // namespace

json to_json(const CoefficientSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, HyperbolicLM>) {
                return {{"kind", "hyperbolic_lm"}, {"C", s.scale}, {"beta", s.beta}};
            } else if constexpr (std::is_same_v<T, Geometric>) {
                return {{"kind", "geometric"}, {"rho", s.rho}, {"scale", s.scale}};
            } else {
                return {{"kind", "explicit_finite"}, {"values", s.values}};
            }
        },
        spec);
}

json to_json(const ModelSpec& spec) {
    return {{"delta", spec.delta},
            {"a", to_json(spec.a)},
            {"b", to_json(spec.b)},
            {"z_law", to_string(spec.z_law)},
            {"eps_law", to_string(spec.eps_law)},
            {"r_f", spec.r_f}};
}

json to_json(const SimConfig& config) {
    json j = {{"n", config.n},
              {"M", config.M},
              {"M_b", config.M_b},
              {"seed", config.seed},
              {"conv_method", to_string(config.conv_method)},
              {"fft_threshold", config.fft_threshold}};
    j["trunc_tol"] = config.trunc_tol ? json(*config.trunc_tol) : json(nullptr);
    return j;
}

json to_json(const McConfig& config) {
    json j = {{"n_grid", config.n_grid},
              {"replications", config.replications},
              {"master_seed", config.master_seed},
              {"workers", config.workers},
              {"normality_replications", config.normality_replications}};
    j["normality_n"] = config.normality_n ? json(*config.normality_n) : json(nullptr);
    j["sigma_y2"] = config.sigma_y2 ? json(*config.sigma_y2) : json(nullptr);
    return j;
}

json to_json(const AsymptoticConstants& c) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"sigma2", c.sigma2},
            {"sigma_y2", c.sigma_y2},
            {"lambda2", c.lambda2},
            {"xi2", opt(c.xi2)},
            {"xi2_filtered", opt(c.xi2_filtered)},
            {"v1_var", c.v1_var},
            {"v2_var", opt(c.v2_var)},
            {"v3_var", c.v3_var},
            {"g2", opt(c.g2)},
            {"xi1_2", opt(c.xi1_2)},
            {"sr_limit_var", c.sr_limit_var},
            {"rate_exponent", c.rate_exponent}};
}

json to_json(const NSummary& s) {
    return {{"n", s.n},
            {"count", s.count},
            {"flagged", s.flagged},
            {"sd_error", s.sd_error},
            {"sd_mean_term", s.sd_mean_term},
            {"sd_var_term", s.sd_var_term},
            {"mean_share", s.mean_share}};
}

json to_json(const RateRecord& rate) {
    return {{"slope", rate.slope},
            {"intercept", rate.intercept},
            {"slope_stderr", rate.slope_stderr},
            {"ci95", {rate.ci_low, rate.ci_high}},
            {"expected", rate.expected}};
}

json to_json(const NormalityRecord& rec) {
    return {{"n", rec.n},
            {"count", rec.count},
            {"ks_distance", rec.ks_distance},
            {"ks_band_1pct", ks_band_1pct(rec.count)},
            {"ks_band_5pct", ks_band_5pct(rec.count)},
            {"skewness", rec.skewness},
            {"excess_kurtosis", rec.excess_kurtosis}};
}

json to_json(const VarianceMatch& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.n.size(); ++i) {
        rows.push_back({{"n", m.n[i]}, {"ratio", m.ratio[i]}});
    }
    return {{"limit_var", m.limit_var}, {"scale_exponent", m.scale_exponent}, {"ratios", rows}};
}

CoefficientSpec coeffs_from_json(const json& j, const std::string& path) {
    Reader r(j, path);
    const std::string kind = r.string("kind");
    CoefficientSpec spec;
    if (kind == "hyperbolic_lm") {
        spec = HyperbolicLM{r.number("C"), r.number("beta")};
    } else if (kind == "geometric") {
        spec = Geometric{r.number("rho"), r.number("scale", 1.0)};
    } else if (kind == "explicit_finite") {
        const json& v = r.at("values");
        if (!v.is_array()) throw ConfigError(r.field("values"), "expected an array of numbers");
        ExplicitFinite e;
        for (const auto& x : v) {
            if (!x.is_number()) throw ConfigError(r.field("values"), "expected numbers");
            e.values.push_back(x.get<double>());
        }
        spec = std::move(e);
    } else {
        throw ConfigError(r.field("kind"),
                          "unknown kind '" + kind + "' (expected hyperbolic_lm, geometric or explicit_finite)");
    }
    r.finish();
    try {
        validate(spec);
    } catch (const DomainError& e) {
        throw ConfigError(r.field(first_word(e.what())), e.what());
    }
    return spec;
}

ModelSpec model_from_json(const json& j, const std::string& path) {
    Reader r(j, path);
    ModelSpec spec;
    spec.delta = r.number("delta", spec.delta);
    spec.a = coeffs_from_json(r.at("a"), r.field("a"));
    if (r.has("b")) spec.b = coeffs_from_json(r.at("b"), r.field("b"));
    spec.z_law = law_from(r, "z_law", spec.z_law);
    spec.eps_law = law_from(r, "eps_law", spec.eps_law);
    spec.r_f = r.number("r_f", spec.r_f);
    r.finish();
    try {
        validate(spec);
    } catch (const DomainError& e) {
        throw ConfigError(r.field(first_word(e.what())), e.what());
    }
    return spec;
}

SimConfig sim_from_json(const json& j, const std::string& path) {
    Reader r(j, path);
    SimConfig c;
    c.n = r.unsigned_int("n", c.n);
    c.M = r.unsigned_int("M", c.M);
    c.M_b = r.unsigned_int("M_b", c.M_b);
    c.seed = r.unsigned_int("seed", c.seed);
    if (r.has("conv_method")) {
        try {
            c.conv_method = conv_method_from_string(r.string("conv_method"));
        } catch (const DomainError& e) {
            throw ConfigError(r.field("conv_method"), e.what());
        }
    }
    if (r.has("trunc_tol")) c.trunc_tol = r.number("trunc_tol");
    c.fft_threshold = r.unsigned_int("fft_threshold", c.fft_threshold);
    r.finish();
    return c;
}

RunConfig run_config_from_json(const json& j) {
    Reader r(j, "");
    RunConfig c;
    c.model = model_from_json(r.at("model"), "model");
    if (r.has("sim")) c.sim = sim_from_json(r.at("sim"), "sim");
    c.mc = r.has("mc") ? mc_from_json(r.at("mc"), c.model, c.sim)
                       : mc_from_json(json::object(), c.model, c.sim);
    r.finish();
    resolve(c.model, c.sim, c.sim.n);
    return c;
}

json to_json(const RunConfig& config) {
    return {{"model", to_json(config.model)},
            {"sim", to_json(config.sim)},
            {"mc", to_json(config.mc)}};
}

void apply_override(json& j, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError(assignment, "override must look like key.path=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    std::string last;
    json* parent = walk(j, key, last);
    if (!parent->is_object()) throw ConfigError(key, "path crosses a non-object");
    (*parent)[last] = std::move(value);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config", "'" + path + "' is not valid JSON");
    return j;
}

}  // namespace lmsv
