#include "lmsv/cli.hpp"

#include "lmsv/config_io.hpp"
#include "lmsv/errors.hpp"
#include "lmsv/estimators.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace lmsv {

namespace {

const std::vector<std::string> kCommands = {"constants",    "simulate",    "estimate",
                                            "mc-rate",      "mc-normality", "mc-variance",
                                            "mc-mean-share"};

struct Options {
    std::string command;
    std::string config_path;
    std::string out_path;
    std::string rows_path;
    std::vector<std::string> overrides;
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
};

json header(const std::string& command, const RunConfig& config) {
    return {{"tool_version", std::string(kToolVersion)},
            {"command", command},
            {"config", to_json(config)}};
}

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw ConfigError("out", "cannot write '" + path + "'");
        }
        os_ = path.empty() ? &fallback : &file_;
    }
    std::ostream& stream() { return *os_; }

private:
    std::ofstream file_;
    std::ostream* os_;
};

void write_json(const json& j, const std::string& path, std::ostream& out) {
    Sink sink(path, out);
    sink.stream() << j.dump(2) << '\n';
}

void write_rows(const McReport& report, const std::string& path, const json& head) {
    if (path.empty()) return;
    Sink sink(path, std::cout);
    sink.stream() << "# " << kToolVersion << '\n' << "# config " << head["config"].dump() << '\n';
    write_rows_csv(sink.stream(), report);
}

json summaries_json(const McReport& report) {
    json s = json::array();
    for (const auto& x : report.summaries) s.push_back(to_json(x));
    return s;
}

json constants_snapshot(const McConfig& mc) {
    const auto sc = resolve_for_grid(mc);
    try {
        return to_json(compute_constants(mc.spec, {sc.M, sc.M_b}));
    } catch (const NoClosedFormError& e) {
        return json{{"unavailable", e.what()}};
    }
}

int dispatch(const Options& opt, std::ostream& out) {
    json raw = load_json_file(opt.config_path);
    for (const auto& o : opt.overrides) apply_override(raw, o);
    if (opt.seed) {
        raw["sim"]["seed"] = *opt.seed;
        raw["mc"]["master_seed"] = *opt.seed;
    }
    if (opt.workers) raw["mc"]["workers"] = *opt.workers;
    const RunConfig config = run_config_from_json(raw);
    json doc = header(opt.command, config);

    if (opt.command == "constants") {
        doc["constants"] = to_json(compute_constants(config.model));
        write_json(doc, opt.out_path, out);
        return kExitOk;
    }

    if (opt.command == "simulate" || opt.command == "estimate") {
        const SimConfig sim = resolve(config.model, config.sim, config.sim.n);
        const SamplePath path = PathSimulator(config.model, sim).simulate(sim.seed);
        if (opt.command == "simulate") {
            Sink sink(opt.out_path, out);
            auto& os = sink.stream();
            os << "# " << kToolVersion << '\n' << "# config " << doc["config"].dump() << '\n';
            os << "t,x,v,r,y\n";
            os.precision(17);
            const auto x = path.x_in(), v = path.v_in(), r = path.r_in();
            for (std::size_t t = 0; t < path.n; ++t) {
                os << t + 1 << ',' << x[t] << ',' << v[t] << ',' << r[t] << ',' << path.y[t]
                   << '\n';
            }
            return kExitOk;
        }
        const auto est = sharpe_hat(path.y, config.model.r_f);
        json e = {{"n", est.n},
                  {"mu_hat", est.mu_hat},
                  {"sigma2_hat", est.sigma2_hat},
                  {"sr_hat", est.sr_hat},
                  {"spec_digest", path.spec_digest},
                  {"M", sim.M},
                  {"M_b", sim.M_b}};
        const Truncation trunc{sim.M, sim.M_b};
        if (config.model.z_law == InnovationLaw::StandardNormal) {
            const double sr = true_sharpe(config.model, trunc);
            e["true_sr"] = sr;
            e["sr_error"] = est.sr_hat - sr;
            const auto d = decompose_var_error(path, config.model);
            e["var_error_decomposition"] = {{"martingale_term", d.martingale_term},
                                            {"longmem_term", d.longmem_term},
                                            {"mean_sq_term", d.mean_sq_term}};
            const auto vd = v_decomposition(path, config.model);
            e["v_decomposition"] = {{"v1", vd.v1}, {"v2", vd.v2}, {"v3", vd.v3}};
            if (is_long_memory(config.model.a)) {
                e["linearization_gap"] = linearization_gap(path, config.model);
                e["linearized_term"] = linearized_term(path, config.model);
            }
        }
        doc["estimate"] = e;
        write_json(doc, opt.out_path, out);
        return kExitOk;
    }

    const McConfig& mc = config.mc;
    doc["constants"] = constants_snapshot(mc);
    if (opt.command == "mc-normality") {
        const std::size_t n = mc.normality_n.value_or(mc.n_grid.back());
        const auto report = run_experiment_at(mc, n, mc.normality_replications, opt.command);
        std::vector<double> errors;
        for (const auto& r : report.rows) {
            if (!r.flagged) errors.push_back(r.sr_error);
        }
        auto rec = normality_check(errors);
        rec.n = n;
        doc["summaries"] = summaries_json(report);
        doc["normality"] = to_json(rec);
        write_rows(report, opt.rows_path, doc);
        write_json(doc, opt.out_path, out);
        return kExitOk;
    }

    const auto report = run_experiment(mc, opt.command);
    doc["summaries"] = summaries_json(report);
    doc["flagged"] = report.flagged;
    if (opt.command == "mc-rate") {
        doc["rate"] = to_json(estimate_rate(report.summaries, rate_exponent(mc.spec)));
    } else if (opt.command == "mc-variance") {
        const auto sc = resolve_for_grid(mc);
        doc["variance_match"] = to_json(variance_match(report.rows, mc.spec, {sc.M, sc.M_b}));
    } else {
        doc["mean_share"] = mean_contribution(report.summaries);
        doc["long_memory"] = is_long_memory(mc.spec.a);
    }
    write_rows(report, opt.rows_path, doc);
    write_json(doc, opt.out_path, out);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sharpe ratio inference under long-memory stochastic volatility", "lmsv_cli"};
    Options opt;
    app.add_option("command", opt.command, "Subcommand")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app.add_option("--config", opt.config_path, "JSON config file")->required();
    app.add_option("--out", opt.out_path, "Output file (default stdout)");
    app.add_option("--rows", opt.rows_path, "Per-replication CSV for mc-* commands");
    app.add_option("--set", opt.overrides, "Override, e.g. model.a.beta=0.6 (repeatable)");
    app.add_option("--workers", opt.workers, "Monte Carlo worker threads");
    app.add_option("--seed", opt.seed, "Seed for sim.seed and mc.master_seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    try {
        return dispatch(opt, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ConsistencyError& e) {
        err << "consistency error: " << e.what() << '\n';
        return kExitConsistency;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NoClosedFormError& e) {
        err << "not computable: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NotApplicableError& e) {
        err << "not applicable: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace lmsv
