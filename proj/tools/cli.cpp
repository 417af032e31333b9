#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "qelogit/dgp.hpp"
#include "qelogit/estimators.hpp"
#include "qelogit/hk.hpp"
#include "qelogit/io.hpp"
#include "qelogit/mc.hpp"

namespace qelogit::cli {

namespace {

struct GlobalOpts {
    std::optional<std::uint64_t> seed;
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    std::string output;
    std::string format = "table";
};

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<EstimatorKind> parse_estimator_list(const std::string& text) {
    std::vector<EstimatorKind> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(estimator_from_name(tok));
    }
    if (out.empty()) throw DataError("no estimators requested");
    return out;
}

void write_to(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << content;
}

std::string fit_as_csv(const FitResult& fit, const std::vector<ConfInterval>& cis) {
    std::ostringstream out;
    out << "parameter,estimate,se,ci_lower,ci_upper\n";
    const std::vector<double> est = fit.theta_hat.to_vector();
    for (std::size_t j = 0; j < est.size(); ++j) {
        out << fit.param_names[j] << ',' << format_double(est[j]) << ','
            << format_double(fit.se[j]) << ',' << format_double(cis[j].lower) << ','
            << format_double(cis[j].upper) << '\n';
    }
    return out.str();
}

std::string fit_as_table(const FitResult& fit, const std::vector<ConfInterval>& cis,
                         double level) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %12s %10s %22s\n", "parameter", "estimate", "se",
                  (std::to_string(static_cast<int>(level * 100)) + "% interval").c_str());
    out << buf;
    const std::vector<double> est = fit.theta_hat.to_vector();
    for (std::size_t j = 0; j < est.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "%-10s %12.6f %10.6f   [%9.6f, %9.6f]\n",
                      fit.param_names[j].c_str(), est[j], fit.se[j], cis[j].lower, cis[j].upper);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "loglik %.6f after %d iteration(s); informative %zu of %zu\n", fit.loglik,
                  fit.iterations, fit.actual_n, fit.nominal_terms);
    out << buf;
    return out.str();
}

int cmd_fit(const GlobalOpts& global, const std::string& data_path,
            const std::string& estimator, double level, const std::string& fixed_beta_bar,
            const std::string& hk_kernel, std::optional<double> hk_c, bool hk_strict) {
    const PanelDataset ds = ingest_csv(data_path);

    FitResult fit;
    if (estimator == "basic") {
        fit = fit_basic(ds);
    } else if (estimator == "improved") {
        if (!fixed_beta_bar.empty()) {
            std::vector<double> bb = parse_number_list(fixed_beta_bar);
            if (bb.size() == 1 && ds.k > 1) bb.assign(static_cast<std::size_t>(ds.k), bb[0]);
            fit = fit_improved(ds, ImprovedMode::fixed(std::move(bb)));
        } else {
            fit = fit_improved(ds);
        }
    } else if (estimator == "hk") {
        KernelSpec kernel;
        if (hk_kernel == "uniform") kernel.kernel = HkKernelShape::UniformWindow;
        kernel.c = hk_c;
        kernel.strict_interior_pairs = hk_strict;
        fit = fit_hk(ds, kernel);
    } else if (estimator == "two-lag") {
        fit = fit_two_lag(ds);
    } else {
        throw DataError("unknown estimator: " + estimator);
    }

    const std::vector<ConfInterval> cis = confidence_interval(fit, level);
    if (global.format == "json") {
        write_to(global.output, fit_result_to_json(fit, &cis, level) + "\n");
    } else if (global.format == "csv") {
        write_to(global.output, fit_as_csv(fit, cis));
    } else {
        write_to(global.output, fit_as_table(fit, cis, level));
    }
    return 0;
}

int cmd_simulate(const GlobalOpts& global, const std::string& design_path, int rep,
                 const std::string& out_path) {
    DesignSpec spec = design_from_json_file(design_path);
    if (global.seed) spec.seed = *global.seed;
    const PanelDataset ds = generate(spec, rep);
    export_csv(ds, out_path);

    std::size_t informative = 0;
    for (const PanelUnit& u : ds.units) informative += u.informative() ? 1 : 0;
    std::printf("wrote %s: n=%zu T=%d k=%d, informative fraction %.4f\n", out_path.c_str(),
                ds.n(), ds.T, ds.k, static_cast<double>(informative) / static_cast<double>(ds.n()));
    return 0;
}

int cmd_replicate(const GlobalOpts& global, const std::string& design_path,
                  const std::string& estimators, int reps_override,
                  const std::string& per_rep_path) {
    DesignSpec spec = design_from_json_file(design_path);
    if (global.seed) spec.seed = *global.seed;
    if (reps_override > 0) spec.replications = reps_override;
    const std::vector<EstimatorKind> ests = parse_estimator_list(estimators);

    const RunOutput run = run_design(spec, ests, global.threads);

    if (!global.output.empty()) {
        std::ofstream agg(global.output);
        if (!agg) throw DataError("cannot open " + global.output + " for writing");
        write_metrics_csv(run.rows, agg);
        const std::string reps_path =
            per_rep_path.empty() ? global.output + ".reps.csv" : per_rep_path;
        std::ofstream reps(reps_path);
        if (!reps) throw DataError("cannot open " + reps_path + " for writing");
        write_records_csv(run.records, reps);
    } else if (!per_rep_path.empty()) {
        std::ofstream reps(per_rep_path);
        if (!reps) throw DataError("cannot open " + per_rep_path + " for writing");
        write_records_csv(run.records, reps);
    }

    std::ostringstream out;
    if (global.format == "csv") {
        write_metrics_csv(run.rows, out);
    } else {
        write_text_table(run.rows, out);
    }
    std::cout << out.str();
    return 0;
}

int cmd_compare(const GlobalOpts& global, const std::string& left_path,
                const std::string& right_path) {
    std::ifstream left_in(left_path), right_in(right_path);
    if (!left_in) throw DataError("cannot open " + left_path);
    if (!right_in) throw DataError("cannot open " + right_path);
    const std::vector<MetricRow> left = read_metrics_csv(left_in);
    const std::vector<MetricRow> right = read_metrics_csv(right_in);
    const std::vector<CompareRow> rows = compare_estimators(left, right);

    std::ostringstream out;
    if (global.format == "csv") {
        write_compare_csv(rows, out);
    } else {
        write_compare_table(rows, out);
    }
    write_to(global.output, out.str());
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Conditional estimation of dynamic binary panel logit models"};
    app.require_subcommand(1);

    GlobalOpts global;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Override the design seed");
    app.add_option("--threads", global.threads, "Worker threads for replications");
    app.add_option("--output", global.output, "Write primary output to this path");
    app.add_option("--format", global.format, "Output format")
        ->check(CLI::IsMember({"csv", "json", "table"}));

    auto* fit = app.add_subcommand("fit", "Fit one estimator on a panel CSV");
    std::string data_path, estimator, fixed_beta_bar, hk_kernel = "gaussian";
    double level = 0.95;
    double hk_c_value = 0.0;
    bool hk_strict = false;
    fit->add_option("--data", data_path, "Panel CSV (id,time,y,x...)")->required();
    fit->add_option("--estimator", estimator, "basic|improved|hk|two-lag")->required();
    fit->add_option("--level", level, "Confidence level");
    fit->add_option("--fixed-beta-bar", fixed_beta_bar,
                    "Hold the improved expansion point fixed at these values");
    fit->add_option("--hk-kernel", hk_kernel, "gaussian|uniform")
        ->check(CLI::IsMember({"gaussian", "uniform"}));
    auto* hk_c_opt = fit->add_option("--hk-c", hk_c_value, "Bandwidth constant override");
    fit->add_flag("--hk-strict-pairs", hk_strict, "Drop pairs touching the first occasion");

    auto* simulate = app.add_subcommand("simulate", "Generate one replication of a design");
    std::string design_path, out_path;
    int rep = 0;
    simulate->add_option("--design", design_path, "Design JSON")->required();
    simulate->add_option("--rep", rep, "Replication index");
    simulate->add_option("--out", out_path, "Output CSV path")->required();

    auto* replicate = app.add_subcommand("replicate", "Run a Monte-Carlo design");
    std::string rep_design, rep_estimators = "basic,improved", per_rep_path;
    int reps_override = 0;
    replicate->add_option("--design", rep_design, "Design JSON")->required();
    replicate->add_option("--estimators", rep_estimators, "Comma-separated estimator list");
    replicate->add_option("--reps", reps_override, "Override the replication count");
    replicate->add_option("--per-rep", per_rep_path, "Per-replication estimates CSV path");

    auto* compare = app.add_subcommand("compare", "Reductions between two metric CSVs");
    std::string left_path, right_path;
    compare->add_option("--left", left_path, "Metrics CSV of the reference estimator")->required();
    compare->add_option("--right", right_path, "Metrics CSV of the challenger")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (*seed_opt) global.seed = seed_value;

    try {
        if (app.got_subcommand(fit))
            return cmd_fit(global, data_path, estimator, level, fixed_beta_bar, hk_kernel,
                           (*hk_c_opt) ? std::optional<double>(hk_c_value) : std::nullopt,
                           hk_strict);
        if (app.got_subcommand(simulate)) return cmd_simulate(global, design_path, rep, out_path);
        if (app.got_subcommand(replicate))
            return cmd_replicate(global, rep_design, rep_estimators, reps_override, per_rep_path);
        if (app.got_subcommand(compare)) return cmd_compare(global, left_path, right_path);
        return 1;
    } catch (const IdentificationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace qelogit::cli
