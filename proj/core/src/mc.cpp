#include "qelogit/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "qelogit/estimators.hpp"
#include "qelogit/hk.hpp"
#include "qelogit/io.hpp"
#include "qelogit/parallel.hpp"
#include "qelogit/stats.hpp"

namespace qelogit {

namespace {

std::vector<double> true_values_for(const DesignSpec& spec, EstimatorKind est,
                                    std::vector<std::string>& names_out) {
    const Theta th = true_theta(spec);
    std::vector<double> truth = th.beta;
    names_out.clear();
    for (std::size_t j = 0; j < th.beta.size(); ++j)
        names_out.push_back("x" + std::to_string(j + 1));
    truth.push_back(th.gamma);
    names_out.push_back("gamma");
    if (est == EstimatorKind::TwoLag) {
        truth.push_back(0.0);  // the generating process has one lag
        names_out.push_back("gamma2");
    }
    return truth;
}

RepRecord fit_one(const DesignSpec& spec, EstimatorKind est, const PanelDataset& ds, int rep) {
    RepRecord rec;
    rec.rep = rep;
    rec.estimator = est;

    std::vector<std::string> names;
    const std::vector<double> truth = true_values_for(spec, est, names);
    const double z95 = normal_quantile(0.975);
    const double z80 = normal_quantile(0.90);

    try {
        FitResult fit;
        switch (est) {
            case EstimatorKind::Basic: fit = fit_basic(ds); break;
            case EstimatorKind::Improved: fit = fit_improved(ds); break;
            case EstimatorKind::Hk: fit = fit_hk(ds); break;
            case EstimatorKind::TwoLag: fit = fit_two_lag(with_lag2_initials(ds)); break;
        }
        rec.ok = true;
        rec.actual_n = fit.actual_n;
        rec.nominal_terms = fit.nominal_terms;
        const std::vector<double> est_vec = fit.theta_hat.to_vector();
        rec.params.resize(est_vec.size());
        for (std::size_t j = 0; j < est_vec.size(); ++j) {
            ParamRec& p = rec.params[j];
            p.name = names[j];
            p.estimate = est_vec[j];
            p.se = fit.se[j];
            p.covered95 = std::fabs(est_vec[j] - truth[j]) <= z95 * fit.se[j];
            p.covered80 = std::fabs(est_vec[j] - truth[j]) <= z80 * fit.se[j];
        }
    } catch (const ConvergenceError& e) {
        rec.ok = false;
        rec.error = e.what();
    } catch (const IdentificationError& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

std::string csv_escape(const std::string& s) {
    std::string out = s;
    for (char& ch : out)
        if (ch == ',' || ch == '\n') ch = ';';
    return out;
}

}  // namespace

std::string estimator_name(EstimatorKind e) {
    switch (e) {
        case EstimatorKind::Basic: return "basic";
        case EstimatorKind::Improved: return "improved";
        case EstimatorKind::Hk: return "hk";
        case EstimatorKind::TwoLag: return "two-lag";
    }
    return "unknown";
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "basic") return EstimatorKind::Basic;
    if (name == "improved") return EstimatorKind::Improved;
    if (name == "hk") return EstimatorKind::Hk;
    if (name == "two-lag" || name == "two_lag") return EstimatorKind::TwoLag;
    throw DataError("unknown estimator: " + name);
}

RunOutput run_design(const DesignSpec& spec, const std::vector<EstimatorKind>& estimators,
                     int threads) {
    validate(spec);
    if (estimators.empty()) throw DataError("no estimators requested");

    const std::size_t reps = static_cast<std::size_t>(spec.replications);
    const std::size_t per_rep = estimators.size();
    RunOutput out;
    out.records.resize(reps * per_rep);

    parallel_for(reps, threads, [&](std::size_t r) {
        const PanelDataset ds = generate(spec, static_cast<int>(r));
        for (std::size_t e = 0; e < per_rep; ++e)
            out.records[r * per_rep + e] = fit_one(spec, estimators[e], ds, static_cast<int>(r));
    });

    out.rows = aggregate(spec, out.records);
    return out;
}

std::vector<MetricRow> aggregate(const DesignSpec& spec, const std::vector<RepRecord>& records) {
    // Stable estimator order: first appearance in the record stream.
    std::vector<EstimatorKind> order;
    for (const RepRecord& r : records)
        if (std::find(order.begin(), order.end(), r.estimator) == order.end())
            order.push_back(r.estimator);

    std::vector<MetricRow> rows;
    for (EstimatorKind est : order) {
        std::vector<std::string> names;
        const std::vector<double> truth = true_values_for(spec, est, names);

        int used = 0, failures = 0;
        double ratio_sum = 0.0;
        std::vector<std::vector<double>> diffs(names.size());
        std::vector<int> cov95(names.size(), 0), cov80(names.size(), 0);

        for (const RepRecord& r : records) {
            if (r.estimator != est) continue;
            if (!r.ok) {
                ++failures;
                continue;
            }
            ++used;
            ratio_sum += r.nominal_terms > 0
                             ? static_cast<double>(r.actual_n) / static_cast<double>(r.nominal_terms)
                             : 0.0;
            for (std::size_t j = 0; j < names.size(); ++j) {
                diffs[j].push_back(r.params[j].estimate - truth[j]);
                cov95[j] += r.params[j].covered95 ? 1 : 0;
                cov80[j] += r.params[j].covered80 ? 1 : 0;
            }
        }

        for (std::size_t j = 0; j < names.size(); ++j) {
            MetricRow row;
            row.family = family_name(spec.family);
            row.n = spec.n;
            row.T = spec.T;
            row.gamma = spec.gamma;
            row.beta = spec.beta;
            row.seed = spec.seed;
            row.replications_requested = spec.replications;
            row.estimator = est;
            row.parameter = names[j];
            row.true_value = truth[j];
            row.replications_used = used;
            row.failures = failures;
            row.flagged = failures > 0.05 * static_cast<double>(used + failures);
            if (used > 0) {
                double sum = 0.0, sumsq = 0.0;
                std::vector<double> abs_diffs(diffs[j].size());
                for (std::size_t i = 0; i < diffs[j].size(); ++i) {
                    sum += diffs[j][i];
                    sumsq += diffs[j][i] * diffs[j][i];
                    abs_diffs[i] = std::fabs(diffs[j][i]);
                }
                row.mean_bias = sum / used;
                row.rmse = std::sqrt(sumsq / used);
                row.median_bias = median(diffs[j]);
                row.mae = median(abs_diffs);
                row.coverage95 = static_cast<double>(cov95[j]) / used;
                row.coverage80 = static_cast<double>(cov80[j]) / used;
                row.actual_ratio = ratio_sum / used;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out) {
    out << "family,n,T,gamma,beta,seed,replications,estimator,parameter,true_value,"
           "mean_bias,rmse,median_bias,mae,coverage95,coverage80,actual_ratio,"
           "used,failures,flagged\n";
    for (const MetricRow& r : rows) {
        out << r.family << ',' << r.n << ',' << r.T << ',' << format_double(r.gamma) << ','
            << format_double(r.beta) << ',' << r.seed << ',' << r.replications_requested << ','
            << estimator_name(r.estimator) << ',' << r.parameter << ','
            << format_double(r.true_value) << ',' << format_double(r.mean_bias) << ','
            << format_double(r.rmse) << ',' << format_double(r.median_bias) << ','
            << format_double(r.mae) << ',' << format_double(r.coverage95) << ','
            << format_double(r.coverage80) << ',' << format_double(r.actual_ratio) << ','
            << r.replications_used << ',' << r.failures << ',' << (r.flagged ? 1 : 0) << '\n';
    }
}

std::vector<MetricRow> read_metrics_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("metrics csv: empty input");
    std::vector<MetricRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (fields.size() != 20) throw DataError("metrics csv: malformed row: " + line);
        MetricRow r;
        r.family = fields[0];
        r.n = std::stoi(fields[1]);
        r.T = std::stoi(fields[2]);
        r.gamma = std::stod(fields[3]);
        r.beta = std::stod(fields[4]);
        r.seed = std::stoull(fields[5]);
        r.replications_requested = std::stoi(fields[6]);
        r.estimator = estimator_from_name(fields[7]);
        r.parameter = fields[8];
        r.true_value = std::stod(fields[9]);
        r.mean_bias = std::stod(fields[10]);
        r.rmse = std::stod(fields[11]);
        r.median_bias = std::stod(fields[12]);
        r.mae = std::stod(fields[13]);
        r.coverage95 = std::stod(fields[14]);
        r.coverage80 = std::stod(fields[15]);
        r.actual_ratio = std::stod(fields[16]);
        r.replications_used = std::stoi(fields[17]);
        r.failures = std::stoi(fields[18]);
        r.flagged = fields[19] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_records_csv(const std::vector<RepRecord>& records, std::ostream& out) {
    out << "rep,estimator,converged,actual_n,nominal_terms,parameter,estimate,se,"
           "covered95,covered80,error\n";
    for (const RepRecord& r : records) {
        if (!r.ok) {
            out << r.rep << ',' << estimator_name(r.estimator) << ",0," << r.actual_n << ','
                << r.nominal_terms << ",,,,,," << csv_escape(r.error) << '\n';
            continue;
        }
        for (const ParamRec& p : r.params) {
            out << r.rep << ',' << estimator_name(r.estimator) << ",1," << r.actual_n << ','
                << r.nominal_terms << ',' << p.name << ',' << format_double(p.estimate) << ','
                << format_double(p.se) << ',' << (p.covered95 ? 1 : 0) << ','
                << (p.covered80 ? 1 : 0) << ",\n";
        }
    }
}

std::vector<RepRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("records csv: empty input");
    std::vector<RepRecord> records;
    auto current_key = std::pair<int, std::string>{-1, ""};
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f;
        std::vector<std::string> fields;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        fields.resize(11);
        const int rep = std::stoi(fields[0]);
        const std::string est = fields[1];
        if (records.empty() || current_key != std::make_pair(rep, est)) {
            RepRecord r;
            r.rep = rep;
            r.estimator = estimator_from_name(est);
            r.ok = fields[2] == "1";
            r.actual_n = static_cast<std::size_t>(std::stoull(fields[3]));
            r.nominal_terms = static_cast<std::size_t>(std::stoull(fields[4]));
            r.error = fields[10];
            records.push_back(std::move(r));
            current_key = {rep, est};
        }
        if (fields[2] == "1") {
            ParamRec p;
            p.name = fields[5];
            p.estimate = std::stod(fields[6]);
            p.se = std::stod(fields[7]);
            p.covered95 = fields[8] == "1";
            p.covered80 = fields[9] == "1";
            records.back().params.push_back(std::move(p));
        }
    }
    return records;
}

void write_text_table(const std::vector<MetricRow>& rows, std::ostream& out) {
    if (rows.empty()) {
        out << "(no rows)\n";
        return;
    }
    const MetricRow& head = rows.front();
    char buf[256];
    std::snprintf(buf, sizeof(buf), "design %s: n=%d T=%d gamma=%g beta=%g seed=%llu reps=%d\n",
                  head.family.c_str(), head.n, head.T, head.gamma, head.beta,
                  static_cast<unsigned long long>(head.seed), head.replications_requested);
    out << buf;
    std::snprintf(buf, sizeof(buf), "%-10s %-8s %10s %10s %10s %10s %7s %7s %8s %6s %5s\n",
                  "estimator", "param", "mean.bias", "rmse", "med.bias", "mae", "cov95",
                  "cov80", "actual", "used", "fail");
    out << buf;
    for (const MetricRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-10s %-8s %10.4f %10.4f %10.4f %10.4f %7.3f %7.3f %7.1f%% %6d %4d%s\n",
                      estimator_name(r.estimator).c_str(), r.parameter.c_str(), r.mean_bias,
                      r.rmse, r.median_bias, r.mae, r.coverage95, r.coverage80,
                      100.0 * r.actual_ratio, r.replications_used, r.failures,
                      r.flagged ? " !" : "");
        out << buf;
    }
}

std::vector<CompareRow> compare_estimators(const std::vector<MetricRow>& left,
                                           const std::vector<MetricRow>& right) {
    if (left.empty() || right.empty()) throw DataError("compare: empty metric rows");
    auto same_design = [](const MetricRow& a, const MetricRow& b) {
        return a.family == b.family && a.n == b.n && a.T == b.T && a.gamma == b.gamma &&
               a.beta == b.beta;
    };
    for (const MetricRow& l : left)
        for (const MetricRow& r : right)
            if (!same_design(l, r))
                throw DataError("compare: designs do not match (" + l.family + " n=" +
                                std::to_string(l.n) + " vs " + r.family + " n=" +
                                std::to_string(r.n) + ")");

    auto reduction = [](double from, double to) {
        if (std::fabs(from) < 1e-300) return std::fabs(to) < 1e-300 ? 0.0 : std::nan("");
        return 1.0 - to / from;
    };

    std::vector<CompareRow> out;
    for (const MetricRow& l : left) {
        const auto match = std::find_if(right.begin(), right.end(), [&](const MetricRow& r) {
            return r.parameter == l.parameter;
        });
        if (match == right.end()) continue;
        CompareRow c;
        c.parameter = l.parameter;
        c.left_estimator = estimator_name(l.estimator);
        c.right_estimator = estimator_name(match->estimator);
        c.left_median_bias = l.median_bias;
        c.right_median_bias = match->median_bias;
        c.median_bias_reduction = reduction(std::fabs(l.median_bias), std::fabs(match->median_bias));
        c.left_mae = l.mae;
        c.right_mae = match->mae;
        c.mae_reduction = reduction(l.mae, match->mae);
        out.push_back(std::move(c));
    }
    if (out.empty()) throw DataError("compare: no common parameters");
    return out;
}

void write_compare_table(const std::vector<CompareRow>& rows, std::ostream& out) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-8s %-10s %-10s %12s %12s %10s %10s %10s %10s\n", "param",
                  "from", "to", "med.bias.l", "med.bias.r", "bias.red", "mae.l", "mae.r",
                  "mae.red");
    out << buf;
    for (const CompareRow& r : rows) {
        std::snprintf(buf, sizeof(buf),
                      "%-8s %-10s %-10s %12.4f %12.4f %9.1f%% %10.4f %10.4f %9.1f%%\n",
                      r.parameter.c_str(), r.left_estimator.c_str(), r.right_estimator.c_str(),
                      r.left_median_bias, r.right_median_bias, 100.0 * r.median_bias_reduction,
                      r.left_mae, r.right_mae, 100.0 * r.mae_reduction);
        out << buf;
    }
}

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
    out << "parameter,from,to,left_median_bias,right_median_bias,median_bias_reduction,"
           "left_mae,right_mae,mae_reduction\n";
    for (const CompareRow& r : rows) {
        out << r.parameter << ',' << r.left_estimator << ',' << r.right_estimator << ','
            << format_double(r.left_median_bias) << ',' << format_double(r.right_median_bias)
            << ',' << format_double(r.median_bias_reduction) << ',' << format_double(r.left_mae)
            << ',' << format_double(r.right_mae) << ',' << format_double(r.mae_reduction) << '\n';
    }
}

}  // namespace qelogit
