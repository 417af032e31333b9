#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qelogit/dgp.hpp"
#include "qelogit/panel.hpp"

namespace qelogit {

enum class EstimatorKind { Basic, Improved, Hk, TwoLag };

std::string estimator_name(EstimatorKind e);
EstimatorKind estimator_from_name(const std::string& name);

// One fitted parameter from one replication.
struct ParamRec {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    bool covered95 = false;
    bool covered80 = false;
};

struct RepRecord {
    int rep = 0;
    EstimatorKind estimator = EstimatorKind::Basic;
    bool ok = false;
    std::string error;
    std::size_t actual_n = 0;
    std::size_t nominal_terms = 0;
    std::vector<ParamRec> params;
};

// Aggregated performance of one estimator on one parameter under a design.
struct MetricRow {
    std::string family;
    int n = 0;
    int T = 0;
    double gamma = 0.0;
    double beta = 0.0;
    std::uint64_t seed = 0;
    int replications_requested = 0;

    EstimatorKind estimator = EstimatorKind::Basic;
    std::string parameter;
    double true_value = 0.0;

    double mean_bias = 0.0;
    double rmse = 0.0;
    double median_bias = 0.0;
    double mae = 0.0;
    double coverage95 = 0.0;
    double coverage80 = 0.0;
    double actual_ratio = 0.0;
    int replications_used = 0;
    int failures = 0;
    bool flagged = false;  // more than 5% failed replications
};

struct RunOutput {
    std::vector<MetricRow> rows;
    std::vector<RepRecord> records;  // ordered by (rep, estimator)
};

// Generates `spec.replications` panels, fits every requested estimator on
// each, and aggregates. Deterministic in (spec, estimator list) for any
// thread count. Non-convergent replications are recorded and excluded.
RunOutput run_design(const DesignSpec& spec, const std::vector<EstimatorKind>& estimators,
                     int threads = 1);

// Re-aggregates per-replication records (the audit path).
std::vector<MetricRow> aggregate(const DesignSpec& spec,
                                 const std::vector<RepRecord>& records);

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out);
std::vector<MetricRow> read_metrics_csv(std::istream& in);

void write_records_csv(const std::vector<RepRecord>& records, std::ostream& out);
std::vector<RepRecord> read_records_csv(std::istream& in);

void write_text_table(const std::vector<MetricRow>& rows, std::ostream& out);

// Percentage reductions from the left estimator to the right one.
struct CompareRow {
    std::string parameter;
    std::string left_estimator;
    std::string right_estimator;
    double left_median_bias = 0.0;
    double right_median_bias = 0.0;
    double median_bias_reduction = 0.0;
    double left_mae = 0.0;
    double right_mae = 0.0;
    double mae_reduction = 0.0;
};

std::vector<CompareRow> compare_estimators(const std::vector<MetricRow>& left,
                                           const std::vector<MetricRow>& right);

void write_compare_table(const std::vector<CompareRow>& rows, std::ostream& out);
void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

}  // namespace qelogit
