#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qelogit/mc.hpp"

using namespace qelogit;

namespace {

DesignSpec tiny_design(int reps = 8) {
    DesignSpec s;
    s.family = DesignFamily::Benchmark;
    s.n = 120;
    s.T = 3;
    s.gamma = 0.5;
    s.beta = 1.0;
    s.seed = 314159;
    s.replications = reps;
    return s;
}

}  // namespace

TEST_CASE("a design without replications is rejected") {
    DesignSpec s = tiny_design(0);
    CHECK_THROWS_AS(run_design(s, {EstimatorKind::Basic}, 1), DataError);
    CHECK_THROWS_AS(run_design(tiny_design(), {}, 1), DataError);
}

TEST_CASE("run_design emits one row per estimator and parameter") {
    const RunOutput run = run_design(tiny_design(), {EstimatorKind::Basic, EstimatorKind::Improved}, 2);
    REQUIRE(run.rows.size() == 4);
    CHECK(run.rows[0].estimator == EstimatorKind::Basic);
    CHECK(run.rows[0].parameter == "x1");
    CHECK(run.rows[1].parameter == "gamma");
    CHECK(run.rows[2].estimator == EstimatorKind::Improved);
    for (const MetricRow& r : run.rows) {
        CHECK(r.replications_used + r.failures == 8);
        CHECK(r.rmse >= std::fabs(r.mean_bias));
        CHECK(r.mae >= 0.0);
        CHECK(r.coverage95 >= 0.0);
        CHECK(r.coverage95 <= 1.0);
        CHECK(r.actual_ratio > 0.0);
        CHECK(r.actual_ratio < 1.0);
    }
    CHECK(run.records.size() == 16);
}

TEST_CASE("aggregates recomputed from the persisted record log match exactly") {
    const DesignSpec spec = tiny_design(10);
    const RunOutput run = run_design(spec, {EstimatorKind::Basic, EstimatorKind::Improved}, 2);

    std::stringstream buf;
    write_records_csv(run.records, buf);
    const std::vector<RepRecord> back = read_records_csv(buf);
    REQUIRE(back.size() == run.records.size());
    const std::vector<MetricRow> again = aggregate(spec, back);

    REQUIRE(again.size() == run.rows.size());
    for (std::size_t i = 0; i < again.size(); ++i) {
        CHECK(again[i].parameter == run.rows[i].parameter);
        CHECK(again[i].mean_bias == run.rows[i].mean_bias);
        CHECK(again[i].rmse == run.rows[i].rmse);
        CHECK(again[i].median_bias == run.rows[i].median_bias);
        CHECK(again[i].mae == run.rows[i].mae);
        CHECK(again[i].coverage95 == run.rows[i].coverage95);
        CHECK(again[i].coverage80 == run.rows[i].coverage80);
        CHECK(again[i].actual_ratio == run.rows[i].actual_ratio);
        CHECK(again[i].failures == run.rows[i].failures);
    }
}

TEST_CASE("metric rows survive a csv round trip") {
    const RunOutput run = run_design(tiny_design(6), {EstimatorKind::Basic}, 1);
    std::stringstream buf;
    write_metrics_csv(run.rows, buf);
    const std::vector<MetricRow> back = read_metrics_csv(buf);
    REQUIRE(back.size() == run.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].estimator == run.rows[i].estimator);
        CHECK(back[i].parameter == run.rows[i].parameter);
        CHECK(back[i].mean_bias == run.rows[i].mean_bias);
        CHECK(back[i].rmse == run.rows[i].rmse);
        CHECK(back[i].mae == run.rows[i].mae);
        CHECK(back[i].seed == run.rows[i].seed);
    }
}

TEST_CASE("rmse decomposes into bias and variance") {
    const RunOutput run = run_design(tiny_design(16), {EstimatorKind::Basic}, 2);
    for (const MetricRow& row : run.rows) {
        std::vector<double> est;
        for (const RepRecord& r : run.records) {
            if (!r.ok) continue;
            for (const ParamRec& p : r.params)
                if (p.name == row.parameter) est.push_back(p.estimate);
        }
        double mean = 0.0;
        for (double e : est) mean += e;
        mean /= static_cast<double>(est.size());
        double var = 0.0;
        for (double e : est) var += (e - mean) * (e - mean);
        var /= static_cast<double>(est.size());
        CHECK(std::fabs(row.rmse * row.rmse - (row.mean_bias * row.mean_bias + var)) < 1e-10);
    }
}

TEST_CASE("identical seeds give identical aggregates for any worker count") {
    const DesignSpec spec = tiny_design(12);
    std::string csv1, csv2, csv4;
    for (int threads : {1, 2, 4}) {
        const RunOutput run = run_design(spec, {EstimatorKind::Basic, EstimatorKind::Improved}, threads);
        std::stringstream buf;
        write_metrics_csv(run.rows, buf);
        (threads == 1 ? csv1 : threads == 2 ? csv2 : csv4) = buf.str();
    }
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv4);
}

TEST_CASE("estimator names round trip") {
    for (EstimatorKind e : {EstimatorKind::Basic, EstimatorKind::Improved, EstimatorKind::Hk,
                            EstimatorKind::TwoLag})
        CHECK(estimator_from_name(estimator_name(e)) == e);
    CHECK_THROWS_AS((void)estimator_from_name("bogus"), DataError);
}

TEST_CASE("comparing an estimator with itself reports zero reductions") {
    const RunOutput run = run_design(tiny_design(6), {EstimatorKind::Basic}, 1);
    const std::vector<CompareRow> rows = compare_estimators(run.rows, run.rows);
    REQUIRE(rows.size() == 2);
    for (const CompareRow& r : rows) {
        CHECK(r.median_bias_reduction == doctest::Approx(0.0));
        CHECK(r.mae_reduction == doctest::Approx(0.0));
    }
}

TEST_CASE("comparisons recompute from the row fields") {
    const RunOutput a = run_design(tiny_design(8), {EstimatorKind::Basic}, 2);
    const RunOutput b = run_design(tiny_design(8), {EstimatorKind::Improved}, 2);
    const std::vector<CompareRow> rows = compare_estimators(a.rows, b.rows);
    REQUIRE(rows.size() == 2);
    for (const CompareRow& r : rows) {
        const MetricRow* left = nullptr;
        const MetricRow* right = nullptr;
        for (const MetricRow& m : a.rows)
            if (m.parameter == r.parameter) left = &m;
        for (const MetricRow& m : b.rows)
            if (m.parameter == r.parameter) right = &m;
        REQUIRE(left);
        REQUIRE(right);
        CHECK(r.mae_reduction == doctest::Approx(1.0 - right->mae / left->mae));
        CHECK(r.median_bias_reduction ==
              doctest::Approx(1.0 - std::fabs(right->median_bias) / std::fabs(left->median_bias)));
    }
}

TEST_CASE("comparing different designs is refused") {
    const RunOutput a = run_design(tiny_design(4), {EstimatorKind::Basic}, 1);
    DesignSpec other = tiny_design(4);
    other.n = 121;
    const RunOutput b = run_design(other, {EstimatorKind::Improved}, 1);
    CHECK_THROWS_AS((void)compare_estimators(a.rows, b.rows), DataError);
}

TEST_CASE("refined-estimator rmse shrinks as the panel grows") {
    double prev = HUGE_VAL;
    for (int n : {250, 1000, 4000}) {
        DesignSpec s = tiny_design(80);
        s.n = n;
        s.seed = 2718;
        const RunOutput run = run_design(s, {EstimatorKind::Improved}, 2);
        for (const MetricRow& r : run.rows)
            if (r.parameter == "x1") {
                CHECK(r.rmse < prev);
                prev = r.rmse;
            }
    }
}

TEST_CASE("text table renders every row") {
    const RunOutput run = run_design(tiny_design(4), {EstimatorKind::Basic}, 1);
    std::stringstream buf;
    write_text_table(run.rows, buf);
    const std::string text = buf.str();
    CHECK(text.find("basic") != std::string::npos);
    CHECK(text.find("gamma") != std::string::npos);
    CHECK(text.find("design benchmark") != std::string::npos);
}
