#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qelogit/dgp.hpp"
#include "qelogit/estimators.hpp"
#include "qelogit/quadexp.hpp"

using namespace qelogit;

namespace {

constexpr double kTargetVar = std::numbers::pi * std::numbers::pi / 3.0;

DesignSpec spec_of(DesignFamily family, int n, int T, double gamma, std::uint64_t seed) {
    DesignSpec s;
    s.family = family;
    s.n = n;
    s.T = T;
    s.gamma = gamma;
    s.beta = 1.0;
    s.seed = seed;
    s.replications = 1;
    return s;
}

}  // namespace

TEST_CASE("benchmark covariates carry the logistic variance") {
    const PanelDataset ds = generate(spec_of(DesignFamily::Benchmark, 60000, 3, 0.5, 11), 0);
    double sum = 0.0, ssq = 0.0;
    std::size_t count = 0;
    for (const PanelUnit& u : ds.units) {
        for (int t = 0; t < 3; ++t) {
            sum += u.X(t, 0);
            ssq += u.X(t, 0) * u.X(t, 0);
            ++count;
        }
        sum += u.x0[0];
        ssq += u.x0[0] * u.x0[0];
        ++count;
    }
    const double mean = sum / count;
    const double var = ssq / count - mean * mean;
    CHECK(std::fabs(var - kTargetVar) < 0.01 * kTargetVar);
    CHECK(std::fabs(mean) < 0.02);
}

TEST_CASE("responses are fair coins when every parameter vanishes") {
    Rng rng = Rng::stream(3, 0, 0);
    Theta zero = Theta::zero(1);
    Matrix X(2, 1);
    double ones = 0.0;
    const int draws = 50000;
    for (int i = 0; i < draws; ++i) {
        const PanelUnit u = simulate_unit(0.0, X, 0, zero, rng);
        ones += u.y[0] + u.y[1];
    }
    CHECK(std::fabs(ones / (2.0 * draws) - 0.5) < 0.005);
}

TEST_CASE("a large individual effect saturates the response") {
    Rng rng = Rng::stream(4, 0, 0);
    Theta th;
    th.beta = {1.0};
    th.gamma = 0.5;
    Matrix X(3, 1);
    int ones = 0, total = 0;
    for (int i = 0; i < 2000; ++i) {
        const PanelUnit u = simulate_unit(10.0, X, 0, th, rng);
        for (int v : u.y) {
            ones += v;
            ++total;
        }
    }
    CHECK(static_cast<double>(ones) / total > 0.999);
}

TEST_CASE("path frequencies match the exact joint law") {
    Rng rng = Rng::stream(5, 0, 0);
    Theta th;
    th.beta = {1.0};
    th.gamma = 0.5;
    Matrix X(3, 1);  // all-zero covariates
    JointParams p;
    p.theta = th;
    PanelUnit probe;
    probe.y0 = 0;
    probe.y = {1, 1, 1};
    probe.X = X;
    const double exact = std::exp(joint_dynamic_logit_logprob(probe, p));

    const int draws = 100000;
    int hits = 0;
    for (int i = 0; i < draws; ++i) {
        const PanelUnit u = simulate_unit(0.0, X, 0, th, rng);
        hits += (u.y[0] == 1 && u.y[1] == 1 && u.y[2] == 1) ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / draws;
    const double se = std::sqrt(exact * (1.0 - exact) / draws);
    CHECK(std::fabs(freq - exact) < 3.0 * se);
}

TEST_CASE("chi-square covariates keep their asymmetry") {
    const PanelDataset ds = generate(spec_of(DesignFamily::Chi2Regressor, 20000, 3, 0.5, 12), 0);
    double sum = 0.0, ssq = 0.0, scub = 0.0;
    std::size_t count = 0;
    for (const PanelUnit& u : ds.units)
        for (int t = 0; t < 3; ++t) {
            const double x = u.X(t, 0);
            sum += x;
            ssq += x * x;
            scub += x * x * x;
            ++count;
        }
    const double mean = sum / count;
    const double var = ssq / count - mean * mean;
    const double skew = (scub / count - 3.0 * mean * var - mean * mean * mean) /
                        std::pow(var, 1.5);
    CHECK(skew > 1.0);
    CHECK(std::fabs(var - kTargetVar) < 0.1 * kTargetVar);
}

TEST_CASE("trending covariates follow an AR(1) with coefficient one half") {
    DesignSpec s = spec_of(DesignFamily::Trending, 150000, 7, 0.5, 13);
    const PanelDataset ds = generate(s, 0);
    // phi=1, psi=0: x_t - 0.1 t recovers the autoregressive part
    double sxy = 0.0, sxx = 0.0, syy = 0.0, sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (const PanelUnit& u : ds.units) {
        std::vector<double> zeta(8);
        zeta[0] = u.x0[0];
        for (int t = 1; t <= 7; ++t) zeta[t] = u.X(t - 1, 0) - 0.1 * t;
        for (int t = 0; t < 7; ++t) {
            sx += zeta[t];
            sy += zeta[t + 1];
            sxx += zeta[t] * zeta[t];
            syy += zeta[t + 1] * zeta[t + 1];
            sxy += zeta[t] * zeta[t + 1];
            ++count;
        }
    }
    const double mx = sx / count, my = sy / count;
    const double corr = (sxy / count - mx * my) /
                        std::sqrt((sxx / count - mx * mx) * (syy / count - my * my));
    CHECK(std::fabs(corr - 0.5) < 0.01);

    std::size_t informative = 0;
    const PanelDataset small = generate(spec_of(DesignFamily::Trending, 10000, 3, 0.5, 14), 0);
    for (const PanelUnit& u : small.units) informative += u.informative() ? 1 : 0;
    CHECK(std::fabs(informative / 10000.0 - 0.42) < 0.02);
}

TEST_CASE("the additional-regressors family adds three inert covariates") {
    DesignSpec s = spec_of(DesignFamily::AdditionalRegressors, 50, 3, 0.5, 15);
    CHECK(s.k() == 4);
    const PanelDataset ds = generate(s, 0);
    CHECK(ds.k == 4);
    CHECK(ds.labels == std::vector<std::string>{"x1", "x2", "x3", "x4"});
    const Theta th = true_theta(s);
    CHECK(th.beta == std::vector<double>{1.0, 0.0, 0.0, 0.0});
}

TEST_CASE("generation is deterministic in (seed, replication)") {
    const DesignSpec s = spec_of(DesignFamily::Benchmark, 200, 4, 1.0, 16);
    const PanelDataset a = generate(s, 3);
    const PanelDataset b = generate(s, 3);
    const PanelDataset c = generate(s, 4);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("individual effects track the covariate average") {
    // alpha is the within-unit covariate mean, so units with large x-bar
    // carry both higher covariates and higher propensity.
    const PanelDataset ds = generate(spec_of(DesignFamily::Benchmark, 20000, 3, 0.0, 17), 0);
    double hi = 0.0, lo = 0.0;
    std::size_t nhi = 0, nlo = 0;
    for (const PanelUnit& u : ds.units) {
        double xb = u.x0[0];
        for (int t = 0; t < 3; ++t) xb += u.X(t, 0);
        const double ybar = (u.y[0] + u.y[1] + u.y[2]) / 3.0;
        if (xb > 0) {
            hi += ybar;
            ++nhi;
        } else {
            lo += ybar;
            ++nlo;
        }
    }
    CHECK(hi / nhi > lo / nlo + 0.2);
}

TEST_CASE("heterogeneity biases a pooled fit but not the conditional one") {
    // A pooled logit that ignores the individual effect picks up spurious
    // persistence, because alpha is built from the covariates and carries
    // over occasions. The conditional fit stays near the generating value.
    const DesignSpec s = spec_of(DesignFamily::Benchmark, 4000, 3, 0.5, 19);

    auto pooled_gamma = [](const PanelDataset& ds) {
        // pooled logistic regression of y_t on (1, x_t, y_{t-1})
        std::vector<double> th(3, 0.0);
        for (int iter = 0; iter < 50; ++iter) {
            double g[3] = {0, 0, 0};
            double H[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
            for (const PanelUnit& u : ds.units) {
                int prev = u.y0;
                for (int t = 0; t < 3; ++t) {
                    const double r[3] = {1.0, u.X(t, 0), static_cast<double>(prev)};
                    const double eta = th[0] * r[0] + th[1] * r[1] + th[2] * r[2];
                    const double p = 1.0 / (1.0 + std::exp(-eta));
                    for (int a = 0; a < 3; ++a) {
                        g[a] += (u.y[t] - p) * r[a];
                        for (int b = 0; b < 3; ++b) H[a][b] += p * (1.0 - p) * r[a] * r[b];
                    }
                    prev = u.y[t];
                }
            }
            Matrix info(3, 3);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) info(a, b) = H[a][b];
            Matrix lower;
            REQUIRE(cholesky(info, lower));
            const std::vector<double> step = cholesky_solve(lower, {g[0], g[1], g[2]});
            for (int a = 0; a < 3; ++a) th[a] += step[a];
            if (sup_norm(step) < 1e-10) break;
        }
        return th[2];
    };

    double pooled = 0.0, cond = 0.0;
    const int reps = 5;
    for (int rep = 0; rep < reps; ++rep) {
        const PanelDataset ds = generate(s, rep);
        pooled += pooled_gamma(ds);
        cond += fit_improved(ds).theta_hat.gamma;
    }
    pooled /= reps;
    cond /= reps;
    CHECK(pooled - 0.5 > 0.25);
    CHECK(std::fabs(cond - 0.5) < 0.1);
}

TEST_CASE("inert extra regressors stay centered at zero") {
    DesignSpec s = spec_of(DesignFamily::AdditionalRegressors, 4000, 3, 0.5, 20);
    s.replications = 30;
    double bias[5] = {0, 0, 0, 0, 0};
    for (int rep = 0; rep < 30; ++rep) {
        const FitResult fit = fit_improved(generate(s, rep));
        for (int j = 0; j < 4; ++j) bias[j] += fit.theta_hat.beta[j];
        bias[4] += fit.theta_hat.gamma;
    }
    CHECK(std::fabs(bias[0] / 30.0 - 1.0) < 0.05);
    for (int j = 1; j < 4; ++j) CHECK(std::fabs(bias[j] / 30.0) < 0.05);
    CHECK(std::fabs(bias[4] / 30.0 - 0.5) < 0.12);
}

TEST_CASE("design json round trip and validation") {
    DesignSpec s = spec_of(DesignFamily::Trending, 500, 3, 0.5, 18);
    s.replications = 200;
    s.phi = 1.5;
    s.psi = -0.25;
    const DesignSpec back = design_from_json_text(design_to_json_text(s));
    CHECK(back.family == s.family);
    CHECK(back.n == s.n);
    CHECK(back.T == s.T);
    CHECK(back.gamma == s.gamma);
    CHECK(back.seed == s.seed);
    CHECK(back.replications == s.replications);
    CHECK(back.phi == s.phi);
    CHECK(back.psi == s.psi);

    CHECK_THROWS_AS((void)design_from_json_text("{\"family\":\"bogus\",\"n\":1,\"T\":3,"
                                                "\"gamma\":0,\"seed\":1,\"replications\":1}"),
                    DataError);
    CHECK_THROWS_AS((void)design_from_json_text("not json"), DataError);
    DesignSpec bad = s;
    bad.n = 0;
    CHECK_THROWS_AS(validate(bad), DataError);
    bad = s;
    bad.T = 1;
    CHECK_THROWS_AS(validate(bad), DataError);
    bad = s;
    bad.replications = 0;
    CHECK_THROWS_AS(validate(bad), DataError);
}
