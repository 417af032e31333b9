#include "qelogit/dgp.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace qelogit {

namespace {

constexpr double kLogisticVariance = std::numbers::pi * std::numbers::pi / 3.0;

// Covariate draws for occasions 0..T, one column.
std::vector<double> draw_covariate_path(const DesignSpec& spec, Rng& rng) {
    const int len = spec.T + 1;
    std::vector<double> x(static_cast<std::size_t>(len));
    const double sd = std::sqrt(kLogisticVariance);
    switch (spec.family) {
        case DesignFamily::Chi2Regressor: {
            // chi-square(1), shifted and scaled to mean 0 and the logistic variance
            const double scale = std::sqrt(kLogisticVariance / 2.0);
            for (double& v : x) v = (rng.chisq1() - 1.0) * scale;
            break;
        }
        case DesignFamily::Trending: {
            // Gaussian AR(1) around a linear trend, stationary at the logistic variance
            const double rho = 0.5;
            const double innov_sd = std::sqrt(kLogisticVariance * (1.0 - rho * rho));
            double zeta = rng.normal(0.0, sd);
            for (int t = 0; t < len; ++t) {
                if (t > 0) zeta = rho * zeta + rng.normal(0.0, innov_sd);
                x[static_cast<std::size_t>(t)] = spec.phi * (spec.psi + 0.1 * t + zeta);
            }
            break;
        }
        default: {
            for (double& v : x) v = rng.normal(0.0, sd);
            break;
        }
    }
    return x;
}

}  // namespace

std::string family_name(DesignFamily f) {
    switch (f) {
        case DesignFamily::Benchmark: return "benchmark";
        case DesignFamily::Chi2Regressor: return "chi2_regressor";
        case DesignFamily::AdditionalRegressors: return "additional_regressors";
        case DesignFamily::Trending: return "trending";
    }
    return "unknown";
}

DesignFamily family_from_name(const std::string& name) {
    if (name == "benchmark") return DesignFamily::Benchmark;
    if (name == "chi2_regressor") return DesignFamily::Chi2Regressor;
    if (name == "additional_regressors") return DesignFamily::AdditionalRegressors;
    if (name == "trending") return DesignFamily::Trending;
    throw DataError("unknown design family: " + name);
}

void validate(const DesignSpec& spec) {
    if (spec.n < 1) throw DataError("design needs n >= 1");
    if (spec.T < 2) throw DataError("design needs T >= 2");
    if (spec.replications < 1) throw DataError("design needs replications >= 1");
}

DesignSpec design_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("design config is not valid JSON: ") + e.what());
    }
    DesignSpec spec;
    try {
        spec.family = family_from_name(j.at("family").get<std::string>());
        spec.n = j.at("n").get<int>();
        spec.T = j.at("T").get<int>();
        spec.gamma = j.at("gamma").get<double>();
        spec.beta = j.value("beta", 1.0);
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.replications = j.at("replications").get<int>();
        spec.phi = j.value("phi", 1.0);
        spec.psi = j.value("psi", 0.0);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("design config is missing a field: ") + e.what());
    }
    validate(spec);
    return spec;
}

DesignSpec design_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open design config: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return design_from_json_text(buf.str());
}

std::string design_to_json_text(const DesignSpec& spec) {
    nlohmann::json j{
        {"family", family_name(spec.family)},
        {"n", spec.n},
        {"T", spec.T},
        {"gamma", spec.gamma},
        {"beta", spec.beta},
        {"seed", spec.seed},
        {"replications", spec.replications},
    };
    if (spec.family == DesignFamily::Trending) {
        j["phi"] = spec.phi;
        j["psi"] = spec.psi;
    }
    return j.dump(2);
}

Theta true_theta(const DesignSpec& spec) {
    Theta th;
    th.beta.assign(static_cast<std::size_t>(spec.k()), 0.0);
    th.beta[0] = spec.beta;
    th.gamma = spec.gamma;
    return th;
}

PanelUnit simulate_unit(double alpha, const Matrix& X, int y0, const Theta& theta, Rng& rng) {
    const int T = static_cast<int>(X.rows());
    const int k = static_cast<int>(X.cols());
    if (static_cast<int>(theta.beta.size()) != k)
        throw std::invalid_argument("theta dimension does not match the covariate matrix");
    PanelUnit unit;
    unit.y0 = y0;
    unit.X = X;
    unit.y.resize(static_cast<std::size_t>(T));
    int prev = y0;
    for (int t = 0; t < T; ++t) {
        double eta = alpha + prev * theta.gamma;
        for (int j = 0; j < k; ++j) eta += X(t, j) * theta.beta[j];
        unit.y[static_cast<std::size_t>(t)] = (eta + rng.logistic() > 0.0) ? 1 : 0;
        prev = unit.y[static_cast<std::size_t>(t)];
    }
    return unit;
}

PanelDataset generate(const DesignSpec& spec, int rep) {
    validate(spec);
    if (rep < 0) throw DataError("replication index must be non-negative");

    const int T = spec.T;
    const int k = spec.k();
    const Theta theta = true_theta(spec);

    PanelDataset ds;
    ds.T = T;
    ds.k = k;
    for (int j = 1; j <= k; ++j) ds.labels.push_back("x" + std::to_string(j));
    ds.units.reserve(static_cast<std::size_t>(spec.n));

    for (int i = 0; i < spec.n; ++i) {
        Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(rep),
                              static_cast<std::uint64_t>(i));

        // Column-wise covariate paths over occasions 0..T; the individual
        // effect averages the first (structural) column.
        std::vector<std::vector<double>> cols;
        cols.push_back(draw_covariate_path(spec, rng));
        if (spec.family == DesignFamily::AdditionalRegressors) {
            DesignSpec aux = spec;
            aux.family = DesignFamily::Benchmark;
            for (int j = 1; j < k; ++j) cols.push_back(draw_covariate_path(aux, rng));
        }
        double alpha = 0.0;
        for (int t = 0; t <= T; ++t) alpha += cols[0][static_cast<std::size_t>(t)];
        alpha /= (T + 1);

        // Initial response from the static (no-lag) threshold.
        double eta0 = alpha;
        for (int j = 0; j < k; ++j) eta0 += cols[static_cast<std::size_t>(j)][0] * theta.beta[j];
        const int y0 = (eta0 + rng.logistic() > 0.0) ? 1 : 0;

        Matrix X(static_cast<std::size_t>(T), static_cast<std::size_t>(k));
        for (int t = 1; t <= T; ++t)
            for (int j = 0; j < k; ++j)
                X(t - 1, j) = cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];

        PanelUnit unit = simulate_unit(alpha, X, y0, theta, rng);
        unit.id = std::to_string(i + 1);
        unit.x0.resize(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) unit.x0[static_cast<std::size_t>(j)] = cols[static_cast<std::size_t>(j)][0];
        ds.units.push_back(std::move(unit));
    }
    return ds;
}

}  // namespace qelogit
