#include "qelogit/hk.hpp"

#include <cmath>
#include <numbers>

#include "qelogit/rng.hpp"
#include "qelogit/stats.hpp"

namespace qelogit {

namespace {

// One weighted logistic term: response c on regressor r with weight w.
struct PairTerm {
    double weight = 0.0;
    int response = 0;
    std::vector<double> r;
};

double gaussian_density(double u) {
    return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

double kernel_weight(const KernelSpec& spec, const std::vector<double>& diff,
                     const std::vector<double>& sigma) {
    double w = 1.0;
    for (std::size_t j = 0; j < diff.size(); ++j) {
        if (sigma[j] > 0.0) {
            const double u = diff[j] / sigma[j];
            w *= (spec.kernel == HkKernelShape::GaussianProduct) ? gaussian_density(u)
                                                                 : (std::fabs(u) <= 1.0 ? 1.0 : 0.0);
        } else {
            if (diff[j] != 0.0) return 0.0;
            if (spec.kernel == HkKernelShape::GaussianProduct) w *= gaussian_density(0.0);
        }
    }
    return w;
}

struct WeightedLogit {
    std::vector<PairTerm> terms;
    std::size_t p = 0;

    double loglik(const std::vector<double>& th) const {
        double ll = 0.0;
        for (const PairTerm& t : terms) {
            double m = 0.0;
            for (std::size_t j = 0; j < p; ++j) m += t.r[j] * th[j];
            ll += t.weight * (t.response * m - log1pexp(m));
        }
        return ll;
    }

    double eval(const std::vector<double>& th, std::vector<double>& score, Matrix& info) const {
        score.assign(p, 0.0);
        info = Matrix(p, p);
        double ll = 0.0;
        for (const PairTerm& t : terms) {
            double m = 0.0;
            for (std::size_t j = 0; j < p; ++j) m += t.r[j] * th[j];
            const double pr = sigmoid(m);
            ll += t.weight * (t.response * m - log1pexp(m));
            const double g = t.weight * (t.response - pr);
            const double h = t.weight * pr * (1.0 - pr);
            for (std::size_t a = 0; a < p; ++a) {
                score[a] += g * t.r[a];
                for (std::size_t b = a; b < p; ++b) info(a, b) += h * t.r[a] * t.r[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < a; ++b) info(a, b) = info(b, a);
        return ll;
    }
};

FitResult newton_on_terms(const WeightedLogit& obj, std::vector<double> th,
                          const SolverConfig& cfg, const std::vector<std::string>& names) {
    std::vector<double> score;
    Matrix info;
    std::vector<double> trace;
    double last_step = HUGE_VAL;
    int iterations = 0;
    while (true) {
        const double ll = obj.eval(th, score, info);
        trace.push_back(ll);
        if (sup_norm(score) < cfg.tol_grad || last_step < cfg.tol_step) {
            FitResult res;
            res.theta_hat = Theta::from_vector(th, obj.p - 1, false);
            res.info = info;
            res.loglik = ll;
            res.loglik_trace = std::move(trace);
            res.iterations = iterations;
            res.converged = true;
            res.param_names = names;
            Matrix lower;
            if (!cholesky(info, lower))
                throw IdentificationError("weighted information singular at the optimum");
            const Matrix inv = cholesky_inverse(lower);
            res.se.resize(obj.p);
            for (std::size_t j = 0; j < obj.p; ++j) res.se[j] = std::sqrt(inv(j, j));
            return res;
        }
        if (iterations >= cfg.max_iter)
            throw ConvergenceError("pairwise fit: no convergence after " +
                                       std::to_string(cfg.max_iter) + " iterations",
                                   trace);
        ++iterations;
        Matrix lower;
        if (!cholesky(info, lower)) {
            const EigenSym eig = jacobi_eigen(info);
            std::size_t worst = 0;
            for (std::size_t i = 1; i < names.size(); ++i)
                if (std::fabs(eig.vectors(i, 0)) > std::fabs(eig.vectors(worst, 0))) worst = i;
            throw IdentificationError("parameter not identified in the weighted fit: " +
                                      names[worst]);
        }
        const std::vector<double> delta = cholesky_solve(lower, score);
        double lambda = 1.0;
        std::vector<double> cand(obj.p);
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            for (std::size_t j = 0; j < obj.p; ++j) cand[j] = th[j] + lambda * delta[j];
            if (obj.loglik(cand) >= ll - 1e-12 * (1.0 + std::fabs(ll))) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw ConvergenceError("pairwise fit: step halving failed", trace);
        last_step = lambda * sup_norm(delta);
        th = cand;
    }
}

}  // namespace

double hk_pair_logprob(int y0, int ya, int yb, int y_after,
                       const std::vector<double>& x_diff_1_2, const Theta& theta) {
    if (ya + yb != 1)
        throw std::invalid_argument("the pair must have exactly one positive response");
    if (x_diff_1_2.size() != theta.beta.size())
        throw std::invalid_argument("covariate difference dimension mismatch");
    double m = theta.gamma * (y0 - y_after);
    for (std::size_t j = 0; j < x_diff_1_2.size(); ++j) m += x_diff_1_2[j] * theta.beta[j];
    return ya == 1 ? -log1pexp(-m) : -log1pexp(m);
}

FitResult fit_hk(const PanelDataset& ds, const KernelSpec& kernel, const SolverConfig& config) {
    validate_dataset(ds);
    const int T = ds.T;
    const int k = ds.k;
    if (T < 3) throw DataError("the pairwise weighted fit needs T >= 3");

    // Eligible swap pairs (s,t): both interior enough that flipping them
    // only moves covariate terms at s+1 and t+1.
    std::vector<std::pair<int, int>> pairs;
    const int s_min = kernel.strict_interior_pairs ? 2 : 1;
    for (int s = s_min; s <= T - 1; ++s)
        for (int t = s + 1; t <= T - 1; ++t) pairs.emplace_back(s, t);
    if (pairs.empty()) throw DataError("no eligible response pairs for this T and convention");

    // Per-covariate bandwidth from the spread of x_2 - x_3.
    std::vector<double> sigma(static_cast<std::size_t>(k), 0.0);
    {
        const double n_rate = std::pow(static_cast<double>(ds.n()), -0.2);
        for (int j = 0; j < k; ++j) {
            double c;
            if (kernel.c) {
                c = *kernel.c;
            } else {
                double mean = 0.0, ssq = 0.0;
                for (const PanelUnit& u : ds.units) mean += u.X(1, j) - u.X(2, j);
                mean /= static_cast<double>(ds.n());
                for (const PanelUnit& u : ds.units) {
                    const double d = u.X(1, j) - u.X(2, j) - mean;
                    ssq += d * d;
                }
                const double var = ds.n() > 1 ? ssq / static_cast<double>(ds.n() - 1) : 0.0;
                c = 8.0 * std::sqrt(var);
            }
            sigma[static_cast<std::size_t>(j)] = c * n_rate;
        }
    }

    WeightedLogit obj;
    obj.p = static_cast<std::size_t>(k) + 1;
    std::size_t indicator_pairs = 0;
    double total_weight = 0.0;
    std::vector<double> diff(static_cast<std::size_t>(k));
    for (const PanelUnit& u : ds.units) {
        for (const auto& [s, t] : pairs) {
            const int ys = u.y[static_cast<std::size_t>(s - 1)];
            const int yt = u.y[static_cast<std::size_t>(t - 1)];
            if (ys + yt != 1) continue;
            ++indicator_pairs;
            for (int j = 0; j < k; ++j)
                diff[static_cast<std::size_t>(j)] = u.X(s, j) - u.X(t, j);  // x_{s+1} - x_{t+1}
            const double w = kernel_weight(kernel, diff, sigma);
            if (w <= 0.0) continue;
            total_weight += w;

            PairTerm term;
            term.weight = w;
            term.response = ys;
            term.r.resize(obj.p);
            for (int j = 0; j < k; ++j)
                term.r[static_cast<std::size_t>(j)] = u.X(s - 1, j) - u.X(t - 1, j);
            const int before_s = (s == 1) ? u.y0 : u.y[static_cast<std::size_t>(s - 2)];
            int delta = before_s - u.y[static_cast<std::size_t>(t)];
            if (t > s + 1)
                delta += u.y[static_cast<std::size_t>(s)] - u.y[static_cast<std::size_t>(t - 2)];
            term.r[static_cast<std::size_t>(k)] = delta;
            obj.terms.push_back(std::move(term));
        }
    }
    if (total_weight <= 0.0) throw IdentificationError("no informative pairs");

    std::vector<std::string> names = ds.labels;
    names.push_back("gamma");

    // Multi-start: keep the best of the zero start and four random ones.
    std::vector<std::vector<double>> starts;
    starts.push_back(config.start ? config.start->to_vector()
                                  : std::vector<double>(obj.p, 0.0));
    Rng rng(0x9e3779b97f4a7c15ULL);
    for (int r = 0; r < 4; ++r) {
        std::vector<double> s(obj.p);
        for (double& v : s) v = 2.0 * rng.uniform01() - 1.0;
        starts.push_back(std::move(s));
    }

    FitResult best;
    bool have_best = false;
    std::string last_error;
    for (const auto& s : starts) {
        try {
            FitResult r = newton_on_terms(obj, s, config, names);
            if (!have_best || r.loglik > best.loglik) {
                best = std::move(r);
                have_best = true;
            }
        } catch (const ConvergenceError& e) {
            last_error = e.what();
        }
    }
    if (!have_best) throw ConvergenceError(last_error, {});

    best.actual_n = indicator_pairs;
    best.nominal_terms = ds.n() * pairs.size();
    return best;
}

}  // namespace qelogit
