#include "qelogit/estimators.hpp"

#include <cmath>
#include <string>

#include "qelogit/stats.hpp"

namespace qelogit {

namespace {

std::vector<std::string> parameter_names(const PanelDataset& ds, bool two_lag) {
    std::vector<std::string> names = ds.labels;
    names.push_back("gamma");
    if (two_lag) names.push_back("gamma2");
    return names;
}

// Sum of per-unit conditional log-likelihood terms over the informative
// units, with optional per-unit expansion weights.
class CondObjective {
public:
    CondObjective(const PanelDataset& ds, bool two_lag) : ds_(ds), two_lag_(two_lag) {
        for (const PanelUnit& u : ds.units)
            if (u.informative()) informative_.push_back(&u);
        dim_ = static_cast<std::size_t>(ds.k) + 1 + (two_lag ? 1 : 0);
    }

    std::size_t dim() const { return dim_; }
    std::size_t informative_count() const { return informative_.size(); }

    void set_weights_from(const std::vector<double>& beta_bar) {
        weights_.clear();
        weights_.reserve(informative_.size());
        for (const PanelUnit* u : informative_)
            weights_.push_back(improved_weights(*u, beta_bar));
    }

    KernelVariant variant_for(std::size_t i) const {
        KernelVariant v;
        v.two_lag = two_lag_;
        v.weights = weights_.empty() ? nullptr : &weights_[i];
        return v;
    }

    double loglik(const std::vector<double>& th) const {
        const Theta theta = Theta::from_vector(th, static_cast<std::size_t>(ds_.k), two_lag_);
        double ll = 0.0;
        for (std::size_t i = 0; i < informative_.size(); ++i)
            ll += cond_logprob(*informative_[i], theta, variant_for(i));
        return ll;
    }

    double eval(const std::vector<double>& th, std::vector<double>& score, Matrix& info) const {
        const Theta theta = Theta::from_vector(th, static_cast<std::size_t>(ds_.k), two_lag_);
        const std::size_t p = dim_;
        score.assign(p, 0.0);
        info = Matrix(p, p);
        double ll = 0.0;
        for (std::size_t i = 0; i < informative_.size(); ++i) {
            const KernelVariant variant = variant_for(i);
            ll += cond_logprob(*informative_[i], theta, variant);
            const ScoreInfo si = unit_score_and_info(*informative_[i], theta, variant);
            for (std::size_t r = 0; r < p; ++r) {
                score[r] += si.v[r];
                for (std::size_t c = 0; c < p; ++c) info(r, c) += si.S(r, c);
            }
        }
        return ll;
    }

private:
    const PanelDataset& ds_;
    bool two_lag_;
    std::size_t dim_ = 0;
    std::vector<const PanelUnit*> informative_;
    std::vector<ImprovedWeights> weights_;
};

void check_identified(const Matrix& info, const std::vector<std::string>& names) {
    const EigenSym eig = jacobi_eigen(info);
    const double largest = eig.values.back();
    if (eig.values.front() < 1e-10 * std::max(largest, 1e-300)) {
        std::size_t worst = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < names.size(); ++i) {
            const double w = std::fabs(eig.vectors(i, 0));
            if (w > best) {
                best = w;
                worst = i;
            }
        }
        throw IdentificationError("parameter not identified: " + names[worst] +
                                  " (no within-unit variation in its direction)");
    }
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

FitResult run_newton(CondObjective& obj, const PanelDataset& ds, bool two_lag,
                     bool dynamic_weights, std::vector<double> th, const SolverConfig& cfg) {
    const std::size_t p = obj.dim();
    const std::size_t k = static_cast<std::size_t>(ds.k);
    const std::vector<std::string> names = parameter_names(ds, two_lag);

    std::vector<double> score;
    Matrix info;
    std::vector<double> trace;
    std::vector<double> prev_beta_bar;
    bool have_prev_beta_bar = false;
    double last_step = HUGE_VAL;
    int iterations = 0;

    while (true) {
        bool weights_stable = true;
        if (dynamic_weights) {
            std::vector<double> bb(th.begin(), th.begin() + static_cast<std::ptrdiff_t>(k));
            weights_stable = have_prev_beta_bar && sup_diff(bb, prev_beta_bar) < cfg.tol_step;
            obj.set_weights_from(bb);
            prev_beta_bar = bb;
            have_prev_beta_bar = true;
        }

        const double ll = obj.eval(th, score, info);
        trace.push_back(ll);
        if (iterations == 0) check_identified(info, names);

        if (weights_stable && (sup_norm(score) < cfg.tol_grad || last_step < cfg.tol_step)) {
            FitResult res;
            res.theta_hat = Theta::from_vector(th, k, two_lag);
            res.info = info;
            res.loglik = ll;
            res.loglik_trace = std::move(trace);
            res.iterations = iterations;
            res.actual_n = obj.informative_count();
            res.nominal_terms = ds.n();
            res.converged = true;
            res.param_names = names;
            Matrix lower;
            if (!cholesky(info, lower))
                throw IdentificationError("information matrix singular at the optimum");
            const Matrix inv = cholesky_inverse(lower);
            res.se.resize(p);
            for (std::size_t j = 0; j < p; ++j) res.se[j] = std::sqrt(inv(j, j));
            return res;
        }

        if (iterations >= cfg.max_iter)
            throw ConvergenceError("no convergence after " + std::to_string(cfg.max_iter) +
                                       " iterations (|score| = " + std::to_string(sup_norm(score)) + ")",
                                   trace);
        ++iterations;

        Matrix lower;
        if (!cholesky(info, lower)) {
            check_identified(info, names);
            throw ConvergenceError("information matrix not positive definite", trace);
        }
        const std::vector<double> delta = cholesky_solve(lower, score);

        // Full step first; halve while the objective would decrease.
        double lambda = 1.0;
        std::vector<double> cand(p);
        bool accepted = false;
        for (int halving = 0; halving <= 20; ++halving) {
            for (std::size_t j = 0; j < p; ++j) cand[j] = th[j] + lambda * delta[j];
            if (obj.loglik(cand) >= ll - 1e-12 * (1.0 + std::fabs(ll))) {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("step halving failed to find an ascent step", trace);
        last_step = lambda * sup_norm(delta);
        th = cand;
    }
}

std::vector<double> start_vector(const PanelDataset& ds, bool two_lag, const SolverConfig& cfg) {
    const std::size_t p = static_cast<std::size_t>(ds.k) + 1 + (two_lag ? 1 : 0);
    if (!cfg.start) return std::vector<double>(p, 0.0);
    std::vector<double> v = cfg.start->to_vector();
    if (v.size() != p) throw std::invalid_argument("start point dimension mismatch");
    return v;
}

FitResult fit_conditional(const PanelDataset& ds, bool two_lag,
                          const ImprovedMode* mode, const SolverConfig& cfg) {
    validate_dataset(ds);
    if (two_lag) {
        if (ds.T < 3) throw DataError("two-lag estimation needs T >= 3");
        if (!ds.has_lag2_initials())
            throw DataError("two-lag estimation needs the pre-sample response (time -1 rows)");
    }
    CondObjective obj(ds, two_lag);
    if (obj.informative_count() == 0) throw IdentificationError("no informative units");

    bool dynamic = false;
    if (mode) {
        if (mode->kind == ImprovedMode::Kind::Fixed) {
            if (static_cast<int>(mode->beta_bar.size()) != ds.k)
                throw std::invalid_argument("fixed expansion point has wrong dimension");
            obj.set_weights_from(mode->beta_bar);
        } else {
            dynamic = true;
        }
    }
    return run_newton(obj, ds, two_lag, dynamic, start_vector(ds, two_lag, cfg), cfg);
}

}  // namespace

FitResult fit_basic(const PanelDataset& ds, const SolverConfig& config) {
    return fit_conditional(ds, false, nullptr, config);
}

FitResult fit_improved(const PanelDataset& ds, const ImprovedMode& mode,
                       const SolverConfig& config) {
    return fit_conditional(ds, false, &mode, config);
}

FitResult fit_improved(const PanelDataset& ds, const SolverConfig& config) {
    const FitResult basic = fit_basic(ds, config);
    SolverConfig seeded = config;
    seeded.start = basic.theta_hat;
    const ImprovedMode mode = ImprovedMode::dynamic();
    return fit_conditional(ds, false, &mode, seeded);
}

FitResult fit_two_lag_basic(const PanelDataset& ds, const SolverConfig& config) {
    return fit_conditional(ds, true, nullptr, config);
}

FitResult fit_two_lag(const PanelDataset& ds, const ImprovedMode& mode,
                      const SolverConfig& config) {
    return fit_conditional(ds, true, &mode, config);
}

FitResult fit_two_lag(const PanelDataset& ds, const SolverConfig& config) {
    const FitResult basic = fit_two_lag_basic(ds, config);
    SolverConfig seeded = config;
    seeded.start = basic.theta_hat;
    const ImprovedMode mode = ImprovedMode::dynamic();
    return fit_conditional(ds, true, &mode, seeded);
}

std::vector<ConfInterval> confidence_interval(const FitResult& result, double level) {
    if (!result.converged)
        throw std::invalid_argument("confidence intervals need a converged fit");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence level must lie in (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const std::vector<double> est = result.theta_hat.to_vector();
    std::vector<ConfInterval> out(est.size());
    for (std::size_t j = 0; j < est.size(); ++j) {
        out[j].name = result.param_names[j];
        out[j].estimate = est[j];
        out[j].lower = est[j] - z * result.se[j];
        out[j].upper = est[j] + z * result.se[j];
    }
    return out;
}

WaldTest wald_test_gamma2(const FitResult& result) {
    if (!result.theta_hat.gamma2)
        throw std::invalid_argument("the fit carries no second-lag coefficient");
    WaldTest t;
    t.statistic = *result.theta_hat.gamma2 / result.se.back();
    t.p_value = 2.0 * (1.0 - normal_cdf(std::fabs(t.statistic)));
    return t;
}

}  // namespace qelogit
