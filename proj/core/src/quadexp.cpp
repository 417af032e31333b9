#include "qelogit/quadexp.hpp"

#include <cmath>
#include <stdexcept>

#include "qelogit/stats.hpp"

namespace qelogit {

namespace {

constexpr int kMaxJointT = 20;

// Shared machinery for the conditional kernels. The basic and refined
// variants differ only in the lag-correction weights: 0.5 everywhere for the
// expansion at zero, q_t for the expansion at beta_bar. Bit (t-1) of a
// configuration mask holds z_t.
struct CondEvaluator {
    int T;
    int k;
    int p;  // parameter dimension
    bool two_lag;
    int y0;
    int ym1;
    Matrix D;                // (T-1) x k, row t-2 holds x_t - x_1
    std::vector<double> a;   // a[t-2] = d_t . beta
    std::vector<double> w1;  // lag-1 correction weight per occasion
    std::vector<double> w2;  // lag-2 correction weight per occasion
    double g1 = 0.0;
    double g2 = 0.0;

    CondEvaluator(const PanelUnit& unit, const Theta& theta, const KernelVariant& variant)
        : T(unit.T()),
          k(unit.k()),
          p(k + 1 + (variant.two_lag ? 1 : 0)),
          two_lag(variant.two_lag),
          y0(unit.y0),
          ym1(0) {
        if (static_cast<int>(theta.beta.size()) != k)
            throw std::invalid_argument("theta dimension does not match the unit's covariates");
        if (two_lag) {
            if (!theta.gamma2)
                throw std::invalid_argument("two-lag kernel needs theta.gamma2");
            if (!unit.y_minus1)
                throw DataError("two-lag kernel needs the unit's pre-sample response");
            ym1 = *unit.y_minus1;
            g2 = *theta.gamma2;
        }
        g1 = theta.gamma;

        D = Matrix(static_cast<std::size_t>(T - 1), static_cast<std::size_t>(k));
        a.assign(static_cast<std::size_t>(T - 1), 0.0);
        for (int t = 1; t < T; ++t) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) {
                const double d = unit.X(t, j) - unit.X(0, j);
                D(t - 1, j) = d;
                acc += d * theta.beta[j];
            }
            a[t - 1] = acc;
        }

        if (variant.weights) {
            const auto& q = variant.weights->q;
            if (static_cast<int>(q.size()) != T)
                throw std::invalid_argument("weights length does not match T");
            w1 = q;
        } else {
            w1.assign(static_cast<std::size_t>(T), 0.5);
        }
        w2 = two_lag ? w1 : std::vector<double>{};
    }

    int bit(std::uint32_t z, int t) const { return (z >> (t - 1)) & 1u; }

    // -sum_t w1_t z_{t-1} + sum_t z_{t-1} z_t, with z_0 fixed at y0.
    double lag1_stat(std::uint32_t z) const {
        double lagsum = 0.0;
        int cross = 0;
        int prev = y0;
        for (int t = 1; t <= T; ++t) {
            const int cur = bit(z, t);
            lagsum += w1[t - 1] * prev;
            cross += prev * cur;
            prev = cur;
        }
        return -lagsum + cross;
    }

    // Same at lag two, with z_{-1} fixed at the pre-sample response.
    double lag2_stat(std::uint32_t z) const {
        double lagsum = 0.0;
        int cross = 0;
        for (int t = 1; t <= T; ++t) {
            const int lag = (t == 1) ? ym1 : (t == 2) ? y0 : bit(z, t - 2);
            const int cur = bit(z, t);
            lagsum += w2[t - 1] * lag;
            cross += lag * cur;
        }
        return -lagsum + cross;
    }

    double exponent(std::uint32_t z) const {
        double e = 0.0;
        for (int t = 2; t <= T; ++t)
            if (bit(z, t)) e += a[t - 2];
        e += g1 * lag1_stat(z);
        if (two_lag) e += g2 * lag2_stat(z);
        return e;
    }

    // Sufficient statistic of one configuration; out has p entries.
    void u_of(std::uint32_t z, double* out) const {
        for (int j = 0; j < k; ++j) out[j] = 0.0;
        for (int t = 2; t <= T; ++t)
            if (bit(z, t))
                for (int j = 0; j < k; ++j) out[j] += D(t - 2, j);
        out[k] = lag1_stat(z);
        if (two_lag) out[k + 1] = lag2_stat(z);
    }

    std::uint32_t observed_mask(const PanelUnit& unit) const {
        std::uint32_t z = 0;
        for (int t = 1; t <= T; ++t)
            if (unit.y[t - 1]) z |= (1u << (t - 1));
        return z;
    }
};

void require_informative(const PanelUnit& unit) {
    const int yp = unit.y_plus();
    if (yp == 0 || yp == unit.T())
        throw DegenerateClassError("degenerate score class: y_+ = " + std::to_string(yp));
}

// Joint-model exponent over full configurations, used by the oracles.
struct JointEvaluator {
    int T;
    int k;
    bool two_lag;
    int y0;
    int ym1;
    double alpha;
    double g1;
    double g2;
    std::vector<double> b;   // b[t-1] = x_t . beta
    std::vector<double> w1;  // lag corrections as above
    std::vector<double> w2;

    JointEvaluator(const PanelUnit& unit, const JointParams& params, const ImprovedWeights* weights)
        : T(unit.T()),
          k(unit.k()),
          two_lag(params.theta.gamma2.has_value()),
          y0(unit.y0),
          ym1(0),
          alpha(params.alpha),
          g1(params.theta.gamma),
          g2(0.0) {
        if (T > kMaxJointT)
            throw CapacityError("joint enumeration supports T <= " + std::to_string(kMaxJointT));
        if (static_cast<int>(params.theta.beta.size()) != k)
            throw std::invalid_argument("theta dimension does not match the unit's covariates");
        if (two_lag) {
            if (!unit.y_minus1)
                throw DataError("two-lag joint model needs the unit's pre-sample response");
            ym1 = *unit.y_minus1;
            g2 = *params.theta.gamma2;
        }
        b.assign(static_cast<std::size_t>(T), 0.0);
        for (int t = 1; t <= T; ++t) {
            double acc = 0.0;
            for (int j = 0; j < k; ++j) acc += unit.X(t - 1, j) * params.theta.beta[j];
            b[t - 1] = acc;
        }
        if (weights) {
            if (static_cast<int>(weights->q.size()) != T)
                throw std::invalid_argument("weights length does not match T");
            w1 = weights->q;
        } else {
            w1.assign(static_cast<std::size_t>(T), 0.5);
        }
        w2 = two_lag ? w1 : std::vector<double>{};
    }

    int bit(std::uint32_t z, int t) const { return (z >> (t - 1)) & 1u; }

    double exponent(std::uint32_t z) const {
        double e = 0.0;
        int prev = y0;
        for (int t = 1; t <= T; ++t) {
            const int cur = bit(z, t);
            if (cur) e += alpha + b[t - 1];
            e += g1 * (prev * cur - w1[t - 1] * prev);
            prev = cur;
        }
        if (two_lag) {
            for (int t = 1; t <= T; ++t) {
                const int lag = (t == 1) ? ym1 : (t == 2) ? y0 : bit(z, t - 2);
                e += g2 * (lag * bit(z, t) - w2[t - 1] * lag);
            }
        }
        return e;
    }
};

double joint_logprob_impl(const PanelUnit& unit, const JointParams& params,
                          const ImprovedWeights* weights) {
    const JointEvaluator ev(unit, params, weights);
    const int T = unit.T();
    std::uint32_t yz = 0;
    for (int t = 1; t <= T; ++t)
        if (unit.y[t - 1]) yz |= (1u << (t - 1));

    const std::uint32_t count = 1u << T;
    double max_e = -HUGE_VAL;
    std::vector<double> es(count);
    for (std::uint32_t z = 0; z < count; ++z) {
        es[z] = ev.exponent(z);
        if (es[z] > max_e) max_e = es[z];
    }
    double denom = 0.0;
    for (std::uint32_t z = 0; z < count; ++z) denom += std::exp(es[z] - max_e);
    return es[yz] - (max_e + std::log(denom));
}

}  // namespace

ImprovedWeights improved_weights(const PanelUnit& unit, const std::vector<double>& beta_bar) {
    if (static_cast<int>(beta_bar.size()) != unit.k())
        throw std::invalid_argument("beta_bar dimension does not match the unit's covariates");
    ImprovedWeights w;
    w.beta_bar = beta_bar;
    w.q.resize(static_cast<std::size_t>(unit.T()));
    for (int t = 0; t < unit.T(); ++t) {
        double acc = 0.0;
        for (int j = 0; j < unit.k(); ++j) acc += unit.X(t, j) * beta_bar[j];
        w.q[t] = sigmoid(acc);
    }
    return w;
}

double joint_quadexp_logprob(const PanelUnit& unit, const JointParams& params) {
    return joint_logprob_impl(unit, params, nullptr);
}

double joint_quadexp_logprob(const PanelUnit& unit, const JointParams& params,
                             const ImprovedWeights& weights) {
    return joint_logprob_impl(unit, params, &weights);
}

double joint_dynamic_logit_logprob(const PanelUnit& unit, const JointParams& params) {
    const int T = unit.T();
    const int k = unit.k();
    if (static_cast<int>(params.theta.beta.size()) != k)
        throw std::invalid_argument("theta dimension does not match the unit's covariates");
    const bool two_lag = params.theta.gamma2.has_value();
    if (two_lag && !unit.y_minus1)
        throw DataError("two-lag model needs the unit's pre-sample response");

    double lp = 0.0;
    int prev = unit.y0;
    int prev2 = two_lag ? *unit.y_minus1 : 0;
    for (int t = 1; t <= T; ++t) {
        double eta = params.alpha + prev * params.theta.gamma;
        for (int j = 0; j < k; ++j) eta += unit.X(t - 1, j) * params.theta.beta[j];
        if (two_lag) eta += prev2 * *params.theta.gamma2;
        const int yt = unit.y[t - 1];
        lp += yt * eta - log1pexp(eta);
        prev2 = prev;
        prev = yt;
    }
    return lp;
}

double cond_logprob(const PanelUnit& unit, const Theta& theta, const KernelVariant& variant) {
    require_informative(unit);
    const CondEvaluator ev(unit, theta, variant);
    const ScoreClass& sc = score_class(ev.T, unit.y_plus());

    double max_e = -HUGE_VAL;
    std::vector<double> es(sc.size());
    for (std::size_t i = 0; i < sc.size(); ++i) {
        es[i] = ev.exponent(sc.configs[i]);
        if (es[i] > max_e) max_e = es[i];
    }
    double denom = 0.0;
    for (double e : es) denom += std::exp(e - max_e);
    return ev.exponent(ev.observed_mask(unit)) - (max_e + std::log(denom));
}

ScoreInfo unit_score_and_info(const PanelUnit& unit, const Theta& theta,
                              const KernelVariant& variant) {
    const CondEvaluator ev(unit, theta, variant);
    const int p = ev.p;
    ScoreInfo out;
    out.v.assign(static_cast<std::size_t>(p), 0.0);
    out.S = Matrix(static_cast<std::size_t>(p), static_cast<std::size_t>(p));

    const int yp = unit.y_plus();
    if (yp == 0 || yp == ev.T) return out;  // no information in a degenerate class

    const ScoreClass& sc = score_class(ev.T, yp);
    const std::size_t m = sc.size();

    std::vector<double> es(m);
    double max_e = -HUGE_VAL;
    for (std::size_t i = 0; i < m; ++i) {
        es[i] = ev.exponent(sc.configs[i]);
        if (es[i] > max_e) max_e = es[i];
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        es[i] = std::exp(es[i] - max_e);
        denom += es[i];
    }

    std::vector<double> u(static_cast<std::size_t>(p));
    std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        const double prob = es[i] / denom;
        ev.u_of(sc.configs[i], u.data());
        for (int j = 0; j < p; ++j) mean[j] += prob * u[j];
    }
    for (std::size_t i = 0; i < m; ++i) {
        const double prob = es[i] / denom;
        ev.u_of(sc.configs[i], u.data());
        for (int r = 0; r < p; ++r) {
            const double dr = u[r] - mean[r];
            for (int c = r; c < p; ++c)
                out.S(r, c) += prob * dr * (u[c] - mean[c]);
        }
    }
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < r; ++c) out.S(r, c) = out.S(c, r);

    ev.u_of(ev.observed_mask(unit), u.data());
    for (int j = 0; j < p; ++j) out.v[j] = u[j] - mean[j];
    return out;
}

LagLogits g_recursion_logits(const PanelUnit& unit, const JointParams& params) {
    const int T = unit.T();
    const int k = unit.k();
    if (static_cast<int>(params.theta.beta.size()) != k)
        throw std::invalid_argument("theta dimension does not match the unit's covariates");
    if (params.theta.gamma2)
        throw std::invalid_argument("the backward recursion covers one-lag models only");
    const double gamma = params.theta.gamma;

    // log delta_t(1): the final occasion drops the -0.5*gamma shift.
    std::vector<double> log_delta(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
        double acc = params.alpha;
        for (int j = 0; j < k; ++j) acc += unit.X(t - 1, j) * params.theta.beta[j];
        if (t < T) acc -= 0.5 * gamma;
        log_delta[t - 1] = acc;
    }

    LagLogits out;
    out.logits.assign(static_cast<std::size_t>(T), {0.0, 0.0});

    // log g_{t}(a), computed backward; g_{T+1} is identically 1.
    std::array<double, 2> log_g_next = {0.0, 0.0};
    for (int t = T; t >= 1; --t) {
        std::array<double, 2> log_g_here;
        for (int a = 0; a < 2; ++a) {
            const double log_eta1 = log_delta[t - 1] + a * gamma;
            out.logits[t - 1][a] = log_eta1 + log_g_next[1] - log_g_next[0];
            log_g_here[a] = logsumexp2(log_g_next[0], log_eta1 + log_g_next[1]);
        }
        log_g_next = log_g_here;
    }
    return out;
}

}  // namespace qelogit
