#pragma once

#include <array>
#include <vector>

#include "qelogit/panel.hpp"
#include "qelogit/score_class.hpp"

namespace qelogit {

// Parameters of a joint (per-unit) model: the individual effect plus the
// structural parameters.
struct JointParams {
    double alpha = 0.0;
    Theta theta;
};

// Occasion-level success probabilities q_t = sigmoid(x_t' beta_bar), the
// expansion point of the refined approximation. beta_bar = 0 gives q_t = 0.5
// and collapses the refined kernels onto the basic ones.
struct ImprovedWeights {
    std::vector<double> q;
    std::vector<double> beta_bar;
};

ImprovedWeights improved_weights(const PanelUnit& unit, const std::vector<double>& beta_bar);

// Selects which conditional kernel to evaluate. A null weights pointer means
// the expansion at zero, whose lag corrections are the constant 0.5.
struct KernelVariant {
    bool two_lag = false;
    const ImprovedWeights* weights = nullptr;

    static KernelVariant basic() { return {}; }
    static KernelVariant improved(const ImprovedWeights& w) { return {false, &w}; }
    static KernelVariant basic_two_lag() { return {true, nullptr}; }
    static KernelVariant improved_two_lag(const ImprovedWeights& w) { return {true, &w}; }
};

// --- Joint models (denominator over all 2^T configurations) ---------------

// Quadratic-exponential approximation of the dynamic logit joint law.
// Handles the two-lag form when theta.gamma2 is set (the unit must then
// carry its pre-sample response).
double joint_quadexp_logprob(const PanelUnit& unit, const JointParams& params);
double joint_quadexp_logprob(const PanelUnit& unit, const JointParams& params,
                             const ImprovedWeights& weights);

// Exact dynamic logit joint law: the product of per-occasion logits.
double joint_dynamic_logit_logprob(const PanelUnit& unit, const JointParams& params);

// --- Conditional kernels (given the total score) ---------------------------

// Log-probability of the observed path within its score class. Throws
// DegenerateClassError when y_+ is 0 or T.
double cond_logprob(const PanelUnit& unit, const Theta& theta, const KernelVariant& variant);

inline double cond_logprob_basic(const PanelUnit& unit, const Theta& theta) {
    return cond_logprob(unit, theta, KernelVariant::basic());
}
inline double cond_logprob_improved(const PanelUnit& unit, const Theta& theta,
                                    const ImprovedWeights& weights) {
    return cond_logprob(unit, theta, KernelVariant::improved(weights));
}

// First derivative vector and information contribution of one unit. The
// information is the conditional covariance of the sufficient statistic over
// the score class, hence symmetric positive semidefinite. Degenerate classes
// return zeros.
struct ScoreInfo {
    std::vector<double> v;
    Matrix S;
};

ScoreInfo unit_score_and_info(const PanelUnit& unit, const Theta& theta,
                              const KernelVariant& variant);

// --- Sequential-factorization oracle ---------------------------------------

// Conditional logits of y_t given the past under the quadratic-exponential
// joint model, computed by backward recursion. logits[t-1][a] is the logit
// of y_t when y_{t-1} = a; at t = T it equals alpha + x_T'beta + a*gamma
// identically. One-lag models only.
struct LagLogits {
    std::vector<std::array<double, 2>> logits;
};

LagLogits g_recursion_logits(const PanelUnit& unit, const JointParams& params);

}  // namespace qelogit
