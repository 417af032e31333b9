#pragma once

#include <optional>
#include <vector>

#include "qelogit/panel.hpp"
#include "qelogit/quadexp.hpp"

namespace qelogit {

struct SolverConfig {
    double tol_grad = 1e-8;   // sup-norm of the score at convergence
    double tol_step = 1e-10;  // fallback stop on the Newton step size
    int max_iter = 100;
    std::optional<Theta> start;  // zero vector when absent
};

// How the refined conditional likelihood handles its expansion point: held
// fixed, or refreshed from the current beta at every iteration.
struct ImprovedMode {
    enum class Kind { Fixed, Dynamic };
    Kind kind = Kind::Dynamic;
    std::vector<double> beta_bar;

    static ImprovedMode fixed(std::vector<double> beta_bar) {
        return {Kind::Fixed, std::move(beta_bar)};
    }
    static ImprovedMode dynamic() { return {Kind::Dynamic, {}}; }
};

// Conditional maximum likelihood under the expansion at zero. The objective
// is globally concave; Newton steps are safeguarded by halving.
FitResult fit_basic(const PanelDataset& ds, const SolverConfig& config = {});

FitResult fit_improved(const PanelDataset& ds, const ImprovedMode& mode,
                       const SolverConfig& config = {});

// Default refined pipeline: fit the basic estimator, seed the expansion
// point with its beta, then iterate with dynamic weights.
FitResult fit_improved(const PanelDataset& ds, const SolverConfig& config = {});

// Two-lag state dependence. Units must carry the pre-sample response.
FitResult fit_two_lag_basic(const PanelDataset& ds, const SolverConfig& config = {});
FitResult fit_two_lag(const PanelDataset& ds, const ImprovedMode& mode,
                      const SolverConfig& config = {});
FitResult fit_two_lag(const PanelDataset& ds, const SolverConfig& config = {});

// Normal-approximation intervals; refuses non-converged fits.
std::vector<ConfInterval> confidence_interval(const FitResult& result, double level);

struct WaldTest {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Tests whether the second state-dependence lag vanishes.
WaldTest wald_test_gamma2(const FitResult& result);

}  // namespace qelogit
