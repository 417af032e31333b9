#pragma once

#include <optional>
#include <vector>

#include "qelogit/estimators.hpp"
#include "qelogit/panel.hpp"

namespace qelogit {

enum class HkKernelShape { GaussianProduct, UniformWindow };

// Kernel weighting for the pairwise conditional estimator. The bandwidth is
// sigma_n = c * n^{-1/5} per covariate; by default c is 8 times the sample
// standard deviation of x_2 - x_3. A non-positive bandwidth degenerates to
// the exact-match indicator.
struct KernelSpec {
    HkKernelShape kernel = HkKernelShape::GaussianProduct;
    std::optional<double> c;
    // Drop pairs that touch the first response occasion (the stricter of the
    // two eligibility conventions; the default keeps 0 < s < t < T).
    bool strict_interior_pairs = false;
};

// Log-probability of the (ya, yb) leg of a swap pair given that exactly one
// of the two responses is positive and the in-between covariates match.
// Free of the individual effect by construction.
double hk_pair_logprob(int y0, int ya, int yb, int y_after,
                       const std::vector<double>& x_diff_1_2, const Theta& theta);

// Kernel-weighted pairwise conditional fit (needs T >= 3).
FitResult fit_hk(const PanelDataset& ds, const KernelSpec& kernel = {},
                 const SolverConfig& config = {});

}  // namespace qelogit
