#pragma once

#include <cstdint>
#include <string>

#include "qelogit/panel.hpp"
#include "qelogit/rng.hpp"

namespace qelogit {

enum class DesignFamily { Benchmark, Chi2Regressor, AdditionalRegressors, Trending };

std::string family_name(DesignFamily f);
DesignFamily family_from_name(const std::string& name);

// A declarative Monte-Carlo design. Covariates are scaled to the logistic
// error variance pi^2/3 in every family; the individual effect is the
// average of a unit's covariate draws, so heterogeneity and covariates are
// positively dependent by construction.
struct DesignSpec {
    DesignFamily family = DesignFamily::Benchmark;
    int n = 0;
    int T = 0;
    double gamma = 0.0;
    double beta = 1.0;
    std::uint64_t seed = 0;
    int replications = 0;
    double phi = 1.0;  // trending family scale
    double psi = 0.0;  // trending family offset

    int k() const { return family == DesignFamily::AdditionalRegressors ? 4 : 1; }
};

void validate(const DesignSpec& spec);

DesignSpec design_from_json_file(const std::string& path);
DesignSpec design_from_json_text(const std::string& text);
std::string design_to_json_text(const DesignSpec& spec);

// True structural parameters of a design (nuisance covariates get zeros).
Theta true_theta(const DesignSpec& spec);

// Draws the response path given everything else: sequential logistic
// thresholds with state dependence.
PanelUnit simulate_unit(double alpha, const Matrix& X, int y0, const Theta& theta, Rng& rng);

// One replication of a design; deterministic in (spec.seed, rep).
PanelDataset generate(const DesignSpec& spec, int rep);

}  // namespace qelogit
