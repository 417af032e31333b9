#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qelogit/linalg.hpp"

namespace qelogit {

// Malformed input data (files, design configs, contract violations at the
// data boundary). The CLI maps this to exit code 1.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A requested enumeration exceeds the hard size cap.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A parameter direction carries no information (exit code 2).
struct IdentificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton iteration exhausted its budget (exit code 3).
struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, std::vector<double> trace)
        : std::runtime_error(what), loglik_trace(std::move(trace)) {}
    std::vector<double> loglik_trace;
};

// Response configuration with y_+ equal to 0 or T; such a unit contributes
// nothing to the conditional likelihood.
struct DegenerateClassError : std::logic_error {
    using std::logic_error::logic_error;
};

// Structural parameters: covariate effects plus the state-dependence
// coefficient(s). gamma2 is present only for the two-lag model.
struct Theta {
    std::vector<double> beta;
    double gamma = 0.0;
    std::optional<double> gamma2;

    std::size_t dim() const { return beta.size() + 1 + (gamma2 ? 1 : 0); }

    std::vector<double> to_vector() const;
    static Theta from_vector(const std::vector<double>& v, std::size_t k, bool two_lag);
    static Theta zero(std::size_t k, bool two_lag = false);
};

// One subject: initial response(s), the response path y_1..y_T and the
// covariate rows observed at occasions 1..T. The initial-occasion covariates
// are kept so a simulated panel round-trips through CSV, but they never
// enter estimation. Immutable once built; safe to share across threads.
struct PanelUnit {
    std::string id;
    int y0 = 0;
    std::vector<int> y;
    Matrix X;                                     // T x k, row t-1 holds x_t
    std::vector<double> x0;                       // covariates at time 0
    std::optional<int> y_minus1;                  // pre-sample response (two-lag data)
    std::optional<std::vector<double>> x_minus1;  // covariates at time -1

    bool operator==(const PanelUnit&) const = default;

    int T() const { return static_cast<int>(y.size()); }
    int k() const { return static_cast<int>(X.cols()); }
    int y_plus() const;
    bool informative() const {
        const int p = y_plus();
        return p > 0 && p < T();
    }
};

// Per-unit sufficient statistics of the approximate conditional likelihood.
struct SuffStats {
    int y_plus = 0;
    int y_star = 0;   // y_0 + y_+ - y_T
    int y_cross = 0;  // number of adjacent (1,1) pairs, counting (y_0,y_1)
    Matrix D;         // (T-1) x k, row t-2 holds x_t - x_1
    std::vector<double> u;  // (sum_{t>1} y_t d_t', -0.5 y_star + y_cross)'
};

SuffStats suff_stats(const PanelUnit& unit);

struct PanelDataset {
    std::vector<PanelUnit> units;
    std::vector<std::string> labels;  // covariate names, length k
    int T = 0;
    int k = 0;

    bool operator==(const PanelDataset&) const = default;

    std::size_t n() const { return units.size(); }
    bool has_lag2_initials() const;
};

// Validates shape invariants shared by every construction path.
void validate_dataset(const PanelDataset& ds);

// Re-bases a one-lag panel for two-lag estimation: occasion 1 becomes the
// second initial condition and T shrinks by one.
PanelDataset with_lag2_initials(const PanelDataset& ds);

struct FitResult {
    Theta theta_hat;
    std::vector<double> se;
    Matrix info;                       // observed information at theta_hat
    double loglik = 0.0;
    std::vector<double> loglik_trace;  // objective per accepted iteration
    int iterations = 0;
    std::size_t actual_n = 0;          // informative units (or pairs)
    std::size_t nominal_terms = 0;     // n, or n * eligible pairs
    bool converged = false;
    std::vector<std::string> param_names;
};

struct ConfInterval {
    std::string name;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

}  // namespace qelogit
