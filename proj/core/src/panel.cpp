#include "qelogit/panel.hpp"

#include <cmath>

namespace qelogit {

std::vector<double> Theta::to_vector() const {
    std::vector<double> v = beta;
    v.push_back(gamma);
    if (gamma2) v.push_back(*gamma2);
    return v;
}

Theta Theta::from_vector(const std::vector<double>& v, std::size_t k, bool two_lag) {
    const std::size_t expect = k + 1 + (two_lag ? 1 : 0);
    if (v.size() != expect) throw std::invalid_argument("Theta::from_vector: size mismatch");
    Theta th;
    th.beta.assign(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k));
    th.gamma = v[k];
    if (two_lag) th.gamma2 = v[k + 1];
    return th;
}

Theta Theta::zero(std::size_t k, bool two_lag) {
    Theta th;
    th.beta.assign(k, 0.0);
    th.gamma = 0.0;
    if (two_lag) th.gamma2 = 0.0;
    return th;
}

int PanelUnit::y_plus() const {
    int s = 0;
    for (int v : y) s += v;
    return s;
}

SuffStats suff_stats(const PanelUnit& unit) {
    const int T = unit.T();
    const int k = unit.k();
    SuffStats s;
    s.y_plus = unit.y_plus();
    s.y_star = unit.y0 + s.y_plus - unit.y[T - 1];
    int prev = unit.y0;
    for (int t = 0; t < T; ++t) {
        s.y_cross += prev * unit.y[t];
        prev = unit.y[t];
    }
    s.D = Matrix(static_cast<std::size_t>(T - 1), static_cast<std::size_t>(k));
    for (int t = 1; t < T; ++t)
        for (int j = 0; j < k; ++j)
            s.D(t - 1, j) = unit.X(t, j) - unit.X(0, j);
    s.u.assign(static_cast<std::size_t>(k) + 1, 0.0);
    for (int t = 1; t < T; ++t)
        for (int j = 0; j < k; ++j)
            s.u[j] += unit.y[t] * s.D(t - 1, j);
    s.u[k] = -0.5 * s.y_star + s.y_cross;
    return s;
}

bool PanelDataset::has_lag2_initials() const {
    if (units.empty()) return false;
    for (const auto& u : units)
        if (!u.y_minus1) return false;
    return true;
}

void validate_dataset(const PanelDataset& ds) {
    if (ds.units.empty()) throw DataError("dataset is empty");
    if (ds.T < 2) throw DataError("panels need at least two response occasions");
    for (std::size_t i = 0; i < ds.units.size(); ++i) {
        const PanelUnit& u = ds.units[i];
        if (u.T() != ds.T || u.k() != ds.k)
            throw DataError("unit " + std::to_string(i) + ": unbalanced panel (T or k differs)");
        if (static_cast<int>(u.X.rows()) != ds.T)
            throw DataError("unit " + std::to_string(i) + ": covariate rows do not match T");
        if (u.y0 != 0 && u.y0 != 1)
            throw DataError("unit " + std::to_string(i) + ": non-binary initial response");
        for (int v : u.y)
            if (v != 0 && v != 1)
                throw DataError("unit " + std::to_string(i) + ": non-binary response");
        for (std::size_t j = 0; j < u.X.rows() * u.X.cols(); ++j)
            if (!std::isfinite(u.X.data()[j]))
                throw DataError("unit " + std::to_string(i) + ": non-finite covariate");
    }
    if (static_cast<int>(ds.labels.size()) != ds.k)
        throw DataError("covariate label count does not match k");
}

PanelDataset with_lag2_initials(const PanelDataset& ds) {
    if (ds.T < 3)
        throw DataError("re-basing for two-lag estimation needs T >= 3");
    PanelDataset out;
    out.labels = ds.labels;
    out.T = ds.T - 1;
    out.k = ds.k;
    out.units.reserve(ds.units.size());
    for (const PanelUnit& u : ds.units) {
        PanelUnit w;
        w.id = u.id;
        w.y_minus1 = u.y0;
        w.x_minus1 = u.x0;
        w.y0 = u.y[0];
        w.x0.resize(static_cast<std::size_t>(ds.k));
        for (int j = 0; j < ds.k; ++j) w.x0[j] = u.X(0, j);
        w.y.assign(u.y.begin() + 1, u.y.end());
        w.X = Matrix(static_cast<std::size_t>(out.T), static_cast<std::size_t>(ds.k));
        for (int t = 1; t < ds.T; ++t)
            for (int j = 0; j < ds.k; ++j)
                w.X(t - 1, j) = u.X(t, j);
        out.units.push_back(std::move(w));
    }
    return out;
}

}  // namespace qelogit
