#pragma once

#include <cstddef>
#include <vector>

namespace qelogit {

// Dense row-major matrix. Dimensions here never exceed a handful of
// parameters, so everything below is plain O(n^3) with no blocking.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix identity(std::size_t n);

double dot(const std::vector<double>& a, const std::vector<double>& b);
double sup_norm(const std::vector<double>& v);

// Lower Cholesky factor of a symmetric matrix; false if not positive definite.
bool cholesky(const Matrix& a, Matrix& lower);

// Solve a x = b given the Cholesky factor of a.
std::vector<double> cholesky_solve(const Matrix& lower, const std::vector<double>& b);

// Inverse of a from its Cholesky factor.
Matrix cholesky_inverse(const Matrix& lower);

// Eigen decomposition of a symmetric matrix by cyclic Jacobi rotations.
struct EigenSym {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j pairs with values[j]
};
EigenSym jacobi_eigen(const Matrix& a);

}  // namespace qelogit
