#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace yescert {

// Dense real matrix, row-major. Rows and columns are always >= 1.
//
// Columns are samples throughout the library: X is n x d, Y is m x d.
class Matrix {
public:
    // rows x cols of zeros.
    Matrix(std::size_t rows, std::size_t cols);
    // Takes ownership of row-major `data`; validates size and finiteness.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    // Nested row lists, e.g. {{1, 2}, {3, 4}}.
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix identity(std::size_t n);
    static Matrix constant(std::size_t rows, std::size_t cols, double value);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    Matrix transpose() const;
    // Columns [first, first + count).
    Matrix col_block(std::size_t first, std::size_t count) const;
    // Columns picked by index, in the given order.
    Matrix gather_cols(std::span<const std::size_t> indices) const;
    // Rows [first, first + count).
    Matrix row_block(std::size_t first, std::size_t count) const;

    bool all_finite() const noexcept;
    std::string shape_string() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s) noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);

// a * b. Throws DimensionError naming both shapes when a.cols != b.rows.
Matrix matmul(const Matrix& a, const Matrix& b);
// a * b^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// a^T * b without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

double frob_norm_sq(const Matrix& a) noexcept;
double frob_norm(const Matrix& a) noexcept;
// ||a - b||_F^2; shapes must match.
double frob_dist_sq(const Matrix& a, const Matrix& b);

// Appends a row of ones (the augmented form used for bias terms).
Matrix augment_ones(const Matrix& y);
// Removes the last row; inverse of augment_ones.
Matrix drop_last_row(const Matrix& y);

struct SvdResult {
    Matrix u;              // rows x r, orthonormal columns
    std::vector<double> s; // r values, descending, >= 0
    Matrix v;              // cols x r, orthonormal columns
};

// Thin SVD, r = min(rows, cols). Householder QR followed by one-sided
// Jacobi on the triangular factor. Throws NumericalError on non-convergence.
SvdResult svd(const Matrix& a);

// Default singular-value cutoff: 1e-12 * max(rows, cols).
double default_rcond(const Matrix& a) noexcept;

// Moore-Penrose pseudoinverse; singular values <= rcond * s_max are zeroed.
Matrix pinv(const Matrix& a, double rcond);
Matrix pinv(const Matrix& a);

// Orthogonal projector onto the row space of a matrix, kept in factored
// form (an r x cols orthonormal basis) so that applying it to a target costs
// O(target.rows * cols * r) instead of forming the cols x cols projector.
class RowSpaceProjector {
public:
    // Keeps singular values above rcond * s_max.
    RowSpaceProjector(const Matrix& a, double rcond);

    std::size_t rank() const noexcept { return rank_; }
    std::size_t cols() const noexcept { return cols_; }

    // target * pinv(a) * a. Throws DimensionError when target.cols != a.cols.
    Matrix project(const Matrix& target) const;

private:
    std::size_t cols_;
    std::size_t rank_ = 0;
    std::vector<double> basis_; // rank_ x cols_, row-major, orthonormal rows
};

} // namespace yescert
