#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace concmat {

/// Dense m x n matrix with complex entries in row-major order.
///
/// Real matrices are stored without an imaginary plane; writing a nonzero
/// imaginary part promotes the matrix to complex storage. Algorithms use the
/// real fast path whenever is_real() holds.
class Matrix {
public:
    using complex = std::complex<double>;

    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> real_entries);
    Matrix(std::size_t rows, std::size_t cols, std::span<const complex> entries);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool is_real() const { return im_.empty(); }
    bool is_square() const { return rows_ == cols_; }

    complex operator()(std::size_t i, std::size_t j) const {
        return {re_[i * cols_ + j], im_.empty() ? 0.0 : im_[i * cols_ + j]};
    }
    double real(std::size_t i, std::size_t j) const { return re_[i * cols_ + j]; }
    double imag(std::size_t i, std::size_t j) const {
        return im_.empty() ? 0.0 : im_[i * cols_ + j];
    }

    void set(std::size_t i, std::size_t j, double value) { re_[i * cols_ + j] = value; }
    void set(std::size_t i, std::size_t j, complex value);

    std::span<const double> real_data() const { return re_; }
    std::span<const double> imag_data() const { return im_; }
    std::span<double> real_data() { return re_; }

    /// Conjugate transpose.
    Matrix adjoint() const;
    /// Entrywise (Hilbert-Schmidt) l2 norm.
    double frobenius() const;
    bool all_finite() const;

    Matrix operator+(const Matrix& other) const;
    Matrix operator-(const Matrix& other) const;
    Matrix operator*(double s) const;
    Matrix operator-() const { return *this * -1.0; }
    /// Matrix product.
    Matrix matmul(const Matrix& other) const;

    bool operator==(const Matrix& other) const = default;

private:
    void check_same_shape(const Matrix& other) const;

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> re_;
    std::vector<double> im_;
};

}  // namespace concmat
