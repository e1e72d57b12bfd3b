#include "concmat/matrix.hpp"

#include "concmat/error.hpp"

#include <cmath>
#include <string>

namespace concmat {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), re_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw InvalidInput("matrix dimensions must be positive");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> real_entries)
    : rows_(rows), cols_(cols), re_(std::move(real_entries)) {
    if (rows == 0 || cols == 0) throw InvalidInput("matrix dimensions must be positive");
    if (re_.size() != rows * cols) {
        throw InvalidInput("expected " + std::to_string(rows * cols) + " entries, got " +
                           std::to_string(re_.size()));
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::span<const complex> entries)
    : Matrix(rows, cols) {
    if (entries.size() != rows * cols) {
        throw InvalidInput("expected " + std::to_string(rows * cols) + " entries, got " +
                           std::to_string(entries.size()));
    }
    for (std::size_t k = 0; k < entries.size(); ++k) {
        re_[k] = entries[k].real();
        if (entries[k].imag() != 0.0) {
            if (im_.empty()) im_.assign(re_.size(), 0.0);
            im_[k] = entries[k].imag();
        }
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1.0);
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d[i]);
    return m;
}

void Matrix::set(std::size_t i, std::size_t j, complex value) {
    re_[i * cols_ + j] = value.real();
    if (value.imag() != 0.0 && im_.empty()) im_.assign(re_.size(), 0.0);
    if (!im_.empty()) im_[i * cols_ + j] = value.imag();
}

Matrix Matrix::adjoint() const {
    Matrix t(cols_, rows_);
    if (!im_.empty()) t.im_.assign(re_.size(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            t.re_[j * rows_ + i] = re_[i * cols_ + j];
            if (!im_.empty()) t.im_[j * rows_ + i] = -im_[i * cols_ + j];
        }
    }
    return t;
}

double Matrix::frobenius() const {
    double scale = 0.0;
    for (double x : re_) scale = std::max(scale, std::abs(x));
    for (double x : im_) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : re_) s += (x / scale) * (x / scale);
    for (double x : im_) s += (x / scale) * (x / scale);
    return scale * std::sqrt(s);
}

bool Matrix::all_finite() const {
    for (double x : re_) {
        if (!std::isfinite(x)) return false;
    }
    for (double x : im_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

void Matrix::check_same_shape(const Matrix& other) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidInput("matrix shape mismatch");
    }
}

Matrix Matrix::operator+(const Matrix& other) const {
    check_same_shape(other);
    Matrix r = *this;
    for (std::size_t k = 0; k < re_.size(); ++k) r.re_[k] += other.re_[k];
    if (!other.im_.empty()) {
        if (r.im_.empty()) r.im_.assign(re_.size(), 0.0);
        for (std::size_t k = 0; k < re_.size(); ++k) r.im_[k] += other.im_[k];
    }
    return r;
}

Matrix Matrix::operator-(const Matrix& other) const { return *this + other * -1.0; }

Matrix Matrix::operator*(double s) const {
    Matrix r = *this;
    for (double& x : r.re_) x *= s;
    for (double& x : r.im_) x *= s;
    return r;
}

Matrix Matrix::matmul(const Matrix& other) const {
    if (cols_ != other.rows_) throw InvalidInput("matmul: inner dimensions differ");
    Matrix r(rows_, other.cols_);
    const bool cplx = !is_real() || !other.is_real();
    if (cplx) r.im_.assign(rows_ * other.cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = 0; k < cols_; ++k) {
            const double ar = real(i, k);
            const double ai = imag(i, k);
            for (std::size_t j = 0; j < other.cols_; ++j) {
                const double br = other.real(k, j);
                const double bi = other.imag(k, j);
                r.re_[i * other.cols_ + j] += ar * br - ai * bi;
                if (cplx) r.im_[i * other.cols_ + j] += ar * bi + ai * br;
            }
        }
    }
    return r;
}

}  // namespace concmat
