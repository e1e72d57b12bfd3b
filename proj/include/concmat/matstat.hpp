#pragma once

#include "concmat/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace concmat::matstat {

/// Sorted nonincreasing eigenvalues or singular values, with multiplicity.
struct Spectrum {
    enum class Kind { eigenvalues, singular };
    Kind kind = Kind::eigenvalues;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

struct OpNormOptions {
    int random_starts = 16;
    int max_iterations = 500;
    double tolerance = 1e-12;
    std::uint64_t seed = 0x0b5e55edULL;
};

struct OpNormResult {
    /// Attained value ||A x||_q for a unit-l_p vector x: a certified lower
    /// bound on the true norm, equal to it when `exact` is set.
    double value = 0.0;
    bool exact = false;
    int iterations = 0;
};

/// ||A||_{p->q}. Closed forms for p = 1 (max column l_q norm), q = inf (max
/// row l_{p'} norm) and p = q = 2 (largest singular value); otherwise a
/// multi-start nonlinear power ascent (x <- J_{p'}(A* J_q(A x)), normalized in
/// l_p) that reports the best attained value. The norm is taken over the
/// scalar field of A: real vectors for a real matrix.
OpNormResult opnorm_pq(const Matrix& a, double p, double q, const OpNormOptions& options = {});

/// Brute-force maximization of ||A x||_q over the l_p unit sphere for real A
/// with at most 3 columns: an angular (n = 2) or spherical (n = 3) grid with
/// `resolution` steps per angle, then zooming local refinement around the best
/// grid points. Grid error is O(resolution^-2) before refinement; refinement
/// reaches the local maximum of the winning basin to ~1e-12.
double opnorm_pq_oracle(const Matrix& a, double p, double q, int resolution);

/// ||vec(A)||_r with r = min{p', q}; an upper bound on ||A||_{p->q} for
/// 1 < p <= 2 <= q < inf.
double hoelder_vec_bound(const Matrix& a, double p, double q);

/// || (||A_1||_{p'}, ..., ||A_m||_{p'}) ||_q over the rows A_j; the
/// intermediate Hoelder bound, sandwiched between the norm and the vec bound.
double hoelder_row_bound(const Matrix& a, double p, double q);

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi. Asymmetry up to 1e-12
/// (relative to the Frobenius norm) is symmetrized away; more is an error.
Spectrum eigvals_hermitian(const Matrix& a);

/// Singular values by one-sided (Hestenes) Jacobi; min{m, n} values.
Spectrum singular_values(const Matrix& a);

double schatten_norm(const Matrix& a, double p);
double kyfan_norm(const Matrix& a, std::size_t k);

/// F_k = sum of the k largest eigenvalues, G_k = sum of the k smallest.
struct PartialSums {
    double f = 0.0;
    double g = 0.0;
};
PartialSums partial_eig_sums(const Matrix& a, std::size_t k);

/// Sum of the k largest / k smallest entries of a sorted spectrum; k = 0
/// yields 0. Used by callers that already hold the spectrum.
double top_sum(const Spectrum& s, std::size_t k);
double bottom_sum(const Spectrum& s, std::size_t k);

}  // namespace concmat::matstat
