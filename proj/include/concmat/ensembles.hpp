#pragma once

#include "concmat/matrix.hpp"
#include "concmat/rng.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace concmat::ensembles {

/// Scalar entry distribution. Every kind except gaussian has bounded support
/// and an exact support diameter.
class BoundedLaw {
public:
    enum class Kind { rademacher, uniform, two_point, discrete, bernoulli01, complex_disc, gaussian };

    static BoundedLaw rademacher();
    static BoundedLaw uniform(double a, double b);
    /// v1 with probability `prob`, otherwise v2.
    static BoundedLaw two_point(double v1, double v2, double prob);
    static BoundedLaw discrete(std::vector<double> values, std::vector<double> probs);
    /// 1 with probability `prob`, otherwise 0.
    static BoundedLaw bernoulli01(double prob);
    /// Uniform on the closed complex disc of the given radius.
    static BoundedLaw complex_disc(double radius);
    /// Unbounded; only usable by Gaussian comparison experiments.
    static BoundedLaw gaussian(double mean, double variance);

    Kind kind() const { return kind_; }
    bool bounded() const { return kind_ != Kind::gaussian; }
    bool is_real() const { return kind_ != Kind::complex_disc; }
    /// Exact support diameter; +inf for gaussian.
    double diameter() const;
    /// Smallest interval containing the support of a real law.
    double support_lo() const;
    double support_hi() const;

    std::complex<double> sample(RngStream& rng) const;
    double sample_real(RngStream& rng) const;
    /// Exact membership in the support.
    bool in_support(std::complex<double> z) const;

    /// Parameters: uniform (a, b); two_point (v1, v2, prob); bernoulli01 (prob);
    /// complex_disc (radius); gaussian (mean, variance). Discrete laws use
    /// values() and probs().
    const std::vector<double>& params() const { return params_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }

    bool operator==(const BoundedLaw&) const = default;

private:
    BoundedLaw(Kind kind, std::vector<double> params) : kind_(kind), params_(std::move(params)) {}

    Kind kind_;
    std::vector<double> params_;
    std::vector<double> values_;
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

/// Off-diagonal entry law of a self-adjoint ensemble: either a law with
/// support of diameter at most D, or w (alpha + i beta) with |w| <= 1 and real
/// alpha, beta each supported in an interval of length at most D.
struct OffdiagLaw {
    enum class Mode { diameter_set, rotated_product };

    static OffdiagLaw direct(BoundedLaw law);
    static OffdiagLaw rotated(std::complex<double> w, BoundedLaw re_part, BoundedLaw im_part);

    std::complex<double> sample(RngStream& rng) const;
    /// D implied by this entry.
    double implied_diameter() const;
    bool bounded() const;

    Mode mode = Mode::diameter_set;
    BoundedLaw law = BoundedLaw::rademacher();
    std::complex<double> w{1.0, 0.0};
    BoundedLaw re_part = BoundedLaw::rademacher();
    BoundedLaw im_part = BoundedLaw::rademacher();

    bool operator==(const OffdiagLaw&) const = default;
};

struct EnsembleSpec {
    enum class Layout { rectangular, selfadjoint };

    /// i.i.d. entries from one law.
    static EnsembleSpec rectangular(std::size_t m, std::size_t n, BoundedLaw law);
    /// Independent entries, law (i, j) at index i * n + j.
    static EnsembleSpec rectangular_grid(std::size_t m, std::size_t n, std::vector<BoundedLaw> laws);
    /// Hermitian with real diagonal entries from `diag` and upper-triangle
    /// entries from `offdiag`.
    static EnsembleSpec selfadjoint(std::size_t n, BoundedLaw diag, OffdiagLaw offdiag);
    /// As above with one off-diagonal law per upper-triangle entry, in row-major
    /// order ((0,1), (0,2), ..., (1,2), ...).
    static EnsembleSpec selfadjoint_grid(std::size_t n, BoundedLaw diag, std::vector<OffdiagLaw> offdiag);

    bool bounded() const;

    std::size_t m = 1;
    std::size_t n = 1;
    Layout layout = Layout::rectangular;
    std::vector<BoundedLaw> laws;
    BoundedLaw diag_law = BoundedLaw::rademacher();
    std::vector<OffdiagLaw> offdiag;
};

Matrix sample_matrix(const EnsembleSpec& spec, RngStream& rng);
Matrix sample_selfadjoint(const EnsembleSpec& spec, RngStream& rng);
/// Dispatches on the layout.
Matrix sample(const EnsembleSpec& spec, RngStream& rng);

struct GaussianProfile {
    double diag_variance = 1.0;
    double offdiag_variance = 1.0;
    /// Variances within the comparison hypotheses (off-diagonal at most 1,
    /// diagonal at most sqrt 2).
    bool within_caps() const;
};

/// Real symmetric matrix with independent centered Gaussian entries on and
/// above the diagonal.
Matrix sample_gaussian_hermitian(std::size_t n, const GaussianProfile& profile, RngStream& rng);

/// Smallest D for which the spec meets the bounded-entry hypotheses:
/// rectangular entries of diameter <= D; self-adjoint diagonal interval length
/// <= sqrt 2 D and off-diagonal entries as in OffdiagLaw.
double effective_diameter(const EnsembleSpec& spec);

}  // namespace concmat::ensembles
