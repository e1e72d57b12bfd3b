#pragma once

#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace concmat::vecnorms {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Conjugate exponent p' = p/(p-1), with 1' = inf and inf' = 1.
double conjugate(double p);

/// (sum |v_j|^p)^(1/p), or max |v_j| when p is infinite. Throws
/// InvalidParameter for p < 1.
double lp_norm(std::span<const double> v, double p);
double lp_norm(std::span<const std::complex<double>> v, double p);

/// Positive, nonincreasing weight sequence of a Lorentz norm.
class LorentzWeights {
public:
    explicit LorentzWeights(std::vector<double> w);

    std::span<const double> values() const { return w_; }
    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }

private:
    std::vector<double> w_;
};

/// Convex nondecreasing psi: [0, inf) -> [0, inf) with psi(0) = 0 and
/// psi(t) -> inf. Construction validates these properties and throws
/// InvalidParameter otherwise.
class OrliczFunction {
public:
    enum class Kind { power, scaled_power, piecewise_linear };

    /// psi(t) = t^p, p >= 1.
    static OrliczFunction power(double p);
    /// psi(t) = c * t^p, c > 0, p >= 1.
    static OrliczFunction scaled_power(double c, double p);
    /// Linear interpolation through (0,0) and the given (t, psi(t)) knots,
    /// continued past the last knot with the last slope.
    static OrliczFunction piecewise_linear(std::vector<std::pair<double, double>> knots);

    double operator()(double t) const;
    /// Right derivative.
    double derivative(double t) const;

    Kind kind() const { return kind_; }
    double coefficient() const { return coef_; }
    double exponent() const { return exp_; }
    std::span<const std::pair<double, double>> knots() const { return knots_; }

private:
    OrliczFunction(Kind kind, double coef, double exp,
                   std::vector<std::pair<double, double>> knots);
    void validate() const;

    Kind kind_;
    double coef_ = 1.0;
    double exp_ = 1.0;
    std::vector<std::pair<double, double>> knots_;
};

double lorentz_norm(std::span<const double> v, const LorentzWeights& w, double p);
double orlicz_norm(std::span<const double> v, const OrliczFunction& psi);

/// A 1-unconditional norm on R^N: l_q, Lorentz l_{w,p}, or Orlicz l_psi.
class UnconditionalNorm {
public:
    enum class Kind { lq, lorentz, orlicz };

    static UnconditionalNorm lq(double q, std::size_t dim);
    static UnconditionalNorm lorentz(LorentzWeights w, double p);
    static UnconditionalNorm orlicz(OrliczFunction psi, std::size_t dim);

    double operator()(std::span<const double> v) const;

    /// A subgradient of the norm at v (the zero vector at v = 0).
    std::vector<double> gradient(std::span<const double> v) const;

    Kind kind() const { return kind_; }
    std::size_t dimension() const { return dim_; }
    /// q for l_q, p for Lorentz; unused for Orlicz.
    double exponent() const { return exp_; }
    const LorentzWeights& weights() const { return *weights_; }
    const OrliczFunction& psi() const { return *psi_; }

private:
    UnconditionalNorm(Kind kind, std::size_t dim, double exp);

    Kind kind_;
    std::size_t dim_;
    double exp_;
    std::optional<LorentzWeights> weights_;
    std::optional<OrliczFunction> psi_;
};

/// K_E(t) = inf{ |x|_2 : ||x||_E >= t, ||x||_inf <= 1 }, +inf when the
/// feasible set is empty.
///
/// l_q and Lorentz norms are solved exactly. With exponent >= 2 the squared
/// coordinates enter the constraint convexly, so the optimum sits at a vertex
/// (1,...,1, c,...,c, 0,...,0) of the ordered box slice and all such vertices
/// are enumerated. With exponent < 2 the constraint is concave in the squared
/// coordinates and the KKT point is a capped water-filling profile.
/// Orlicz norms combine the same vertex family with multi-start local search;
/// the result is then the best feasible value found, an upper estimate.
double ke_numeric(const UnconditionalNorm& norm, double t);

/// Closed-form lower bounds on K_E(t):
///   l_q (q >= 2):       t^{q/2}
///   Lorentz (w, p):     ||w||_r^{-r'/2} t^{p r'/2}, r supplied, max{1,2/p} <= r' < inf
///   Orlicz psi:         inf_{0<u<=1} u / sqrt(psi(u/t))
double ke_bound(const UnconditionalNorm& norm, double t,
                std::optional<double> r = std::nullopt);

}  // namespace concmat::vecnorms
