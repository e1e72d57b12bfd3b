#include "concmat/vecnorms.hpp"

#include "concmat/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>

namespace concmat::vecnorms {

namespace {

void check_exponent(double p, const char* what) {
    if (!(p >= 1.0)) {
        throw InvalidParameter(std::string(what) + " must be >= 1, got " + std::to_string(p));
    }
}

template <typename Abs>
double lp_impl(std::size_t n, Abs abs_at, double p) {
    check_exponent(p, "exponent p");
    if (std::isinf(p)) {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, abs_at(j));
        return m;
    }
    // Scale by the max modulus so large or tiny entries neither overflow nor
    // underflow when raised to the p-th power.
    double scale = 0.0;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, abs_at(j));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    if (p == 1.0) {
        for (std::size_t j = 0; j < n; ++j) s += abs_at(j);
        return s;
    }
    if (p == 2.0) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = abs_at(j) / scale;
            s += a * a;
        }
        return scale * std::sqrt(s);
    }
    for (std::size_t j = 0; j < n; ++j) s += std::pow(abs_at(j) / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Deterministic uniform doubles for the Orlicz local search starts.
double unit_double(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

}  // namespace

double conjugate(double p) {
    check_exponent(p, "exponent");
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

double lp_norm(std::span<const double> v, double p) {
    return lp_impl(v.size(), [&](std::size_t j) { return std::abs(v[j]); }, p);
}

double lp_norm(std::span<const std::complex<double>> v, double p) {
    return lp_impl(v.size(), [&](std::size_t j) { return std::abs(v[j]); }, p);
}

// ---------------------------------------------------------------------------
// LorentzWeights

LorentzWeights::LorentzWeights(std::vector<double> w) : w_(std::move(w)) {
    if (w_.empty()) throw InvalidParameter("Lorentz weights must be nonempty");
    for (std::size_t j = 0; j < w_.size(); ++j) {
        if (!(w_[j] > 0.0) || !std::isfinite(w_[j])) {
            throw InvalidParameter("Lorentz weights must be finite and positive");
        }
        if (j > 0 && w_[j] > w_[j - 1]) {
            throw InvalidParameter("Lorentz weights must be nonincreasing");
        }
    }
}

// ---------------------------------------------------------------------------
// OrliczFunction

OrliczFunction::OrliczFunction(Kind kind, double coef, double exp,
                               std::vector<std::pair<double, double>> knots)
    : kind_(kind), coef_(coef), exp_(exp), knots_(std::move(knots)) {
    validate();
}

OrliczFunction OrliczFunction::power(double p) {
    check_exponent(p, "Orlicz power");
    if (std::isinf(p)) throw InvalidParameter("Orlicz power must be finite");
    return OrliczFunction(Kind::power, 1.0, p, {});
}

OrliczFunction OrliczFunction::scaled_power(double c, double p) {
    check_exponent(p, "Orlicz power");
    if (std::isinf(p)) throw InvalidParameter("Orlicz power must be finite");
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParameter("Orlicz scale must be positive");
    return OrliczFunction(Kind::scaled_power, c, p, {});
}

OrliczFunction OrliczFunction::piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw InvalidParameter("piecewise-linear Orlicz function needs knots");
    double prev_t = 0.0;
    double prev_v = 0.0;
    double prev_slope = 0.0;
    for (const auto& [t, v] : knots) {
        if (!(t > prev_t) || !std::isfinite(t) || !std::isfinite(v)) {
            throw InvalidParameter("Orlicz knots must have strictly increasing positive abscissae");
        }
        const double slope = (v - prev_v) / (t - prev_t);
        if (slope < prev_slope - 1e-12 * std::max(1.0, std::abs(prev_slope))) {
            throw InvalidParameter("piecewise-linear Orlicz function is not convex");
        }
        prev_t = t;
        prev_v = v;
        prev_slope = slope;
    }
    if (!(prev_slope > 0.0)) {
        throw InvalidParameter("piecewise-linear Orlicz function must be unbounded");
    }
    return OrliczFunction(Kind::piecewise_linear, 1.0, 1.0, std::move(knots));
}

double OrliczFunction::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind_) {
        case Kind::power:
            return std::pow(t, exp_);
        case Kind::scaled_power:
            return coef_ * std::pow(t, exp_);
        case Kind::piecewise_linear: {
            double t0 = 0.0;
            double v0 = 0.0;
            for (std::size_t i = 0; i < knots_.size(); ++i) {
                const auto [t1, v1] = knots_[i];
                if (t <= t1 || i + 1 == knots_.size()) {
                    return v0 + (v1 - v0) / (t1 - t0) * (t - t0);
                }
                t0 = t1;
                v0 = v1;
            }
            return v0;
        }
    }
    return 0.0;
}

double OrliczFunction::derivative(double t) const {
    t = std::max(t, 0.0);
    switch (kind_) {
        case Kind::power:
        case Kind::scaled_power:
            if (exp_ == 1.0) return coef_;
            return coef_ * exp_ * std::pow(t, exp_ - 1.0);
        case Kind::piecewise_linear: {
            double t0 = 0.0;
            double v0 = 0.0;
            for (std::size_t i = 0; i < knots_.size(); ++i) {
                const auto [t1, v1] = knots_[i];
                if (t < t1 || i + 1 == knots_.size()) return (v1 - v0) / (t1 - t0);
                t0 = t1;
                v0 = v1;
            }
            return 0.0;
        }
    }
    return 0.0;
}

void OrliczFunction::validate() const {
    // Midpoint convexity and monotonicity on a 64-point geometric grid.
    constexpr int kGrid = 64;
    constexpr double kTol = 1e-10;
    std::array<double, kGrid> t{};
    std::array<double, kGrid> v{};
    for (int i = 0; i < kGrid; ++i) {
        t[i] = 1e-4 * std::pow(1e8, static_cast<double>(i) / (kGrid - 1));
        v[i] = (*this)(t[i]);
        if (!(v[i] >= 0.0) || !std::isfinite(v[i])) {
            throw InvalidParameter("Orlicz function must be finite and nonnegative");
        }
    }
    for (int i = 0; i < kGrid; ++i) {
        const double scale = 1.0 + std::abs(v[i]);
        if (i > 0 && v[i] < v[i - 1] - kTol * scale) {
            throw InvalidParameter("Orlicz function must be nondecreasing");
        }
        for (int j = i + 1; j < std::min(kGrid, i + 3); ++j) {
            const double mid = (*this)(0.5 * (t[i] + t[j]));
            if (mid > 0.5 * (v[i] + v[j]) + kTol * (1.0 + v[j])) {
                throw InvalidParameter("Orlicz function fails the midpoint convexity test");
            }
        }
        if ((*this)(0.5 * t[i]) > 0.5 * v[i] + kTol * scale) {
            throw InvalidParameter("Orlicz function fails the midpoint convexity test");
        }
    }
    if (!(v[kGrid - 1] > v[0])) {
        throw InvalidParameter("Orlicz function must be unbounded");
    }
}

// ---------------------------------------------------------------------------
// Norm evaluation

double lorentz_norm(std::span<const double> v, const LorentzWeights& w, double p) {
    if (v.size() != w.size()) {
        throw InvalidParameter("Lorentz norm: vector length " + std::to_string(v.size()) +
                               " != weight length " + std::to_string(w.size()));
    }
    check_exponent(p, "Lorentz exponent");
    if (std::isinf(p)) throw InvalidParameter("Lorentz exponent must be finite");
    std::vector<double> a(v.size());
    std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::abs(x); });
    std::sort(a.begin(), a.end(), std::greater<>());
    if (a.empty() || a.front() == 0.0) return 0.0;
    const double scale = a.front();
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += w[j] * std::pow(a[j] / scale, p);
    return scale * std::pow(s, 1.0 / p);
}

double orlicz_norm(std::span<const double> v, const OrliczFunction& psi) {
    double amax = 0.0;
    for (double x : v) amax = std::max(amax, std::abs(x));
    if (amax == 0.0) return 0.0;
    auto level = [&](double rho) {
        double s = 0.0;
        for (double x : v) s += psi(std::abs(x) / rho);
        return s;
    };
    // level(rho) is nonincreasing in rho; bracket the crossing of 1.
    double hi = amax;
    while (level(hi) > 1.0) hi *= 2.0;
    double lo = hi;
    while (level(lo) <= 1.0 && lo > amax * 1e-300) lo *= 0.5;
    for (int it = 0; it < 200 && (hi - lo) > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (level(mid) <= 1.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

// ---------------------------------------------------------------------------
// UnconditionalNorm

UnconditionalNorm::UnconditionalNorm(Kind kind, std::size_t dim, double exp)
    : kind_(kind), dim_(dim), exp_(exp) {
    if (dim == 0) throw InvalidParameter("norm dimension must be positive");
}

UnconditionalNorm UnconditionalNorm::lq(double q, std::size_t dim) {
    check_exponent(q, "l_q exponent");
    return UnconditionalNorm(Kind::lq, dim, q);
}

UnconditionalNorm UnconditionalNorm::lorentz(LorentzWeights w, double p) {
    check_exponent(p, "Lorentz exponent");
    if (std::isinf(p)) throw InvalidParameter("Lorentz exponent must be finite");
    UnconditionalNorm n(Kind::lorentz, w.size(), p);
    n.weights_ = std::move(w);
    return n;
}

UnconditionalNorm UnconditionalNorm::orlicz(OrliczFunction psi, std::size_t dim) {
    UnconditionalNorm n(Kind::orlicz, dim, 1.0);
    n.psi_ = std::move(psi);
    return n;
}

double UnconditionalNorm::operator()(std::span<const double> v) const {
    if (v.size() != dim_) {
        throw InvalidParameter("vector length " + std::to_string(v.size()) +
                               " != norm dimension " + std::to_string(dim_));
    }
    switch (kind_) {
        case Kind::lq:
            return lp_norm(v, exp_);
        case Kind::lorentz:
            return lorentz_norm(v, *weights_, exp_);
        case Kind::orlicz:
            return orlicz_norm(v, *psi_);
    }
    return 0.0;
}

std::vector<double> UnconditionalNorm::gradient(std::span<const double> v) const {
    std::vector<double> g(v.size(), 0.0);
    const double nv = (*this)(v);
    if (nv == 0.0) return g;
    switch (kind_) {
        case Kind::lq: {
            if (std::isinf(exp_)) {
                const auto it = std::max_element(v.begin(), v.end(), [](double a, double b) {
                    return std::abs(a) < std::abs(b);
                });
                const auto j = static_cast<std::size_t>(it - v.begin());
                g[j] = sign(v[j]);
                break;
            }
            for (std::size_t j = 0; j < v.size(); ++j) {
                g[j] = sign(v[j]) * std::pow(std::abs(v[j]) / nv, exp_ - 1.0);
            }
            break;
        }
        case Kind::lorentz: {
            std::vector<std::size_t> order(v.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(v[a]) > std::abs(v[b]);
            });
            for (std::size_t r = 0; r < order.size(); ++r) {
                const std::size_t j = order[r];
                g[j] = (*weights_)[r] * sign(v[j]) * std::pow(std::abs(v[j]) / nv, exp_ - 1.0);
            }
            break;
        }
        case Kind::orlicz: {
            double denom = 0.0;
            for (double x : v) denom += psi_->derivative(std::abs(x) / nv) * std::abs(x) / nv;
            if (denom <= 0.0) break;
            for (std::size_t j = 0; j < v.size(); ++j) {
                g[j] = sign(v[j]) * psi_->derivative(std::abs(v[j]) / nv) / denom;
            }
            break;
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// K_E

namespace {

// Relative slack when comparing a candidate's norm against t. Without it
// t = k^{1/q} rounds to slightly above ||(1^k, 0...)||_q and the enumeration
// picks a spurious tiny fractional coordinate.
constexpr double kConstraintSlack = 1e-12;

// Exact K for sum_j w_j a_j^p >= T with exponent p >= 2: enumerate vertices
// (1^k, c^m, 0^{N-k-m}) of the ordered box slice.
double ke_vertex_enumeration(std::span<const double> w, double p, double target) {
    const std::size_t n = w.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + w[j];
    double best = kInf;
    for (std::size_t k = 0; k <= n; ++k) {
        if (prefix[k] >= target * (1.0 - kConstraintSlack)) {
            best = std::min(best, static_cast<double>(k));
            break;  // larger k only adds ones
        }
        for (std::size_t m = 1; k + m <= n; ++m) {
            const double wm = prefix[k + m] - prefix[k];
            const double cp = (target - prefix[k]) / wm;
            if (cp > 1.0) continue;
            const double c = std::pow(cp, 1.0 / p);
            best = std::min(best, static_cast<double>(k) + static_cast<double>(m) * c * c);
        }
    }
    return std::sqrt(best);
}

// Exact K for exponent p < 2: b_j = min(1, kappa * w_j^{2/(2-p)}) with kappa
// chosen so the constraint is tight.
double ke_water_filling(std::span<const double> w, double p, double target) {
    const double e = 2.0 / (2.0 - p);
    std::vector<double> omega(w.size());
    std::transform(w.begin(), w.end(), omega.begin(), [&](double x) { return std::pow(x, e); });
    auto profile = [&](double kappa, double& mass) {
        double g = 0.0;
        mass = 0.0;
        for (std::size_t j = 0; j < w.size(); ++j) {
            const double b = std::min(1.0, kappa * omega[j]);
            mass += b;
            g += w[j] * std::pow(b, 0.5 * p);
        }
        return g;
    };
    double lo = 0.0;
    double hi = 1.0 / *std::min_element(omega.begin(), omega.end());
    double mass = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (profile(mid, mass) >= target) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 1e-16 * hi) break;
    }
    profile(hi, mass);
    return std::sqrt(mass);
}

class OrliczKe {
public:
    OrliczKe(const OrliczFunction& psi, std::size_t n, double t) : psi_(psi), n_(n), t_(t) {}

    double level(std::span<const double> x) const {
        double s = 0.0;
        for (double v : x) s += psi_(v / t_);
        return s;
    }

    // Smallest c in [0,1] with k*psi(1/t) + m*psi(c/t) >= 1, if any.
    std::optional<double> fractional(std::size_t k, std::size_t m) const {
        const double ones = static_cast<double>(k) * psi_(1.0 / t_);
        const double need = (1.0 - ones) / static_cast<double>(m);
        if (psi_(1.0 / t_) < need) return std::nullopt;
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 100; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (psi_(mid / t_) >= need) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return hi;
    }

    double structured() const {
        double best = kInf;
        const double one = psi_(1.0 / t_);
        for (std::size_t k = 0; k <= n_; ++k) {
            if (static_cast<double>(k) * one >= 1.0 - kConstraintSlack) {
                best = std::min(best, static_cast<double>(k));
                break;
            }
            for (std::size_t m = 1; k + m <= n_; ++m) {
                if (auto c = fractional(k, m)) {
                    best = std::min(best, static_cast<double>(k) + static_cast<double>(m) * *c * *c);
                }
            }
        }
        return best;
    }

    // Scale x radially (clipping at 1) onto the constraint boundary.
    bool retract(std::vector<double>& x) const {
        std::vector<double> y(x.size());
        auto at = [&](double s) {
            for (std::size_t j = 0; j < x.size(); ++j) y[j] = std::min(1.0, s * x[j]);
            return level(y);
        };
        double hi = 1.0;
        int grow = 0;
        while (at(hi) < 1.0) {
            hi *= 2.0;
            if (++grow > 80) return false;
        }
        double lo = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (at(mid) >= 1.0) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::min(1.0, hi * x[j]);
        return true;
    }

    double local_search(std::vector<double> x) const {
        if (!retract(x)) return kInf;
        auto sq = [](std::span<const double> v) {
            return std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
        };
        double f = sq(x);
        double step = 0.1;
        std::vector<double> d(n_);
        std::vector<double> normal(n_);
        for (int it = 0; it < 150 && step > 1e-12; ++it) {
            for (std::size_t j = 0; j < n_; ++j) normal[j] = psi_.derivative(x[j] / t_) / t_;
            const double nn = sq(normal);
            const double xn = std::inner_product(x.begin(), x.end(), normal.begin(), 0.0);
            for (std::size_t j = 0; j < n_; ++j) {
                d[j] = -x[j] + (nn > 0.0 ? xn / nn * normal[j] : 0.0);
            }
            std::vector<double> y(n_);
            for (std::size_t j = 0; j < n_; ++j) y[j] = std::clamp(x[j] + step * d[j], 0.0, 1.0);
            if (!retract(y)) {
                step *= 0.5;
                continue;
            }
            const double fy = sq(y);
            if (fy < f - 1e-15) {
                x = std::move(y);
                f = fy;
                step *= 1.5;
            } else {
                step *= 0.5;
            }
        }
        return f;
    }

private:
    const OrliczFunction& psi_;
    std::size_t n_;
    double t_;
};

}  // namespace

double ke_numeric(const UnconditionalNorm& norm, double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InvalidParameter("K_E argument t must be positive and finite");
    }
    const std::size_t n = norm.dimension();
    const std::vector<double> ones(n, 1.0);
    if (norm(ones) < t * (1.0 - kConstraintSlack)) return kInf;

    switch (norm.kind()) {
        case UnconditionalNorm::Kind::lq:
        case UnconditionalNorm::Kind::lorentz: {
            const double p = norm.exponent();
            if (std::isinf(p)) return t;  // one coordinate equal to t
            std::vector<double> w = norm.kind() == UnconditionalNorm::Kind::lorentz
                                        ? std::vector<double>(norm.weights().values().begin(),
                                                              norm.weights().values().end())
                                        : ones;
            const double target = std::pow(t, p);
            if (p >= 2.0) return ke_vertex_enumeration(w, p, target);
            return ke_water_filling(w, p, target);
        }
        case UnconditionalNorm::Kind::orlicz: {
            const OrliczKe solver(norm.psi(), n, t);
            double best = solver.structured();
            std::mt19937_64 gen(0x5eedULL + n);
            for (int start = 0; start < 8; ++start) {
                std::vector<double> x(n);
                for (double& v : x) v = 0.05 + 0.95 * unit_double(gen);
                best = std::min(best, solver.local_search(std::move(x)));
            }
            return std::sqrt(best);
        }
    }
    return kInf;
}

double ke_bound(const UnconditionalNorm& norm, double t, std::optional<double> r) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw InvalidParameter("K_E argument t must be positive and finite");
    }
    switch (norm.kind()) {
        case UnconditionalNorm::Kind::lq: {
            const double q = norm.exponent();
            if (q < 2.0 || std::isinf(q)) {
                throw InvalidParameter("l_q bound t^{q/2} requires finite q >= 2");
            }
            return std::pow(t, 0.5 * q);
        }
        case UnconditionalNorm::Kind::lorentz: {
            if (!r) throw InvalidParameter("Lorentz bound requires the Hoelder exponent r");
            if (!(*r > 1.0)) throw InvalidParameter("Lorentz bound requires r > 1 (finite r')");
            const double p = norm.exponent();
            const double rc = conjugate(*r);
            if (rc < std::max(1.0, 2.0 / p) * (1.0 - 1e-15)) {
                throw InvalidParameter("Lorentz bound requires r' >= max{1, 2/p}");
            }
            const double wr = lp_norm(norm.weights().values(), *r);
            return std::pow(wr, -0.5 * rc) * std::pow(t, 0.5 * p * rc);
        }
        case UnconditionalNorm::Kind::orlicz: {
            const OrliczFunction& psi = norm.psi();
            auto ratio = [&](double u) {
                const double v = psi(u / t);
                return v > 0.0 ? u / std::sqrt(v) : kInf;
            };
            // Log grid on (0, 1], then golden-section refinement in log u.
            constexpr int kGrid = 2401;
            constexpr double kLogMin = -12.0;
            auto u_at = [&](double s) { return std::pow(10.0, s); };
            double best = kInf;
            int best_i = kGrid - 1;
            for (int i = 0; i < kGrid; ++i) {
                const double s = kLogMin * (1.0 - static_cast<double>(i) / (kGrid - 1));
                const double v = ratio(u_at(s));
                if (v < best) {
                    best = v;
                    best_i = i;
                }
            }
            if (std::isinf(best)) return kInf;
            const double h = -kLogMin / (kGrid - 1);
            double a = kLogMin * (1.0 - static_cast<double>(best_i) / (kGrid - 1)) - h;
            double b = std::min(0.0, a + 2.0 * h);
            a = std::max(kLogMin, a);
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - g * (b - a);
            double d = a + g * (b - a);
            for (int it = 0; it < 100; ++it) {
                if (ratio(u_at(c)) < ratio(u_at(d))) {
                    b = d;
                } else {
                    a = c;
                }
                c = b - g * (b - a);
                d = a + g * (b - a);
            }
            return std::min({best, ratio(u_at(0.5 * (a + b))), ratio(1.0)});
        }
    }
    return 0.0;
}

}  // namespace concmat::vecnorms
