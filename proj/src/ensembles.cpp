#include "concmat/ensembles.hpp"

#include "concmat/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace concmat::ensembles {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw InvalidParameter(std::string(what) + " must be finite");
}

void require_prob(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter(std::string(what) + " must lie in [0, 1]");
}

}  // namespace

BoundedLaw BoundedLaw::rademacher() { return BoundedLaw(Kind::rademacher, {}); }

BoundedLaw BoundedLaw::uniform(double a, double b) {
    require_finite(a, "uniform lower end");
    require_finite(b, "uniform upper end");
    if (!(a <= b)) throw InvalidParameter("uniform law needs a <= b");
    return BoundedLaw(Kind::uniform, {a, b});
}

BoundedLaw BoundedLaw::two_point(double v1, double v2, double prob) {
    require_finite(v1, "two-point value");
    require_finite(v2, "two-point value");
    require_prob(prob, "two-point probability");
    return BoundedLaw(Kind::two_point, {v1, v2, prob});
}

BoundedLaw BoundedLaw::discrete(std::vector<double> values, std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size()) {
        throw InvalidParameter("discrete law needs matching nonempty values and probs");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        require_finite(values[i], "discrete value");
        require_prob(probs[i], "discrete probability");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidParameter("discrete probabilities must sum to 1");
    BoundedLaw law(Kind::discrete, {});
    law.cumulative_.resize(probs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        law.cumulative_[i] = acc;
    }
    // pin the top at 1 from the last value that can occur
    for (std::size_t i = probs.size(); i-- > 0;) {
        law.cumulative_[i] = 1.0;
        if (probs[i] > 0.0) break;
    }
    law.values_ = std::move(values);
    law.probs_ = std::move(probs);
    return law;
}

BoundedLaw BoundedLaw::bernoulli01(double prob) {
    require_prob(prob, "bernoulli probability");
    return BoundedLaw(Kind::bernoulli01, {prob});
}

BoundedLaw BoundedLaw::complex_disc(double radius) {
    require_finite(radius, "disc radius");
    if (!(radius >= 0.0)) throw InvalidParameter("disc radius must be nonnegative");
    return BoundedLaw(Kind::complex_disc, {radius});
}

BoundedLaw BoundedLaw::gaussian(double mean, double variance) {
    require_finite(mean, "gaussian mean");
    require_finite(variance, "gaussian variance");
    if (!(variance >= 0.0)) throw InvalidParameter("gaussian variance must be nonnegative");
    return BoundedLaw(Kind::gaussian, {mean, variance});
}

double BoundedLaw::support_lo() const {
    switch (kind_) {
        case Kind::rademacher: return -1.0;
        case Kind::uniform: return params_[0];
        case Kind::two_point: {
            // a degenerate probability removes a point from the support
            if (params_[2] == 1.0) return params_[0];
            if (params_[2] == 0.0) return params_[1];
            return std::min(params_[0], params_[1]);
        }
        case Kind::discrete: {
            double lo = kInf;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (probs_[i] > 0.0) lo = std::min(lo, values_[i]);
            }
            return lo;
        }
        case Kind::bernoulli01: return params_[0] == 1.0 ? 1.0 : 0.0;
        case Kind::complex_disc: return -params_[0];
        case Kind::gaussian: return params_[1] == 0.0 ? params_[0] : -kInf;
    }
    return 0.0;
}

double BoundedLaw::support_hi() const {
    switch (kind_) {
        case Kind::rademacher: return 1.0;
        case Kind::uniform: return params_[1];
        case Kind::two_point: {
            if (params_[2] == 1.0) return params_[0];
            if (params_[2] == 0.0) return params_[1];
            return std::max(params_[0], params_[1]);
        }
        case Kind::discrete: {
            double hi = -kInf;
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (probs_[i] > 0.0) hi = std::max(hi, values_[i]);
            }
            return hi;
        }
        case Kind::bernoulli01: return params_[0] == 0.0 ? 0.0 : 1.0;
        case Kind::complex_disc: return params_[0];
        case Kind::gaussian: return params_[1] == 0.0 ? params_[0] : kInf;
    }
    return 0.0;
}

double BoundedLaw::diameter() const {
    if (kind_ == Kind::gaussian) return kInf;
    // For real laws the diameter is the spread of the support; the disc's is
    // its width.
    return support_hi() - support_lo();
}

double BoundedLaw::sample_real(RngStream& rng) const {
    switch (kind_) {
        case Kind::rademacher: return (rng.next_u32() & 1u) ? 1.0 : -1.0;
        case Kind::uniform: {
            const double a = params_[0];
            const double b = params_[1];
            return std::min(b, a + (b - a) * rng.uniform());
        }
        case Kind::two_point: return rng.uniform() < params_[2] ? params_[0] : params_[1];
        case Kind::discrete: {
            const double u = rng.uniform();
            const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
            std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
            return values_[std::min(i, values_.size() - 1)];
        }
        case Kind::bernoulli01: return rng.uniform() < params_[0] ? 1.0 : 0.0;
        case Kind::gaussian: return params_[0] + std::sqrt(params_[1]) * rng.normal();
        case Kind::complex_disc: break;
    }
    throw InvalidParameter("complex law sampled as real");
}

std::complex<double> BoundedLaw::sample(RngStream& rng) const {
    if (kind_ != Kind::complex_disc) return sample_real(rng);
    const double r = params_[0];
    // rejection from the square keeps every draw inside the closed disc exactly
    while (true) {
        const double x = r * (2.0 * rng.uniform() - 1.0);
        const double y = r * (2.0 * rng.uniform() - 1.0);
        if (x * x + y * y <= r * r) return {x, y};
    }
}

bool BoundedLaw::in_support(std::complex<double> z) const {
    if (kind_ == Kind::complex_disc) {
        return z.real() * z.real() + z.imag() * z.imag() <= params_[0] * params_[0];
    }
    if (z.imag() != 0.0) return false;
    const double x = z.real();
    switch (kind_) {
        case Kind::rademacher: return x == 1.0 || x == -1.0;
        case Kind::uniform: return x >= params_[0] && x <= params_[1];
        case Kind::two_point:
            return (x == params_[0] && params_[2] > 0.0) || (x == params_[1] && params_[2] < 1.0);
        case Kind::discrete:
            for (std::size_t i = 0; i < values_.size(); ++i) {
                if (values_[i] == x && probs_[i] > 0.0) return true;
            }
            return false;
        case Kind::bernoulli01: return (x == 1.0 && params_[0] > 0.0) || (x == 0.0 && params_[0] < 1.0);
        case Kind::gaussian: return std::isfinite(x) && (params_[1] > 0.0 || x == params_[0]);
        case Kind::complex_disc: break;
    }
    return false;
}

OffdiagLaw OffdiagLaw::direct(BoundedLaw law) {
    OffdiagLaw o;
    o.mode = Mode::diameter_set;
    o.law = std::move(law);
    return o;
}

OffdiagLaw OffdiagLaw::rotated(std::complex<double> w, BoundedLaw re_part, BoundedLaw im_part) {
    if (!(std::abs(w) <= 1.0)) throw InvalidParameter("rotation weight must satisfy |w| <= 1");
    if (!re_part.is_real() || !im_part.is_real()) {
        throw InvalidParameter("rotated-product parts must be real laws");
    }
    OffdiagLaw o;
    o.mode = Mode::rotated_product;
    o.w = w;
    o.re_part = std::move(re_part);
    o.im_part = std::move(im_part);
    return o;
}

std::complex<double> OffdiagLaw::sample(RngStream& rng) const {
    if (mode == Mode::diameter_set) return law.sample(rng);
    const double a = re_part.sample_real(rng);
    const double b = im_part.sample_real(rng);
    return w * std::complex<double>(a, b);
}

double OffdiagLaw::implied_diameter() const {
    if (mode == Mode::diameter_set) return law.diameter();
    return std::max(re_part.diameter(), im_part.diameter());
}

bool OffdiagLaw::bounded() const {
    return mode == Mode::diameter_set ? law.bounded() : re_part.bounded() && im_part.bounded();
}

EnsembleSpec EnsembleSpec::rectangular(std::size_t m, std::size_t n, BoundedLaw law) {
    if (m == 0 || n == 0) throw InvalidParameter("ensemble dimensions must be positive");
    EnsembleSpec s;
    s.m = m;
    s.n = n;
    s.layout = Layout::rectangular;
    s.laws = {std::move(law)};
    return s;
}

EnsembleSpec EnsembleSpec::rectangular_grid(std::size_t m, std::size_t n, std::vector<BoundedLaw> laws) {
    if (m == 0 || n == 0) throw InvalidParameter("ensemble dimensions must be positive");
    if (laws.size() != m * n) throw InvalidParameter("law grid must have m * n entries");
    EnsembleSpec s;
    s.m = m;
    s.n = n;
    s.layout = Layout::rectangular;
    s.laws = std::move(laws);
    return s;
}

EnsembleSpec EnsembleSpec::selfadjoint(std::size_t n, BoundedLaw diag, OffdiagLaw offdiag) {
    return selfadjoint_grid(n, std::move(diag), {std::move(offdiag)});
}

EnsembleSpec EnsembleSpec::selfadjoint_grid(std::size_t n, BoundedLaw diag, std::vector<OffdiagLaw> offdiag) {
    if (n == 0) throw InvalidParameter("ensemble dimensions must be positive");
    if (!diag.is_real()) throw InvalidParameter("diagonal law of a self-adjoint ensemble must be real");
    const std::size_t upper = n * (n - 1) / 2;
    if (offdiag.size() != 1 && offdiag.size() != upper) {
        throw InvalidParameter("off-diagonal laws: expected 1 or " + std::to_string(upper));
    }
    EnsembleSpec s;
    s.m = n;
    s.n = n;
    s.layout = Layout::selfadjoint;
    s.diag_law = std::move(diag);
    s.offdiag = std::move(offdiag);
    return s;
}

bool EnsembleSpec::bounded() const {
    if (layout == Layout::rectangular) {
        return std::all_of(laws.begin(), laws.end(), [](const BoundedLaw& l) { return l.bounded(); });
    }
    return diag_law.bounded() &&
           std::all_of(offdiag.begin(), offdiag.end(), [](const OffdiagLaw& o) { return o.bounded(); });
}

Matrix sample_matrix(const EnsembleSpec& spec, RngStream& rng) {
    if (spec.layout != EnsembleSpec::Layout::rectangular) {
        throw InvalidParameter("sample_matrix needs a rectangular layout");
    }
    Matrix a(spec.m, spec.n);
    const bool single = spec.laws.size() == 1;
    for (std::size_t i = 0; i < spec.m; ++i) {
        for (std::size_t j = 0; j < spec.n; ++j) {
            const BoundedLaw& law = single ? spec.laws[0] : spec.laws[i * spec.n + j];
            if (law.is_real()) {
                a.set(i, j, law.sample_real(rng));
            } else {
                a.set(i, j, law.sample(rng));
            }
        }
    }
    return a;
}

Matrix sample_selfadjoint(const EnsembleSpec& spec, RngStream& rng) {
    if (spec.layout != EnsembleSpec::Layout::selfadjoint) {
        throw InvalidParameter("sample_selfadjoint needs a self-adjoint layout");
    }
    if (spec.m != spec.n) throw InvalidParameter("self-adjoint ensemble must be square");
    const std::size_t n = spec.n;
    Matrix a(n, n);
    std::size_t idx = 0;
    const bool single = spec.offdiag.size() == 1;
    for (std::size_t i = 0; i < n; ++i) {
        a.set(i, i, spec.diag_law.sample_real(rng));
        for (std::size_t j = i + 1; j < n; ++j, ++idx) {
            const OffdiagLaw& law = single ? spec.offdiag[0] : spec.offdiag[idx];
            const std::complex<double> z = law.sample(rng);
            a.set(i, j, z);
            a.set(j, i, std::conj(z));
        }
    }
    return a;
}

Matrix sample(const EnsembleSpec& spec, RngStream& rng) {
    return spec.layout == EnsembleSpec::Layout::rectangular ? sample_matrix(spec, rng)
                                                            : sample_selfadjoint(spec, rng);
}

bool GaussianProfile::within_caps() const {
    return diag_variance <= std::numbers::sqrt2 && offdiag_variance <= 1.0;
}

Matrix sample_gaussian_hermitian(std::size_t n, const GaussianProfile& profile, RngStream& rng) {
    if (n == 0) throw InvalidParameter("matrix dimension must be positive");
    if (!(profile.diag_variance >= 0.0) || !(profile.offdiag_variance >= 0.0)) {
        throw InvalidParameter("variances must be nonnegative");
    }
    const double sd = std::sqrt(profile.diag_variance);
    const double so = std::sqrt(profile.offdiag_variance);
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        a.set(i, i, sd * rng.normal());
        for (std::size_t j = i + 1; j < n; ++j) {
            const double x = so * rng.normal();
            a.set(i, j, x);
            a.set(j, i, x);
        }
    }
    return a;
}

double effective_diameter(const EnsembleSpec& spec) {
    if (!spec.bounded()) throw UnboundedSupport("ensemble has a Gaussian (unbounded) law");
    double d = 0.0;
    if (spec.layout == EnsembleSpec::Layout::rectangular) {
        for (const auto& l : spec.laws) d = std::max(d, l.diameter());
    } else {
        d = (spec.diag_law.support_hi() - spec.diag_law.support_lo()) / std::numbers::sqrt2;
        for (const auto& o : spec.offdiag) d = std::max(d, o.implied_diameter());
    }
    if (!(d > 0.0)) throw DomainError("ensemble is deterministic (diameter 0)");
    return d;
}

}  // namespace concmat::ensembles
