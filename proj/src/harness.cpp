#include "concmat/harness.hpp"

#include "concmat/error.hpp"
#include "concmat/matstat.hpp"
#include "concmat/talagrand.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

namespace concmat::harness {

using ensembles::BoundedLaw;
using ensembles::EnsembleSpec;
using ensembles::RngStream;
using matstat::Spectrum;
using vecnorms::conjugate;
using vecnorms::kInf;

namespace {

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

std::string num(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    return {buf, res.ptr};
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidParameter(msg);
}

bool close(double a, double b) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

double half_width(const MedianEstimate& m) { return std::max(m.hi - m.median, m.median - m.lo); }

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return v.empty() ? 0.0 : acc / static_cast<double>(v.size());
}

double stddev_of(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

// Caches the spectra and operator norms of one sampled matrix.
class Evaluator {
public:
    explicit Evaluator(const Matrix& a) : a_(a) {}

    const Spectrum& eig() {
        if (!eig_) eig_ = matstat::eigvals_hermitian(a_);
        return *eig_;
    }
    const Spectrum& sv() {
        if (!sv_) sv_ = matstat::singular_values(a_);
        return *sv_;
    }
    double opnorm(double p, double q) {
        for (const auto& [cp, cq, v] : opnorms_) {
            if (cp == p && cq == q) return v;
        }
        const double v = matstat::opnorm_pq(a_, p, q).value;
        opnorms_.emplace_back(p, q, v);
        return v;
    }
    double entry_norm(double p) {
        if (a_.is_real()) return vecnorms::lp_norm(a_.real_data(), p);
        std::vector<std::complex<double>> z;
        z.reserve(a_.rows() * a_.cols());
        for (std::size_t i = 0; i < a_.rows(); ++i) {
            for (std::size_t j = 0; j < a_.cols(); ++j) z.push_back(a_(i, j));
        }
        return vecnorms::lp_norm(std::span<const std::complex<double>>(z), p);
    }

    double value(const StatisticSpec& s) {
        using K = StatisticSpec::Kind;
        switch (s.kind) {
            case K::opnorm: return opnorm(s.p, s.q);
            case K::lambda: return eig()[s.k - 1];
            case K::singular: return sv()[s.k - 1];
            case K::schatten: return vecnorms::lp_norm(std::span<const double>(sv().values), s.p);
            case K::kyfan: return matstat::top_sum(sv(), s.k);
            case K::fk: return matstat::top_sum(eig(), s.k);
            case K::gk: return matstat::bottom_sum(eig(), s.k);
            case K::binomial_root: return entry_norm(s.p);
        }
        return 0.0;
    }

private:
    const Matrix& a_;
    std::optional<Spectrum> eig_;
    std::optional<Spectrum> sv_;
    std::vector<std::tuple<double, double, double>> opnorms_;
};

// Index k of the partial sums that define an interior center, and whether the
// smallest-eigenvalue sums are used.
struct CenterPath {
    std::size_t k = 0;
    bool lower = false;
    bool singular = false;
};

CenterPath center_path(const StatisticSpec& stat, std::size_t n) {
    if (stat.kind == StatisticSpec::Kind::singular) return {stat.k, false, true};
    const std::size_t mirrored = n - stat.k + 1;
    if (stat.k <= mirrored) return {stat.k, false, false};
    return {mirrored, true, false};
}

bool all_gaussian(const EnsembleSpec& e) {
    auto g = [](const BoundedLaw& l) { return l.kind() == BoundedLaw::Kind::gaussian; };
    if (e.layout == EnsembleSpec::Layout::rectangular) return std::all_of(e.laws.begin(), e.laws.end(), g);
    if (!g(e.diag_law)) return false;
    return std::all_of(e.offdiag.begin(), e.offdiag.end(), [&](const ensembles::OffdiagLaw& o) {
        return o.mode == ensembles::OffdiagLaw::Mode::diameter_set && g(o.law);
    });
}

// Lipschitz constant of an entry-to-matrix map for Gaussian coordinates.
double gaussian_coordinate_scale(const EnsembleSpec& e) {
    auto sd = [](const BoundedLaw& l) { return std::sqrt(l.params()[1]); };
    double s = 0.0;
    if (e.layout == EnsembleSpec::Layout::rectangular) {
        for (const auto& l : e.laws) s = std::max(s, sd(l));
        return s;
    }
    s = sd(e.diag_law);
    for (const auto& o : e.offdiag) s = std::max(s, std::sqrt(2.0) * sd(o.law));
    return s;
}

// (r, L): the statistic is convex and L-Lipschitz for the l_r norm of the
// entries of a rectangular matrix.
std::optional<std::pair<double, double>> entry_lipschitz_impl(const StatisticSpec& s, const EnsembleSpec& e) {
    using K = StatisticSpec::Kind;
    const double rank = static_cast<double>(std::min(e.m, e.n));
    switch (s.kind) {
        case K::opnorm:
            if (s.p > 2.0 || s.q < 2.0) return std::nullopt;
            return std::make_pair(std::min(conjugate(s.p), s.q), 1.0);
        case K::singular:
            if (s.k != 1) return std::nullopt;
            return std::make_pair(2.0, 1.0);
        case K::schatten:
            return std::make_pair(2.0, s.p >= 2.0 ? 1.0 : std::pow(rank, 1.0 / s.p - 0.5));
        case K::kyfan: return std::make_pair(2.0, std::sqrt(static_cast<double>(s.k)));
        case K::binomial_root: return std::make_pair(s.p, 1.0);
        default: return std::nullopt;
    }
}

// Hilbert-Schmidt Lipschitz constant, when the statistic has one we use.
std::optional<double> hs_lipschitz(const StatisticSpec& s) {
    using K = StatisticSpec::Kind;
    switch (s.kind) {
        case K::lambda:
        case K::singular: return 1.0;
        case K::schatten: return s.p >= 2.0 ? std::optional<double>(1.0) : std::nullopt;
        case K::opnorm: return (s.p <= 2.0 && s.q >= 2.0) ? std::optional<double>(1.0) : std::nullopt;
        case K::kyfan:
        case K::fk:
        case K::gk: return std::sqrt(static_cast<double>(s.k));
        default: return std::nullopt;
    }
}

double envelope_unit(const BoundEnvelope& env) {
    switch (env.id) {
        case BoundEnvelope::Id::gaussian: return env.lipschitz;
        case BoundEnvelope::Id::cor22:
        case BoundEnvelope::Id::prop24: return env.lipschitz * env.d;
        default: return env.d;
    }
}

// Largest t with envelope(t) >= level.
double envelope_inverse(const BoundEnvelope& env, double level) {
    if (env(0.0) < level) return 0.0;
    double hi = envelope_unit(env);
    for (int i = 0; i < 200 && env(hi) >= level; ++i) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (env(mid) >= level ? lo : hi) = mid;
    }
    return lo;
}

std::vector<double> spaced(double lo, double hi, std::size_t count, bool geometric) {
    std::vector<double> out;
    if (count == 1) return {lo};
    for (std::size_t i = 0; i < count; ++i) {
        const double f = static_cast<double>(i) / static_cast<double>(count - 1);
        out.push_back(geometric ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    out.back() = hi;
    return out;
}

std::vector<double> explicit_grid(const TGrid& g) {
    std::vector<double> out = g.values;
    if (out.empty() && g.min && g.max) out = spaced(*g.min, *g.max, g.count, g.geometric);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<double> default_grid(const BoundEnvelope& env, double median, double floor, std::size_t count) {
    const double unit = envelope_unit(env);
    double upper = 2.0 * std::max(std::abs(median), unit);
    // Reach at least the level 1/4 so loose envelopes get informative points.
    upper = std::max(upper, envelope_inverse(env, 0.25));
    // An envelope that never reaches the floor keeps the unclipped grid, so
    // the run reports failures instead of an empty table.
    const double t_floor = envelope_inverse(env, floor);
    if (t_floor > 0.0) upper = std::min(upper, t_floor);
    const double lower = std::min(0.25 * unit, upper / 4.0);
    return spaced(lower, upper, count, true);
}

void validate_grid(const TGrid& g, const BoundEnvelope& env, std::size_t trials) {
    for (double t : g.values) require(std::isfinite(t) && t >= 0.0, "t values must be finite and nonnegative");
    if (g.min || g.max) {
        require(g.min && g.max, "a t range needs both min and max");
        require(g.values.empty(), "give either a t list or a t range, not both");
        require(std::isfinite(*g.min) && std::isfinite(*g.max) && *g.min <= *g.max && *g.min >= 0.0,
                "t range needs 0 <= min <= max");
        require(!g.geometric || *g.min > 0.0, "a geometric t range needs min > 0");
    }
    require(g.count >= 1, "t grid count must be positive");
    const double floor = clopper_pearson_upper(0, trials);
    for (double t : explicit_grid(g)) {
        if (env(t) < floor) {
            throw InvalidParameter("t = " + num(t) + " is out of resolution: " + env.name() + " = " + num(env(t)) +
                                   " is below the zero-count 99% bound " + num(floor) + " for " +
                                   std::to_string(trials) + " trials");
        }
    }
}

}  // namespace

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::vacuous: return "vacuous";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::info: return "info";
    }
    return "info";
}

// ---------------------------------------------------------------- statistics

StatisticSpec StatisticSpec::opnorm(double p, double q) {
    require(p >= 1.0 && q >= 1.0, "operator norm exponents must be >= 1");
    return {Kind::opnorm, p, q, 1};
}
StatisticSpec StatisticSpec::lambda(std::size_t k) {
    require(k >= 1, "eigenvalue index is 1-based");
    return {Kind::lambda, 2.0, 2.0, k};
}
StatisticSpec StatisticSpec::singular(std::size_t k) {
    require(k >= 1, "singular value index is 1-based");
    return {Kind::singular, 2.0, 2.0, k};
}
StatisticSpec StatisticSpec::schatten(double p) {
    require(p >= 1.0, "Schatten exponent must be >= 1");
    return {Kind::schatten, p, 2.0, 1};
}
StatisticSpec StatisticSpec::kyfan(std::size_t k) {
    require(k >= 1, "Ky Fan index must be >= 1");
    return {Kind::kyfan, 2.0, 2.0, k};
}
StatisticSpec StatisticSpec::fk(std::size_t k) {
    require(k >= 1, "partial sum size must be >= 1");
    return {Kind::fk, 2.0, 2.0, k};
}
StatisticSpec StatisticSpec::gk(std::size_t k) {
    require(k >= 1, "partial sum size must be >= 1");
    return {Kind::gk, 2.0, 2.0, k};
}
StatisticSpec StatisticSpec::binomial_root(double p) {
    require(p >= 1.0, "exponent must be >= 1");
    return {Kind::binomial_root, p, 2.0, 1};
}

std::string StatisticSpec::name() const {
    switch (kind) {
        case Kind::opnorm: return "opnorm(p=" + num(p) + ",q=" + num(q) + ")";
        case Kind::lambda: return "lambda(" + std::to_string(k) + ")";
        case Kind::singular: return "singular(" + std::to_string(k) + ")";
        case Kind::schatten: return "schatten(" + num(p) + ")";
        case Kind::kyfan: return "kyfan(" + std::to_string(k) + ")";
        case Kind::fk: return "F(" + std::to_string(k) + ")";
        case Kind::gk: return "G(" + std::to_string(k) + ")";
        case Kind::binomial_root: return "binomial_root(" + num(p) + ")";
    }
    return "?";
}

void StatisticSpec::validate(const EnsembleSpec& e) const {
    const bool sa = e.layout == EnsembleSpec::Layout::selfadjoint;
    const std::size_t rank = std::min(e.m, e.n);
    switch (kind) {
        case Kind::opnorm: require(p >= 1.0 && q >= 1.0, "operator norm exponents must be >= 1"); break;
        case Kind::lambda:
        case Kind::fk:
        case Kind::gk:
            require(sa, name() + " needs a self-adjoint ensemble");
            require(k >= 1 && k <= e.n, name() + ": index must be in [1, " + std::to_string(e.n) + "]");
            break;
        case Kind::singular:
        case Kind::kyfan:
            require(k >= 1 && k <= rank, name() + ": index must be in [1, " + std::to_string(rank) + "]");
            break;
        case Kind::schatten:
        case Kind::binomial_root: require(p >= 1.0, name() + ": exponent must be >= 1"); break;
    }
}

double StatisticSpec::evaluate(const Matrix& a) const {
    Evaluator ev(a);
    return ev.value(*this);
}

// ----------------------------------------------------------------- envelopes

BoundEnvelope BoundEnvelope::thm11(double p, double q, double d) {
    require(p > 1.0 && p <= 2.0 && q >= 2.0 && std::isfinite(q), "thm11 needs 1 < p <= 2 <= q < inf");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::thm11;
    e.p = p;
    e.q = q;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::thm12_extreme(double d) {
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::thm12_extreme;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::thm12_interior(std::size_t k, double d, bool simplified) {
    require(k >= 1, "interior envelope needs k >= 1");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::thm12_interior;
    e.k = k;
    e.d = d;
    e.simplified = simplified;
    return e;
}

BoundEnvelope BoundEnvelope::cor22(double q, double lipschitz, double d) {
    require(q >= 2.0 && std::isfinite(q), "cor22 needs 2 <= q < inf");
    require(finite_positive(lipschitz) && finite_positive(d), "L and D must be positive");
    BoundEnvelope e;
    e.id = Id::cor22;
    e.q = q;
    e.lipschitz = lipschitz;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::prop24(vecnorms::UnconditionalNorm norm, double lipschitz, double d) {
    require(finite_positive(lipschitz) && finite_positive(d), "L and D must be positive");
    BoundEnvelope e;
    e.id = Id::prop24;
    e.norm = std::move(norm);
    e.lipschitz = lipschitz;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::schatten_high(double p, double d) {
    require(p >= 2.0, "schatten_high needs p >= 2");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::schatten_high;
    e.p = p;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::schatten_low(double p, std::size_t n, double d) {
    require(p >= 1.0 && p < 2.0, "schatten_low needs 1 <= p < 2");
    require(n >= 1, "n must be positive");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::schatten_low;
    e.p = p;
    e.n = n;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::ui_norm(std::size_t n, double d) {
    require(n >= 1, "n must be positive");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::ui_norm;
    e.n = n;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::thm33_s1(double d) {
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::thm33_s1;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::thm33_sk(std::size_t k, double d, bool simplified) {
    require(k >= 1, "k must be >= 1");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::thm33_sk;
    e.k = k;
    e.d = d;
    e.simplified = simplified;
    return e;
}

BoundEnvelope BoundEnvelope::mixed_range(double p, double q, std::size_t m, std::size_t n, double d) {
    require(q > 1.0 && q <= 2.0 && p >= 2.0 && std::isfinite(p), "mixed_range needs 1 < q <= 2 <= p < inf");
    require(m >= 1 && n >= 1, "m and n must be positive");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::mixed_range;
    e.p = p;
    e.q = q;
    e.m = m;
    e.n = n;
    e.d = d;
    return e;
}

BoundEnvelope BoundEnvelope::gaussian(double lipschitz) {
    require(finite_positive(lipschitz), "L must be positive");
    BoundEnvelope e;
    e.id = Id::gaussian;
    e.lipschitz = lipschitz;
    return e;
}

BoundEnvelope BoundEnvelope::akv(std::size_t k, double d) {
    require(k >= 1, "k must be >= 1");
    require(finite_positive(d), "D must be positive");
    BoundEnvelope e;
    e.id = Id::akv;
    e.k = k;
    e.d = d;
    return e;
}

double BoundEnvelope::prefactor() const {
    switch (id) {
        case Id::thm12_interior:
        case Id::thm33_sk: return 8.0 * scale;
        case Id::gaussian: return scale;
        default: return 4.0 * scale;
    }
}

double BoundEnvelope::operator()(double t) const {
    if (!(t >= 0.0)) throw InvalidParameter("envelope argument must be nonnegative");
    if (t == 0.0) return prefactor();
    const double kk = static_cast<double>(k);
    const double x = t / d;
    double v = 0.0;
    switch (id) {
        case Id::thm11: v = 4.0 * std::exp(-std::pow(x, std::min(conjugate(p), q)) / 4.0); break;
        case Id::thm12_extreme: v = 4.0 * std::exp(-x * x / 8.0); break;
        case Id::thm12_interior:
            if (simplified) {
                v = 8.0 * std::exp(-x * x / (32.0 * kk));
            } else {
                const double c = 2.0 * std::sqrt(2.0) * (std::sqrt(kk) + std::sqrt(kk - 1.0));
                v = 8.0 * std::exp(-(x / c) * (x / c));
            }
            break;
        case Id::cor22: v = 4.0 * std::exp(-std::pow(x / lipschitz, q) / 4.0); break;
        case Id::prop24: {
            const double ke = vecnorms::ke_numeric(*norm, x / lipschitz);
            v = std::isinf(ke) ? 0.0 : 4.0 * std::exp(-ke * ke / 4.0);
            break;
        }
        case Id::schatten_high: v = 4.0 * std::exp(-x * x / 4.0); break;
        case Id::schatten_low:
            v = 4.0 * std::exp(-x * x / (4.0 * std::pow(static_cast<double>(n), 2.0 / p - 1.0)));
            break;
        case Id::ui_norm: v = 4.0 * std::exp(-x * x / (4.0 * static_cast<double>(n))); break;
        case Id::thm33_s1: v = 4.0 * std::exp(-x * x / 4.0); break;
        case Id::thm33_sk:
            if (simplified) {
                v = 8.0 * std::exp(-x * x / (16.0 * kk));
            } else {
                const double c = 2.0 * (std::sqrt(kk) + std::sqrt(kk - 1.0));
                v = 8.0 * std::exp(-(x / c) * (x / c));
            }
            break;
        case Id::mixed_range: {
            const double s = std::pow(static_cast<double>(m), 2.0 / q - 1.0) *
                             std::pow(static_cast<double>(n), 2.0 / conjugate(p) - 1.0);
            v = 4.0 * std::exp(-x * x / (4.0 * s));
            break;
        }
        case Id::gaussian: {
            const double y = t / lipschitz;
            v = std::exp(-y * y / 2.0);
            break;
        }
        case Id::akv: v = 4.0 * std::exp(-x * x / (8.0 * kk * kk)); break;
    }
    return scale * v;
}

std::string BoundEnvelope::name() const {
    std::string s;
    switch (id) {
        case Id::thm11: s = "thm11(r=" + num(std::min(conjugate(p), q)) + ",D=" + num(d) + ")"; break;
        case Id::thm12_extreme: s = "thm12_extreme(D=" + num(d) + ")"; break;
        case Id::thm12_interior:
            s = std::string(simplified ? "thm12_interior_simplified" : "thm12_interior") + "(k=" + std::to_string(k) +
                ",D=" + num(d) + ")";
            break;
        case Id::cor22: s = "cor22(q=" + num(q) + ",L=" + num(lipschitz) + ",D=" + num(d) + ")"; break;
        case Id::prop24: s = "prop24(L=" + num(lipschitz) + ",D=" + num(d) + ")"; break;
        case Id::schatten_high: s = "schatten_high(p=" + num(p) + ",D=" + num(d) + ")"; break;
        case Id::schatten_low:
            s = "schatten_low(p=" + num(p) + ",n=" + std::to_string(n) + ",D=" + num(d) + ")";
            break;
        case Id::ui_norm: s = "ui_norm(n=" + std::to_string(n) + ",D=" + num(d) + ")"; break;
        case Id::thm33_s1: s = "thm33_s1(D=" + num(d) + ")"; break;
        case Id::thm33_sk:
            s = std::string(simplified ? "thm33_sk_simplified" : "thm33_sk") + "(k=" + std::to_string(k) +
                ",D=" + num(d) + ")";
            break;
        case Id::mixed_range:
            s = "mixed_range(p=" + num(p) + ",q=" + num(q) + ",m=" + std::to_string(m) + ",n=" + std::to_string(n) +
                ",D=" + num(d) + ")";
            break;
        case Id::gaussian: s = "gaussian(L=" + num(lipschitz) + ")"; break;
        case Id::akv: s = "akv(k=" + std::to_string(k) + ",D=" + num(d) + ")"; break;
    }
    if (scale != 1.0) s += "*" + num(scale);
    return s;
}

std::optional<std::pair<double, double>> BoundEnvelope::power_form() const {
    if (scale != 1.0) return std::nullopt;
    switch (id) {
        case Id::thm11: return std::make_pair(std::min(conjugate(p), q), d);
        case Id::thm12_extreme: return std::make_pair(2.0, std::sqrt(2.0) * d);
        case Id::cor22: return std::make_pair(q, lipschitz * d);
        case Id::schatten_high:
        case Id::thm33_s1: return std::make_pair(2.0, d);
        case Id::schatten_low:
            return std::make_pair(2.0, d * std::pow(static_cast<double>(n), 1.0 / p - 0.5));
        case Id::ui_norm: return std::make_pair(2.0, d * std::sqrt(static_cast<double>(n)));
        case Id::mixed_range:
            return std::make_pair(2.0, d * std::sqrt(std::pow(static_cast<double>(m), 2.0 / q - 1.0) *
                                                     std::pow(static_cast<double>(n), 2.0 / conjugate(p) - 1.0)));
        default: return std::nullopt;
    }
}

void validate_envelope(const BoundEnvelope& env, const StatisticSpec& stat, const EnsembleSpec& e,
                       double entry_scale) {
    using Id = BoundEnvelope::Id;
    using K = StatisticSpec::Kind;
    stat.validate(e);
    require(std::isfinite(entry_scale) && entry_scale != 0.0, "entry scale must be finite and nonzero");
    require(std::isfinite(env.scale) && env.scale > 0.0, "envelope scale must be positive");
    const bool sa = e.layout == EnsembleSpec::Layout::selfadjoint;
    const std::string who = env.name() + " with " + stat.name();
    const double s = std::abs(entry_scale);

    if (env.bounded_entries()) {
        if (!e.bounded()) {
            throw UnboundedSupport(env.name() + ": unbounded support; bounded-entry envelopes need every law bounded");
        }
        const double dmin = ensembles::effective_diameter(e) * s;
        require(env.d >= dmin * (1.0 - 1e-12),
                env.name() + ": D = " + num(env.d) + " is below the ensemble's effective diameter " + num(dmin));
    }

    switch (env.id) {
        case Id::thm11:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::opnorm && close(stat.p, env.p) && close(stat.q, env.q),
                    who + ": needs the operator norm with the same p and q");
            break;
        case Id::thm12_extreme:
            require(sa, who + ": needs a self-adjoint ensemble");
            require(stat.kind == K::lambda && (stat.k == 1 || stat.k == e.n), who + ": needs lambda(1) or lambda(n)");
            break;
        case Id::thm12_interior:
        case Id::akv: {
            require(sa, who + ": needs a self-adjoint ensemble");
            require(stat.kind == K::lambda, who + ": needs an eigenvalue statistic");
            const std::size_t path = center_path(stat, e.n).k;
            require(env.k >= path, who + ": envelope k must be at least " + std::to_string(path));
            break;
        }
        case Id::cor22:
        case Id::prop24: {
            require(!sa, who + ": needs a rectangular ensemble");
            const auto lip = entry_lipschitz_impl(stat, e);
            require(lip.has_value(), who + ": statistic is not covered by this envelope");
            auto [r, l0] = *lip;
            if (env.id == Id::cor22) {
                require(env.q <= r * (1.0 + 1e-12), who + ": q must be at most " + num(r));
            } else {
                require(env.norm.has_value(), who + ": missing norm");
                const auto& norm = *env.norm;
                require(norm.dimension() == e.m * e.n, who + ": norm dimension must equal the number of entries");
                using NK = vecnorms::UnconditionalNorm::Kind;
                require(norm.kind() != NK::orlicz, who + ": Orlicz norms are not supported for matrix statistics");
                require(norm.exponent() <= r * (1.0 + 1e-12), who + ": norm exponent must be at most " + num(r));
                if (norm.kind() == NK::lorentz) {
                    const auto w = norm.weights().values();
                    l0 *= std::pow(w.back(), -1.0 / norm.exponent());
                }
            }
            require(env.lipschitz >= l0 * (1.0 - 1e-12), who + ": L must be at least " + num(l0));
            break;
        }
        case Id::schatten_high:
            require(!sa, who + ": needs a rectangular ensemble");
            require((stat.kind == K::schatten && stat.p >= 2.0) || (stat.kind == K::singular && stat.k == 1),
                    who + ": needs a Schatten norm with p >= 2");
            break;
        case Id::schatten_low:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::schatten && close(stat.p, env.p), who + ": needs the Schatten norm with the same p");
            require(env.n >= std::min(e.m, e.n), who + ": n must be at least min(rows, cols)");
            break;
        case Id::ui_norm:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::schatten || stat.kind == K::kyfan || (stat.kind == K::singular && stat.k == 1),
                    who + ": needs a unitarily invariant norm");
            require(env.n >= std::min(e.m, e.n), who + ": n must be at least min(rows, cols)");
            break;
        case Id::thm33_s1:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::singular && stat.k == 1, who + ": needs singular(1)");
            break;
        case Id::thm33_sk:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::singular, who + ": needs a singular value");
            require(env.k >= stat.k, who + ": envelope k must be at least " + std::to_string(stat.k));
            break;
        case Id::mixed_range:
            require(!sa, who + ": needs a rectangular ensemble");
            require(stat.kind == K::opnorm && close(stat.p, env.p) && close(stat.q, env.q),
                    who + ": needs the operator norm with the same p and q");
            require(env.m >= e.m && env.n >= e.n, who + ": m and n must cover the matrix shape");
            break;
        case Id::gaussian: {
            const double need = gaussian_lipschitz(stat, e) * s;
            require(env.lipschitz >= need * (1.0 - 1e-12), who + ": L must be at least " + num(need));
            break;
        }
    }
}

std::optional<std::pair<double, double>> entry_lipschitz(const StatisticSpec& stat, const EnsembleSpec& ensemble) {
    if (ensemble.layout != EnsembleSpec::Layout::rectangular) return std::nullopt;
    return entry_lipschitz_impl(stat, ensemble);
}

double gaussian_lipschitz(const StatisticSpec& stat, const EnsembleSpec& ensemble) {
    require(all_gaussian(ensemble), "gaussian envelope needs an ensemble with only Gaussian entries");
    const auto l0 = hs_lipschitz(stat);
    require(l0.has_value(), stat.name() + " is not Lipschitz in the Hilbert-Schmidt norm");
    return *l0 * gaussian_coordinate_scale(ensemble);
}

// --------------------------------------------------------------- estimators

double clopper_pearson_upper(std::size_t x, std::size_t n, double confidence) {
    require(n > 0 && x <= n, "binomial bound needs 0 <= x <= n, n > 0");
    if (x == n) return 1.0;
    return boost::math::ibeta_inv(static_cast<double>(x) + 1.0, static_cast<double>(n - x), confidence);
}

double clopper_pearson_lower(std::size_t x, std::size_t n, double confidence) {
    require(n > 0 && x <= n, "binomial bound needs 0 <= x <= n, n > 0");
    if (x == 0) return 0.0;
    return boost::math::ibeta_inv(static_cast<double>(x), static_cast<double>(n - x) + 1.0, 1.0 - confidence);
}

MedianEstimate estimate_median(std::span<const double> samples, double confidence) {
    require(!samples.empty(), "median of an empty sample");
    std::vector<double> v(samples.begin(), samples.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    MedianEstimate m;
    m.median = v[(n - 1) / 2];
    // Largest j with P[Bin(n, 1/2) < j] <= alpha / 2; then [x_(j), x_(n+1-j)]
    // covers the median with the requested confidence.
    const double tail = (1.0 - confidence) / 2.0;
    const boost::math::binomial_distribution<double> bin(static_cast<double>(n), 0.5);
    std::size_t j = 0;
    while (j + 1 <= n / 2 && boost::math::cdf(bin, static_cast<double>(j)) <= tail) ++j;
    if (j == 0) {
        m.lo = v.front();
        m.hi = v.back();
    } else {
        m.lo = v[j - 1];
        m.hi = v[n - j];
    }
    return m;
}

bool TailReport::passed() const {
    auto bad = [](Verdict v) { return v == Verdict::fail; };
    return std::none_of(points.begin(), points.end(), [&](const TailPoint& p) { return bad(p.verdict); }) &&
           std::none_of(checks.begin(), checks.end(), [&](const CheckRow& c) { return bad(c.verdict); });
}

bool CheckReport::passed() const {
    return std::none_of(rows.begin(), rows.end(), [](const CheckRow& c) { return c.verdict == Verdict::fail; });
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = jobs <= 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<std::size_t>(jobs);
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr error;
    std::mutex mu;
    auto work = [&] {
        while (!stop.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                stop = true;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// -------------------------------------------------------------- tail runner

void validate_tail_experiment(const TailExperiment& exp) {
    require(exp.trials >= kMinTrials, "trials = " + std::to_string(exp.trials) + " is below the minimum of " +
                                          std::to_string(kMinTrials));
    require(!exp.probes.empty(), "tail experiment has no statistics");
    for (const auto& probe : exp.probes) {
        validate_envelope(probe.envelope, probe.statistic, exp.ensemble, exp.entry_scale);
        validate_grid(probe.grid, probe.envelope, exp.trials);
        if (probe.median_range) {
            require(probe.median_range->first <= probe.median_range->second, "median range needs lo <= hi");
        }
    }
}

std::vector<TailReport> run_tail_experiments(const TailExperiment& exp, int jobs) {
    validate_tail_experiment(exp);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n_trials = exp.trials;
    const std::size_t n_probes = exp.probes.size();

    struct Plan {
        bool centered_by_sums = false;
        CenterPath path;
    };
    std::vector<Plan> plans(n_probes);
    for (std::size_t j = 0; j < n_probes; ++j) {
        const auto& probe = exp.probes[j];
        if (probe.envelope.interior()) {
            plans[j].centered_by_sums = true;
            plans[j].path = center_path(probe.statistic, exp.ensemble.n);
        }
    }

    std::vector<double> values(n_probes * n_trials);
    std::vector<double> upper(n_probes * n_trials);
    std::vector<double> lower(n_probes * n_trials);
    parallel_for(n_trials, jobs, [&](std::size_t i) {
        RngStream rng(exp.seed, ensembles::stream_hash(0, i));
        Matrix a = ensembles::sample(exp.ensemble, rng);
        if (exp.entry_scale != 1.0) a = a * exp.entry_scale;
        Evaluator ev(a);
        for (std::size_t j = 0; j < n_probes; ++j) {
            const std::size_t slot = j * n_trials + i;
            values[slot] = ev.value(exp.probes[j].statistic);
            if (!plans[j].centered_by_sums) continue;
            const CenterPath& cp = plans[j].path;
            const Spectrum& s = cp.singular ? ev.sv() : ev.eig();
            if (cp.lower) {
                upper[slot] = matstat::bottom_sum(s, cp.k);
                lower[slot] = matstat::bottom_sum(s, cp.k - 1);
            } else {
                upper[slot] = matstat::top_sum(s, cp.k);
                lower[slot] = matstat::top_sum(s, cp.k - 1);
            }
        }
    });
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double floor = clopper_pearson_upper(0, n_trials);
    std::vector<TailReport> reports;
    for (std::size_t j = 0; j < n_probes; ++j) {
        const auto& probe = exp.probes[j];
        const auto& env = probe.envelope;
        TailReport r;
        r.statistic = probe.statistic.name();
        r.envelope = env.name();
        r.trials = n_trials;
        r.seed = exp.seed;
        r.wall_seconds = wall;
        r.resolution_floor = floor;
        r.samples.assign(values.begin() + static_cast<std::ptrdiff_t>(j * n_trials),
                         values.begin() + static_cast<std::ptrdiff_t>((j + 1) * n_trials));
        r.median = estimate_median(r.samples);
        r.mean = mean_of(r.samples);
        r.stddev = stddev_of(r.samples, r.mean);
        if (plans[j].centered_by_sums) {
            const auto hi = std::span<const double>(upper).subspan(j * n_trials, n_trials);
            const auto lo = std::span<const double>(lower).subspan(j * n_trials, n_trials);
            r.upper_sum = estimate_median(hi);
            r.lower_sum = estimate_median(lo);
            r.center = r.upper_sum->median - r.lower_sum->median;
            r.center_rule = plans[j].path.lower ? "median_G_difference"
                            : plans[j].path.singular ? "median_kyfan_difference"
                                                     : "median_F_difference";
        } else {
            r.center = r.median.median;
            r.center_rule = "lower_median";
        }

        std::vector<double> grid = probe.grid.is_default()
                                       ? default_grid(env, r.median.median, floor, probe.grid.count)
                                       : explicit_grid(probe.grid);
        std::vector<double> dev(n_trials);
        for (std::size_t i = 0; i < n_trials; ++i) dev[i] = std::abs(r.samples[i] - r.center);
        std::sort(dev.begin(), dev.end());
        for (double t : grid) {
            TailPoint pt;
            pt.t = t;
            pt.exceed = static_cast<std::size_t>(dev.end() - std::lower_bound(dev.begin(), dev.end(), t));
            pt.empirical = static_cast<double>(pt.exceed) / static_cast<double>(n_trials);
            pt.upper99 = clopper_pearson_upper(pt.exceed, n_trials);
            pt.envelope = env(t);
            if (pt.envelope >= 1.0) {
                pt.verdict = Verdict::vacuous;
            } else {
                pt.verdict = pt.upper99 <= pt.envelope ? Verdict::pass : Verdict::fail;
            }
            r.points.push_back(pt);
        }

        if (const auto form = env.power_form()) {
            r.checks.push_back(mean_median_gap_check(r.samples, form->first, form->second, 1.0));
        }
        if (plans[j].centered_by_sums && !plans[j].path.singular) {
            r.checks.push_back(interior_center_check(r, plans[j].path.k, env.d));
        }
        if (probe.median_range) {
            const auto [lo, hi] = *probe.median_range;
            const bool inside = r.median.hi >= lo && r.median.lo <= hi;
            r.checks.push_back({"median_in_range[" + num(lo) + "," + num(hi) + "]", r.median.median,
                                r.median.median < lo ? lo : hi, inside ? Verdict::pass : Verdict::fail});
        }
        reports.push_back(std::move(r));
    }
    return reports;
}

TailReport run_tail_experiment(const EnsembleSpec& ensemble, const StatisticSpec& stat, const BoundEnvelope& env,
                               std::size_t trials, const TGrid& grid, std::uint64_t seed, int jobs) {
    TailExperiment exp;
    exp.ensemble = ensemble;
    exp.probes.push_back({stat, env, grid, std::nullopt});
    exp.trials = trials;
    exp.seed = seed;
    return std::move(run_tail_experiments(exp, jobs).front());
}

// ------------------------------------------------------------------- checks

double mean_median_constant(double q) {
    require(q >= 1.0, "q must be >= 1");
    return std::pow(4.0, 1.0 + 1.0 / q) * std::tgamma(1.0 + 1.0 / q);
}

CheckRow mean_median_gap_check(std::span<const double> samples, double q, double lipschitz, double d) {
    require(!samples.empty(), "mean-median check needs samples");
    const MedianEstimate med = estimate_median(samples);
    const double mean = mean_of(samples);
    const double sd = stddev_of(samples, mean);
    const double slack = half_width(med) + kZ99 * sd / std::sqrt(static_cast<double>(samples.size()));
    CheckRow row;
    row.check = "mean_median_gap";
    row.value = std::abs(mean - med.median);
    row.bound = lipschitz * d * mean_median_constant(q) + slack;
    row.verdict = row.value <= row.bound ? Verdict::pass : Verdict::fail;
    return row;
}

double interior_center_bound(std::size_t k, double d) {
    const double kk = static_cast<double>(k);
    return 2.0 * std::sqrt(6.0 * std::log(2.0)) * (std::sqrt(kk) + std::sqrt(kk - 1.0)) * d;
}

CheckRow interior_center_check(const TailReport& report, std::size_t k, double d) {
    require(report.upper_sum && report.lower_sum, "report has no partial-sum center");
    const double slack = half_width(report.median) + half_width(*report.upper_sum) + half_width(*report.lower_sum);
    CheckRow row;
    row.check = "interior_center_gap(k=" + std::to_string(k) + ")";
    row.value = std::abs(report.center - report.median.median);
    row.bound = interior_center_bound(k, d) + slack;
    row.verdict = row.value <= row.bound ? Verdict::pass : Verdict::fail;
    return row;
}

CheckReport interior_center_consistency(const EnsembleSpec& ensemble, std::size_t k, std::size_t trials,
                                        std::uint64_t seed, int jobs) {
    require(ensemble.layout == EnsembleSpec::Layout::selfadjoint, "interior center check needs a self-adjoint ensemble");
    require(k >= 2 && k + 1 <= ensemble.n, "k must be in [2, n-1]");
    const double d = ensembles::effective_diameter(ensemble);
    const auto stat = StatisticSpec::lambda(k);
    const std::size_t path = center_path(stat, ensemble.n).k;
    const auto env = BoundEnvelope::thm12_interior(path, d, true);
    TailReport r = run_tail_experiment(ensemble, stat, env, trials, {}, seed, jobs);

    CheckReport out;
    out.name = "interior_center_consistency(lambda(" + std::to_string(k) + "))";
    out.rows = r.checks;
    const auto fails = std::count_if(r.points.begin(), r.points.end(),
                                     [](const TailPoint& p) { return p.verdict == Verdict::fail; });
    out.rows.push_back({"interior_tail_failures", static_cast<double>(fails), 0.0,
                        fails == 0 ? Verdict::pass : Verdict::fail});
    const auto cmp = BoundEnvelope::akv(path, d);
    for (double f : {1.0, 2.0, 4.0, 8.0}) {
        const double t = f * d;
        out.rows.push_back({"akv_vs_interior(t=" + num(t) + ")", cmp(t), env(t), Verdict::info});
    }
    return out;
}

namespace {

struct Fit {
    double slope = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

// Weighted least squares of log sd on log n; Var(log sd) ~ (kurtosis - 1) / (4 N).
Fit fit_log_slope(const std::vector<ScalingRow>& rows, std::size_t trials) {
    require(rows.size() >= 2, "a scaling fit needs at least two n values");
    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::vector<double> w, x, y;
    for (const auto& r : rows) {
        require(r.stddev > 0.0, "zero standard deviation at n = " + std::to_string(r.n));
        w.push_back(4.0 * static_cast<double>(trials) / std::max(r.kurtosis - 1.0, 1e-12));
        x.push_back(std::log(static_cast<double>(r.n)));
        y.push_back(std::log(r.stddev));
        sw += w.back();
        sx += w.back() * x.back();
        sy += w.back() * y.back();
    }
    const double xb = sx / sw, yb = sy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sxx += w[i] * (x[i] - xb) * (x[i] - xb);
        sxy += w[i] * (x[i] - xb) * (y[i] - yb);
    }
    require(sxx > 0.0, "a scaling fit needs distinct n values");
    Fit f;
    f.slope = sxy / sxx;
    const double se = 1.0 / std::sqrt(sxx);
    f.lo = f.slope - kZ99 * se;
    f.hi = f.slope + kZ99 * se;
    return f;
}

ScalingReport binomial_root_scaling(const std::vector<std::size_t>& n_list, double p, std::size_t trials,
                                    std::uint64_t seed) {
    require(!n_list.empty(), "n list is empty");
    require(trials >= kMinTrials, "trials below the minimum of " + std::to_string(kMinTrials));
    ScalingReport rep;
    rep.p = p;
    for (std::size_t n : n_list) {
        require(n >= 1, "n must be positive");
        std::vector<double> s(trials);
        const std::size_t words = (n + 63) / 64;
        const std::uint64_t tail_mask = n % 64 == 0 ? ~0ULL : (1ULL << (n % 64)) - 1;
        for (std::size_t i = 0; i < trials; ++i) {
            RngStream rng(seed, ensembles::stream_hash(n, i));
            std::uint64_t count = 0;
            for (std::size_t w = 0; w < words; ++w) {
                std::uint64_t bits = rng.next_u64();
                if (w + 1 == words) bits &= tail_mask;
                count += static_cast<std::uint64_t>(std::popcount(bits));
            }
            s[i] = std::pow(static_cast<double>(count), 1.0 / p);
        }
        ScalingRow row;
        row.n = n;
        row.mean = mean_of(s);
        double m2 = 0.0, m4 = 0.0;
        for (double v : s) {
            const double c = (v - row.mean) * (v - row.mean);
            m2 += c;
            m4 += c * c;
        }
        m2 /= static_cast<double>(trials);
        m4 /= static_cast<double>(trials);
        row.stddev = stddev_of(s, row.mean);
        row.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
        rep.rows.push_back(row);
    }
    return rep;
}

}  // namespace

ScalingReport clt_counterexample(const std::vector<std::size_t>& n_list, double p, std::size_t trials,
                                 std::uint64_t seed, double tolerance) {
    require(p >= 1.0 && p < 2.0, "the counterexample needs 1 <= p < 2");
    ScalingReport rep = binomial_root_scaling(n_list, p, trials, seed);
    const Fit fit = fit_log_slope(rep.rows, trials);
    rep.slope = fit.slope;
    rep.slope_lo = fit.lo;
    rep.slope_hi = fit.hi;
    const double expected = 1.0 / p - 0.5;
    rep.checks.name = "clt_counterexample(p=" + num(p) + ")";
    for (const auto& r : rep.rows) {
        rep.checks.rows.push_back({"stddev(n=" + std::to_string(r.n) + ")", r.stddev, 0.0, Verdict::info});
    }
    rep.checks.rows.push_back({"log_sd_slope", fit.slope, expected,
                               std::abs(fit.slope - expected) <= tolerance ? Verdict::pass : Verdict::fail});
    rep.checks.rows.push_back({"log_sd_slope_ci99_lo", fit.lo, expected, Verdict::info});
    rep.checks.rows.push_back({"log_sd_slope_ci99_hi", fit.hi, expected, Verdict::info});
    return rep;
}

ScalingReport binomial_root_control(const std::vector<std::size_t>& n_list, double q, std::size_t trials,
                                    std::uint64_t seed) {
    require(q >= 2.0 && std::isfinite(q), "the control needs 2 <= q < inf");
    ScalingReport rep = binomial_root_scaling(n_list, q, trials, seed);
    const Fit fit = fit_log_slope(rep.rows, trials);
    rep.slope = fit.slope;
    rep.slope_lo = fit.lo;
    rep.slope_hi = fit.hi;
    const double bound = std::sqrt(std::pow(4.0, 1.0 + 2.0 / q) * std::tgamma(1.0 + 2.0 / q));
    rep.checks.name = "binomial_root_control(q=" + num(q) + ")";
    for (const auto& r : rep.rows) {
        rep.checks.rows.push_back({"stddev(n=" + std::to_string(r.n) + ")", r.stddev, bound,
                                   r.stddev <= bound ? Verdict::pass : Verdict::fail});
    }
    rep.checks.rows.push_back({"log_sd_slope_ci99_lo", fit.lo, 0.0, fit.lo <= 0.0 ? Verdict::pass : Verdict::fail});
    rep.checks.rows.push_back({"log_sd_slope", fit.slope, 0.0, Verdict::info});
    return rep;
}

namespace {

// Whether some `a` of the rows share at least `b` set bits.
bool has_block(const std::vector<std::uint64_t>& rows, std::size_t a, std::size_t b, std::size_t from,
               std::uint64_t acc) {
    if (static_cast<std::size_t>(std::popcount(acc)) < b) return false;
    if (a == 0) return true;
    for (std::size_t i = from; i + a <= rows.size(); ++i) {
        if (has_block(rows, a - 1, b, i + 1, acc & rows[i])) return true;
    }
    return false;
}

}  // namespace

CheckReport sharpness_submatrix(std::size_t m, std::size_t n, std::size_t a, std::size_t b, double q,
                                std::size_t trials, std::uint64_t seed, int jobs) {
    require(m >= 1 && n >= 1 && n <= 64, "sharpness check needs 1 <= n <= 64 columns");
    require(a >= 1 && a <= m && b >= 1 && b <= n, "block size must fit the matrix");
    require(q >= 2.0, "sharpness check needs q >= 2");
    require(trials >= kMinTrials, "trials below the minimum of " + std::to_string(kMinTrials));
    const auto spec = EnsembleSpec::rectangular(m, n, BoundedLaw::rademacher());
    const double p = conjugate(q);
    const double level = std::pow(static_cast<double>(a * b), 1.0 / q);
    std::vector<std::uint8_t> block(trials), reach(trials);
    parallel_for(trials, jobs, [&](std::size_t i) {
        RngStream rng(seed, ensembles::stream_hash(0, i));
        const Matrix x = ensembles::sample(spec, rng);
        std::vector<std::uint64_t> rows(m, 0);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                if (x.real(r, c) > 0.0) rows[r] |= 1ULL << c;
            }
        }
        block[i] = has_block(rows, a, b, 0, n == 64 ? ~0ULL : (1ULL << n) - 1) ? 1 : 0;
        reach[i] = matstat::opnorm_pq(x, p, q).value >= level * (1.0 - 1e-9) ? 1 : 0;
    });
    const auto hits = static_cast<std::size_t>(std::count(block.begin(), block.end(), 1));
    const auto reached = static_cast<std::size_t>(std::count(reach.begin(), reach.end(), 1));
    const double target = std::pow(2.0, -static_cast<double>(a * b));
    const double nt = static_cast<double>(trials);

    CheckReport out;
    out.name = "sharpness_submatrix(" + std::to_string(a) + "x" + std::to_string(b) + ")";
    Verdict v = Verdict::inconclusive;
    if (nt * target >= 5.0) v = clopper_pearson_upper(hits, trials) >= target ? Verdict::pass : Verdict::fail;
    out.rows.push_back({"all_ones_block_frequency", static_cast<double>(hits) / nt, target, v});
    out.rows.push_back({"all_ones_block_upper99", clopper_pearson_upper(hits, trials), target, Verdict::info});
    out.rows.push_back({"norm_reaches_(ab)^(1/q)_frequency", static_cast<double>(reached) / nt, target,
                        Verdict::info});
    return out;
}

double mean_abs(const BoundedLaw& law) {
    using K = BoundedLaw::Kind;
    const auto& pr = law.params();
    switch (law.kind()) {
        case K::rademacher: return 1.0;
        case K::uniform: {
            const double a = pr[0], b = pr[1];
            if (a >= 0.0) return 0.5 * (a + b);
            if (b <= 0.0) return -0.5 * (a + b);
            return (a * a + b * b) / (2.0 * (b - a));
        }
        case K::two_point: return pr[2] * std::abs(pr[0]) + (1.0 - pr[2]) * std::abs(pr[1]);
        case K::discrete: {
            double acc = 0.0;
            for (std::size_t i = 0; i < law.values().size(); ++i) acc += law.probs()[i] * std::abs(law.values()[i]);
            return acc;
        }
        case K::bernoulli01: return pr[0];
        case K::complex_disc: return 2.0 * pr[0] / 3.0;
        case K::gaussian: {
            const double mu = pr[0], sigma = std::sqrt(pr[1]);
            const boost::math::normal_distribution<double> z;
            return sigma * std::sqrt(2.0 / M_PI) * std::exp(-mu * mu / (2.0 * sigma * sigma)) +
                   mu * (1.0 - 2.0 * boost::math::cdf(z, -mu / sigma));
        }
    }
    return 0.0;
}

CheckReport median_growth_check(const BoundedLaw& law, const std::vector<std::size_t>& n_list, double p, double q,
                                std::size_t trials, std::uint64_t seed, int jobs) {
    require(p >= 1.0 && q >= 1.0, "exponents must be >= 1");
    require(!n_list.empty(), "n list is empty");
    require(trials >= kMinTrials, "trials below the minimum of " + std::to_string(kMinTrials));
    const double c = mean_abs(law);
    require(c > 0.0, "median growth check needs E|x| > 0");
    const bool dual = close(p, conjugate(q));
    CheckReport out;
    out.name = "median_growth(p=" + num(p) + ",q=" + num(q) + ")";
    for (std::size_t n : n_list) {
        require(n >= 1, "n must be positive");
        const auto spec = EnsembleSpec::rectangular(n, n, law);
        std::vector<double> s(trials);
        parallel_for(trials, jobs, [&](std::size_t i) {
            RngStream rng(seed, ensembles::stream_hash(n, i));
            s[i] = matstat::opnorm_pq(ensembles::sample(spec, rng), p, q).value;
        });
        const MedianEstimate med = estimate_median(s);
        const double nd = static_cast<double>(n);
        const double bound = c * std::max(std::pow(nd, 1.0 / q), std::pow(nd, 1.0 / conjugate(p)));
        out.rows.push_back({"median(n=" + std::to_string(n) + ")", med.median, bound,
                            med.hi >= bound ? Verdict::pass : Verdict::fail});
        if (dual) {
            out.rows.push_back({"median_ratio(n=" + std::to_string(n) + ")", med.median / std::pow(nd, 1.0 / q), 0.0,
                                Verdict::info});
        }
    }
    return out;
}

CheckReport ke_bound_suite(const std::vector<KeCase>& cases, std::size_t grid_points) {
    require(grid_points >= 1, "grid needs at least one point");
    CheckReport out;
    out.name = "ke_bounds";
    for (const auto& c : cases) {
        const std::vector<double> ones(c.norm.dimension(), 1.0);
        const double t_max = c.norm(ones);
        double worst = kInf;
        for (std::size_t j = 1; j <= grid_points; ++j) {
            const double t = t_max * static_cast<double>(j) / static_cast<double>(grid_points);
            worst = std::min(worst, vecnorms::ke_numeric(c.norm, t) - vecnorms::ke_bound(c.norm, t, c.r));
        }
        out.rows.push_back({"numeric_minus_bound[" + c.label + "]", worst, -1e-8,
                            worst >= -1e-8 ? Verdict::pass : Verdict::fail});
        if (c.norm.kind() == vecnorms::UnconditionalNorm::Kind::lq) {
            const double q = c.norm.exponent();
            double err = 0.0;
            for (std::size_t k = 1; k <= c.norm.dimension(); ++k) {
                const double t = std::pow(static_cast<double>(k), 1.0 / q);
                const double root = std::sqrt(static_cast<double>(k));
                err = std::max({err, std::abs(vecnorms::ke_numeric(c.norm, t) - root),
                                std::abs(vecnorms::ke_bound(c.norm, t) - root)});
            }
            out.rows.push_back({"equality_at_k^(1/q)[" + c.label + "]", err, 1e-9,
                                err <= 1e-9 ? Verdict::pass : Verdict::fail});
        }
    }
    return out;
}

CheckReport hoelder_suite(std::size_t random_matrices, std::size_t oracle_instances, std::uint64_t seed, int jobs) {
    struct Case {
        Matrix a;
        double p = 2.0;
        double q = 2.0;
    };
    auto make = [&](std::uint64_t salt, std::size_t i, std::size_t max_cols) {
        RngStream rng(seed, ensembles::stream_hash(salt, i));
        const std::size_t m = 2 + rng.next_u32() % 7;
        const std::size_t n = max_cols == 3 ? 2 + rng.next_u32() % 2 : 2 + rng.next_u32() % 7;
        Case c;
        c.a = ensembles::sample(EnsembleSpec::rectangular(m, n, BoundedLaw::uniform(-1.0, 1.0)), rng);
        c.p = 1.0 + 1e-3 + (1.0 - 1e-3) * rng.uniform();
        c.q = 2.0 + 6.0 * rng.uniform();
        return c;
    };
    std::vector<double> vec_gap(random_matrices), row_gap(random_matrices), oracle_gap(oracle_instances);
    parallel_for(random_matrices, jobs, [&](std::size_t i) {
        const Case c = make(1, i, 8);
        const double v = matstat::opnorm_pq(c.a, c.p, c.q).value;
        vec_gap[i] = v - matstat::hoelder_vec_bound(c.a, c.p, c.q);
        row_gap[i] = v - matstat::hoelder_row_bound(c.a, c.p, c.q);
    });
    parallel_for(oracle_instances, jobs, [&](std::size_t i) {
        const Case c = make(2, i, 3);
        oracle_gap[i] = std::abs(matstat::opnorm_pq(c.a, c.p, c.q).value - matstat::opnorm_pq_oracle(c.a, c.p, c.q, 180));
    });
    auto max_of = [](const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); };
    CheckReport out;
    out.name = "hoelder_and_oracle";
    const double vg = max_of(vec_gap), rg = max_of(row_gap), og = max_of(oracle_gap);
    out.rows.push_back({"opnorm_minus_vec_bound_max", vg, 1e-9, vg <= 1e-9 ? Verdict::pass : Verdict::fail});
    out.rows.push_back({"opnorm_minus_row_bound_max", rg, 1e-9, rg <= 1e-9 ? Verdict::pass : Verdict::fail});
    out.rows.push_back({"oracle_abs_diff_max", og, 1e-5, og <= 1e-5 ? Verdict::pass : Verdict::fail});
    out.rows.push_back({"random_matrices", static_cast<double>(random_matrices), 0.0, Verdict::info});
    out.rows.push_back({"oracle_instances", static_cast<double>(oracle_instances), 0.0, Verdict::info});
    return out;
}

namespace {

// Nonempty subset of {0, ..., size - 1}; the cube of a uniform as the target
// fraction favours small sets, where 1 / P(A) is largest.
std::vector<bool> random_subset(std::uint64_t size, RngStream& rng) {
    const double u = rng.uniform();
    const auto target = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(u * u * u * size)));
    std::vector<std::uint64_t> order(size);
    for (std::uint64_t i = 0; i < size; ++i) order[i] = i;
    for (std::uint64_t i = 0; i < target; ++i) std::swap(order[i], order[i + rng.next_u64() % (size - i)]);
    std::vector<bool> ind(size, false);
    for (std::uint64_t i = 0; i < target; ++i) ind[order[i]] = true;
    return ind;
}

vecnorms::UnconditionalNorm random_norm(std::size_t dim, RngStream& rng) {
    switch (rng.next_u32() % 4) {
        case 0: return vecnorms::UnconditionalNorm::lq(2.0 + 4.0 * rng.uniform(), dim);
        case 1: {
            std::vector<double> w(dim);
            for (auto& x : w) x = 0.2 + rng.uniform();
            std::sort(w.begin(), w.end(), std::greater<>());
            return vecnorms::UnconditionalNorm::lorentz(vecnorms::LorentzWeights(w), 1.0 + rng.uniform());
        }
        case 2: return vecnorms::UnconditionalNorm::orlicz(vecnorms::OrliczFunction::power(2.0 + 2.0 * rng.uniform()), dim);
        default: return vecnorms::UnconditionalNorm::orlicz(vecnorms::OrliczFunction::scaled_power(2.0, 2.0), dim);
    }
}

}  // namespace

CheckReport talagrand_suite(const std::vector<std::size_t>& dims, std::size_t subsets, std::size_t dist_instances,
                            std::uint64_t seed, int jobs) {
    using namespace talagrand;
    CheckReport out;
    out.name = "talagrand";
    for (std::size_t n : dims) {
        const ProductSpace cube = ProductSpace::uniform_cube(n);
        std::vector<double> ratio(subsets);
        std::vector<std::uint8_t> ok(subsets);
        parallel_for(subsets, jobs, [&](std::size_t i) {
            RngStream rng(seed, ensembles::stream_hash(n, i));
            const auto rep = verify_isoperimetry(cube, random_subset(cube.size(), rng));
            ratio[i] = rep.lhs / rep.rhs;
            ok[i] = rep.pass ? 1 : 0;
        });
        const auto failures = static_cast<double>(std::count(ok.begin(), ok.end(), 0));
        out.rows.push_back({"isoperimetry_failures(N=" + std::to_string(n) + ")", failures, 0.0,
                            failures == 0.0 ? Verdict::pass : Verdict::fail});
        out.rows.push_back({"isoperimetry_max_lhs_over_rhs(N=" + std::to_string(n) + ")",
                            ratio.empty() ? 0.0 : *std::max_element(ratio.begin(), ratio.end()), 1.0, Verdict::info});
    }
    std::vector<double> margin(dist_instances);
    std::vector<std::uint8_t> ok(dist_instances);
    parallel_for(dist_instances, jobs, [&](std::size_t i) {
        RngStream rng(seed, ensembles::stream_hash(0xd157, i));
        const std::size_t n = 2 + rng.next_u32() % 4;
        const std::size_t dim = 1 + rng.next_u32() % 2;
        std::vector<Factor> fs;
        for (std::size_t j = 0; j < n; ++j) {
            Factor f;
            const std::size_t pts = 2 + rng.next_u32() % 2;
            // points in [0, 0.7]^dim / sqrt(dim): diameter below 1
            for (std::size_t k = 0; k < pts; ++k) {
                std::vector<double> v(dim);
                for (auto& x : v) x = 0.7 * rng.uniform() / std::sqrt(static_cast<double>(dim));
                f.points.push_back(v);
            }
            double tot = 0.0;
            for (std::size_t k = 0; k < pts; ++k) tot += (f.probs.emplace_back(0.1 + rng.uniform()));
            for (auto& pr : f.probs) pr /= tot;
            fs.push_back(std::move(f));
        }
        const ProductSpace space(fs);
        auto point = [&] {
            Point x(n);
            for (std::size_t j = 0; j < n; ++j) x[j] = rng.next_u32() % space.factor(j).points.size();
            return x;
        };
        std::vector<Point> a(1 + rng.next_u32() % 4);
        for (auto& y : a) y = point();
        const Point x = point();
        const auto rep = verify_ke_dist_bound(space, random_norm(n, rng), a, x);
        margin[i] = rep.margin;
        ok[i] = rep.pass ? 1 : 0;
    });
    const auto failures = static_cast<double>(std::count(ok.begin(), ok.end(), 0));
    out.rows.push_back({"ke_dist_failures", failures, 0.0, failures == 0.0 ? Verdict::pass : Verdict::fail});
    if (!margin.empty()) {
        out.rows.push_back({"ke_dist_min_margin", *std::min_element(margin.begin(), margin.end()), 0.0, Verdict::info});
    }
    return out;
}

}  // namespace concmat::harness
