#include "concmat/talagrand.hpp"

#include "concmat/error.hpp"
#include "concmat/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace concmat::talagrand {

namespace {

constexpr std::uint64_t kMaxExhaustive = std::uint64_t{1} << 20;
constexpr std::size_t kMemberCap = 4096;

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double euclid(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// Solves the dense system m x = rhs in place (partial pivoting). Returns
// false when a pivot vanishes.
bool solve_dense(std::vector<double>& m, std::vector<double>& rhs, std::size_t n) {
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(m[r * n + c]) > std::abs(m[piv * n + c])) piv = r;
        }
        if (std::abs(m[piv * n + c]) < 1e-14) return false;
        if (piv != c) {
            for (std::size_t k = 0; k < n; ++k) std::swap(m[c * n + k], m[piv * n + k]);
            std::swap(rhs[c], rhs[piv]);
        }
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r * n + c] / m[c * n + c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < n; ++k) m[r * n + k] -= f * m[c * n + k];
            rhs[r] -= f * rhs[c];
        }
    }
    for (std::size_t c = n; c-- > 0;) {
        double s = rhs[c];
        for (std::size_t k = c + 1; k < n; ++k) s -= m[c * n + k] * rhs[k];
        rhs[c] = s / m[c * n + c];
    }
    return true;
}

void check_vertices(std::span<const double> vertices, std::size_t dim) {
    if (dim == 0 || vertices.empty() || vertices.size() % dim != 0) {
        throw DomainError("min-norm point needs a nonempty vertex set");
    }
}

void combine(std::span<const double> v, std::size_t dim, const std::vector<std::size_t>& active,
             const std::vector<double>& w, std::vector<double>& x) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const double* p = v.data() + active[i] * dim;
        for (std::size_t d = 0; d < dim; ++d) x[d] += w[i] * p[d];
    }
}

std::size_t argmin_dot(std::span<const double> v, std::size_t dim, const std::vector<double>& x, double& best) {
    const std::size_t count = v.size() / dim;
    std::size_t arg = 0;
    best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
        const double s = dot(x.data(), v.data() + j * dim, dim);
        if (s < best) {
            best = s;
            arg = j;
        }
    }
    return arg;
}

void project_simplex(std::vector<double>& v) {
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0;
    double tau = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) tau = t;
    }
    for (double& x : v) x = std::max(0.0, x - tau);
}

}  // namespace

ProductSpace::ProductSpace(std::vector<Factor> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw InvalidParameter("product space needs at least one factor");
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        const Factor& f = factors_[j];
        if (f.points.empty() || f.points.size() != f.probs.size()) {
            throw InvalidParameter("factor " + std::to_string(j) + ": points and probs must match");
        }
        double total = 0.0;
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.points[i].size() != f.points[0].size() || f.points[i].empty()) {
                throw InvalidParameter("factor " + std::to_string(j) + ": points must share a dimension");
            }
            if (!(f.probs[i] >= 0.0)) throw InvalidParameter("factor probabilities must be nonnegative");
            total += f.probs[i];
            for (std::size_t k = 0; k < i; ++k) {
                if (f.points[k] == f.points[i]) {
                    throw InvalidParameter("factor " + std::to_string(j) + ": support points must be distinct");
                }
            }
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw InvalidParameter("factor " + std::to_string(j) + ": probabilities must sum to 1");
        }
        const std::uint64_t k = f.points.size();
        size_ = size_ > std::numeric_limits<std::uint64_t>::max() / k ? std::numeric_limits<std::uint64_t>::max()
                                                                       : size_ * k;
    }
}

ProductSpace ProductSpace::uniform_cube(std::size_t n) {
    std::vector<Factor> f(n, Factor{{{0.0}, {1.0}}, {0.5, 0.5}});
    return ProductSpace(std::move(f));
}

Point ProductSpace::decode(std::uint64_t index) const {
    Point x(factors_.size());
    for (std::size_t j = 0; j < factors_.size(); ++j) {
        const std::uint64_t k = factors_[j].points.size();
        x[j] = static_cast<std::size_t>(index % k);
        index /= k;
    }
    return x;
}

std::uint64_t ProductSpace::encode(const Point& x) const {
    if (x.size() != factors_.size()) throw InvalidInput("point length does not match the space");
    std::uint64_t idx = 0;
    for (std::size_t j = factors_.size(); j-- > 0;) {
        if (x[j] >= factors_[j].points.size()) throw InvalidInput("point index out of range");
        idx = idx * factors_[j].points.size() + x[j];
    }
    return idx;
}

double ProductSpace::probability(const Point& x) const {
    if (x.size() != factors_.size()) throw InvalidInput("point length does not match the space");
    double p = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (x[j] >= factors_[j].points.size()) throw InvalidInput("point index out of range");
        p *= factors_[j].probs[x[j]];
    }
    return p;
}

double ProductSpace::max_factor_diameter() const {
    double d = 0.0;
    for (const Factor& f : factors_) {
        for (std::size_t i = 0; i < f.points.size(); ++i) {
            if (f.probs[i] == 0.0) continue;
            for (std::size_t k = 0; k < i; ++k) {
                if (f.probs[k] > 0.0) d = std::max(d, euclid(f.points[i], f.points[k]));
            }
        }
    }
    return d;
}

HammingPattern hamming_pattern(std::span<const std::size_t> x, std::span<const std::size_t> y) {
    if (x.size() != y.size()) throw InvalidInput("hamming_pattern: length mismatch");
    HammingPattern h(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) h[j] = x[j] != y[j];
    return h;
}

HammingPattern hamming_pattern(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw InvalidInput("hamming_pattern: length mismatch");
    HammingPattern h(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) h[j] = x[j] != y[j];
    return h;
}

MinNormResult min_norm_point(std::span<const double> v, std::size_t dim, double tolerance) {
    check_vertices(v, dim);
    const std::size_t count = v.size() / dim;
    constexpr double kWeightTol = 1e-12;

    double scale = 0.0;
    std::size_t start = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
        const double s = dot(v.data() + j * dim, v.data() + j * dim, dim);
        scale = std::max(scale, s);
        if (s < best_sq) {
            best_sq = s;
            start = j;
        }
    }
    const double stop = tolerance * std::max(1.0, scale);

    std::vector<std::size_t> active{start};
    std::vector<double> w{1.0};
    std::vector<double> x(v.begin() + start * dim, v.begin() + (start + 1) * dim);
    MinNormResult res;

    int it = 0;
    const int max_major = 10 * static_cast<int>(count + dim) + 100;
    for (; it < max_major; ++it) {
        double mind = 0.0;
        const std::size_t j = argmin_dot(v, dim, x, mind);
        const double xx = dot(x.data(), x.data(), dim);
        res.gap = xx - mind;
        if (res.gap <= stop) {
            res.converged = true;
            break;
        }
        if (std::find(active.begin(), active.end(), j) != active.end()) break;  // stalled
        active.push_back(j);
        w.push_back(0.0);

        while (true) {
            const std::size_t s = active.size();
            std::vector<double> m((s + 1) * (s + 1), 0.0);
            std::vector<double> rhs(s + 1, 0.0);
            for (std::size_t a = 0; a < s; ++a) {
                for (std::size_t b = a; b < s; ++b) {
                    const double g = dot(v.data() + active[a] * dim, v.data() + active[b] * dim, dim);
                    m[a * (s + 1) + b] = g;
                    m[b * (s + 1) + a] = g;
                }
                m[a * (s + 1) + s] = 1.0;
                m[s * (s + 1) + a] = 1.0;
            }
            rhs[s] = 1.0;
            if (!solve_dense(m, rhs, s + 1)) {
                // affinely dependent corral: drop the newest point and stop
                active.pop_back();
                w.pop_back();
                it = max_major;
                break;
            }
            bool interior = true;
            for (std::size_t a = 0; a < s; ++a) interior = interior && rhs[a] > kWeightTol;
            if (interior) {
                w.assign(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(s));
                break;
            }
            double theta = 1.0;
            for (std::size_t a = 0; a < s; ++a) {
                if (rhs[a] <= kWeightTol && w[a] - rhs[a] > 0.0) theta = std::min(theta, w[a] / (w[a] - rhs[a]));
            }
            std::vector<std::size_t> keep_idx;
            std::vector<double> keep_w;
            for (std::size_t a = 0; a < s; ++a) {
                const double nw = theta * rhs[a] + (1.0 - theta) * w[a];
                if (nw > kWeightTol) {
                    keep_idx.push_back(active[a]);
                    keep_w.push_back(nw);
                }
            }
            const double total = std::accumulate(keep_w.begin(), keep_w.end(), 0.0);
            for (double& z : keep_w) z /= total;
            active = std::move(keep_idx);
            w = std::move(keep_w);
        }
        combine(v, dim, active, w, x);
    }
    if (!res.converged) {
        double mind = 0.0;
        argmin_dot(v, dim, x, mind);
        res.gap = dot(x.data(), x.data(), dim) - mind;
        res.converged = res.gap <= stop;
    }
    res.iterations = it;
    res.point = x;
    res.norm = std::sqrt(dot(x.data(), x.data(), dim));
    res.weights.assign(count, 0.0);
    for (std::size_t a = 0; a < active.size(); ++a) res.weights[active[a]] = w[a];
    return res;
}

MinNormResult min_norm_point_fw(std::span<const double> v, std::size_t dim, int max_iterations, double tolerance) {
    check_vertices(v, dim);
    const std::size_t count = v.size() / dim;
    std::vector<double> w(count, 0.0);
    std::size_t start = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
        const double s = dot(v.data() + j * dim, v.data() + j * dim, dim);
        if (s < best) {
            best = s;
            start = j;
        }
    }
    w[start] = 1.0;
    std::vector<double> x(v.begin() + start * dim, v.begin() + (start + 1) * dim);
    std::vector<double> d(dim);
    MinNormResult res;
    int it = 0;
    for (; it < max_iterations; ++it) {
        double mind = 0.0;
        const std::size_t s = argmin_dot(v, dim, x, mind);
        const double xx = dot(x.data(), x.data(), dim);
        res.gap = xx - mind;
        if (res.gap <= tolerance) {
            res.converged = true;
            break;
        }
        std::size_t away = count;
        double maxd = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < count; ++j) {
            if (w[j] <= 0.0) continue;
            const double t = dot(x.data(), v.data() + j * dim, dim);
            if (t > maxd) {
                maxd = t;
                away = j;
            }
        }
        const bool toward = res.gap >= maxd - xx;
        double gmax = 1.0;
        if (toward) {
            for (std::size_t k = 0; k < dim; ++k) d[k] = v[s * dim + k] - x[k];
        } else {
            for (std::size_t k = 0; k < dim; ++k) d[k] = x[k] - v[away * dim + k];
            gmax = w[away] / (1.0 - w[away]);
        }
        const double dd = dot(d.data(), d.data(), dim);
        if (dd == 0.0) break;
        const double gamma = std::clamp(-dot(x.data(), d.data(), dim) / dd, 0.0, gmax);
        if (toward) {
            for (double& z : w) z *= 1.0 - gamma;
            w[s] += gamma;
        } else {
            for (double& z : w) z *= 1.0 + gamma;
            w[away] -= gamma;
            if (gamma == gmax) w[away] = 0.0;
        }
        for (std::size_t k = 0; k < dim; ++k) x[k] += gamma * d[k];
    }
    res.iterations = it;
    res.point = x;
    res.norm = std::sqrt(dot(x.data(), x.data(), dim));
    res.weights = std::move(w);
    return res;
}

ConvexDistance convex_distance(const std::vector<HammingPattern>& patterns) {
    if (patterns.empty()) throw DomainError("convex distance to an empty set is undefined");
    const std::size_t n = patterns[0].size();
    for (const auto& p : patterns) {
        if (p.size() != n) throw InvalidInput("patterns must share a length");
    }
    std::vector<HammingPattern> uniq(patterns);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    ConvexDistance out;
    out.vertices = uniq.size();
    if (n == 0) return out;
    for (const auto& p : uniq) {
        if (std::all_of(p.begin(), p.end(), [](std::uint8_t b) { return b == 0; })) return out;
    }
    std::vector<double> flat;
    flat.reserve(uniq.size() * n);
    for (const auto& p : uniq) {
        for (auto b : p) flat.push_back(b);
    }
    const MinNormResult r = min_norm_point(flat, n);
    out.value = r.norm;
    out.gap = r.gap;
    return out;
}

ConvexDistance convex_distance(const std::vector<Point>& a, const Point& x) {
    if (a.empty()) throw DomainError("convex distance to an empty set is undefined");
    std::vector<HammingPattern> patterns;
    patterns.reserve(a.size());
    for (const auto& y : a) patterns.push_back(hamming_pattern(x, y));
    return convex_distance(patterns);
}

double convex_distance_lq(const std::vector<HammingPattern>& patterns, double q) {
    if (patterns.empty()) throw DomainError("convex distance to an empty set is undefined");
    if (!(q >= 1.0) || !std::isfinite(q)) throw InvalidParameter("q must be finite and >= 1");
    std::vector<HammingPattern> uniq(patterns);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    const std::size_t n = uniq[0].size();
    if (q == 1.0) {
        // the l_1 norm is linear on the nonnegative orthant: best vertex wins
        std::size_t best = n;
        for (const auto& p : uniq) best = std::min<std::size_t>(best, std::count(p.begin(), p.end(), 1));
        return static_cast<double>(best);
    }
    if (q == 2.0) return convex_distance(uniq).value;
    const std::size_t count = uniq.size();
    auto phi = [&](const std::vector<double>& z) {
        double s = 0.0;
        for (double c : z) s += std::pow(c, q);
        return s;
    };
    std::vector<double> w(count, 0.0);
    std::size_t start = 0;
    for (std::size_t j = 1; j < count; ++j) {
        if (std::count(uniq[j].begin(), uniq[j].end(), 1) < std::count(uniq[start].begin(), uniq[start].end(), 1)) {
            start = j;
        }
    }
    w[start] = 1.0;
    std::vector<double> z(uniq[start].begin(), uniq[start].end());
    std::vector<double> grad(n), d(n), trial(n);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t k = 0; k < n; ++k) grad[k] = q * std::pow(z[k], q - 1.0);
        double mins = std::numeric_limits<double>::infinity();
        double maxa = -std::numeric_limits<double>::infinity();
        std::size_t s = 0;
        std::size_t away = 0;
        for (std::size_t j = 0; j < count; ++j) {
            double g = 0.0;
            for (std::size_t k = 0; k < n; ++k) g += grad[k] * uniq[j][k];
            if (g < mins) {
                mins = g;
                s = j;
            }
            if (w[j] > 0.0 && g > maxa) {
                maxa = g;
                away = j;
            }
        }
        const double gz = std::inner_product(grad.begin(), grad.end(), z.begin(), 0.0);
        const double fw_gap = gz - mins;
        if (fw_gap <= 1e-12 * std::max(1.0, phi(z))) break;
        const bool toward = fw_gap >= maxa - gz;
        double gmax = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            d[k] = toward ? uniq[s][k] - z[k] : z[k] - uniq[away][k];
        }
        if (!toward) gmax = w[away] / (1.0 - w[away]);
        // golden-section line search on the convex restriction
        double lo = 0.0;
        double hi = gmax;
        const double r = (std::sqrt(5.0) - 1.0) / 2.0;
        auto at = [&](double g) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = std::max(0.0, z[k] + g * d[k]);
            return phi(trial);
        };
        double c1 = hi - r * (hi - lo);
        double c2 = lo + r * (hi - lo);
        double f1 = at(c1);
        double f2 = at(c2);
        for (int k = 0; k < 80; ++k) {
            if (f1 <= f2) {
                hi = c2;
                c2 = c1;
                f2 = f1;
                c1 = hi - r * (hi - lo);
                f1 = at(c1);
            } else {
                lo = c1;
                c1 = c2;
                f1 = f2;
                c2 = lo + r * (hi - lo);
                f2 = at(c2);
            }
        }
        double gamma = 0.5 * (lo + hi);
        if (at(gmax) <= at(gamma)) gamma = gmax;
        if (gamma <= 0.0) break;
        if (toward) {
            for (double& c : w) c *= 1.0 - gamma;
            w[s] += gamma;
        } else {
            for (double& c : w) c *= 1.0 + gamma;
            w[away] -= gamma;
            if (gamma == gmax) w[away] = 0.0;
        }
        for (std::size_t k = 0; k < n; ++k) z[k] = std::max(0.0, z[k] + gamma * d[k]);
    }
    return std::pow(phi(z), 1.0 / q);
}

IsoperimetryReport verify_isoperimetry(const ProductSpace& space, const std::vector<bool>& indicator,
                                       std::span<const double> t_grid) {
    if (space.size() > kMaxExhaustive) throw SizeError("product space exceeds 2^20 points");
    const std::size_t n = space.dimension();
    if (n > 64) throw SizeError("exhaustive mode supports at most 64 factors");
    const std::uint64_t total = space.size();
    if (indicator.size() != total) throw InvalidInput("indicator length must equal the number of points");

    std::vector<Point> members;
    double pa = 0.0;
    for (std::uint64_t i = 0; i < total; ++i) {
        if (!indicator[i]) continue;
        members.push_back(space.decode(i));
        pa += space.probability(members.back());
    }
    if (members.empty() || !(pa > 0.0)) throw DomainError("the set A must have positive probability");

    IsoperimetryReport rep;
    rep.measure = pa;
    rep.members = members.size();
    std::vector<Point> used;
    if (members.size() > kMemberCap) {
        for (std::size_t i = 0; i < kMemberCap; ++i) used.push_back(members[i * members.size() / kMemberCap]);
    } else {
        used = members;
    }
    rep.members_used = used.size();

    std::vector<double> fvals(total, 0.0);
    std::vector<std::uint64_t> masks(used.size());
    std::vector<double> flat;
    for (std::uint64_t i = 0; i < total; ++i) {
        if (indicator[i]) continue;
        const Point x = space.decode(i);
        for (std::size_t k = 0; k < used.size(); ++k) {
            std::uint64_t m = 0;
            for (std::size_t j = 0; j < n; ++j) m |= static_cast<std::uint64_t>(x[j] != used[k][j]) << j;
            masks[k] = m;
        }
        std::vector<std::uint64_t> uniq(masks);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (uniq.front() == 0) continue;
        flat.assign(uniq.size() * n, 0.0);
        for (std::size_t k = 0; k < uniq.size(); ++k) {
            for (std::size_t j = 0; j < n; ++j) flat[k * n + j] = static_cast<double>((uniq[k] >> j) & 1u);
        }
        const MinNormResult r = min_norm_point(flat, n);
        fvals[i] = r.norm;
        rep.max_gap = std::max(rep.max_gap, r.gap);
    }

    double lhs = 0.0;
    for (std::uint64_t i = 0; i < total; ++i) {
        lhs += space.probability(space.decode(i)) * std::exp(fvals[i] * fvals[i] / 4.0);
    }
    rep.lhs = lhs;
    rep.rhs = 1.0 / pa;
    rep.margin = rep.rhs - rep.lhs;
    rep.pass = rep.lhs <= rep.rhs;
    for (double t : t_grid) {
        TailCheck tc;
        tc.t = t;
        for (std::uint64_t i = 0; i < total; ++i) {
            if (fvals[i] >= t) tc.probability += space.probability(space.decode(i));
        }
        tc.bound = std::exp(-t * t / 4.0) / pa;
        tc.pass = tc.probability <= tc.bound;
        rep.tail.push_back(tc);
    }
    return rep;
}

double dist_to_hull(const ProductSpace& space, const vecnorms::UnconditionalNorm& e, const std::vector<Point>& a,
                    const Point& x) {
    if (a.empty()) throw DomainError("distance to an empty set is undefined");
    const std::size_t n = space.dimension();
    if (e.dimension() != n) throw InvalidParameter("norm dimension must equal the number of factors");
    const std::size_t k = a.size();
    // diffs[i][j] = x_j - y^i_j as a vector in the factor space
    std::vector<std::vector<std::vector<double>>> diffs(k, std::vector<std::vector<double>>(n));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& px = space.factor(j).points.at(x.at(j));
            const auto& py = space.factor(j).points.at(a[i].at(j));
            diffs[i][j].resize(px.size());
            for (std::size_t d = 0; d < px.size(); ++d) diffs[i][j][d] = px[d] - py[d];
        }
    }
    std::vector<std::vector<double>> z(n);
    std::vector<double> r(n);
    auto eval = [&](const std::vector<double>& th) {
        for (std::size_t j = 0; j < n; ++j) {
            z[j].assign(diffs[0][j].size(), 0.0);
            for (std::size_t i = 0; i < k; ++i) {
                for (std::size_t d = 0; d < z[j].size(); ++d) z[j][d] += th[i] * diffs[i][j][d];
            }
            double s = 0.0;
            for (double c : z[j]) s += c * c;
            r[j] = std::sqrt(s);
        }
        return e(r);
    };
    auto grad = [&](const std::vector<double>& th, std::vector<double>& g) {
        eval(th);
        const std::vector<double> ge = e.gradient(r);
        g.assign(k, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (r[j] == 0.0 || ge[j] == 0.0) continue;
            for (std::size_t i = 0; i < k; ++i) {
                double s = 0.0;
                for (std::size_t d = 0; d < z[j].size(); ++d) s += z[j][d] * diffs[i][j][d];
                g[i] += ge[j] * s / r[j];
            }
        }
    };

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> th(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::fill(th.begin(), th.end(), 0.0);
        th[i] = 1.0;
        best = std::min(best, eval(th));
    }
    if (k == 1) return best;
    ensembles::RngStream rng(0x7a1a, k * 1000003 + n);
    std::vector<double> g, cand;
    for (int restart = 0; restart < 8; ++restart) {
        if (restart == 0) {
            std::fill(th.begin(), th.end(), 1.0 / static_cast<double>(k));
        } else {
            double s = 0.0;
            for (double& c : th) {
                c = -std::log(rng.uniform_open());
                s += c;
            }
            for (double& c : th) c /= s;
        }
        double f = eval(th);
        double step = 1.0;
        for (int it = 0; it < 3000; ++it) {
            grad(th, g);
            // Frank-Wolfe gap of the current point
            const double gt = std::inner_product(g.begin(), g.end(), th.begin(), 0.0);
            const double gmin = *std::min_element(g.begin(), g.end());
            if (gt - gmin <= 1e-10) break;
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                cand = th;
                for (std::size_t i = 0; i < k; ++i) cand[i] -= step * g[i];
                project_simplex(cand);
                const double fc = eval(cand);
                if (fc < f) {
                    th = cand;
                    f = fc;
                    moved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        best = std::min(best, f);
    }
    return best;
}

KeDistReport verify_ke_dist_bound(const ProductSpace& space, const vecnorms::UnconditionalNorm& e,
                                  const std::vector<Point>& a, const Point& x) {
    if (space.max_factor_diameter() > 1.0 + 1e-12) throw InvalidParameter("factor supports must have diameter <= 1");
    KeDistReport rep;
    rep.dist = dist_to_hull(space, e, a, x);
    rep.ke_of_dist = rep.dist > 0.0 ? vecnorms::ke_numeric(e, rep.dist) : 0.0;
    rep.fc = convex_distance(a, x).value;
    rep.margin = rep.fc - rep.ke_of_dist;
    rep.pass = rep.ke_of_dist <= rep.fc + 1e-8;
    return rep;
}

}  // namespace concmat::talagrand
