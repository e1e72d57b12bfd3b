#include "concmat/matstat.hpp"

#include "concmat/error.hpp"
#include "concmat/vecnorms.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <string>

namespace concmat::matstat {

using vecnorms::conjugate;
using vecnorms::lp_norm;

namespace {

using cplx = std::complex<double>;

void require_finite(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) throw InvalidInput("empty matrix");
    if (!a.all_finite()) throw InvalidInput("matrix has non-finite entries");
}

// |a|^e with cheap paths for the small integer exponents that dominate the
// Monte Carlo runs (q = 4 gives e = 3, p = 4/3 gives p' - 1 = 3).
inline double pow_abs(double a, double e) {
    if (e == 1.0) return a;
    if (e == 2.0) return a * a;
    if (e == 3.0) return a * a * a;
    if (e == 0.0) return 1.0;
    return std::pow(a, e);
}

inline double unit_sign(double v) { return v >= 0.0 ? 1.0 : -1.0; }
inline cplx unit_sign(cplx v) {
    const double r = std::abs(v);
    return r > 0.0 ? v / r : cplx(1.0, 0.0);
}
inline double modulus(double v) { return std::abs(v); }
inline double modulus(cplx v) { return std::abs(v); }
inline double conj_of(double v) { return v; }
inline cplx conj_of(cplx v) { return std::conj(v); }

template <typename T>
double norm_of(std::span<const T> v, double p) {
    return lp_norm(v, p);
}

// Nonlinear power ascent for ||A||_{p->q} over scalar type T.
template <typename T>
class Ascent {
public:
    Ascent(const Matrix& a, double p, double q, const OpNormOptions& opt)
        : m_(a.rows()), n_(a.cols()), p_(p), q_(q), pc_(conjugate(p)), opt_(opt),
          a_(m_ * n_), y_(m_), u_(m_), z_(n_) {
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if constexpr (std::is_same_v<T, double>) {
                    a_[i * n_ + j] = a.real(i, j);
                } else {
                    a_[i * n_ + j] = a(i, j);
                }
            }
        }
    }

    // Runs one ascent from x (overwritten); returns the best attained value.
    double run(std::vector<T>& x, int& iterations) {
        if (!normalize(x)) return 0.0;
        double v = apply(x);
        double best = v;
        for (int it = 0; it < opt_.max_iterations; ++it) {
            ++iterations;
            // u = J_q(y), scaled by ||y||_inf to stay in range.
            double ymax = 0.0;
            for (const T& yi : y_) ymax = std::max(ymax, modulus(yi));
            if (ymax == 0.0) break;
            for (std::size_t i = 0; i < m_; ++i) {
                const double r = modulus(y_[i]) / ymax;
                u_[i] = r > 0.0 ? unit_sign(y_[i]) * pow_abs(r, q_ - 1.0) : T(0.0);
            }
            // z = A* u
            std::fill(z_.begin(), z_.end(), T(0.0));
            for (std::size_t i = 0; i < m_; ++i) {
                const T ui = u_[i];
                const T* row = &a_[i * n_];
                for (std::size_t j = 0; j < n_; ++j) z_[j] += conj_of(row[j]) * ui;
            }
            double zmax = 0.0;
            for (const T& zj : z_) zmax = std::max(zmax, modulus(zj));
            if (zmax == 0.0) break;
            for (std::size_t j = 0; j < n_; ++j) {
                const double r = modulus(z_[j]) / zmax;
                if (std::isinf(pc_)) {
                    x[j] = unit_sign(z_[j]);  // unreachable: p = 1 has a closed form
                } else if (pc_ == 1.0) {
                    x[j] = unit_sign(z_[j]);
                } else {
                    x[j] = r > 0.0 ? unit_sign(z_[j]) * pow_abs(r, pc_ - 1.0) : T(0.0);
                }
            }
            if (!normalize(x)) break;
            const double nv = apply(x);
            best = std::max(best, nv);
            if (std::abs(nv - v) < opt_.tolerance * std::max(1.0, nv)) break;
            v = nv;
        }
        return best;
    }

    std::size_t rows() const { return m_; }
    std::size_t cols() const { return n_; }

private:
    bool normalize(std::vector<T>& x) const {
        const double nx = norm_of<T>(x, p_);
        if (!(nx > 0.0)) return false;
        for (T& v : x) v /= nx;
        return true;
    }

    double apply(const std::vector<T>& x) {
        for (std::size_t i = 0; i < m_; ++i) {
            T s(0.0);
            const T* row = &a_[i * n_];
            for (std::size_t j = 0; j < n_; ++j) s += row[j] * x[j];
            y_[i] = s;
        }
        return norm_of<T>(y_, q_);
    }

    std::size_t m_;
    std::size_t n_;
    double p_;
    double q_;
    double pc_;
    OpNormOptions opt_;
    std::vector<T> a_;
    std::vector<T> y_;
    std::vector<T> u_;
    std::vector<T> z_;
};

double uniform_pm1(std::mt19937_64& g) {
    return 2.0 * (static_cast<double>(g() >> 11) * 0x1.0p-53) - 1.0;
}

template <typename T>
OpNormResult ascent_norm(const Matrix& a, double p, double q, const OpNormOptions& opt) {
    Ascent<T> solver(a, p, q, opt);
    const std::size_t n = a.cols();
    OpNormResult result;
    std::vector<T> x(n);

    // All-ones start, then the canonical basis, then random starts.
    std::fill(x.begin(), x.end(), T(1.0));
    result.value = std::max(result.value, solver.run(x, result.iterations));
    for (std::size_t k = 0; k < n; ++k) {
        std::fill(x.begin(), x.end(), T(0.0));
        x[k] = T(1.0);
        result.value = std::max(result.value, solver.run(x, result.iterations));
    }
    std::mt19937_64 gen(opt.seed);
    for (int s = 0; s < opt.random_starts; ++s) {
        for (T& v : x) {
            if constexpr (std::is_same_v<T, double>) {
                v = uniform_pm1(gen);
            } else {
                const double re = uniform_pm1(gen);
                v = T(re, uniform_pm1(gen));
            }
        }
        result.value = std::max(result.value, solver.run(x, result.iterations));
    }
    return result;
}

void check_opnorm_exponents(double p, double q) {
    if (!(p >= 1.0)) throw InvalidParameter("opnorm: p must be >= 1");
    if (!(q >= 1.0)) throw InvalidParameter("opnorm: q must be >= 1");
}

double column_norm(const Matrix& a, std::size_t j, double q) {
    std::vector<cplx> c(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) c[i] = a(i, j);
    return lp_norm(std::span<const cplx>(c), q);
}

double row_norm(const Matrix& a, std::size_t i, double p) {
    std::vector<cplx> r(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] = a(i, j);
    return lp_norm(std::span<const cplx>(r), p);
}

// Cyclic Jacobi on a dense real symmetric n x n matrix (row-major, modified in
// place). Returns the diagonal after convergence.
std::vector<double> jacobi_symmetric(std::vector<double>& a, std::size_t n) {
    double fro = 0.0;
    for (double v : a) fro += v * v;
    fro = std::sqrt(fro);
    const double threshold = 1e-13 * fro;
    for (int sweep = 0; sweep < 40; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
        }
        if (std::sqrt(2.0 * off) <= threshold) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p];
                    const double akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k];
                    const double aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i * n + i];
    return d;
}

// One-sided Jacobi: column norms of an orthogonalized copy of the m x n
// row-major matrix b with m >= n.
std::vector<double> hestenes(std::vector<double>& b, std::size_t m, std::size_t n) {
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                double alpha = 0.0;
                double beta = 0.0;
                double gamma = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double bi = b[k * n + i];
                    const double bj = b[k * n + j];
                    alpha += bi * bi;
                    beta += bj * bj;
                    gamma += bi * bj;
                }
                if (gamma == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t k = 0; k < m; ++k) {
                    const double bi = b[k * n + i];
                    const double bj = b[k * n + j];
                    b[k * n + i] = c * bi - s * bj;
                    b[k * n + j] = s * bi + c * bj;
                }
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sv(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += b[k * n + j] * b[k * n + j];
        sv[j] = std::sqrt(s);
    }
    return sv;
}

// Real representation [[Re, -Im], [Im, Re]] of a complex matrix; every
// eigenvalue / singular value of A appears twice in it.
std::vector<double> real_embedding(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    std::vector<double> e(4 * m * n);
    const std::size_t w = 2 * n;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double re = a.real(i, j);
            const double im = a.imag(i, j);
            e[i * w + j] = re;
            e[i * w + n + j] = -im;
            e[(m + i) * w + j] = im;
            e[(m + i) * w + n + j] = re;
        }
    }
    return e;
}

std::vector<double> every_other(const std::vector<double>& sorted) {
    std::vector<double> out;
    out.reserve(sorted.size() / 2);
    for (std::size_t i = 0; i < sorted.size(); i += 2) out.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    return out;
}

// Sort nonincreasing by value, ties by original index.
void sort_desc(std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] > v[j]; });
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < idx.size(); ++k) out[k] = v[idx[k]];
    v = std::move(out);
}

// ---------------------------------------------------------------------------
// Oracle helpers

// Maximizes f over a box of angles by pattern search with halving step.
template <std::size_t D, typename F>
std::pair<std::array<double, D>, double> zoom(F&& f, std::array<double, D> x, double fx,
                                              std::array<double, D> h) {
    const std::array<double, D> h0 = h;
    for (int round = 0; round < 20000; ++round) {
        std::array<double, D> best_x = x;
        double best = fx;
        // 3^D stencil around x.
        std::size_t combos = 1;
        for (std::size_t d = 0; d < D; ++d) combos *= 3;
        for (std::size_t c = 0; c < combos; ++c) {
            std::size_t code = c;
            std::array<double, D> y = x;
            bool center = true;
            for (std::size_t d = 0; d < D; ++d) {
                const int off = static_cast<int>(code % 3) - 1;
                code /= 3;
                if (off != 0) center = false;
                y[d] += off * h[d];
            }
            if (center) continue;
            const double fy = f(y);
            if (fy > best) {
                best = fy;
                best_x = y;
            }
        }
        if (best > fx) {
            x = best_x;
            fx = best;
            // Regrow the step after a success so narrow ridges are followed quickly.
            for (std::size_t d = 0; d < D; ++d) h[d] = std::min(2.0 * h[d], h0[d]);
        } else {
            bool small = true;
            for (std::size_t d = 0; d < D; ++d) {
                h[d] *= 0.5;
                if (h[d] > 1e-14) small = false;
            }
            if (small) break;
        }
    }
    return {x, fx};
}

}  // namespace

OpNormResult opnorm_pq(const Matrix& a, double p, double q, const OpNormOptions& options) {
    require_finite(a);
    check_opnorm_exponents(p, q);
    OpNormResult r;
    if (p == 1.0) {
        for (std::size_t j = 0; j < a.cols(); ++j) r.value = std::max(r.value, column_norm(a, j, q));
        r.exact = true;
        return r;
    }
    if (std::isinf(q)) {
        const double pc = conjugate(p);
        for (std::size_t i = 0; i < a.rows(); ++i) r.value = std::max(r.value, row_norm(a, i, pc));
        r.exact = true;
        return r;
    }
    if (p == 2.0 && q == 2.0) {
        r.value = singular_values(a).values.front();
        r.exact = true;
        return r;
    }
    return a.is_real() ? ascent_norm<double>(a, p, q, options)
                       : ascent_norm<cplx>(a, p, q, options);
}

double opnorm_pq_oracle(const Matrix& a, double p, double q, int resolution) {
    require_finite(a);
    check_opnorm_exponents(p, q);
    if (a.cols() > 3) {
        throw UnsupportedDimension("oracle supports at most 3 columns, got " +
                                   std::to_string(a.cols()));
    }
    if (!a.is_real()) throw InvalidInput("oracle supports real matrices only");
    if (resolution < 4) throw InvalidParameter("oracle resolution must be >= 4");
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    std::vector<double> x(n);
    std::vector<double> y(m);
    auto value = [&](const std::vector<double>& dir) {
        const double nx = lp_norm(dir, p);
        if (nx == 0.0) return 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a.real(i, j) * dir[j];
            y[i] = s / nx;
        }
        return lp_norm(y, q);
    };

    if (n == 1) {
        x[0] = 1.0;
        return value(x);
    }

    constexpr double kPi = 3.14159265358979323846;
    constexpr int kKeep = 8;
    if (n == 2) {
        auto f = [&](const std::array<double, 1>& th) {
            x[0] = std::cos(th[0]);
            x[1] = std::sin(th[0]);
            return value(x);
        };
        std::vector<std::pair<double, double>> grid;
        const double h = kPi / resolution;
        for (int i = 0; i < resolution; ++i) {
            const std::array<double, 1> th{i * h};
            grid.emplace_back(f(th), th[0]);
        }
        std::partial_sort(grid.begin(), grid.begin() + std::min<int>(kKeep, resolution), grid.end(),
                          std::greater<>());
        double best = 0.0;
        for (int k = 0; k < std::min<int>(kKeep, resolution); ++k) {
            const auto [fx, th] = grid[k];
            best = std::max(best, zoom<1>(f, {th}, fx, {h}).second);
        }
        return best;
    }

    auto f = [&](const std::array<double, 2>& ang) {
        const double st = std::sin(ang[0]);
        x[0] = st * std::cos(ang[1]);
        x[1] = st * std::sin(ang[1]);
        x[2] = std::cos(ang[0]);
        return value(x);
    };
    struct Cand {
        double fx;
        double th;
        double ph;
    };
    std::vector<Cand> grid;
    const double ht = kPi / resolution;
    const double hp = kPi / resolution;
    for (int i = 0; i <= resolution; ++i) {
        for (int j = 0; j < 2 * resolution; ++j) {
            const std::array<double, 2> ang{i * ht, j * hp};
            grid.push_back({f(ang), ang[0], ang[1]});
        }
    }
    const auto keep = std::min<std::size_t>(kKeep, grid.size());
    std::partial_sort(grid.begin(), grid.begin() + keep, grid.end(),
                      [](const Cand& l, const Cand& r) { return l.fx > r.fx; });
    double best = 0.0;
    for (std::size_t k = 0; k < keep; ++k) {
        best = std::max(best, zoom<2>(f, {grid[k].th, grid[k].ph}, grid[k].fx, {ht, hp}).second);
    }
    return best;
}

double hoelder_vec_bound(const Matrix& a, double p, double q) {
    require_finite(a);
    if (!(p > 1.0 && p <= 2.0 && q >= 2.0 && std::isfinite(q))) {
        throw InvalidParameter("Hoelder bound requires 1 < p <= 2 <= q < inf");
    }
    const double r = std::min(conjugate(p), q);
    std::vector<cplx> all(a.rows() * a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) all[i * a.cols() + j] = a(i, j);
    }
    return lp_norm(std::span<const cplx>(all), r);
}

double hoelder_row_bound(const Matrix& a, double p, double q) {
    require_finite(a);
    check_opnorm_exponents(p, q);
    const double pc = conjugate(p);
    std::vector<double> rows(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) rows[i] = row_norm(a, i, pc);
    return lp_norm(rows, q);
}

Spectrum eigvals_hermitian(const Matrix& a) {
    require_finite(a);
    if (!a.is_square()) throw InvalidInput("eigenvalues need a square matrix");
    const std::size_t n = a.rows();
    const double fro = a.frobenius();
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            asym = std::max(asym, std::abs(a(i, j) - std::conj(a(j, i))));
        }
    }
    if (asym > 1e-12 * std::max(fro, 1e-300)) {
        throw InvalidInput("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
    }
    Spectrum s;
    s.kind = Spectrum::Kind::eigenvalues;
    if (a.is_real()) {
        std::vector<double> w(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) w[i * n + j] = 0.5 * (a.real(i, j) + a.real(j, i));
        }
        s.values = jacobi_symmetric(w, n);
        sort_desc(s.values);
        return s;
    }
    // Hermitian part, then the 2n x 2n real symmetric embedding.
    Matrix h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) h.set(i, j, 0.5 * (a(i, j) + std::conj(a(j, i))));
    }
    std::vector<double> e = real_embedding(h);
    std::vector<double> d = jacobi_symmetric(e, 2 * n);
    sort_desc(d);
    s.values = every_other(d);
    return s;
}

Spectrum singular_values(const Matrix& a) {
    require_finite(a);
    Spectrum s;
    s.kind = Spectrum::Kind::singular;
    const bool cplx_entries = !a.is_real();
    const Matrix& src = a;
    // Arrange as tall (rows >= cols) real matrix.
    std::size_t m = src.rows();
    std::size_t n = src.cols();
    std::vector<double> b;
    if (cplx_entries) {
        b = real_embedding(src);
        m *= 2;
        n *= 2;
    } else {
        b.assign(src.real_data().begin(), src.real_data().end());
    }
    if (m < n) {
        std::vector<double> t(m * n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) t[j * m + i] = b[i * n + j];
        }
        b = std::move(t);
        std::swap(m, n);
    }
    std::vector<double> sv = hestenes(b, m, n);
    sort_desc(sv);
    s.values = cplx_entries ? every_other(sv) : std::move(sv);
    return s;
}

double schatten_norm(const Matrix& a, double p) {
    if (!(p >= 1.0)) throw InvalidParameter("Schatten exponent must be >= 1");
    return lp_norm(singular_values(a).values, p);
}

double kyfan_norm(const Matrix& a, std::size_t k) {
    const std::size_t l = std::min(a.rows(), a.cols());
    if (k < 1 || k > l) {
        throw InvalidParameter("Ky Fan index k must be in [1, " + std::to_string(l) + "]");
    }
    return top_sum(singular_values(a), k);
}

PartialSums partial_eig_sums(const Matrix& a, std::size_t k) {
    if (!a.is_square()) throw InvalidInput("partial eigenvalue sums need a square matrix");
    if (k < 1 || k > a.rows()) {
        throw InvalidParameter("k must be in [1, " + std::to_string(a.rows()) + "]");
    }
    const Spectrum s = eigvals_hermitian(a);
    return {top_sum(s, k), bottom_sum(s, k)};
}

double top_sum(const Spectrum& s, std::size_t k) {
    if (k > s.size()) throw InvalidParameter("index exceeds spectrum size");
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += s.values[j];
    return acc;
}

double bottom_sum(const Spectrum& s, std::size_t k) {
    if (k > s.size()) throw InvalidParameter("index exceeds spectrum size");
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j) acc += s.values[s.size() - 1 - j];
    return acc;
}

}  // namespace concmat::matstat
