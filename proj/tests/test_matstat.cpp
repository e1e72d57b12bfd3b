#include "concmat/error.hpp"
#include "concmat/matstat.hpp"
#include "concmat/vecnorms.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace concmat;
using namespace concmat::matstat;
using concmat::vecnorms::conjugate;

namespace {

double unif(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(g() >> 11) * 0x1.0p-53);
}

Matrix random_matrix(std::mt19937_64& g, std::size_t m, std::size_t n, bool complex_entries = false) {
    Matrix a(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (complex_entries) {
                const double re = unif(g, -1, 1);
                a.set(i, j, std::complex<double>(re, unif(g, -1, 1)));
            } else {
                a.set(i, j, unif(g, -1, 1));
            }
        }
    }
    return a;
}

Matrix random_hermitian(std::mt19937_64& g, std::size_t n, bool complex_entries = false) {
    const Matrix b = random_matrix(g, n, n, complex_entries);
    return (b + b.adjoint()) * 0.5;
}

// Number of eigenvalues of the real symmetric s below x, from the inertia of
// s - x I (signs of the LDL^T pivots).
int count_below(const Matrix& s, double x) {
    const std::size_t n = s.rows();
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = s.real(i, j) - (i == j ? x : 0.0);
    }
    int neg = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double piv = a[k * n + k];
        if (piv < 0.0) ++neg;
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i * n + k] / piv;
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
        }
    }
    return neg;
}

// Bisection eigenvalue oracle, independent of the Jacobi path.
std::vector<double> eig_bisection_oracle(const Matrix& s) {
    const std::size_t n = s.rows();
    const double r = s.frobenius() + 1.0;
    std::vector<double> out;
    for (std::size_t k = 0; k < n; ++k) {
        // k-th largest eigenvalue: smallest x with count_below(x) >= n - k.
        double lo = -r;
        double hi = r;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (count_below(s, mid) >= static_cast<int>(n - k)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push_back(0.5 * (lo + hi));
    }
    return out;
}

}  // namespace

TEST_CASE("eigvals_hermitian small cases") {
    const std::vector<double> d{3.0, 1.0, 2.0};
    const auto s = eigvals_hermitian(Matrix::diagonal(d));
    REQUIRE(s.size() == 3);
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(s[1] == doctest::Approx(2.0));
    CHECK(s[2] == doctest::Approx(1.0));

    const Matrix swap(2, 2, std::vector<double>{0, 1, 1, 0});
    const auto sw = eigvals_hermitian(swap);
    CHECK(sw[0] == doctest::Approx(1.0));
    CHECK(sw[1] == doctest::Approx(-1.0));

    // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
    Matrix h(2, 2);
    h.set(0, 0, 2.0);
    h.set(1, 1, 2.0);
    h.set(0, 1, std::complex<double>(0, 1));
    h.set(1, 0, std::complex<double>(0, -1));
    const auto sh = eigvals_hermitian(h);
    CHECK(sh[0] == doctest::Approx(3.0));
    CHECK(sh[1] == doctest::Approx(1.0));
}

TEST_CASE("eigvals_hermitian rejects bad input") {
    CHECK_THROWS_AS(eigvals_hermitian(Matrix(2, 3)), InvalidInput);
    CHECK_THROWS_AS(eigvals_hermitian(Matrix(2, 2, std::vector<double>{0, 1, 0, 0})), InvalidInput);
    Matrix nan(2, 2);
    nan.set(0, 0, std::nan(""));
    CHECK_THROWS_AS(eigvals_hermitian(nan), InvalidInput);
    // Tiny asymmetry is symmetrized silently.
    Matrix near(2, 2, std::vector<double>{1, 0.5, 0.5 + 1e-15, 1});
    CHECK_NOTHROW(eigvals_hermitian(near));
}

TEST_CASE("eigvals_hermitian matches the bisection oracle") {
    std::mt19937_64 g(2024);
    const Matrix s = random_hermitian(g, 5);
    const auto ev = eigvals_hermitian(s);
    const auto oracle = eig_bisection_oracle(s);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(ev[k] - oracle[k]) <= 1e-8);
}

TEST_CASE("spectral identities: trace, Frobenius, sorting") {
    std::mt19937_64 g(5);
    for (int rep = 0; rep < 30; ++rep) {
        const std::size_t n = 1 + rep % 12;
        const Matrix a = random_hermitian(g, n, rep % 3 == 0);
        const auto ev = eigvals_hermitian(a);
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += a.real(i, i);
        double sum = 0.0;
        double sq = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            sum += ev[k];
            sq += ev[k] * ev[k];
            if (k > 0) CHECK(ev[k - 1] >= ev[k]);
        }
        const double fro = a.frobenius();
        CHECK(std::abs(sum - tr) <= 1e-9 * fro);
        CHECK(std::abs(sq - fro * fro) <= 1e-9 * fro * fro);

        // singular values of a Hermitian matrix are the sorted |eigenvalues|
        std::vector<double> absev(ev.values);
        for (double& x : absev) x = std::abs(x);
        std::sort(absev.begin(), absev.end(), std::greater<>());
        const auto sv = singular_values(a);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(sv[k] - absev[k]) <= 1e-9 * std::max(1.0, fro));
    }
}

TEST_CASE("singular_values") {
    const auto s = singular_values(Matrix::identity(4));
    for (double v : s.values) CHECK(v == doctest::Approx(1.0));

    // rank one u v^T
    const std::vector<double> u{1.0, -2.0, 2.0};
    const std::vector<double> v{3.0, 4.0};
    Matrix r(3, 2);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 2; ++j) r.set(i, j, u[i] * v[j]);
    }
    const auto sr = singular_values(r);
    REQUIRE(sr.size() == 2);
    CHECK(sr[0] == doctest::Approx(15.0));
    CHECK(std::abs(sr[1]) <= 1e-12);

    std::mt19937_64 g(17);
    for (bool cplx : {false, true}) {
        const Matrix a = random_matrix(g, 4, 3, cplx);
        const auto sa = singular_values(a);
        const auto ev = eigvals_hermitian(a.adjoint().matmul(a));
        REQUIRE(sa.size() == 3);
        for (std::size_t k = 0; k < 3; ++k) CHECK(sa[k] == doctest::Approx(std::sqrt(ev[k])).epsilon(1e-10));
        double sq = 0.0;
        for (double x : sa.values) sq += x * x;
        CHECK(sq == doctest::Approx(a.frobenius() * a.frobenius()).epsilon(1e-10));
        // wide matrix: same values as its adjoint
        const auto st = singular_values(a.adjoint());
        for (std::size_t k = 0; k < 3; ++k) CHECK(st[k] == doctest::Approx(sa[k]).epsilon(1e-10));
    }
}

TEST_CASE("Schatten and Ky Fan norms") {
    for (double p : {1.0, 2.0, 3.5}) {
        CHECK(schatten_norm(Matrix::identity(5), p) == doctest::Approx(std::pow(5.0, 1.0 / p)));
    }
    CHECK(schatten_norm(Matrix::identity(5), vecnorms::kInf) == doctest::Approx(1.0));
    std::mt19937_64 g(23);
    const Matrix a = random_matrix(g, 3, 3);
    CHECK(schatten_norm(a, 2.0) == doctest::Approx(a.frobenius()).epsilon(1e-10));
    const auto sv = singular_values(a);
    CHECK(schatten_norm(a, 1.0) == doctest::Approx(sv[0] + sv[1] + sv[2]));
    CHECK(kyfan_norm(a, 3) == doctest::Approx(schatten_norm(a, 1.0)));
    CHECK(kyfan_norm(Matrix::identity(6), 4) == doctest::Approx(4.0));
    CHECK_THROWS_AS(kyfan_norm(a, 0), InvalidParameter);
    CHECK_THROWS_AS(kyfan_norm(a, 4), InvalidParameter);
    CHECK_THROWS_AS(schatten_norm(a, 0.5), InvalidParameter);

    for (int rep = 0; rep < 20; ++rep) {
        const Matrix x = random_matrix(g, 4, 5, rep % 2 == 1);
        const Matrix y = random_matrix(g, 4, 5, rep % 2 == 1);
        for (std::size_t k = 1; k <= 4; ++k) {
            CHECK(kyfan_norm(x + y, k) <= kyfan_norm(x, k) + kyfan_norm(y, k) + 1e-10);
            CHECK(kyfan_norm((x + y) * 0.5, k) <= 0.5 * (kyfan_norm(x, k) + kyfan_norm(y, k)) + 1e-10);
        }
    }
}

TEST_CASE("partial eigenvalue sums F_k and G_k") {
    const std::vector<double> d{3.0, 2.0, 1.0};
    const auto ps = partial_eig_sums(Matrix::diagonal(d), 2);
    CHECK(ps.f == doctest::Approx(5.0));
    CHECK(ps.g == doctest::Approx(3.0));

    std::mt19937_64 g(29);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 2 + rep % 7;
        const Matrix a = random_hermitian(g, n, rep % 2 == 1);
        const Matrix b = random_hermitian(g, n, rep % 2 == 1);
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += a.real(i, i);
        CHECK(partial_eig_sums(a, n).f == doctest::Approx(tr).epsilon(1e-10));
        const double dist = (a - b).frobenius();
        for (std::size_t k = 1; k <= n; ++k) {
            const auto pa = partial_eig_sums(a, k);
            const auto pb = partial_eig_sums(b, k);
            const auto neg = partial_eig_sums(-a, k);
            CHECK(pa.g == doctest::Approx(-neg.f).epsilon(1e-12));
            if (k < n) CHECK(pa.f + partial_eig_sums(a, n - k).g == doctest::Approx(tr).epsilon(1e-10));
            const double rk = std::sqrt(static_cast<double>(k));
            CHECK(std::abs(pa.f - pb.f) <= rk * dist + 1e-9);
            CHECK(std::abs(pa.g - pb.g) <= rk * dist + 1e-9);
            // F_k convex, G_k concave
            const auto mid = partial_eig_sums((a + b) * 0.5, k);
            CHECK(mid.f <= 0.5 * (pa.f + pb.f) + 1e-10);
            CHECK(mid.g >= 0.5 * (pa.g + pb.g) - 1e-10);
        }
        // each lambda_k is 1-Lipschitz in the Hilbert-Schmidt norm
        const auto ea = eigvals_hermitian(a);
        const auto eb = eigvals_hermitian(b);
        for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(ea[k] - eb[k]) <= dist + 1e-9);
    }
    CHECK_THROWS_AS(partial_eig_sums(Matrix::identity(3), 0), InvalidParameter);
    CHECK_THROWS_AS(partial_eig_sums(Matrix::identity(3), 4), InvalidParameter);
}

TEST_CASE("opnorm closed forms") {
    CHECK(opnorm_pq(Matrix::identity(4), 2.0, 2.0).value == doctest::Approx(1.0));
    CHECK(opnorm_pq(Matrix::identity(4), 2.0, 2.0).exact);
    // identity l_p -> l_q with p >= q: n^{1/q - 1/p}
    const auto r = opnorm_pq(Matrix::identity(8), 4.0, 2.0);
    CHECK(r.value == doctest::Approx(std::pow(8.0, 0.5 - 0.25)).epsilon(1e-9));
    CHECK_FALSE(r.exact);
    std::mt19937_64 g(31);
    const Matrix a = random_matrix(g, 4, 3);
    const auto p1 = opnorm_pq(a, 1.0, 3.0);
    CHECK(p1.exact);
    CHECK(p1.value == doctest::Approx(opnorm_pq_oracle(a, 1.0, 3.0, 400)).epsilon(1e-9));
    const auto qinf = opnorm_pq(a, 3.0, vecnorms::kInf);
    CHECK(qinf.exact);
    CHECK(qinf.value == doctest::Approx(opnorm_pq_oracle(a, 3.0, vecnorms::kInf, 400)).epsilon(1e-9));
    Matrix bad(2, 2);
    bad.set(0, 1, std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(opnorm_pq(bad, 2.0, 3.0), InvalidInput);
    CHECK_THROWS_AS(opnorm_pq(a, 0.5, 3.0), InvalidParameter);
}

TEST_CASE("opnorm of an all-ones block is (ab)^{1/q} for p = q'") {
    for (double q : {2.0, 3.0, 4.0}) {
        for (auto [a, b] : {std::pair{1, 1}, std::pair{2, 3}, std::pair{3, 2}, std::pair{4, 4}}) {
            Matrix x(6, 5);
            for (int i = 0; i < a; ++i) {
                for (int j = 0; j < b; ++j) x.set(i + 1, j, 1.0);
            }
            const double v = opnorm_pq(x, conjugate(q), q).value;
            CHECK(v == doctest::Approx(std::pow(static_cast<double>(a * b), 1.0 / q)).epsilon(1e-9));
        }
    }
}

TEST_CASE("opnorm oracle basics") {
    CHECK(std::abs(opnorm_pq_oracle(Matrix::identity(2), 2.0, 2.0, 64) - 1.0) <= 1e-9);
    const std::vector<double> d{2.0, 1.0};
    CHECK(opnorm_pq_oracle(Matrix::diagonal(d), 2.0, 2.0, 64) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(opnorm_pq_oracle(Matrix(3, 4), 2.0, 2.0, 64), UnsupportedDimension);
}

TEST_CASE("opnorm ascent agrees with the oracle on small matrices") {
    std::mt19937_64 g(37);
    SUBCASE("2x2, p = q = 3") {
        const Matrix a = random_matrix(g, 2, 2);
        CHECK(std::abs(opnorm_pq(a, 3.0, 3.0).value - opnorm_pq_oracle(a, 3.0, 3.0, 720)) <= 1e-6);
    }
    SUBCASE("2x2, p = 1.5, q = 4") {
        const Matrix a = random_matrix(g, 2, 2);
        CHECK(std::abs(opnorm_pq(a, 1.5, 4.0).value - opnorm_pq_oracle(a, 1.5, 4.0, 720)) <= 1e-6);
    }
    SUBCASE("mixed shapes") {
        for (int rep = 0; rep < 20; ++rep) {
            const std::size_t m = 1 + rep % 4;
            const std::size_t n = 2 + rep % 2;
            const Matrix a = random_matrix(g, m, n);
            const double p = unif(g, 1.1, 2.0);
            const double q = unif(g, 2.0, 6.0);
            CHECK(std::abs(opnorm_pq(a, p, q).value - opnorm_pq_oracle(a, p, q, 180)) <= 1e-5);
        }
    }
}

TEST_CASE("Hoelder bounds dominate the operator norm") {
    std::mt19937_64 g(41);
    CHECK(hoelder_vec_bound(Matrix::identity(9), 2.0, 2.0) == doctest::Approx(3.0));
    for (double q : {2.0, 3.0, 4.0}) {
        Matrix pm(6, 6);
        for (std::size_t i = 0; i < 6; ++i) {
            for (std::size_t j = 0; j < 6; ++j) pm.set(i, j, (g() & 1) ? 1.0 : -1.0);
        }
        CHECK(hoelder_vec_bound(pm, conjugate(q), q) == doctest::Approx(std::pow(6.0, 2.0 / q)));
    }
    const Matrix a = random_matrix(g, 3, 3);
    CHECK(hoelder_vec_bound(a, 4.0 / 3.0, 3.0) ==
          doctest::Approx(vecnorms::lp_norm(a.real_data(), 3.0)));
    for (int rep = 0; rep < 30; ++rep) {
        const Matrix x = random_matrix(g, 2 + rep % 5, 2 + rep % 4, rep % 3 == 0);
        const double p = unif(g, 1.05, 2.0);
        const double q = unif(g, 2.0, 8.0);
        const double v = opnorm_pq(x, p, q).value;
        const double row = hoelder_row_bound(x, p, q);
        CHECK(v <= row + 1e-9);
        CHECK(row <= hoelder_vec_bound(x, p, q) + 1e-9);
    }
    CHECK_THROWS_AS(hoelder_vec_bound(a, 3.0, 4.0), InvalidParameter);
    CHECK_THROWS_AS(hoelder_vec_bound(a, 1.5, 1.8), InvalidParameter);
}

TEST_CASE("opnorm duality ||A||_{p->q} = ||A*||_{q'->p'}") {
    std::mt19937_64 g(43);
    for (int rep = 0; rep < 15; ++rep) {
        const Matrix a = random_matrix(g, 2 + rep % 3, 2 + (rep + 1) % 3);
        const double p = unif(g, 1.2, 2.0);
        const double q = unif(g, 2.0, 5.0);
        const double lhs = opnorm_pq(a, p, q).value;
        const double rhs = opnorm_pq(a.adjoint(), conjugate(q), conjugate(p)).value;
        CHECK(std::abs(lhs - rhs) <= 1e-6);
    }
}

TEST_CASE("Riesz-convexity estimate on random sign matrices") {
    std::mt19937_64 g(47);
    for (double q : {3.0, 4.0}) {
        for (int rep = 0; rep < 5; ++rep) {
            Matrix pm(8, 8);
            for (std::size_t i = 0; i < 8; ++i) {
                for (std::size_t j = 0; j < 8; ++j) pm.set(i, j, (g() & 1) ? 1.0 : -1.0);
            }
            const double lhs = opnorm_pq(pm, conjugate(q), q).value;
            const double s1 = singular_values(pm)[0];
            CHECK(lhs <= std::pow(s1, 2.0 / q) + 1e-9);
        }
    }
}
