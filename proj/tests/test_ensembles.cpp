#include "concmat/ensembles.hpp"
#include "concmat/error.hpp"
#include "concmat/matstat.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

using namespace concmat;
using namespace concmat::ensembles;

namespace {

double chi2_critical(int dof, double alpha) {
    return boost::math::quantile(boost::math::complement(boost::math::chi_squared(dof), alpha));
}

double pearson_corr(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
    using A4 = std::array<std::uint32_t, 4>;
    using A2 = std::array<std::uint32_t, 2>;
    CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32(A4{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, A2{0xffffffffu, 0xffffffffu}) ==
          A4{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32(A4{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, A2{0xa4093822u, 0x299f31d0u}) ==
          A4{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("RngStream determinism and stream separation") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    RngStream c(42, 8);
    RngStream d(43, 7);
    int same_c = 0;
    int same_d = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        same_c += x == c.next_u64();
        same_d += x == d.next_u64();
    }
    CHECK(same_c == 0);
    CHECK(same_d == 0);
    CHECK(stream_hash(1, 2) != stream_hash(2, 1));
    CHECK(stream_hash(1, 2) == stream_hash(1, 2));

    RngStream u(1, 1);
    double lo = 1.0;
    double hi = 0.0;
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        mean += x;
        const double o = u.uniform_open();
        CHECK_MESSAGE((o > 0.0 && o < 1.0), "uniform_open out of range");
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(std::abs(mean / 100000 - 0.5) < 0.005);

    RngStream g(3, 0);
    double m1 = 0.0;
    double m2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = g.normal();
        m1 += x;
        m2 += x * x;
    }
    CHECK(std::abs(m1 / n) < 0.01);
    CHECK(std::abs(m2 / n - 1.0) < 0.015);
}

TEST_CASE("law diameters") {
    CHECK(BoundedLaw::rademacher().diameter() == 2.0);
    CHECK(BoundedLaw::uniform(0.0, 1.0).diameter() == 1.0);
    CHECK(BoundedLaw::uniform(-3.0, 2.5).diameter() == 5.5);
    CHECK(BoundedLaw::two_point(3.0, -1.0, 0.25).diameter() == 4.0);
    CHECK(BoundedLaw::two_point(3.0, -1.0, 1.0).diameter() == 0.0);
    CHECK(BoundedLaw::discrete({0.0, 5.0, -2.0}, {0.2, 0.3, 0.5}).diameter() == 7.0);
    CHECK(BoundedLaw::bernoulli01(0.3).diameter() == 1.0);
    CHECK(BoundedLaw::complex_disc(1.5).diameter() == 3.0);
    CHECK(std::isinf(BoundedLaw::gaussian(0.0, 1.0).diameter()));
    CHECK_FALSE(BoundedLaw::gaussian(0.0, 1.0).bounded());
}

TEST_CASE("law validation") {
    CHECK_THROWS_AS(BoundedLaw::uniform(1.0, 0.0), InvalidParameter);
    CHECK_THROWS_AS(BoundedLaw::two_point(0.0, 1.0, 1.5), InvalidParameter);
    CHECK_THROWS_AS(BoundedLaw::discrete({0.0, 1.0}, {0.5, 0.6}), InvalidParameter);
    CHECK_THROWS_AS(BoundedLaw::discrete({0.0}, {0.5, 0.5}), InvalidParameter);
    CHECK_THROWS_AS(BoundedLaw::complex_disc(-1.0), InvalidParameter);
    CHECK_THROWS_AS(BoundedLaw::gaussian(0.0, -1.0), InvalidParameter);
    CHECK_THROWS_AS(OffdiagLaw::rotated({1.0, 1.0}, BoundedLaw::uniform(0, 1), BoundedLaw::uniform(0, 1)),
                    InvalidParameter);
    CHECK_THROWS_AS(EnsembleSpec::selfadjoint(3, BoundedLaw::complex_disc(1.0), OffdiagLaw::direct(BoundedLaw::rademacher())),
                    InvalidParameter);
    CHECK_THROWS_AS(EnsembleSpec::rectangular_grid(2, 2, {BoundedLaw::rademacher()}), InvalidParameter);
    CHECK_THROWS_AS(EnsembleSpec::rectangular(0, 2, BoundedLaw::rademacher()), InvalidParameter);
}

TEST_CASE("samples stay in the declared support") {
    const std::vector<BoundedLaw> laws{
        BoundedLaw::rademacher(),          BoundedLaw::uniform(-0.3, 0.7),
        BoundedLaw::two_point(2.0, -1.0, 0.3), BoundedLaw::discrete({0.0, 5.0, -2.0, 9.0}, {0.2, 0.3, 0.5, 0.0}),
        BoundedLaw::bernoulli01(0.6),      BoundedLaw::complex_disc(0.8),
    };
    for (std::size_t k = 0; k < laws.size(); ++k) {
        const auto spec = EnsembleSpec::rectangular(7, 5, laws[k]);
        for (std::uint64_t t = 0; t < 200; ++t) {
            RngStream rng(9, stream_hash(k, t));
            const Matrix a = sample_matrix(spec, rng);
            for (std::size_t i = 0; i < 7; ++i) {
                for (std::size_t j = 0; j < 5; ++j) REQUIRE(laws[k].in_support(a(i, j)));
            }
        }
    }
}

TEST_CASE("sampling is deterministic per (seed, stream)") {
    const auto spec = EnsembleSpec::rectangular(6, 4, BoundedLaw::uniform(0.0, 1.0));
    RngStream r1(5, 11);
    RngStream r2(5, 11);
    RngStream r3(5, 12);
    const Matrix a = sample_matrix(spec, r1);
    CHECK(a == sample_matrix(spec, r2));
    CHECK_FALSE(a == sample_matrix(spec, r3));

    const auto sa = EnsembleSpec::selfadjoint(5, BoundedLaw::uniform(-0.7, 0.7),
                                              OffdiagLaw::direct(BoundedLaw::complex_disc(0.5)));
    RngStream s1(5, 11);
    RngStream s2(5, 11);
    CHECK(sample(sa, s1) == sample(sa, s2));
    CHECK_THROWS_AS(sample_matrix(sa, s1), InvalidParameter);
    CHECK_THROWS_AS(sample_selfadjoint(spec, s1), InvalidParameter);
}

TEST_CASE("uniform(0,1) entry mean tends to 1/2") {
    const auto spec = EnsembleSpec::rectangular(8, 8, BoundedLaw::uniform(0.0, 1.0));
    double sum = 0.0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(1, t);
        const Matrix a = sample_matrix(spec, rng);
        for (double x : a.real_data()) sum += x;
    }
    // sd of the mean: sqrt(1/12 / (64 * 2000)) ~ 8e-4
    CHECK(std::abs(sum / (64.0 * trials) - 0.5) < 4e-3);
}

TEST_CASE("two-point(0,1,1/2) entries pass a chi-square test at 1%") {
    const auto spec = EnsembleSpec::rectangular(32, 32, BoundedLaw::two_point(0.0, 1.0, 0.5));
    const int trials = 10000;
    double zeros = 0.0;
    double ones = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream rng(2024, stream_hash(0, t));
        const Matrix a = sample_matrix(spec, rng);
        for (double x : a.real_data()) (x == 0.0 ? zeros : ones) += 1.0;
    }
    const double expected = 0.5 * 32 * 32 * trials;
    const double chi2 = (zeros - expected) * (zeros - expected) / expected + (ones - expected) * (ones - expected) / expected;
    CHECK(chi2 < chi2_critical(1, 0.01));
}

TEST_CASE("discrete law frequencies pass a chi-square test at 1%") {
    const std::vector<double> vals{-1.0, 0.0, 2.0, 3.5};
    const std::vector<double> probs{0.1, 0.4, 0.3, 0.2};
    const auto law = BoundedLaw::discrete(vals, probs);
    std::map<double, double> counts;
    RngStream rng(77, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) counts[law.sample_real(rng)] += 1.0;
    double chi2 = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k) {
        const double e = probs[k] * n;
        chi2 += (counts[vals[k]] - e) * (counts[vals[k]] - e) / e;
    }
    CHECK(counts.size() == 4);
    CHECK(chi2 < chi2_critical(3, 0.01));
}

TEST_CASE("entry pairs are uncorrelated across trials") {
    const auto spec = EnsembleSpec::rectangular(3, 3, BoundedLaw::uniform(-1.0, 1.0));
    const int trials = 10000;
    std::vector<std::vector<double>> entries(9, std::vector<double>(trials));
    for (int t = 0; t < trials; ++t) {
        RngStream rng(31, stream_hash(0, t));
        const Matrix a = sample_matrix(spec, rng);
        for (std::size_t k = 0; k < 9; ++k) entries[k][t] = a.real_data()[k];
    }
    const double bound = 4.0 / std::sqrt(static_cast<double>(trials));
    for (std::size_t i = 0; i < 9; ++i) {
        for (std::size_t j = i + 1; j < 9; ++j) CHECK(std::abs(pearson_corr(entries[i], entries[j])) <= bound);
    }
    // same entry across neighbouring trial streams
    std::vector<double> shifted(entries[0].begin() + 1, entries[0].end());
    std::vector<double> head(entries[0].begin(), entries[0].end() - 1);
    CHECK(std::abs(pearson_corr(head, shifted)) <= bound);
}

TEST_CASE("self-adjoint samples are exactly Hermitian") {
    const auto real_spec = EnsembleSpec::selfadjoint(6, BoundedLaw::uniform(-1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2),
                                                     OffdiagLaw::direct(BoundedLaw::two_point(0.5, -0.5, 0.5)));
    const std::complex<double> w = std::polar(1.0, 0.7);
    const auto rot_spec = EnsembleSpec::selfadjoint(6, BoundedLaw::rademacher(),
                                                    OffdiagLaw::rotated(w, BoundedLaw::uniform(0, 1), BoundedLaw::uniform(0, 1)));
    for (int t = 0; t < 50; ++t) {
        RngStream r1(4, t);
        const Matrix a = sample_selfadjoint(real_spec, r1);
        CHECK(a.is_real());
        CHECK(a == a.adjoint());
        RngStream r2(4, t);
        const Matrix b = sample_selfadjoint(rot_spec, r2);
        CHECK(b == b.adjoint());
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(b.imag(i, i) == 0.0);
            for (std::size_t j = i + 1; j < 6; ++j) {
                // undo the rotation: the entry lies in the unit square [0,1]^2
                const std::complex<double> z = b(i, j) / w;
                CHECK(z.real() >= -1e-15);
                CHECK(z.real() <= 1.0 + 1e-15);
                CHECK(z.imag() >= -1e-15);
                CHECK(z.imag() <= 1.0 + 1e-15);
            }
        }
    }
    // mixed per-entry modes
    std::vector<OffdiagLaw> mixed;
    for (int k = 0; k < 3; ++k) {
        mixed.push_back(k % 2 ? OffdiagLaw::direct(BoundedLaw::rademacher())
                              : OffdiagLaw::rotated(w, BoundedLaw::uniform(-1, 1), BoundedLaw::uniform(0, 2)));
    }
    const auto mspec = EnsembleSpec::selfadjoint_grid(3, BoundedLaw::uniform(-1, 1), mixed);
    RngStream r(8, 0);
    const Matrix m = sample_selfadjoint(mspec, r);
    CHECK(m == m.adjoint());
    CHECK((m(0, 2) == 1.0 || m(0, 2) == -1.0));
    CHECK_THROWS_AS(EnsembleSpec::selfadjoint_grid(3, BoundedLaw::uniform(-1, 1), {mixed[0], mixed[1]}),
                    InvalidParameter);
}

TEST_CASE("effective_diameter") {
    CHECK(effective_diameter(EnsembleSpec::rectangular(3, 4, BoundedLaw::rademacher())) == 2.0);
    CHECK(effective_diameter(EnsembleSpec::rectangular(3, 4, BoundedLaw::uniform(0.0, 1.0))) == 1.0);
    const double s2 = std::numbers::sqrt2;
    // off-diagonal +-1 gives 2, diagonal of length 2 sqrt 2 gives 2
    CHECK(effective_diameter(EnsembleSpec::selfadjoint(4, BoundedLaw::uniform(-s2, s2),
                                                       OffdiagLaw::direct(BoundedLaw::rademacher()))) ==
          doctest::Approx(2.0).epsilon(1e-15));
    // diagonal dominates
    CHECK(effective_diameter(EnsembleSpec::selfadjoint(4, BoundedLaw::uniform(0.0, 4.0),
                                                       OffdiagLaw::direct(BoundedLaw::rademacher()))) ==
          doctest::Approx(4.0 / s2));
    CHECK(effective_diameter(EnsembleSpec::selfadjoint(
              4, BoundedLaw::uniform(0.0, 0.1),
              OffdiagLaw::rotated({0.0, 1.0}, BoundedLaw::uniform(0, 1), BoundedLaw::uniform(0, 3)))) == 3.0);
    std::vector<BoundedLaw> grid(4, BoundedLaw::uniform(0, 1));
    grid[2] = BoundedLaw::uniform(0, 5);
    CHECK(effective_diameter(EnsembleSpec::rectangular_grid(2, 2, grid)) == 5.0);
    CHECK_THROWS_AS(effective_diameter(EnsembleSpec::rectangular(2, 2, BoundedLaw::gaussian(0, 1))), UnboundedSupport);
}

TEST_CASE("Gaussian comparison ensemble") {
    RngStream rng(1, 2);
    const Matrix h = sample_gaussian_hermitian(2, {1.0, 1.0}, rng);
    CHECK(h == h.adjoint());
    const Matrix z = sample_gaussian_hermitian(4, {0.0, 0.0}, rng);
    CHECK(z == Matrix(4, 4));
    CHECK_THROWS_AS(sample_gaussian_hermitian(3, {-1.0, 1.0}, rng), InvalidParameter);
    CHECK(GaussianProfile{std::numbers::sqrt2, 1.0}.within_caps());
    CHECK_FALSE(GaussianProfile{2.0, 1.0}.within_caps());
}

TEST_CASE("largest eigenvalue of a 64x64 symmetric sign matrix is of order sqrt n") {
    const auto spec = EnsembleSpec::selfadjoint(64, BoundedLaw::rademacher(), OffdiagLaw::direct(BoundedLaw::rademacher()));
    std::vector<double> top;
    for (int t = 0; t < 101; ++t) {
        RngStream rng(64, stream_hash(0, t));
        top.push_back(matstat::eigvals_hermitian(sample_selfadjoint(spec, rng))[0]);
    }
    std::nth_element(top.begin(), top.begin() + 50, top.end());
    const double median = top[50];
    // The Monte Carlo median sits near 1.9 sqrt n; C = 2.2 leaves room for
    // sampling noise without admitting a different growth rate.
    CHECK(median >= 8.0);
    CHECK(median <= 2.2 * 8.0);
    MESSAGE("median lambda_1 / sqrt(64) = " << median / 8.0);
}
