#include "concmat/error.hpp"
#include "concmat/rng.hpp"
#include "concmat/talagrand.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

using namespace concmat;
using namespace concmat::talagrand;
using concmat::ensembles::RngStream;

namespace {

// Exact min-norm point by enumerating faces: for every vertex subset solve the
// affine projection and keep it when all weights are nonnegative.
double min_norm_face_oracle(const std::vector<std::vector<double>>& pts) {
    const std::size_t k = pts.size();
    const std::size_t dim = pts[0].size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < k; ++i) {
            if (mask & (1u << i)) idx.push_back(i);
        }
        const std::size_t s = idx.size();
        // bordered Gram system, Gauss-Jordan without pivoting tricks
        std::vector<std::vector<double>> m(s + 1, std::vector<double>(s + 2, 0.0));
        for (std::size_t a = 0; a < s; ++a) {
            for (std::size_t b = 0; b < s; ++b) {
                double g = 0.0;
                for (std::size_t d = 0; d < dim; ++d) g += pts[idx[a]][d] * pts[idx[b]][d];
                m[a][b] = g;
            }
            m[a][s] = 1.0;
            m[s][a] = 1.0;
        }
        m[s][s + 1] = 1.0;
        bool singular = false;
        for (std::size_t c = 0; c <= s && !singular; ++c) {
            std::size_t piv = c;
            for (std::size_t r = c; r <= s; ++r) {
                if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
            }
            if (std::abs(m[piv][c]) < 1e-12) {
                singular = true;
                break;
            }
            std::swap(m[c], m[piv]);
            for (std::size_t r = 0; r <= s; ++r) {
                if (r == c) continue;
                const double f = m[r][c] / m[c][c];
                for (std::size_t q = c; q <= s + 1; ++q) m[r][q] -= f * m[c][q];
            }
        }
        if (singular) continue;
        std::vector<double> alpha(s);
        bool feasible = true;
        for (std::size_t a = 0; a < s; ++a) {
            alpha[a] = m[a][s + 1] / m[a][a];
            feasible = feasible && alpha[a] >= -1e-12;
        }
        if (!feasible) continue;
        double sq = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double z = 0.0;
            for (std::size_t a = 0; a < s; ++a) z += alpha[a] * pts[idx[a]][d];
            sq += z * z;
        }
        best = std::min(best, std::sqrt(std::max(0.0, sq)));
    }
    return best;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& pts) {
    std::vector<double> f;
    for (const auto& p : pts) f.insert(f.end(), p.begin(), p.end());
    return f;
}

std::vector<bool> random_subset(std::uint64_t size, RngStream& rng) {
    // cube of a uniform favours small sets, where 1/P(A) is largest
    const double u = rng.uniform();
    const auto target = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(u * u * u * size)));
    std::vector<std::uint64_t> order(size);
    std::iota(order.begin(), order.end(), 0);
    for (std::uint64_t i = 0; i < target; ++i) {
        const std::uint64_t j = i + rng.next_u64() % (size - i);
        std::swap(order[i], order[j]);
    }
    std::vector<bool> ind(size, false);
    for (std::uint64_t i = 0; i < target; ++i) ind[order[i]] = true;
    return ind;
}

}  // namespace

TEST_CASE("hamming_pattern") {
    const Point x{0, 1, 1};
    const Point y{0, 0, 1};
    CHECK(hamming_pattern(x, x) == HammingPattern{0, 0, 0});
    CHECK(hamming_pattern(x, y) == HammingPattern{0, 1, 0});
    const std::vector<double> a{1.0, 2.0};
    const std::vector<double> b{3.0, 4.0};
    CHECK(hamming_pattern(a, b) == HammingPattern{1, 1});
    CHECK_THROWS_AS(hamming_pattern(x, Point{0, 1}), InvalidInput);
}

TEST_CASE("convex_distance closed cases") {
    // x in A
    CHECK(convex_distance({Point{1, 0, 1}, Point{0, 0, 0}}, Point{0, 0, 0}).value == 0.0);
    // singleton: sqrt of the Hamming distance
    CHECK(convex_distance({Point{1, 1, 0, 1}}, Point{0, 0, 0, 0}).value == doctest::Approx(std::sqrt(3.0)));
    // segment between (1,1,0) and (0,1,1)
    const auto seg = convex_distance(std::vector<HammingPattern>{{1, 1, 0}, {0, 1, 1}});
    double sweep = 10.0;
    for (int i = 0; i <= 100000; ++i) {
        const double l = i / 100000.0;
        sweep = std::min(sweep, std::sqrt(l * l + 1.0 + (1.0 - l) * (1.0 - l)));
    }
    CHECK(seg.value == doctest::Approx(std::sqrt(1.5)).epsilon(1e-12));
    CHECK(std::abs(seg.value - sweep) <= 1e-9);
    CHECK(seg.gap <= 1e-10);
    CHECK_THROWS_AS(convex_distance(std::vector<Point>{}, Point{0}), DomainError);
}

TEST_CASE("Wolfe min-norm point agrees with face enumeration and Frank-Wolfe") {
    RngStream rng(11, 0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t dim = 2 + rep % 6;
        const std::size_t k = 1 + rep % 9;
        std::vector<std::vector<double>> pts(k, std::vector<double>(dim));
        const bool binary = rep % 2 == 0;
        for (auto& p : pts) {
            for (double& c : p) c = binary ? static_cast<double>(rng.next_u32() & 1u) : 2.0 * rng.uniform() - 0.5;
        }
        const auto flat = flatten(pts);
        const auto w = min_norm_point(flat, dim);
        const auto fw = min_norm_point_fw(flat, dim);
        const double oracle = min_norm_face_oracle(pts);
        CHECK(w.converged);
        CHECK(w.gap <= 1e-10);
        CHECK(std::abs(w.norm - oracle) <= 1e-9);
        CHECK(std::abs(fw.norm - oracle) <= 1e-5);
        CHECK(std::accumulate(w.weights.begin(), w.weights.end(), 0.0) == doctest::Approx(1.0));
        for (double c : w.weights) CHECK(c >= 0.0);
    }
}

TEST_CASE("convex_distance properties") {
    RngStream rng(13, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 3 + rep % 8;
        const std::size_t m = 1 + rep % 12;
        std::vector<Point> a;
        for (std::size_t i = 0; i < m; ++i) {
            Point y(n);
            for (auto& c : y) c = rng.next_u32() % 3;
            a.push_back(y);
        }
        Point x(n);
        for (auto& c : x) c = rng.next_u32() % 3;
        const double f = convex_distance(a, x).value;
        CHECK(f <= std::sqrt(static_cast<double>(n)) + 1e-12);
        const bool member = std::find(a.begin(), a.end(), x) != a.end();
        CHECK((f == 0.0) == member);
        double nearest = 1e9;
        for (const auto& y : a) {
            const auto h = hamming_pattern(x, y);
            nearest = std::min(nearest, std::sqrt(static_cast<double>(std::count(h.begin(), h.end(), 1))));
        }
        CHECK(f <= nearest + 1e-12);
        // a larger set is never farther away
        auto b = a;
        Point extra(n);
        for (auto& c : extra) c = rng.next_u32() % 3;
        b.push_back(extra);
        CHECK(convex_distance(b, x).value <= f + 1e-10);
    }
}

TEST_CASE("l_q convex distance") {
    const std::vector<HammingPattern> seg{{1, 1, 0}, {0, 1, 1}};
    CHECK(convex_distance_lq(seg, 2.0) == doctest::Approx(std::sqrt(1.5)));
    CHECK(convex_distance_lq(seg, 1.0) == 2.0);
    for (double q : {1.5, 3.0, 4.0}) {
        // symmetric segment: the midpoint is optimal
        CHECK(convex_distance_lq(seg, q) == doctest::Approx(std::pow(2.0 * std::pow(0.5, q) + 1.0, 1.0 / q)).epsilon(1e-7));
    }
    RngStream rng(17, 0);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<HammingPattern> pats;
        for (int i = 0; i < 6; ++i) {
            HammingPattern h(7);
            for (auto& b : h) b = rng.next_u32() & 1u;
            pats.push_back(h);
        }
        const double f2 = convex_distance(pats).value;
        CHECK(convex_distance_lq(pats, 3.0) <= f2 + 1e-9);
        CHECK(convex_distance_lq(pats, 1.5) >= convex_distance_lq(pats, 3.0) - 1e-9);
    }
    CHECK_THROWS_AS(convex_distance_lq(seg, 0.5), InvalidParameter);
}

TEST_CASE("product space bookkeeping") {
    const auto cube = ProductSpace::uniform_cube(4);
    CHECK(cube.size() == 16);
    for (std::uint64_t i = 0; i < 16; ++i) CHECK(cube.encode(cube.decode(i)) == i);
    CHECK(cube.probability(cube.decode(5)) == doctest::Approx(1.0 / 16));
    CHECK(cube.max_factor_diameter() == 1.0);
    CHECK_THROWS_AS(ProductSpace({Factor{{{0.0}, {0.0}}, {0.5, 0.5}}}), InvalidParameter);
    CHECK_THROWS_AS(ProductSpace({Factor{{{0.0}, {1.0}}, {0.5, 0.6}}}), InvalidParameter);
}

TEST_CASE("isoperimetry: trivial and exact small cases") {
    const auto c2 = ProductSpace::uniform_cube(2);
    const auto all = verify_isoperimetry(c2, std::vector<bool>(4, true));
    CHECK(all.lhs == doctest::Approx(1.0));
    CHECK(all.rhs == doctest::Approx(1.0));
    CHECK(all.pass);

    // one coordinate, A = {0}: f_c(A, 1) = 1
    const auto c1 = ProductSpace::uniform_cube(1);
    const auto r = verify_isoperimetry(c1, {true, false});
    CHECK(r.lhs == doctest::Approx(0.5 + 0.5 * std::exp(0.25)).epsilon(1e-14));
    CHECK(r.rhs == doctest::Approx(2.0));
    CHECK(r.pass);

    CHECK_THROWS_AS(verify_isoperimetry(c2, std::vector<bool>(4, false)), DomainError);
    CHECK_THROWS_AS(verify_isoperimetry(c2, std::vector<bool>(3, true)), InvalidInput);
    CHECK_THROWS_AS(verify_isoperimetry(ProductSpace::uniform_cube(21), {}), SizeError);
}

TEST_CASE("isoperimetry holds on random subsets of {0,1}^8") {
    const auto cube = ProductSpace::uniform_cube(8);
    const std::vector<double> grid{0.5, 1.0, 1.5, 2.0, 2.5};
    for (int rep = 0; rep < 30; ++rep) {
        RngStream rng(8, rep);
        const auto ind = random_subset(cube.size(), rng);
        const auto r = verify_isoperimetry(cube, ind, grid);
        CHECK(r.pass);
        CHECK(r.max_gap <= 1e-10);
        for (const auto& t : r.tail) CHECK(t.pass);
    }
}

TEST_CASE("isoperimetry on a Hamming ball in {0,1}^10 and a biased space") {
    const auto cube = ProductSpace::uniform_cube(10);
    std::vector<bool> ball(cube.size());
    for (std::uint64_t i = 0; i < cube.size(); ++i) ball[i] = std::popcount(i) <= 2;
    const auto r = verify_isoperimetry(cube, ball);
    CHECK(r.pass);
    CHECK(r.margin > 0.0);
    MESSAGE("Hamming ball radius 2: lhs " << r.lhs << " rhs " << r.rhs);

    std::vector<Factor> fs;
    for (int j = 0; j < 5; ++j) fs.push_back(Factor{{{0.0}, {0.5}, {1.0}}, {0.2, 0.5, 0.3}});
    const ProductSpace biased(fs);
    RngStream rng(99, 0);
    for (int rep = 0; rep < 10; ++rep) CHECK(verify_isoperimetry(biased, random_subset(biased.size(), rng)).pass);
}

TEST_CASE("dist(x, conv A) against a simplex grid") {
    std::vector<Factor> fs;
    for (int j = 0; j < 4; ++j) fs.push_back(Factor{{{0.0}, {0.4}, {1.0}}, {0.3, 0.3, 0.4}});
    const ProductSpace space(fs);
    const auto e = vecnorms::UnconditionalNorm::lq(4.0, 4);
    RngStream rng(21, 0);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Point> a(3, Point(4));
        for (auto& y : a) {
            for (auto& c : y) c = rng.next_u32() % 3;
        }
        Point x(4);
        for (auto& c : x) c = rng.next_u32() % 3;
        const double d = dist_to_hull(space, e, a, x);
        double grid = 1e9;
        const int steps = 400;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; i + j <= steps; ++j) {
                const double th[3] = {static_cast<double>(i) / steps, static_cast<double>(j) / steps,
                                      static_cast<double>(steps - i - j) / steps};
                std::vector<double> r(4);
                for (std::size_t f = 0; f < 4; ++f) {
                    const double xv = space.factor(f).points[x[f]][0];
                    double z = xv;
                    for (int k = 0; k < 3; ++k) z -= th[k] * space.factor(f).points[a[k][f]][0];
                    r[f] = std::abs(z);
                }
                grid = std::min(grid, e(r));
            }
        }
        // the grid value is feasible, and within one step of the optimum
        CHECK(d <= grid + 1e-9);
        CHECK(d >= grid - 2.0 / steps);
    }
}

TEST_CASE("K_E(dist) <= f_c") {
    SUBCASE("x in A") {
        const auto cube = ProductSpace::uniform_cube(3);
        const auto r = verify_ke_dist_bound(cube, vecnorms::UnconditionalNorm::lq(3.0, 3), {Point{0, 1, 0}}, Point{0, 1, 0});
        CHECK(r.dist == 0.0);
        CHECK(r.fc == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("Euclidean E on scalar factors in [0, 1]") {
        std::vector<Factor> fs(5, Factor{{{0.0}, {0.25}, {1.0}}, {0.2, 0.4, 0.4}});
        const ProductSpace space(fs);
        const auto e = vecnorms::UnconditionalNorm::lq(2.0, 5);
        RngStream rng(23, 0);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<Point> a(1 + rep % 4, Point(5));
            for (auto& y : a) {
                for (auto& c : y) c = rng.next_u32() % 3;
            }
            Point x(5);
            for (auto& c : x) c = rng.next_u32() % 3;
            const auto r = verify_ke_dist_bound(space, e, a, x);
            CHECK(r.ke_of_dist == doctest::Approx(r.dist).epsilon(1e-9));
            CHECK(r.pass);
        }
    }
    SUBCASE("l_4, N = 6, five points, complex-valued factors") {
        std::vector<Factor> fs(6, Factor{{{0.0, 0.0}, {0.6, 0.0}, {0.3, 0.5}}, {0.3, 0.3, 0.4}});
        const ProductSpace space(fs);
        CHECK(space.max_factor_diameter() <= 1.0);
        const auto e = vecnorms::UnconditionalNorm::lq(4.0, 6);
        RngStream rng(29, 0);
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<Point> a(5, Point(6));
            for (auto& y : a) {
                for (auto& c : y) c = rng.next_u32() % 3;
            }
            Point x(6);
            for (auto& c : x) c = rng.next_u32() % 3;
            CHECK(verify_ke_dist_bound(space, e, a, x).pass);
        }
    }
    std::vector<Factor> wide(2, Factor{{{0.0}, {2.0}}, {0.5, 0.5}});
    CHECK_THROWS_AS(verify_ke_dist_bound(ProductSpace(wide), vecnorms::UnconditionalNorm::lq(2.0, 2), {Point{0, 0}}, Point{1, 1}),
                    InvalidParameter);
}
