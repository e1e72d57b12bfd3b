#pragma once

#include "concmat/vecnorms.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace concmat::talagrand {

/// Coordinatewise disagreement indicator, entries in {0, 1}.
using HammingPattern = std::vector<std::uint8_t>;

/// A point of a product space, stored as one support index per factor.
using Point = std::vector<std::size_t>;

/// Finite factor: distinct support points (each a vector in R^d, compared
/// and measured in the Euclidean norm) with probabilities.
struct Factor {
    std::vector<std::vector<double>> points;
    std::vector<double> probs;
};

class ProductSpace {
public:
    explicit ProductSpace(std::vector<Factor> factors);
    /// Uniform measure on {0, 1}^n.
    static ProductSpace uniform_cube(std::size_t n);

    std::size_t dimension() const { return factors_.size(); }
    const Factor& factor(std::size_t j) const { return factors_[j]; }
    /// Number of points, or SIZE_MAX when it does not fit.
    std::uint64_t size() const { return size_; }
    /// Mixed-radix decoding, factor 0 least significant.
    Point decode(std::uint64_t index) const;
    std::uint64_t encode(const Point& x) const;
    double probability(const Point& x) const;
    /// Largest factor diameter.
    double max_factor_diameter() const;

private:
    std::vector<Factor> factors_;
    std::uint64_t size_ = 1;
};

HammingPattern hamming_pattern(std::span<const std::size_t> x, std::span<const std::size_t> y);
HammingPattern hamming_pattern(std::span<const double> x, std::span<const double> y);

struct MinNormResult {
    std::vector<double> point;
    /// Convex weights, one per input vertex.
    std::vector<double> weights;
    double norm = 0.0;
    /// |x|^2 - min_v <x, v>: zero exactly at the optimum, and the optimal
    /// norm is at least norm - gap / norm.
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nearest point to the origin in the convex hull of `vertices` (row-major,
/// `dim` entries each), by Wolfe's active-set algorithm.
MinNormResult min_norm_point(std::span<const double> vertices, std::size_t dim, double tolerance = 1e-12);

/// Same problem by Frank-Wolfe with away steps and exact line search.
MinNormResult min_norm_point_fw(std::span<const double> vertices, std::size_t dim,
                                int max_iterations = 100000, double tolerance = 1e-10);

struct ConvexDistance {
    double value = 0.0;
    double gap = 0.0;
    /// Distinct patterns in U_A(x).
    std::size_t vertices = 0;
};

/// f_c(A, x): minimal Euclidean norm over the convex hull of {h(x, y) : y in A}.
ConvexDistance convex_distance(const std::vector<Point>& a, const Point& x);
/// f_c from a list of patterns (duplicates allowed).
ConvexDistance convex_distance(const std::vector<HammingPattern>& patterns);

/// Minimal l_q norm over the same hull (q >= 1), by away-step Frank-Wolfe;
/// q = 2 gives f_c.
double convex_distance_lq(const std::vector<HammingPattern>& patterns, double q);

struct TailCheck {
    double t = 0.0;
    double probability = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct IsoperimetryReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool pass = false;
    double measure = 0.0;
    std::size_t members = 0;
    /// Members used for f_c after capping; a subsample only raises f_c.
    std::size_t members_used = 0;
    double max_gap = 0.0;
    std::vector<TailCheck> tail;
};

/// Exhaustive check of  E exp(f_c(A, .)^2 / 4) <= 1 / P(A)  over a product
/// space with at most 2^20 points; `indicator` marks A by encoded index.
IsoperimetryReport verify_isoperimetry(const ProductSpace& space, const std::vector<bool>& indicator,
                                       std::span<const double> t_grid = {});

struct KeDistReport {
    double dist = 0.0;
    double ke_of_dist = 0.0;
    double fc = 0.0;
    double margin = 0.0;
    bool pass = false;
};

/// Distance from x to conv A in the direct sum normed by E (factor norms
/// Euclidean); minimized over convex weights by projected gradient.
double dist_to_hull(const ProductSpace& space, const vecnorms::UnconditionalNorm& e,
                    const std::vector<Point>& a, const Point& x);

/// Checks K_E(dist(x, conv A)) <= f_c(A, x) + 1e-8 on a space whose factors
/// have diameter at most 1.
KeDistReport verify_ke_dist_bound(const ProductSpace& space, const vecnorms::UnconditionalNorm& e,
                                  const std::vector<Point>& a, const Point& x);

}  // namespace concmat::talagrand
