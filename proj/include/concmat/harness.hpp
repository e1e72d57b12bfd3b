#pragma once

#include "concmat/ensembles.hpp"
#include "concmat/matrix.hpp"
#include "concmat/vecnorms.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace concmat::harness {

enum class Verdict { pass, fail, vacuous, inconclusive, info };
std::string to_string(Verdict v);

/// A matrix functional measured per trial.
struct StatisticSpec {
    enum class Kind { opnorm, lambda, singular, schatten, kyfan, fk, gk, binomial_root };

    static StatisticSpec opnorm(double p, double q);
    /// k-th largest eigenvalue (1-based).
    static StatisticSpec lambda(std::size_t k);
    static StatisticSpec singular(std::size_t k);
    static StatisticSpec schatten(double p);
    static StatisticSpec kyfan(std::size_t k);
    static StatisticSpec fk(std::size_t k);
    static StatisticSpec gk(std::size_t k);
    /// (sum of entries)^{1/p}; equals the l_p norm of a 0/1 matrix.
    static StatisticSpec binomial_root(double p);

    std::string name() const;
    /// Throws InvalidParameter when the statistic does not fit the ensemble.
    void validate(const ensembles::EnsembleSpec& ensemble) const;
    double evaluate(const Matrix& a) const;

    Kind kind = Kind::lambda;
    double p = 2.0;
    double q = 2.0;
    std::size_t k = 1;

    bool operator==(const StatisticSpec&) const = default;
};

/// A tail-bound curve t -> bound(t).
struct BoundEnvelope {
    enum class Id {
        thm11,           // 4 exp(-(t/D)^r / 4), r = min(p', q)
        thm12_extreme,   // 4 exp(-t^2 / (8 D^2))
        thm12_interior,  // 8 exp(-(t / (2 sqrt2 (sqrt k + sqrt(k-1)) D))^2)
        cor22,           // 4 exp(-(t / (L D))^q / 4)
        prop24,          // 4 exp(-K_E(t / (L D))^2 / 4)
        schatten_high,   // 4 exp(-(t/D)^2 / 4), p >= 2
        schatten_low,    // 4 exp(-(t/D)^2 / (4 n^{2/p - 1})), 1 <= p < 2
        ui_norm,         // 4 exp(-(t/D)^2 / (4 n))
        thm33_s1,        // 4 exp(-t^2 / (4 D^2))
        thm33_sk,        // 8 exp(-(t / (2 (sqrt k + sqrt(k-1)) D))^2)
        mixed_range,     // 4 exp(-(t/D)^2 / (4 m^{2/q-1} n^{2/p'-1})), 1 < q <= 2 <= p
        gaussian,        // exp(-(t/L)^2 / 2)
        akv,             // 4 exp(-t^2 / (8 k^2 D^2))
    };

    static BoundEnvelope thm11(double p, double q, double d);
    static BoundEnvelope thm12_extreme(double d);
    static BoundEnvelope thm12_interior(std::size_t k, double d, bool simplified = false);
    static BoundEnvelope cor22(double q, double lipschitz, double d);
    static BoundEnvelope prop24(vecnorms::UnconditionalNorm e, double lipschitz, double d);
    static BoundEnvelope schatten_high(double p, double d);
    static BoundEnvelope schatten_low(double p, std::size_t n, double d);
    static BoundEnvelope ui_norm(std::size_t n, double d);
    static BoundEnvelope thm33_s1(double d);
    static BoundEnvelope thm33_sk(std::size_t k, double d, bool simplified = false);
    static BoundEnvelope mixed_range(double p, double q, std::size_t m, std::size_t n, double d);
    static BoundEnvelope gaussian(double lipschitz);
    static BoundEnvelope akv(std::size_t k, double d);

    double operator()(double t) const;
    /// Value as t -> 0+.
    double prefactor() const;
    std::string name() const;
    /// (q, L * D) when the curve has the form 4 exp(-(t / (L D))^q / 4).
    std::optional<std::pair<double, double>> power_form() const;
    /// Interior kinds center at a difference of partial-sum medians.
    bool interior() const { return id == Id::thm12_interior || id == Id::thm33_sk; }
    bool bounded_entries() const { return id != Id::gaussian; }

    Id id = Id::cor22;
    double d = 1.0;
    double p = 2.0;
    double q = 2.0;
    std::size_t k = 1;
    std::size_t m = 1;
    std::size_t n = 1;
    double lipschitz = 1.0;
    bool simplified = false;
    std::optional<vecnorms::UnconditionalNorm> norm;
    /// Multiplies the curve; values below 1 deliberately tighten it.
    double scale = 1.0;
};

/// Checks that envelope, statistic and ensemble fit together (parameters,
/// layout, bounded support, D at least the ensemble's effective diameter).
void validate_envelope(const BoundEnvelope& env, const StatisticSpec& stat, const ensembles::EnsembleSpec& ensemble,
                       double entry_scale = 1.0);

/// (r, L) when the statistic is convex and L-Lipschitz for the l_r norm of the
/// entries of a rectangular matrix.
std::optional<std::pair<double, double>> entry_lipschitz(const StatisticSpec& stat,
                                                         const ensembles::EnsembleSpec& ensemble);

/// Smallest L for the Gaussian envelope: the statistic's Hilbert-Schmidt
/// Lipschitz constant times the largest coordinate scale of an all-Gaussian
/// ensemble. Throws InvalidParameter when either is unavailable.
double gaussian_lipschitz(const StatisticSpec& stat, const ensembles::EnsembleSpec& ensemble);

/// One-sided Clopper-Pearson upper bound on a binomial proportion.
double clopper_pearson_upper(std::size_t successes, std::size_t trials, double confidence = 0.99);
/// One-sided Clopper-Pearson lower bound.
double clopper_pearson_lower(std::size_t successes, std::size_t trials, double confidence = 0.99);

struct MedianEstimate {
    /// Lower median: order statistic ceil(M/2).
    double median = 0.0;
    /// Two-sided distribution-free order-statistic interval.
    double lo = 0.0;
    double hi = 0.0;
};
MedianEstimate estimate_median(std::span<const double> samples, double confidence = 0.99);

struct TailPoint {
    double t = 0.0;
    std::size_t exceed = 0;
    double empirical = 0.0;
    double upper99 = 0.0;
    double envelope = 0.0;
    Verdict verdict = Verdict::pass;
};

struct CheckRow {
    std::string check;
    double value = 0.0;
    double bound = 0.0;
    Verdict verdict = Verdict::info;
};

struct TailReport {
    std::string statistic;
    std::string envelope;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string center_rule;
    double center = 0.0;
    MedianEstimate median;
    double mean = 0.0;
    double stddev = 0.0;
    /// Upper 99% bound at zero exceedances: the smallest resolvable tail.
    double resolution_floor = 0.0;
    /// For interior centers: medians of the two partial sums used.
    std::optional<MedianEstimate> upper_sum;
    std::optional<MedianEstimate> lower_sum;
    std::vector<TailPoint> points;
    std::vector<CheckRow> checks;
    double wall_seconds = 0.0;
    /// Per-trial statistic values in trial order.
    std::vector<double> samples;

    bool passed() const;
};

/// t-grid request: an explicit list, or (min, max, count, spacing). An empty
/// request selects the default grid.
struct TGrid {
    std::vector<double> values;
    std::optional<double> min;
    std::optional<double> max;
    std::size_t count = 40;
    bool geometric = true;

    bool is_default() const { return values.empty() && !min && !max; }
    bool operator==(const TGrid&) const = default;
};

struct TailProbe {
    StatisticSpec statistic;
    BoundEnvelope envelope;
    TGrid grid;
    /// Optional [lo, hi] the median must fall in (recorded as a check).
    std::optional<std::pair<double, double>> median_range;
};

struct TailExperiment {
    ensembles::EnsembleSpec ensemble;
    std::vector<TailProbe> probes;
    std::size_t trials = 10000;
    std::uint64_t seed = 0;
    /// Multiplies every sampled matrix (negative values negate it).
    double entry_scale = 1.0;
};

/// Smallest trial count accepted by the tail runner.
inline constexpr std::size_t kMinTrials = 100;

/// Validates every probe, including explicit t values that the trial count
/// cannot resolve (envelope below the zero-count upper bound).
void validate_tail_experiment(const TailExperiment& exp);

/// Samples each matrix once and evaluates every probe on it. Trial i uses
/// stream (seed, stream_hash(0, i)), so results do not depend on `jobs`.
std::vector<TailReport> run_tail_experiments(const TailExperiment& exp, int jobs = 1);

TailReport run_tail_experiment(const ensembles::EnsembleSpec& ensemble, const StatisticSpec& stat,
                               const BoundEnvelope& env, std::size_t trials, const TGrid& grid,
                               std::uint64_t seed, int jobs = 1);

/// 4^{1 + 1/q} Gamma(1 + 1/q).
double mean_median_constant(double q);

/// |mean - median| <= L D 4^{1+1/q} Gamma(1+1/q) + slack, where the slack is
/// the median interval half-width plus the 99% normal half-width of the mean.
CheckRow mean_median_gap_check(std::span<const double> samples, double q, double lipschitz, double d);

/// 2 sqrt(6 log 2) (sqrt k + sqrt(k-1)) D.
double interior_center_bound(std::size_t k, double d);

/// Compares the partial-sum center of an interior report with the median of
/// the eigenvalue itself.
CheckRow interior_center_check(const TailReport& report, std::size_t k, double d);

struct CheckReport {
    std::string name;
    std::vector<CheckRow> rows;
    bool passed() const;
};

/// Runs the interior eigenvalue experiment for lambda_k of a self-adjoint
/// ensemble and checks the center bound; also lists the comparison envelope
/// 4 exp(-t^2 / (8 k^2 D^2)) against the interior curve on a few t values.
CheckReport interior_center_consistency(const ensembles::EnsembleSpec& ensemble, std::size_t k,
                                        std::size_t trials, std::uint64_t seed, int jobs = 1);

struct ScalingRow {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double kurtosis = 0.0;
};

struct ScalingReport {
    double p = 1.0;
    std::vector<ScalingRow> rows;
    double slope = 0.0;
    double slope_lo = 0.0;
    double slope_hi = 0.0;
    CheckReport checks;
};

/// S_n^{1/p} for S_n ~ Binomial(n, 1/2) with 1 <= p < 2: the standard
/// deviation grows like n^{1/p - 1/2}. Passes when the fitted log-log slope is
/// within `tolerance` of 1/p - 1/2.
ScalingReport clt_counterexample(const std::vector<std::size_t>& n_list, double p, std::size_t trials,
                                 std::uint64_t seed, double tolerance = 0.1);

/// The same statistic with q >= 2: passes when every standard deviation is
/// below the dimension-free bound sqrt(4^{1+2/q} Gamma(1+2/q)) and the slope
/// shows no growth at 99% confidence.
ScalingReport binomial_root_control(const std::vector<std::size_t>& n_list, double q, std::size_t trials,
                                    std::uint64_t seed);

/// Frequency of an all-ones a x b submatrix in an m x n Rademacher matrix
/// against 2^{-ab}; inconclusive when trials * 2^{-ab} < 5. Also records how
/// often ||X||_{q'->q} reaches (ab)^{1/q}.
CheckReport sharpness_submatrix(std::size_t m, std::size_t n, std::size_t a, std::size_t b, double q,
                                std::size_t trials, std::uint64_t seed, int jobs = 1);

/// E|x| for a law (exact).
double mean_abs(const ensembles::BoundedLaw& law);

/// Median of ||X||_{p->q} over n x n (or m_factor * n x n) i.i.d. ensembles
/// against c max{m^{1/q}, n^{1/p'}} with c = E|x|; for p = q' also records the
/// ratio to max{m, n}^{1/q}.
CheckReport median_growth_check(const ensembles::BoundedLaw& law, const std::vector<std::size_t>& n_list,
                                double p, double q, std::size_t trials, std::uint64_t seed, int jobs = 1);

/// A norm for the K_E suite; `r` is the Hoelder exponent used by the Lorentz
/// closed form.
struct KeCase {
    std::string label;
    vecnorms::UnconditionalNorm norm;
    std::optional<double> r;
};

/// ke_numeric >= ke_bound - 1e-8 on `grid_points` values of t up to
/// ||(1, ..., 1)||_E; for l_q also K_E(k^{1/q}) = sqrt k to 1e-9, k = 1..N.
CheckReport ke_bound_suite(const std::vector<KeCase>& cases, std::size_t grid_points);

/// Random real matrices (2..8 rows and columns, uniform [-1, 1] entries) with
/// 1 < p <= 2 <= q < inf: the computed operator norm never exceeds
/// ||vec(A)||_r or the row bound; and the solver matches the grid oracle on
/// matrices with at most 3 columns.
CheckReport hoelder_suite(std::size_t random_matrices, std::size_t oracle_instances, std::uint64_t seed,
                          int jobs = 1);

/// Exhaustive isoperimetry on uniform {0,1}^N for each N in `dims` over
/// `subsets` random nonempty sets, then K_E(dist) <= f_c on `dist_instances`
/// random small product spaces.
CheckReport talagrand_suite(const std::vector<std::size_t>& dims, std::size_t subsets, std::size_t dist_instances,
                            std::uint64_t seed, int jobs = 1);

/// Runs fn(i) for i in [0, count) on `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace concmat::harness
