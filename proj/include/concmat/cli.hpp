#pragma once

#include "concmat/ensembles.hpp"
#include "concmat/error.hpp"
#include "concmat/harness.hpp"
#include "concmat/vecnorms.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace concmat::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// A config problem with its 1-based source line (0 when unknown).
struct ConfigIssue {
    int line = 0;
    std::string message;
};

class ConfigError : public Error {
public:
    ConfigError(std::string source, std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

/// A norm on R^N as written in a config.
struct NormConfig {
    std::string family;  // lq | lorentz | orlicz
    double q = 2.0;
    std::size_t dim = 0;
    std::vector<double> weights;
    double p = 1.0;
    std::string psi;  // power | scaled_power | piecewise_linear
    double psi_c = 1.0;
    double psi_p = 2.0;
    std::vector<std::pair<double, double>> knots;
    std::optional<double> r;

    vecnorms::UnconditionalNorm build() const;
    std::string label() const;
    bool operator==(const NormConfig&) const = default;
};

struct EnsembleConfig {
    ensembles::EnsembleSpec::Layout layout = ensembles::EnsembleSpec::Layout::rectangular;
    std::size_t m = 0;
    std::size_t n = 0;
    ensembles::BoundedLaw law = ensembles::BoundedLaw::rademacher();
    ensembles::BoundedLaw diag = ensembles::BoundedLaw::rademacher();
    ensembles::OffdiagLaw offdiag;

    ensembles::EnsembleSpec build() const;
    bool operator==(const EnsembleConfig&) const = default;
};

/// Envelope id plus the parameters written in the config; missing ones are
/// filled from the statistic and ensemble by resolve_envelope.
struct EnvelopeConfig {
    std::string id;
    std::optional<double> d;
    std::optional<double> p;
    std::optional<double> q;
    std::optional<double> lipschitz;
    std::optional<double> scale;
    std::optional<std::size_t> k;
    std::optional<std::size_t> m;
    std::optional<std::size_t> n;
    std::optional<bool> simplified;
    std::optional<NormConfig> norm;

    bool operator==(const EnvelopeConfig&) const = default;
};

struct ExperimentConfig {
    std::string name;
    /// tail | interior_center | clt | sharpness | median_growth | talagrand |
    /// ke_bounds | opnorm_check
    std::string type;
    std::optional<std::uint64_t> seed;
    std::size_t trials = 10000;
    std::vector<std::string> outputs{"csv", "json"};

    // tail (and interior_center: ensemble)
    std::optional<EnsembleConfig> ensemble;
    std::optional<harness::StatisticSpec> statistic;
    std::optional<EnvelopeConfig> envelope;
    harness::TGrid t_grid;
    double entry_scale = 1.0;
    std::optional<std::pair<double, double>> median_range;

    // check experiments
    std::optional<ensembles::BoundedLaw> law;
    std::vector<std::size_t> n_list;
    std::optional<double> p;
    std::optional<double> q;
    std::optional<double> tolerance;
    std::optional<std::size_t> m;
    std::optional<std::size_t> n;
    std::optional<std::size_t> a;
    std::optional<std::size_t> b;
    std::optional<std::size_t> k;
    std::vector<NormConfig> norms;
    std::optional<std::size_t> grid_points;
    std::optional<std::size_t> subsets;
    std::optional<std::size_t> instances;
    std::optional<std::size_t> oracle_instances;

    /// Source line of the entry; not part of equality.
    int line = 0;

    bool operator==(const ExperimentConfig& other) const;
};

/// Parses config text. An empty document yields an empty list. Throws
/// ConfigError listing every schema and validation problem found.
std::vector<ExperimentConfig> parse_config_text(const std::string& text, const std::string& source = "<config>");
std::vector<ExperimentConfig> parse_config(const std::filesystem::path& path);

/// Canonical config text; parse_config_text(emit_config(c)) == c.
std::string emit_config(const std::vector<ExperimentConfig>& configs);

/// Envelope with defaults filled in: D from the ensemble's effective diameter
/// (times |entry_scale|), exponents and sizes from the statistic and ensemble.
harness::BoundEnvelope resolve_envelope(const ExperimentConfig& config);

/// Semantic checks (envelope compatibility, parameter ranges, unique names,
/// required seeds) without sampling. Throws ConfigError.
void validate_configs(const std::vector<ExperimentConfig>& configs, const std::string& source = "<config>");

struct ExperimentResult {
    std::string name;
    std::string type;
    std::string config_hash;
    std::optional<std::uint64_t> seed;
    std::optional<harness::TailReport> tail;
    std::optional<harness::CheckReport> checks;
    std::optional<harness::ScalingReport> scaling;
    double wall_seconds = 0.0;
    bool passed = true;
};

struct RunOptions {
    int jobs = 1;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed_override;
    /// Summary table destination; null for silence.
    std::ostream* summary = nullptr;
};

struct RunOutcome {
    std::vector<ExperimentResult> results;
    /// 0 when every non-vacuous verdict passes, 2 on any failure.
    int exit_code = 0;
};

/// Validates, then runs every experiment. Tail experiments that share
/// ensemble, trials, seed and entry scale are sampled once.
RunOutcome run(std::vector<ExperimentConfig> configs, const RunOptions& options);

/// CSV with columns t,empirical,empirical_upper99,envelope,verdict.
std::string tail_csv(const harness::TailReport& report);
/// CSV with columns check,value,bound,verdict.
std::string check_csv(const std::vector<harness::CheckRow>& rows);
nlohmann::ordered_json report_json(const ExperimentResult& result);
/// Pretty-printed report_json with a trailing newline.
std::string report_json_text(const ExperimentResult& result);
/// Writes <dir>/<name>.json and <name>.csv as requested by `outputs`.
void emit_report(const ExperimentResult& result, const std::vector<std::string>& outputs,
                 const std::filesystem::path& dir);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_number(double v);

/// FNV-1a 64-bit hash as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Sorted *.cfg files of a preset directory.
std::vector<std::filesystem::path> list_presets(const std::filesystem::path& dir);

}  // namespace concmat::cli
