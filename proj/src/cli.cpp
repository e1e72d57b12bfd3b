#include "concmat/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace concmat::cli {

using ensembles::BoundedLaw;
using ensembles::EnsembleSpec;
using ensembles::OffdiagLaw;
using harness::BoundEnvelope;
using harness::StatisticSpec;

namespace {

std::string join_issues(const std::string& source, const std::vector<ConfigIssue>& issues) {
    std::string s = source + ": " + std::to_string(issues.size()) + " config error(s)";
    for (const auto& i : issues) {
        s += "\n  " + source + ":" + std::to_string(i.line) + ": " + i.message;
    }
    return s;
}

}  // namespace

ConfigError::ConfigError(std::string source, std::vector<ConfigIssue> issues)
    : Error(join_issues(source, issues)), issues_(std::move(issues)) {}

// ------------------------------------------------------------------ numbers

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

// ------------------------------------------------------------------ parsing

struct Issue {
    int line;
    std::string message;
};

int line_of(const YAML::Node& n) {
    const auto mark = n.Mark();
    return mark.line >= 0 ? mark.line + 1 : 0;
}

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) { throw Issue{line_of(n), msg}; }

std::string scalar(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) fail(n, "'" + key + "' must be a scalar");
    return n.Scalar();
}

std::optional<double> to_double(const std::string& s) {
    if (s == "inf" || s == ".inf" || s == "+inf") return vecnorms::kInf;
    if (s.empty()) return std::nullopt;
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        auto a = to_double(s.substr(0, slash));
        auto b = to_double(s.substr(slash + 1));
        if (!a || !b || *b == 0.0 || std::isinf(*a) || std::isinf(*b)) return std::nullopt;
        return *a / *b;
    }
    double v = 0.0;
    const char* first = s.data();
    if (*first == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

double as_num(const YAML::Node& n, const std::string& key) {
    auto v = to_double(scalar(n, key));
    if (!v || std::isnan(*v)) fail(n, "'" + key + "' must be a number, got '" + n.Scalar() + "'");
    return *v;
}

std::uint64_t as_u64(const YAML::Node& n, const std::string& key) {
    const std::string s = scalar(n, key);
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(n, "'" + key + "' must be a nonnegative integer, got '" + s + "'");
    }
    return v;
}

std::size_t as_size(const YAML::Node& n, const std::string& key) { return static_cast<std::size_t>(as_u64(n, key)); }

bool as_bool(const YAML::Node& n, const std::string& key) {
    const std::string s = scalar(n, key);
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, "'" + key + "' must be true or false");
}

const YAML::Node& require_map(const YAML::Node& n, const std::string& what) {
    if (!n.IsMap()) fail(n, what + " must be a mapping");
    return n;
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& what) {
    for (const auto& kv : map) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + what);
    }
}

YAML::Node need(const YAML::Node& map, const std::string& key, const std::string& what) {
    YAML::Node v = map[key];
    if (!v) fail(map, what + " is missing '" + key + "'");
    return v;
}

std::optional<double> opt_num(const YAML::Node& map, const std::string& key) {
    if (auto v = map[key]) return as_num(v, key);
    return std::nullopt;
}

std::optional<std::size_t> opt_size(const YAML::Node& map, const std::string& key) {
    if (auto v = map[key]) return as_size(v, key);
    return std::nullopt;
}

std::vector<double> num_list(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) fail(n, "'" + key + "' must be a list");
    std::vector<double> out;
    for (const auto& e : n) out.push_back(as_num(e, key));
    return out;
}

std::vector<std::size_t> size_list(const YAML::Node& n, const std::string& key) {
    if (!n.IsSequence()) fail(n, "'" + key + "' must be a list");
    std::vector<std::size_t> out;
    for (const auto& e : n) out.push_back(as_size(e, key));
    return out;
}

// Runs a factory and turns library errors into located issues.
template <class F>
auto build_at(const YAML::Node& n, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const Error& e) {
        fail(n, e.what());
    }
}

BoundedLaw parse_law(const YAML::Node& n, const std::string& what) {
    require_map(n, what);
    const std::string kind = scalar(need(n, "kind", what), "kind");
    return build_at(n, [&]() -> BoundedLaw {
        if (kind == "rademacher") {
            check_keys(n, {"kind"}, what);
            return BoundedLaw::rademacher();
        }
        if (kind == "uniform") {
            check_keys(n, {"kind", "a", "b"}, what);
            return BoundedLaw::uniform(as_num(need(n, "a", what), "a"), as_num(need(n, "b", what), "b"));
        }
        if (kind == "two_point") {
            check_keys(n, {"kind", "v1", "v2", "prob"}, what);
            return BoundedLaw::two_point(as_num(need(n, "v1", what), "v1"), as_num(need(n, "v2", what), "v2"),
                                         as_num(need(n, "prob", what), "prob"));
        }
        if (kind == "discrete") {
            check_keys(n, {"kind", "values", "probs"}, what);
            return BoundedLaw::discrete(num_list(need(n, "values", what), "values"),
                                        num_list(need(n, "probs", what), "probs"));
        }
        if (kind == "bernoulli01") {
            check_keys(n, {"kind", "prob"}, what);
            return BoundedLaw::bernoulli01(as_num(need(n, "prob", what), "prob"));
        }
        if (kind == "complex_disc") {
            check_keys(n, {"kind", "radius"}, what);
            return BoundedLaw::complex_disc(as_num(need(n, "radius", what), "radius"));
        }
        if (kind == "gaussian") {
            check_keys(n, {"kind", "mean", "variance"}, what);
            return BoundedLaw::gaussian(opt_num(n, "mean").value_or(0.0), opt_num(n, "variance").value_or(1.0));
        }
        fail(n["kind"], "unknown law kind '" + kind + "'");
    });
}

OffdiagLaw parse_offdiag(const YAML::Node& n) {
    require_map(n, "offdiag");
    if (!n["w"]) return OffdiagLaw::direct(parse_law(n, "offdiag"));
    check_keys(n, {"w", "re_part", "im_part"}, "offdiag");
    const auto w = num_list(n["w"], "w");
    if (w.size() != 2) fail(n["w"], "'w' must be [re, im]");
    auto re = parse_law(need(n, "re_part", "offdiag"), "re_part");
    auto im = parse_law(need(n, "im_part", "offdiag"), "im_part");
    return build_at(n, [&] { return OffdiagLaw::rotated({w[0], w[1]}, re, im); });
}

EnsembleConfig parse_ensemble(const YAML::Node& n) {
    require_map(n, "ensemble");
    EnsembleConfig c;
    const std::string layout = scalar(need(n, "layout", "ensemble"), "layout");
    if (layout == "rectangular") {
        check_keys(n, {"layout", "m", "n", "law"}, "rectangular ensemble");
        c.layout = EnsembleSpec::Layout::rectangular;
        c.m = as_size(need(n, "m", "ensemble"), "m");
        c.n = as_size(need(n, "n", "ensemble"), "n");
        c.law = parse_law(need(n, "law", "ensemble"), "law");
    } else if (layout == "selfadjoint") {
        check_keys(n, {"layout", "n", "diag", "offdiag"}, "selfadjoint ensemble");
        c.layout = EnsembleSpec::Layout::selfadjoint;
        c.n = as_size(need(n, "n", "ensemble"), "n");
        c.m = c.n;
        c.diag = parse_law(need(n, "diag", "ensemble"), "diag");
        c.offdiag = parse_offdiag(need(n, "offdiag", "ensemble"));
    } else {
        fail(n["layout"], "unknown layout '" + layout + "'");
    }
    if (c.m == 0 || c.n == 0) fail(n, "ensemble dimensions must be positive");
    return c;
}

StatisticSpec parse_statistic(const YAML::Node& n) {
    require_map(n, "statistic");
    const std::string kind = scalar(need(n, "kind", "statistic"), "kind");
    const std::string what = kind + " statistic";
    return build_at(n, [&]() -> StatisticSpec {
        if (kind == "opnorm") {
            check_keys(n, {"kind", "p", "q"}, what);
            return StatisticSpec::opnorm(as_num(need(n, "p", what), "p"), as_num(need(n, "q", what), "q"));
        }
        if (kind == "schatten" || kind == "binomial_root") {
            check_keys(n, {"kind", "p"}, what);
            const double p = as_num(need(n, "p", what), "p");
            return kind == "schatten" ? StatisticSpec::schatten(p) : StatisticSpec::binomial_root(p);
        }
        static const std::map<std::string, StatisticSpec (*)(std::size_t)> indexed{
            {"lambda", &StatisticSpec::lambda}, {"singular", &StatisticSpec::singular},
            {"kyfan", &StatisticSpec::kyfan},   {"fk", &StatisticSpec::fk},
            {"gk", &StatisticSpec::gk},
        };
        auto it = indexed.find(kind);
        if (it == indexed.end()) fail(n["kind"], "unknown statistic kind '" + kind + "'");
        check_keys(n, {"kind", "k"}, what);
        return it->second(as_size(need(n, "k", what), "k"));
    });
}

const std::map<std::string, std::set<std::string>>& envelope_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"thm11", {"D", "p", "q"}},
        {"thm12_extreme", {"D"}},
        {"thm12_interior", {"D", "k", "simplified"}},
        {"cor22", {"D", "q", "L"}},
        {"prop24", {"D", "L", "norm"}},
        {"schatten_high", {"D", "p"}},
        {"schatten_low", {"D", "p", "n"}},
        {"ui_norm", {"D", "n"}},
        {"thm33_s1", {"D"}},
        {"thm33_sk", {"D", "k", "simplified"}},
        {"mixed_range", {"D", "p", "q", "m", "n"}},
        {"gaussian", {"L"}},
        {"akv", {"D", "k"}},
    };
    return keys;
}

NormConfig parse_norm(const YAML::Node& n) {
    require_map(n, "norm");
    NormConfig c;
    c.family = scalar(need(n, "family", "norm"), "family");
    if (c.family == "lq") {
        check_keys(n, {"family", "q", "N"}, "lq norm");
        c.q = as_num(need(n, "q", "lq norm"), "q");
        c.dim = as_size(need(n, "N", "lq norm"), "N");
    } else if (c.family == "lorentz") {
        check_keys(n, {"family", "weights", "p", "r"}, "lorentz norm");
        c.weights = num_list(need(n, "weights", "lorentz norm"), "weights");
        c.p = as_num(need(n, "p", "lorentz norm"), "p");
        c.r = opt_num(n, "r");
    } else if (c.family == "orlicz") {
        check_keys(n, {"family", "N", "psi", "c", "exponent", "knots"}, "orlicz norm");
        c.dim = as_size(need(n, "N", "orlicz norm"), "N");
        c.psi = scalar(need(n, "psi", "orlicz norm"), "psi");
        if (c.psi == "power" || c.psi == "scaled_power") {
            c.psi_p = as_num(need(n, "exponent", "orlicz norm"), "exponent");
            if (c.psi == "scaled_power") c.psi_c = as_num(need(n, "c", "orlicz norm"), "c");
        } else if (c.psi == "piecewise_linear") {
            const auto k = need(n, "knots", "orlicz norm");
            if (!k.IsSequence()) fail(k, "'knots' must be a list of [t, psi(t)] pairs");
            for (const auto& e : k) {
                const auto pair = num_list(e, "knots");
                if (pair.size() != 2) fail(e, "each knot must be [t, psi(t)]");
                c.knots.emplace_back(pair[0], pair[1]);
            }
        } else {
            fail(n["psi"], "unknown psi '" + c.psi + "'");
        }
    } else {
        fail(n["family"], "unknown norm family '" + c.family + "'");
    }
    build_at(n, [&] { return c.build(); });
    return c;
}

EnvelopeConfig parse_envelope(const YAML::Node& n) {
    require_map(n, "envelope");
    EnvelopeConfig c;
    c.id = scalar(need(n, "id", "envelope"), "id");
    std::replace(c.id.begin(), c.id.end(), '-', '_');
    const auto& table = envelope_keys();
    auto it = table.find(c.id);
    if (it == table.end()) fail(n["id"], "unknown envelope id '" + c.id + "'");
    auto allowed = it->second;
    allowed.insert({"id", "scale"});
    check_keys(n, allowed, c.id + " envelope");
    c.d = opt_num(n, "D");
    c.p = opt_num(n, "p");
    c.q = opt_num(n, "q");
    c.lipschitz = opt_num(n, "L");
    c.scale = opt_num(n, "scale");
    c.k = opt_size(n, "k");
    c.m = opt_size(n, "m");
    c.n = opt_size(n, "n");
    if (auto s = n["simplified"]) c.simplified = as_bool(s, "simplified");
    if (auto nn = n["norm"]) c.norm = parse_norm(nn);
    return c;
}

harness::TGrid parse_grid(const YAML::Node& n) {
    harness::TGrid g;
    if (n.IsSequence()) {
        g.values = num_list(n, "t_grid");
        if (g.values.empty()) fail(n, "an explicit t_grid needs at least one value");
        return g;
    }
    require_map(n, "t_grid");
    check_keys(n, {"min", "max", "count", "spacing"}, "t_grid");
    g.min = opt_num(n, "min");
    g.max = opt_num(n, "max");
    if (g.min.has_value() != g.max.has_value()) fail(n, "t_grid needs both min and max");
    if (auto c = n["count"]) g.count = as_size(c, "count");
    if (auto s = n["spacing"]) {
        const std::string sp = scalar(s, "spacing");
        if (sp != "geometric" && sp != "linear") fail(s, "spacing must be geometric or linear");
        g.geometric = sp == "geometric";
    }
    return g;
}

const std::map<std::string, std::set<std::string>>& type_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"tail", {"seed", "trials", "ensemble", "statistic", "envelope", "t_grid", "entry_scale", "median_range"}},
        {"interior_center", {"seed", "trials", "ensemble", "k"}},
        {"clt", {"seed", "trials", "n_list", "p", "tolerance"}},
        {"sharpness", {"seed", "trials", "m", "n", "a", "b", "q"}},
        {"median_growth", {"seed", "trials", "law", "n_list", "p", "q"}},
        {"talagrand", {"seed", "dims", "subsets", "instances"}},
        {"ke_bounds", {"seed", "norms", "grid_points"}},
        {"opnorm_check", {"seed", "instances", "oracle_instances"}},
    };
    return keys;
}

bool uses_trials(const std::string& type) { return type_keys().at(type).count("trials") > 0; }

ExperimentConfig parse_experiment(const YAML::Node& n) {
    require_map(n, "experiment");
    ExperimentConfig c;
    c.line = line_of(n);
    c.name = scalar(need(n, "name", "experiment"), "name");
    c.type = scalar(need(n, "type", "experiment '" + c.name + "'"), "type");
    const auto& table = type_keys();
    auto it = table.find(c.type);
    if (it == table.end()) fail(n["type"], "unknown experiment type '" + c.type + "'");
    auto allowed = it->second;
    allowed.insert({"name", "type", "outputs"});
    check_keys(n, allowed, c.type + " experiment '" + c.name + "'");

    if (auto s = n["seed"]) {
        c.seed = as_u64(s, "seed");
    } else if (c.type != "ke_bounds") {
        fail(n, "experiment '" + c.name + "': missing seed");
    }
    if (auto t = n["trials"]) c.trials = as_size(t, "trials");
    if (auto o = n["outputs"]) {
        if (!o.IsSequence()) fail(o, "'outputs' must be a list");
        c.outputs.clear();
        for (const auto& e : o) {
            const std::string s = scalar(e, "outputs");
            if (s != "csv" && s != "json") fail(e, "unknown output format '" + s + "'");
            if (std::find(c.outputs.begin(), c.outputs.end(), s) == c.outputs.end()) c.outputs.push_back(s);
        }
    }

    const std::string what = c.type + " experiment '" + c.name + "'";
    if (c.type == "tail") {
        c.ensemble = parse_ensemble(need(n, "ensemble", what));
        c.statistic = parse_statistic(need(n, "statistic", what));
        c.envelope = parse_envelope(need(n, "envelope", what));
        if (auto g = n["t_grid"]) c.t_grid = parse_grid(g);
        if (auto e = n["entry_scale"]) c.entry_scale = as_num(e, "entry_scale");
        if (auto r = n["median_range"]) {
            const auto v = num_list(r, "median_range");
            if (v.size() != 2 || !(v[0] <= v[1])) fail(r, "'median_range' must be [lo, hi] with lo <= hi");
            c.median_range = std::make_pair(v[0], v[1]);
        }
    } else if (c.type == "interior_center") {
        c.ensemble = parse_ensemble(need(n, "ensemble", what));
        c.k = as_size(need(n, "k", what), "k");
    } else if (c.type == "clt") {
        c.n_list = size_list(need(n, "n_list", what), "n_list");
        c.p = as_num(need(n, "p", what), "p");
        c.tolerance = opt_num(n, "tolerance");
    } else if (c.type == "sharpness") {
        c.m = as_size(need(n, "m", what), "m");
        c.n = as_size(need(n, "n", what), "n");
        c.a = as_size(need(n, "a", what), "a");
        c.b = as_size(need(n, "b", what), "b");
        c.q = opt_num(n, "q");
    } else if (c.type == "median_growth") {
        c.law = parse_law(need(n, "law", what), "law");
        c.n_list = size_list(need(n, "n_list", what), "n_list");
        c.p = as_num(need(n, "p", what), "p");
        c.q = as_num(need(n, "q", what), "q");
    } else if (c.type == "talagrand") {
        c.n_list = size_list(need(n, "dims", what), "dims");
        c.subsets = opt_size(n, "subsets");
        c.instances = opt_size(n, "instances");
    } else if (c.type == "ke_bounds") {
        const auto norms = need(n, "norms", what);
        if (!norms.IsSequence()) fail(norms, "'norms' must be a list");
        for (const auto& e : norms) c.norms.push_back(parse_norm(e));
        c.grid_points = opt_size(n, "grid_points");
    } else if (c.type == "opnorm_check") {
        c.instances = opt_size(n, "instances");
        c.oracle_instances = opt_size(n, "oracle_instances");
    }
    return c;
}

bool valid_name(const std::string& s) {
    if (s.empty() || s == "." || s == "..") return false;
    return std::all_of(s.begin(), s.end(), [](char ch) {
        return (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') || ch == '_' ||
               ch == '-' || ch == '.';
    });
}

harness::TailExperiment tail_experiment(const ExperimentConfig& c) {
    harness::TailExperiment exp;
    exp.ensemble = c.ensemble->build();
    exp.trials = c.trials;
    exp.seed = c.seed.value_or(0);
    exp.entry_scale = c.entry_scale;
    exp.probes.push_back({*c.statistic, resolve_envelope(c), c.t_grid, c.median_range});
    return exp;
}

void semantic_check(const ExperimentConfig& c) {
    auto need_trials = [&] {
        if (c.trials < harness::kMinTrials) {
            throw InvalidParameter("trials = " + std::to_string(c.trials) + " is below the minimum of " +
                                   std::to_string(harness::kMinTrials));
        }
    };
    auto positive_list = [&](const std::string& key, std::size_t min_size) {
        if (c.n_list.size() < min_size) {
            throw InvalidParameter("'" + key + "' needs at least " + std::to_string(min_size) + " entries");
        }
        for (auto v : c.n_list) {
            if (v == 0) throw InvalidParameter("'" + key + "' entries must be positive");
        }
    };
    if (c.type == "tail") {
        harness::validate_tail_experiment(tail_experiment(c));
    } else if (c.type == "interior_center") {
        need_trials();
        const auto e = c.ensemble->build();
        if (e.layout != EnsembleSpec::Layout::selfadjoint) {
            throw InvalidParameter("interior_center needs a self-adjoint ensemble");
        }
        if (!e.bounded()) throw UnboundedSupport("interior_center needs bounded entries");
        if (*c.k < 2 || *c.k + 1 > e.n) throw InvalidParameter("k must be in [2, n-1]");
    } else if (c.type == "clt") {
        need_trials();
        positive_list("n_list", 2);
        if (!(*c.p >= 1.0)) throw InvalidParameter("p must be >= 1");
        if (c.tolerance && !(*c.tolerance > 0.0)) throw InvalidParameter("tolerance must be positive");
    } else if (c.type == "sharpness") {
        need_trials();
        if (*c.m < 1 || *c.n < 1 || *c.n > 64) throw InvalidParameter("sharpness needs 1 <= n <= 64 columns");
        if (*c.a < 1 || *c.a > *c.m || *c.b < 1 || *c.b > *c.n) {
            throw InvalidParameter("block size must fit the matrix");
        }
        if (!(c.q.value_or(2.0) >= 2.0)) throw InvalidParameter("sharpness needs q >= 2");
    } else if (c.type == "median_growth") {
        need_trials();
        positive_list("n_list", 1);
        if (!(*c.p >= 1.0 && *c.q >= 1.0)) throw InvalidParameter("exponents must be >= 1");
        if (!(harness::mean_abs(*c.law) > 0.0)) throw InvalidParameter("law needs E|x| > 0");
    } else if (c.type == "talagrand") {
        positive_list("dims", 1);
        for (auto d : c.n_list) {
            if (d > 20) throw InvalidParameter("talagrand dims must be at most 20");
        }
    } else if (c.type == "ke_bounds") {
        if (c.norms.empty()) throw InvalidParameter("'norms' is empty");
        if (c.grid_points && *c.grid_points == 0) throw InvalidParameter("grid_points must be positive");
    }
}

std::vector<ConfigIssue> semantic_issues(const std::vector<ExperimentConfig>& configs) {
    std::vector<ConfigIssue> issues;
    std::map<std::string, int> seen;
    for (const auto& c : configs) {
        if (!valid_name(c.name)) {
            issues.push_back({c.line, "experiment name '" + c.name + "' must use only letters, digits, '_', '-', '.'"});
        }
        auto [it, fresh] = seen.emplace(c.name, c.line);
        if (!fresh) {
            issues.push_back({c.line, "duplicate experiment name '" + c.name + "' (first at line " +
                                          std::to_string(it->second) + ")"});
        }
        if (!c.seed && c.type != "ke_bounds") {
            issues.push_back({c.line, "experiment '" + c.name + "': missing seed"});
            continue;
        }
        try {
            semantic_check(c);
        } catch (const Error& e) {
            issues.push_back({c.line, "experiment '" + c.name + "': " + e.what()});
        }
    }
    return issues;
}

// ----------------------------------------------------------------- emission

std::string num(double v) { return format_number(v); }

std::string num_seq(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
    return s + "]";
}

template <class T>
std::string int_seq(const std::vector<T>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    return s + "]";
}

std::string emit_law(const BoundedLaw& law) {
    const auto& p = law.params();
    switch (law.kind()) {
        case BoundedLaw::Kind::rademacher: return "{kind: rademacher}";
        case BoundedLaw::Kind::uniform: return "{kind: uniform, a: " + num(p[0]) + ", b: " + num(p[1]) + "}";
        case BoundedLaw::Kind::two_point:
            return "{kind: two_point, v1: " + num(p[0]) + ", v2: " + num(p[1]) + ", prob: " + num(p[2]) + "}";
        case BoundedLaw::Kind::discrete:
            return "{kind: discrete, values: " + num_seq(law.values()) + ", probs: " + num_seq(law.probs()) + "}";
        case BoundedLaw::Kind::bernoulli01: return "{kind: bernoulli01, prob: " + num(p[0]) + "}";
        case BoundedLaw::Kind::complex_disc: return "{kind: complex_disc, radius: " + num(p[0]) + "}";
        case BoundedLaw::Kind::gaussian:
            return "{kind: gaussian, mean: " + num(p[0]) + ", variance: " + num(p[1]) + "}";
    }
    return "{}";
}

std::string emit_ensemble(const EnsembleConfig& e) {
    if (e.layout == EnsembleSpec::Layout::rectangular) {
        return "{layout: rectangular, m: " + std::to_string(e.m) + ", n: " + std::to_string(e.n) +
               ", law: " + emit_law(e.law) + "}";
    }
    std::string off;
    if (e.offdiag.mode == OffdiagLaw::Mode::diameter_set) {
        off = emit_law(e.offdiag.law);
    } else {
        off = "{w: [" + num(e.offdiag.w.real()) + ", " + num(e.offdiag.w.imag()) +
              "], re_part: " + emit_law(e.offdiag.re_part) + ", im_part: " + emit_law(e.offdiag.im_part) + "}";
    }
    return "{layout: selfadjoint, n: " + std::to_string(e.n) + ", diag: " + emit_law(e.diag) + ", offdiag: " + off +
           "}";
}

std::string emit_statistic(const StatisticSpec& s) {
    using K = StatisticSpec::Kind;
    switch (s.kind) {
        case K::opnorm: return "{kind: opnorm, p: " + num(s.p) + ", q: " + num(s.q) + "}";
        case K::schatten: return "{kind: schatten, p: " + num(s.p) + "}";
        case K::binomial_root: return "{kind: binomial_root, p: " + num(s.p) + "}";
        case K::lambda: return "{kind: lambda, k: " + std::to_string(s.k) + "}";
        case K::singular: return "{kind: singular, k: " + std::to_string(s.k) + "}";
        case K::kyfan: return "{kind: kyfan, k: " + std::to_string(s.k) + "}";
        case K::fk: return "{kind: fk, k: " + std::to_string(s.k) + "}";
        case K::gk: return "{kind: gk, k: " + std::to_string(s.k) + "}";
    }
    return "{}";
}

std::string emit_norm(const NormConfig& n) {
    if (n.family == "lq") return "{family: lq, q: " + num(n.q) + ", N: " + std::to_string(n.dim) + "}";
    if (n.family == "lorentz") {
        std::string s = "{family: lorentz, weights: " + num_seq(n.weights) + ", p: " + num(n.p);
        if (n.r) s += ", r: " + num(*n.r);
        return s + "}";
    }
    std::string s = "{family: orlicz, N: " + std::to_string(n.dim) + ", psi: " + n.psi;
    if (n.psi == "power") s += ", exponent: " + num(n.psi_p);
    if (n.psi == "scaled_power") s += ", c: " + num(n.psi_c) + ", exponent: " + num(n.psi_p);
    if (n.psi == "piecewise_linear") {
        s += ", knots: [";
        for (std::size_t i = 0; i < n.knots.size(); ++i) {
            s += (i ? ", [" : "[") + num(n.knots[i].first) + ", " + num(n.knots[i].second) + "]";
        }
        s += "]";
    }
    return s + "}";
}

std::string emit_envelope(const EnvelopeConfig& e) {
    std::string s = "{id: " + e.id;
    if (e.d) s += ", D: " + num(*e.d);
    if (e.p) s += ", p: " + num(*e.p);
    if (e.q) s += ", q: " + num(*e.q);
    if (e.lipschitz) s += ", L: " + num(*e.lipschitz);
    if (e.k) s += ", k: " + std::to_string(*e.k);
    if (e.m) s += ", m: " + std::to_string(*e.m);
    if (e.n) s += ", n: " + std::to_string(*e.n);
    if (e.simplified) s += std::string(", simplified: ") + (*e.simplified ? "true" : "false");
    if (e.scale) s += ", scale: " + num(*e.scale);
    if (e.norm) s += ", norm: " + emit_norm(*e.norm);
    return s + "}";
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    auto tie = [](const ExperimentConfig& c) {
        return std::tie(c.name, c.type, c.seed, c.trials, c.outputs, c.ensemble, c.statistic, c.envelope, c.t_grid,
                        c.entry_scale, c.median_range, c.law, c.n_list, c.p, c.q, c.tolerance, c.m, c.n, c.a, c.b,
                        c.k, c.norms, c.grid_points, c.subsets, c.instances, c.oracle_instances);
    };
    return tie(*this) == tie(o);
}

vecnorms::UnconditionalNorm NormConfig::build() const {
    using vecnorms::OrliczFunction;
    using vecnorms::UnconditionalNorm;
    if (family == "lq") return UnconditionalNorm::lq(q, dim);
    if (family == "lorentz") return UnconditionalNorm::lorentz(vecnorms::LorentzWeights(weights), p);
    if (family == "orlicz") {
        if (psi == "power") return UnconditionalNorm::orlicz(OrliczFunction::power(psi_p), dim);
        if (psi == "scaled_power") return UnconditionalNorm::orlicz(OrliczFunction::scaled_power(psi_c, psi_p), dim);
        if (psi == "piecewise_linear") return UnconditionalNorm::orlicz(OrliczFunction::piecewise_linear(knots), dim);
        throw InvalidParameter("unknown psi '" + psi + "'");
    }
    throw InvalidParameter("unknown norm family '" + family + "'");
}

std::string NormConfig::label() const {
    if (family == "lq") return "lq(q=" + num(q) + ",N=" + std::to_string(dim) + ")";
    if (family == "lorentz") return "lorentz(p=" + num(p) + ",N=" + std::to_string(weights.size()) + ")";
    std::string s = "orlicz(" + psi;
    if (psi == "power") s += ",exponent=" + num(psi_p);
    if (psi == "scaled_power") s += ",c=" + num(psi_c) + ",exponent=" + num(psi_p);
    if (psi == "piecewise_linear") s += ",knots=" + std::to_string(knots.size());
    return s + ",N=" + std::to_string(dim) + ")";
}

EnsembleSpec EnsembleConfig::build() const {
    if (layout == EnsembleSpec::Layout::rectangular) return EnsembleSpec::rectangular(m, n, law);
    return EnsembleSpec::selfadjoint(n, diag, offdiag);
}

std::vector<ExperimentConfig> parse_config_text(const std::string& text, const std::string& source) {
    std::vector<ExperimentConfig> out;
    std::vector<ConfigIssue> issues;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, {{e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg}});
    }
    if (!root || root.IsNull()) return out;
    try {
        require_map(root, "config file");
        check_keys(root, {"schema_version", "experiments"}, "config file");
        const auto sv = root["schema_version"];
        if (!sv) fail(root, "missing schema_version");
        if (as_u64(sv, "schema_version") != static_cast<std::uint64_t>(kSchemaVersion)) {
            fail(sv, "unsupported schema_version " + sv.Scalar() + " (expected " + std::to_string(kSchemaVersion) +
                         ")");
        }
        const auto exps = root["experiments"];
        if (!exps || exps.IsNull()) return out;
        if (!exps.IsSequence()) fail(exps, "'experiments' must be a list");
        for (const auto& e : exps) {
            try {
                out.push_back(parse_experiment(e));
            } catch (const Issue& i) {
                issues.push_back({i.line, i.message});
            }
        }
    } catch (const Issue& i) {
        issues.push_back({i.line, i.message});
    }
    auto more = semantic_issues(out);
    issues.insert(issues.end(), more.begin(), more.end());
    std::stable_sort(issues.begin(), issues.end(), [](const auto& a, const auto& b) { return a.line < b.line; });
    if (!issues.empty()) throw ConfigError(source, std::move(issues));
    return out;
}

std::vector<ExperimentConfig> parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string emit_config(const std::vector<ExperimentConfig>& configs) {
    std::ostringstream o;
    o << "schema_version: " << kSchemaVersion << "\n";
    if (configs.empty()) {
        o << "experiments: []\n";
        return o.str();
    }
    o << "experiments:\n";
    for (const auto& c : configs) {
        o << "  - name: " << c.name << "\n";
        o << "    type: " << c.type << "\n";
        if (c.seed) o << "    seed: " << *c.seed << "\n";
        if (type_keys().count(c.type) && uses_trials(c.type)) o << "    trials: " << c.trials << "\n";
        o << "    outputs: [";
        for (std::size_t i = 0; i < c.outputs.size(); ++i) o << (i ? ", " : "") << c.outputs[i];
        o << "]\n";
        if (c.ensemble) o << "    ensemble: " << emit_ensemble(*c.ensemble) << "\n";
        if (c.statistic) o << "    statistic: " << emit_statistic(*c.statistic) << "\n";
        if (c.envelope) o << "    envelope: " << emit_envelope(*c.envelope) << "\n";
        const auto& g = c.t_grid;
        if (!g.values.empty()) {
            o << "    t_grid: " << num_seq(g.values) << "\n";
        } else if (!g.is_default() || g.count != 40 || !g.geometric) {
            o << "    t_grid: {";
            std::string sep;
            if (g.min) o << "min: " << num(*g.min) << ", max: " << num(*g.max), sep = ", ";
            o << sep << "count: " << g.count << ", spacing: " << (g.geometric ? "geometric" : "linear") << "}\n";
        }
        if (c.entry_scale != 1.0) o << "    entry_scale: " << num(c.entry_scale) << "\n";
        if (c.median_range) {
            o << "    median_range: [" << num(c.median_range->first) << ", " << num(c.median_range->second) << "]\n";
        }
        if (c.law) o << "    law: " << emit_law(*c.law) << "\n";
        if (!c.n_list.empty()) o << "    " << (c.type == "talagrand" ? "dims" : "n_list") << ": " << int_seq(c.n_list) << "\n";
        if (c.p) o << "    p: " << num(*c.p) << "\n";
        if (c.q) o << "    q: " << num(*c.q) << "\n";
        if (c.tolerance) o << "    tolerance: " << num(*c.tolerance) << "\n";
        if (c.m) o << "    m: " << *c.m << "\n";
        if (c.n) o << "    n: " << *c.n << "\n";
        if (c.a) o << "    a: " << *c.a << "\n";
        if (c.b) o << "    b: " << *c.b << "\n";
        if (c.k) o << "    k: " << *c.k << "\n";
        if (!c.norms.empty()) {
            o << "    norms:\n";
            for (const auto& n : c.norms) o << "      - " << emit_norm(n) << "\n";
        }
        if (c.grid_points) o << "    grid_points: " << *c.grid_points << "\n";
        if (c.subsets) o << "    subsets: " << *c.subsets << "\n";
        if (c.instances) o << "    instances: " << *c.instances << "\n";
        if (c.oracle_instances) o << "    oracle_instances: " << *c.oracle_instances << "\n";
    }
    return o.str();
}

BoundEnvelope resolve_envelope(const ExperimentConfig& config) {
    if (!config.ensemble || !config.statistic || !config.envelope) {
        throw InvalidParameter("tail experiment needs ensemble, statistic and envelope");
    }
    const auto ens = config.ensemble->build();
    const auto& st = *config.statistic;
    const auto& ec = *config.envelope;
    const double s = std::abs(config.entry_scale);
    auto d = [&] { return ec.d ? *ec.d : ensembles::effective_diameter(ens) * s; };
    auto path_k = [&] {
        if (ec.k) return *ec.k;
        if (st.kind == StatisticSpec::Kind::lambda && st.k >= 1 && st.k <= ens.n) {
            return std::min(st.k, ens.n - st.k + 1);
        }
        return st.k;
    };
    const std::size_t rank = std::min(ens.m, ens.n);
    BoundEnvelope env;
    if (ec.id == "thm11") {
        env = BoundEnvelope::thm11(ec.p.value_or(st.p), ec.q.value_or(st.q), d());
    } else if (ec.id == "thm12_extreme") {
        env = BoundEnvelope::thm12_extreme(d());
    } else if (ec.id == "thm12_interior") {
        env = BoundEnvelope::thm12_interior(path_k(), d(), ec.simplified.value_or(false));
    } else if (ec.id == "cor22") {
        const auto lip = harness::entry_lipschitz(st, ens);
        env = BoundEnvelope::cor22(ec.q.value_or(lip ? lip->first : 2.0), ec.lipschitz.value_or(lip ? lip->second : 1.0),
                                   d());
    } else if (ec.id == "prop24") {
        if (!ec.norm) throw InvalidParameter("prop24 envelope needs a norm");
        auto norm = ec.norm->build();
        double l0 = 1.0;
        if (auto lip = harness::entry_lipschitz(st, ens)) l0 = lip->second;
        if (norm.kind() == vecnorms::UnconditionalNorm::Kind::lorentz) {
            l0 *= std::pow(norm.weights().values().back(), -1.0 / norm.exponent());
        }
        env = BoundEnvelope::prop24(std::move(norm), ec.lipschitz.value_or(l0), d());
    } else if (ec.id == "schatten_high") {
        env = BoundEnvelope::schatten_high(
            ec.p.value_or(st.kind == StatisticSpec::Kind::schatten ? st.p : vecnorms::kInf), d());
    } else if (ec.id == "schatten_low") {
        env = BoundEnvelope::schatten_low(ec.p.value_or(st.p), ec.n.value_or(rank), d());
    } else if (ec.id == "ui_norm") {
        env = BoundEnvelope::ui_norm(ec.n.value_or(rank), d());
    } else if (ec.id == "thm33_s1") {
        env = BoundEnvelope::thm33_s1(d());
    } else if (ec.id == "thm33_sk") {
        env = BoundEnvelope::thm33_sk(ec.k.value_or(st.k), d(), ec.simplified.value_or(false));
    } else if (ec.id == "mixed_range") {
        env = BoundEnvelope::mixed_range(ec.p.value_or(st.p), ec.q.value_or(st.q), ec.m.value_or(ens.m),
                                         ec.n.value_or(ens.n), d());
    } else if (ec.id == "gaussian") {
        if (ec.lipschitz) {
            env = BoundEnvelope::gaussian(*ec.lipschitz);
        } else {
            env = BoundEnvelope::gaussian(harness::gaussian_lipschitz(st, ens) * s);
        }
    } else if (ec.id == "akv") {
        env = BoundEnvelope::akv(path_k(), d());
    } else {
        throw InvalidParameter("unknown envelope id '" + ec.id + "'");
    }
    if (ec.scale) env.scale = *ec.scale;
    return env;
}

void validate_configs(const std::vector<ExperimentConfig>& configs, const std::string& source) {
    auto issues = semantic_issues(configs);
    if (!issues.empty()) throw ConfigError(source, std::move(issues));
}

// ------------------------------------------------------------------ reports

std::string tail_csv(const harness::TailReport& report) {
    std::string s = "t,empirical,empirical_upper99,envelope,verdict\n";
    for (const auto& p : report.points) {
        s += num(p.t) + "," + num(p.empirical) + "," + num(p.upper99) + "," + num(p.envelope) + "," +
             harness::to_string(p.verdict) + "\n";
    }
    return s;
}

std::string check_csv(const std::vector<harness::CheckRow>& rows) {
    std::string s = "check,value,bound,verdict\n";
    for (const auto& r : rows) {
        s += r.check + "," + num(r.value) + "," + num(r.bound) + "," + harness::to_string(r.verdict) + "\n";
    }
    return s;
}

namespace {

using json = nlohmann::ordered_json;

json median_json(const harness::MedianEstimate& m) {
    return json{{"estimate", m.median}, {"ci99_lo", m.lo}, {"ci99_hi", m.hi}};
}

json rows_json(const std::vector<harness::CheckRow>& rows) {
    json a = json::array();
    for (const auto& r : rows) {
        a.push_back(json{{"check", r.check}, {"value", r.value}, {"bound", r.bound},
                         {"verdict", harness::to_string(r.verdict)}});
    }
    return a;
}

std::string scaling_csv(const harness::ScalingReport& s) {
    std::string out = "n,mean,stddev,kurtosis\n";
    for (const auto& r : s.rows) {
        out += std::to_string(r.n) + "," + num(r.mean) + "," + num(r.stddev) + "," + num(r.kurtosis) + "\n";
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw InvalidInput("write failed for " + path.string());
}

}  // namespace

json report_json(const ExperimentResult& r) {
    json j;
    j["tool"] = "concmat";
    j["tool_version"] = kToolVersion;
    j["schema_version"] = kSchemaVersion;
    j["name"] = r.name;
    j["type"] = r.type;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    j["verdict"] = r.passed ? "pass" : "fail";
    if (r.tail) {
        const auto& t = *r.tail;
        json tj;
        tj["statistic"] = t.statistic;
        tj["envelope"] = t.envelope;
        tj["trials"] = t.trials;
        tj["seed"] = t.seed;
        tj["center_rule"] = t.center_rule;
        tj["center"] = t.center;
        tj["median"] = median_json(t.median);
        tj["mean"] = t.mean;
        tj["stddev"] = t.stddev;
        tj["resolution_floor"] = t.resolution_floor;
        if (t.upper_sum) tj["upper_sum_median"] = median_json(*t.upper_sum);
        if (t.lower_sum) tj["lower_sum_median"] = median_json(*t.lower_sum);
        json pts = json::array();
        for (const auto& p : t.points) {
            pts.push_back(json{{"t", p.t},
                               {"exceed", p.exceed},
                               {"empirical", p.empirical},
                               {"empirical_upper99", p.upper99},
                               {"envelope", p.envelope},
                               {"verdict", harness::to_string(p.verdict)}});
        }
        tj["points"] = std::move(pts);
        tj["checks"] = rows_json(t.checks);
        j["tail"] = std::move(tj);
    }
    if (r.scaling) {
        const auto& s = *r.scaling;
        json rows = json::array();
        for (const auto& row : s.rows) {
            rows.push_back(json{{"n", row.n}, {"mean", row.mean}, {"stddev", row.stddev}, {"kurtosis", row.kurtosis}});
        }
        j["scaling"] = json{{"p", s.p},
                            {"slope", s.slope},
                            {"slope_ci99", json::array({s.slope_lo, s.slope_hi})},
                            {"rows", std::move(rows)}};
    }
    if (r.checks) j["checks"] = rows_json(r.checks->rows);
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

std::string report_json_text(const ExperimentResult& result) { return report_json(result).dump(2) + "\n"; }

void emit_report(const ExperimentResult& r, const std::vector<std::string>& outputs, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create " + dir.string() + ": " + ec.message());
    const bool csv = std::find(outputs.begin(), outputs.end(), "csv") != outputs.end();
    const bool js = std::find(outputs.begin(), outputs.end(), "json") != outputs.end();
    if (js) write_file(dir / (r.name + ".json"), report_json_text(r));
    if (!csv) return;
    if (r.tail) {
        write_file(dir / (r.name + ".csv"), tail_csv(*r.tail));
        if (!r.tail->checks.empty()) write_file(dir / (r.name + ".checks.csv"), check_csv(r.tail->checks));
    } else if (r.checks) {
        write_file(dir / (r.name + ".csv"), check_csv(r.checks->rows));
    }
    if (r.scaling) write_file(dir / (r.name + ".scaling.csv"), scaling_csv(*r.scaling));
}

std::vector<std::filesystem::path> list_presets(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    std::error_code ec;
    for (auto it = std::filesystem::directory_iterator(dir, ec); !ec && it != std::filesystem::directory_iterator();
         it.increment(ec)) {
        if (it->is_regular_file() && it->path().extension() == ".cfg") out.push_back(it->path());
    }
    if (ec) throw InvalidInput("cannot list presets in " + dir.string() + ": " + ec.message());
    std::sort(out.begin(), out.end());
    return out;
}

// --------------------------------------------------------------------- run

namespace {

std::string detail(const ExperimentResult& r) {
    auto count = [](const auto& items, harness::Verdict v) {
        return std::count_if(items.begin(), items.end(), [v](const auto& x) { return x.verdict == v; });
    };
    using V = harness::Verdict;
    std::ostringstream o;
    if (r.tail) {
        const auto& pts = r.tail->points;
        o << "points " << count(pts, V::pass) << " pass/" << count(pts, V::vacuous) << " vacuous/"
          << count(pts, V::fail) << " fail";
        if (!r.tail->checks.empty()) {
            o << "; checks " << count(r.tail->checks, V::pass) << " pass/" << count(r.tail->checks, V::fail)
              << " fail";
        }
    } else if (r.checks) {
        const auto& rows = r.checks->rows;
        o << "rows " << count(rows, V::pass) << " pass/" << count(rows, V::fail) << " fail/"
          << count(rows, V::inconclusive) << " inconclusive";
        if (r.scaling) o << "; slope " << num(r.scaling->slope);
    }
    return o.str();
}

void print_summary(std::ostream& os, const std::vector<ExperimentResult>& results) {
    std::size_t w = 10;
    for (const auto& r : results) w = std::max(w, r.name.size());
    os << std::left << std::setw(static_cast<int>(w + 2)) << "experiment" << std::setw(17) << "type"
       << std::setw(9) << "verdict" << std::setw(10) << "seconds"
       << "detail\n";
    for (const auto& r : results) {
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2f", r.wall_seconds);
        os << std::left << std::setw(static_cast<int>(w + 2)) << r.name << std::setw(17) << r.type << std::setw(9)
           << (r.passed ? "pass" : "FAIL") << std::setw(10) << secs << detail(r) << "\n";
    }
    const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.passed; });
    os << results.size() << " experiment(s), " << failed << " failed\n";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void run_check(const ExperimentConfig& c, ExperimentResult& r, int jobs) {
    const std::uint64_t seed = c.seed.value_or(0);
    const auto t0 = std::chrono::steady_clock::now();
    if (c.type == "interior_center") {
        r.checks = harness::interior_center_consistency(c.ensemble->build(), *c.k, c.trials, seed, jobs);
    } else if (c.type == "clt") {
        r.scaling = *c.p < 2.0 ? harness::clt_counterexample(c.n_list, *c.p, c.trials, seed, c.tolerance.value_or(0.1))
                               : harness::binomial_root_control(c.n_list, *c.p, c.trials, seed);
        r.checks = r.scaling->checks;
    } else if (c.type == "sharpness") {
        r.checks = harness::sharpness_submatrix(*c.m, *c.n, *c.a, *c.b, c.q.value_or(2.0), c.trials, seed, jobs);
    } else if (c.type == "median_growth") {
        r.checks = harness::median_growth_check(*c.law, c.n_list, *c.p, *c.q, c.trials, seed, jobs);
    } else if (c.type == "talagrand") {
        r.checks = harness::talagrand_suite(c.n_list, c.subsets.value_or(200), c.instances.value_or(100), seed, jobs);
    } else if (c.type == "ke_bounds") {
        std::vector<harness::KeCase> cases;
        for (const auto& n : c.norms) cases.push_back({n.label(), n.build(), n.r});
        r.checks = harness::ke_bound_suite(cases, c.grid_points.value_or(50));
    } else if (c.type == "opnorm_check") {
        r.checks = harness::hoelder_suite(c.instances.value_or(500), c.oracle_instances.value_or(200), seed, jobs);
    }
    r.wall_seconds = seconds_since(t0);
    r.passed = r.checks ? r.checks->passed() : true;
}

}  // namespace

RunOutcome run(std::vector<ExperimentConfig> configs, const RunOptions& options) {
    if (options.seed_override) {
        for (auto& c : configs) {
            if (c.seed) c.seed = *options.seed_override;
        }
    }
    validate_configs(configs);

    RunOutcome out;
    out.results.resize(configs.size());
    for (std::size_t i = 0; i < configs.size(); ++i) {
        auto& r = out.results[i];
        r.name = configs[i].name;
        r.type = configs[i].type;
        r.seed = configs[i].seed;
        r.config_hash = fnv1a_hex(emit_config({configs[i]}));
    }

    // Tail experiments on the same sampled matrices share one pass.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        if (c.type != "tail") continue;
        const std::string key = emit_ensemble(*c.ensemble) + "|" + std::to_string(c.trials) + "|" +
                                std::to_string(*c.seed) + "|" + num(c.entry_scale);
        groups[key].push_back(i);
    }
    std::set<std::size_t> done;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (done.count(i)) continue;
        const auto& c = configs[i];
        if (c.type != "tail") {
            run_check(c, out.results[i], options.jobs);
            done.insert(i);
            continue;
        }
        const std::string key = emit_ensemble(*c.ensemble) + "|" + std::to_string(c.trials) + "|" +
                                std::to_string(*c.seed) + "|" + num(c.entry_scale);
        const auto& members = groups.at(key);
        auto exp = tail_experiment(c);
        exp.probes.clear();
        for (auto j : members) {
            const auto& m = configs[j];
            exp.probes.push_back({*m.statistic, resolve_envelope(m), m.t_grid, m.median_range});
        }
        auto reports = harness::run_tail_experiments(exp, options.jobs);
        for (std::size_t p = 0; p < members.size(); ++p) {
            auto& r = out.results[members[p]];
            reports[p].samples.clear();
            r.wall_seconds = reports[p].wall_seconds;
            r.passed = reports[p].passed();
            r.tail = std::move(reports[p]);
            done.insert(members[p]);
        }
    }

    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (options.out_dir) emit_report(out.results[i], configs[i].outputs, *options.out_dir);
        if (!out.results[i].passed) out.exit_code = 2;
    }
    if (options.summary) print_summary(*options.summary, out.results);
    return out;
}

}  // namespace concmat::cli
