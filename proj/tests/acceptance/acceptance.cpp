// Runs every shipped preset and prints one PASS/FAIL line per acceptance
// criterion. Tolerances are pinned here, independent of the harness verdicts.

#include "concmat/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace concmat;
using harness::CheckRow;
using harness::TailReport;

namespace {

// Pinned tolerances.
constexpr double kOpnormRunLimit = 300.0;    // seconds
constexpr double kTalagrandRuntimeLimit = 600.0;
constexpr double kKeSlack = 1e-8;
constexpr double kKeEquality = 1e-9;
constexpr double kHoelderSlack = 1e-9;
constexpr double kOracleTolerance = 1e-5;
constexpr double kCltSlope = 0.5;
constexpr double kCltSlopeTolerance = 0.1;
constexpr double kSharpnessTarget = 1.0 / 16.0;
constexpr double kMedianLo = 8.0;  // sqrt(64)
constexpr double kMedianHi = 32.0;

struct Line {
    int id;
    std::string title;
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& note) {
        if (!cond) ok = false;
        notes.push_back(std::string(cond ? "" : "!! ") + note);
    }
};

std::string fmt(double v) { return cli::format_number(v); }

class Results {
public:
    explicit Results(const std::vector<cli::ExperimentResult>& r) {
        for (const auto& x : r) by_name_[x.name] = &x;
    }
    const cli::ExperimentResult* get(const std::string& name) const {
        auto it = by_name_.find(name);
        return it == by_name_.end() ? nullptr : it->second;
    }
    const std::map<std::string, const cli::ExperimentResult*>& all() const { return by_name_; }

private:
    std::map<std::string, const cli::ExperimentResult*> by_name_;
};

struct PointCount {
    std::size_t pass = 0, fail = 0, vacuous = 0;
};

// Recomputes the point verdicts: pass iff the 99% upper bound is at most the
// envelope, vacuous iff the envelope is at least 1.
PointCount count_points(const TailReport& t) {
    PointCount c;
    for (const auto& p : t.points) {
        if (p.envelope >= 1.0) {
            ++c.vacuous;
        } else if (p.upper99 <= p.envelope) {
            ++c.pass;
        } else {
            ++c.fail;
        }
    }
    return c;
}

const CheckRow* find_row(const std::vector<CheckRow>& rows, const std::string& prefix) {
    for (const auto& r : rows) {
        if (r.check.rfind(prefix, 0) == 0) return &r;
    }
    return nullptr;
}

void tail_dominated(Line& line, const Results& res, const std::string& name) {
    const auto* r = res.get(name);
    if (!r || !r->tail) {
        line.require(false, name + ": missing");
        return;
    }
    const auto c = count_points(*r->tail);
    line.require(c.fail == 0 && c.pass > 0, name + ": " + std::to_string(c.pass) + " pass, " +
                                                std::to_string(c.vacuous) + " vacuous, " + std::to_string(c.fail) +
                                                " fail under " + r->tail->envelope);
}

Line criterion1(const Results& res) {
    Line l{1, "operator norm tail under 4exp(-(t/2)^4/4), 32x32 Rademacher"};
    tail_dominated(l, res, "thm11-rademacher");
    if (const auto* r = res.get("thm11-rademacher")) {
        l.require(r->tail && r->tail->trials == 10000, "trials = 10000");
        l.require(r->wall_seconds < kOpnormRunLimit, "runtime " + fmt(r->wall_seconds) + " s < 300 s");
    }
    return l;
}

Line criterion2(const Results& res) {
    Line l{2, "r = 4 curve holds where it is strictly tighter than the r = 2 curve"};
    const auto* r4 = res.get("thm11-r4-window");
    const auto* r2 = res.get("thm11-r2-window");
    if (!r4 || !r2 || !r4->tail || !r2->tail) {
        l.require(false, "window runs missing");
        return l;
    }
    l.require(r4->tail->median.median == r2->tail->median.median && r4->tail->mean == r2->tail->mean,
              "both curves evaluated on the same sampled matrices");
    std::size_t in_window = 0;
    for (const auto& p : r4->tail->points) {
        const double loose = 4.0 * std::exp(-std::pow(p.t / 2.0, 2) / 4.0);
        const double tight = 4.0 * std::exp(-std::pow(p.t / 2.0, 4) / 4.0);
        if (!(tight < loose && loose < 1.0)) continue;
        ++in_window;
        l.require(std::abs(p.envelope - tight) <= 1e-12 * tight && p.upper99 <= tight,
                  "t=" + fmt(p.t) + ": upper99 " + fmt(p.upper99) + " <= " + fmt(tight) + " < " + fmt(loose));
    }
    l.require(in_window > 0, std::to_string(in_window) + " grid points in the window");
    return l;
}

Line criterion3(const Results& res) {
    Line l{3, "extreme eigenvalues of 64x64 symmetric Rademacher under 4exp(-t^2/32)"};
    tail_dominated(l, res, "thm12-lambda1");
    tail_dominated(l, res, "thm12-lambda64");
    if (const auto* r = res.get("thm12-lambda1"); r && r->tail) {
        const double m = r->tail->median.median;
        l.require(m >= kMedianLo && m <= kMedianHi, "lambda_1 median " + fmt(m) + " in [8, 32]");
    }
    return l;
}

Line criterion4(const Results& res) {
    Line l{4, "interior eigenvalues k = 2, 5, 16 under the interior curves; center gap bounded"};
    for (int k : {2, 5, 16}) {
        for (const char* form : {"simplified", "exact"}) {
            const std::string name = "thm12-interior-k" + std::to_string(k) + "-" + form;
            tail_dominated(l, res, name);
            const auto* r = res.get(name);
            if (!r || !r->tail) continue;
            const auto* gap = find_row(r->tail->checks, "interior_center_gap");
            l.require(gap && gap->value <= gap->bound,
                      name + ": |center - median| " + (gap ? fmt(gap->value) + " <= " + fmt(gap->bound) : "missing"));
            // The bound itself, recomputed.
            if (gap) {
                const double kk = k;
                const double fixed = 2.0 * std::sqrt(6.0 * std::log(2.0)) * (std::sqrt(kk) + std::sqrt(kk - 1.0)) * 2.0;
                l.require(gap->bound >= fixed, name + ": bound includes " + fmt(fixed));
            }
        }
    }
    return l;
}

Line criterion5(const Results& res) {
    Line l{5, "singular values of 48x32 Rademacher: s1 under 4exp(-t^2/16), s2 and s3 under the k curve"};
    tail_dominated(l, res, "thm33-s1");
    for (int k : {2, 3}) {
        for (const char* form : {"simplified", "exact"}) {
            tail_dominated(l, res, "thm33-s" + std::to_string(k) + "-" + form);
        }
    }
    return l;
}

Line criterion6(const Results& res) {
    Line l{6, "Talagrand inequality exact on {0,1}^N, N = 6, 8, 10; K_E(dist) <= f_c"};
    const auto* r = res.get("talagrand");
    if (!r || !r->checks) {
        l.require(false, "talagrand missing");
        return l;
    }
    for (int n : {6, 8, 10}) {
        const auto* row = find_row(r->checks->rows, "isoperimetry_failures(N=" + std::to_string(n) + ")");
        l.require(row && row->value == 0.0, "N=" + std::to_string(n) + ": " + (row ? fmt(row->value) : "?") +
                                                " failures over 200 subsets");
    }
    const auto* dist = find_row(r->checks->rows, "ke_dist_failures");
    l.require(dist && dist->value == 0.0, "K_E(dist) failures: " + (dist ? fmt(dist->value) : "?"));
    l.require(r->wall_seconds < kTalagrandRuntimeLimit, "runtime " + fmt(r->wall_seconds) + " s < 600 s");
    return l;
}

Line criterion7(const Results& res) {
    Line l{7, "K_E numeric >= closed-form bound - 1e-8; equality sqrt k at t = k^(1/q)"};
    const auto* r = res.get("ke-bounds");
    if (!r || !r->checks) {
        l.require(false, "ke-bounds missing");
        return l;
    }
    std::size_t lq = 0, lor = 0, orl = 0, eq = 0;
    double worst = vecnorms::kInf, worst_eq = 0.0;
    bool ok = true;
    for (const auto& row : r->checks->rows) {
        if (row.check.rfind("numeric_minus_bound[", 0) == 0) {
            worst = std::min(worst, row.value);
            ok = ok && row.value >= -kKeSlack;
            if (row.check.find("[lq") != std::string::npos) ++lq;
            if (row.check.find("[lorentz") != std::string::npos) ++lor;
            if (row.check.find("[orlicz") != std::string::npos) ++orl;
        } else if (row.check.rfind("equality_at_k^(1/q)[", 0) == 0) {
            ++eq;
            worst_eq = std::max(worst_eq, row.value);
            ok = ok && row.value <= kKeEquality;
        }
    }
    l.require(ok, "min(numeric - bound) = " + fmt(worst) + ", max equality error = " + fmt(worst_eq));
    l.require(lq == 12 && lor == 3 && orl == 3 && eq == 12,
              "cases: " + std::to_string(lq) + " l_q, " + std::to_string(lor) + " Lorentz, " + std::to_string(orl) +
                  " Orlicz, " + std::to_string(eq) + " equality");
    return l;
}

Line criterion8(const Results& res) {
    Line l{8, "operator norm <= ||vec(A)||_r + 1e-9; solver within 1e-5 of grid oracle"};
    const auto* r = res.get("opnorm-holder");
    if (!r || !r->checks) {
        l.require(false, "opnorm-holder missing");
        return l;
    }
    const auto* vec = find_row(r->checks->rows, "opnorm_minus_vec_bound_max");
    const auto* orc = find_row(r->checks->rows, "oracle_abs_diff_max");
    const auto* n1 = find_row(r->checks->rows, "random_matrices");
    const auto* n2 = find_row(r->checks->rows, "oracle_instances");
    l.require(vec && vec->value <= kHoelderSlack, "max(opnorm - vec bound) = " + (vec ? fmt(vec->value) : "?"));
    l.require(orc && orc->value <= kOracleTolerance, "max |solver - oracle| = " + (orc ? fmt(orc->value) : "?"));
    l.require(n1 && n1->value == 500.0 && n2 && n2->value == 200.0, "500 random matrices, 200 oracle instances");
    return l;
}

Line criterion9(const Results& res) {
    Line l{9, "p = 1 spread slope 0.5 +- 0.1; q = 3 spread bounded with no growth"};
    const auto* p1 = res.get("clt-p1");
    const auto* q3 = res.get("clt-q3");
    if (!p1 || !q3 || !p1->scaling || !q3->scaling) {
        l.require(false, "clt runs missing");
        return l;
    }
    l.require(std::abs(p1->scaling->slope - kCltSlope) <= kCltSlopeTolerance,
              "p=1 slope " + fmt(p1->scaling->slope));
    std::vector<std::size_t> ns;
    for (const auto& row : p1->scaling->rows) ns.push_back(row.n);
    l.require(ns == std::vector<std::size_t>{64, 256, 1024, 4096}, "n in {64, 256, 1024, 4096}");
    const double q = 3.0;
    const double bound = std::sqrt(std::pow(4.0, 1.0 + 2.0 / q) * std::tgamma(1.0 + 2.0 / q));
    double worst = 0.0;
    for (const auto& row : q3->scaling->rows) worst = std::max(worst, row.stddev);
    l.require(worst <= bound, "q=3 max stddev " + fmt(worst) + " <= " + fmt(bound));
    l.require(q3->scaling->slope_lo <= 0.0, "q=3 slope 99% interval [" + fmt(q3->scaling->slope_lo) + ", " +
                                                fmt(q3->scaling->slope_hi) + "] reaches 0 or below");
    return l;
}

Line criterion10(const Results& res) {
    Line l{10, "|mean - median| <= L D 4^(1+1/q) Gamma(1+1/q) + CI slack for every Lipschitz-scope run"};
    std::size_t seen = 0;
    for (const auto& [name, r] : res.all()) {
        if (!r->tail) continue;
        const auto* row = find_row(r->tail->checks, "mean_median_gap");
        if (!row) continue;
        ++seen;
        l.require(row->value <= row->bound, name + ": " + fmt(row->value) + " <= " + fmt(row->bound));
    }
    for (const char* must : {"thm11-rademacher", "binomial-root-l3", "schatten4", "thm33-s1", "thm12-lambda1"}) {
        const auto* r = res.get(must);
        l.require(r && r->tail && find_row(r->tail->checks, "mean_median_gap"), std::string(must) + " has the check");
    }
    l.require(seen > 0, std::to_string(seen) + " runs checked");
    return l;
}

Line criterion11(const Results& res) {
    Line l{11, "all-ones 2x2 block frequency in 8x8 Rademacher >= 2^-4 - CI slack"};
    const auto* r = res.get("sharpness");
    if (!r || !r->checks) {
        l.require(false, "sharpness missing");
        return l;
    }
    const auto* freq = find_row(r->checks->rows, "all_ones_block_frequency");
    const auto* up = find_row(r->checks->rows, "all_ones_block_upper99");
    l.require(freq && up && up->value >= kSharpnessTarget,
              "frequency " + (freq ? fmt(freq->value) : "?") + ", 99% upper " + (up ? fmt(up->value) : "?") +
                  " >= 1/16");
    return l;
}

std::string strip_timing(const cli::ExperimentResult& r) {
    auto j = cli::report_json(r);
    j.erase("wall_seconds");
    return j.dump(2);
}

int jobs_from_env() {
    if (const char* env = std::getenv("CONCMAT_JOBS"); env && *env) {
        const int j = std::atoi(env);
        if (j > 0) return j;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path preset_dir = argc > 1 ? fs::path(argv[1]) : fs::path(CONCMAT_PRESET_DIR);
    std::vector<cli::ExperimentConfig> configs;
    try {
        for (const auto& p : cli::list_presets(preset_dir)) {
            auto c = cli::parse_config(p);
            configs.insert(configs.end(), c.begin(), c.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    cli::RunOptions opts;
    opts.jobs = jobs_from_env();
    opts.summary = &std::cout;
    cli::RunOutcome first, second;
    try {
        first = cli::run(configs, opts);
        opts.summary = nullptr;
        second = cli::run(configs, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const Results res(first.results);
    std::vector<Line> lines{criterion1(res), criterion2(res), criterion3(res),  criterion4(res),
                            criterion5(res), criterion6(res), criterion7(res),  criterion8(res),
                            criterion9(res), criterion10(res), criterion11(res)};

    Line det{12, "rerunning the preset suite reproduces byte-identical JSON apart from timing"};
    std::size_t same = 0;
    for (std::size_t i = 0; i < first.results.size(); ++i) {
        if (strip_timing(first.results[i]) == strip_timing(second.results[i])) {
            ++same;
        } else {
            det.require(false, first.results[i].name + " differs");
        }
    }
    det.require(same == first.results.size() && same > 0,
                std::to_string(same) + "/" + std::to_string(first.results.size()) + " reports identical");
    lines.push_back(det);

    std::cout << "\n";
    bool all = true;
    for (const auto& l : lines) {
        all = all && l.ok;
        std::cout << "criterion " << l.id << ": " << (l.ok ? "PASS" : "FAIL") << "  " << l.title << "\n";
        for (const auto& n : l.notes) std::cout << "    " << n << "\n";
    }
    std::cout << (all ? "all criteria pass" : "some criteria fail") << "\n";
    return all ? 0 : 1;
}
