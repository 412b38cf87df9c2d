#include "apfold/app/scenario.hpp"

#include "apfold/error.hpp"
#include "apfold/nonlinear.hpp"
#include "apfold/subsuper.hpp"
#include "apfold/verify.hpp"

#include <boost/crc.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#ifndef APFOLD_VERSION
#define APFOLD_VERSION "0.0.0"
#endif

namespace apfold::app {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// NaN and infinities become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io_error, "cannot write '" + path.string() + "'");
    return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
    out.close();
    if (!out) throw Error(ErrorKind::io_error, "write failed for '" + path.string() + "'");
}

/// Strips the "Kind: " prefix that Error adds to its message.
std::string bare_message(const Error& e) {
    const std::string w = e.what();
    const auto p = w.find(": ");
    return p == std::string::npos ? w : w.substr(p + 2);
}

class Run {
public:
    Run(const ScenarioConfig& config, fs::path dir) : config_(config), dir_(std::move(dir)) {
        manifest_.scenario_id = config.run.id;
        manifest_.command = config.run.command;
        manifest_.version = APFOLD_VERSION;
        manifest_.config_hash = crc32_of_text(serialize_config(config));
        manifest_.output_dir = dir_.string();
    }

    template <class F>
    auto stage(const std::string& name, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                record(name, start);
            } else {
                auto result = body();
                record(name, start);
                return result;
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "stage " + name + ": " + bare_message(e));
        }
    }

    fs::path file(const std::string& relative) {
        files_.push_back(relative);
        const fs::path p = dir_ / relative;
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        return p;
    }

    void write_json(const std::string& relative, const json& j) {
        const fs::path p = file(relative);
        auto out = open_out(p);
        out << j.dump(2) << "\n";
        close_out(out, p);
    }

    void write_profile(const std::string& stem, const RadialGrid& grid, std::span<const double> u, json meta) {
        write_profile_csv(grid, u, file(stem + ".csv"));
        write_json(stem + ".json", meta);
    }

    void set_status(int status) { manifest_.status = std::max(manifest_.status, status); }

    RunManifest finish() {
        std::sort(files_.begin(), files_.end());
        files_.erase(std::unique(files_.begin(), files_.end()), files_.end());
        for (const auto& f : files_) {
            const fs::path p = dir_ / f;
            manifest_.files.push_back({f, crc32_of_file(p), fs::file_size(p)});
        }
        json m;
        m["scenario_id"] = manifest_.scenario_id;
        m["command"] = manifest_.command;
        m["version"] = manifest_.version;
        m["config_hash"] = manifest_.config_hash;
        m["status"] = manifest_.status;
        m["files"] = json::array();
        for (const auto& f : manifest_.files) {
            m["files"].push_back({{"path", f.path}, {"crc32", f.crc32}, {"bytes", f.bytes}});
        }
        json timing = json::object();
        for (const auto& [name, secs] : manifest_.stage_seconds) timing[name] = secs;
        for (const auto& [name, j] : {std::pair<const char*, const json&>{"manifest.json", m},
                                      std::pair<const char*, const json&>{"timing.json", timing}}) {
            const fs::path p = dir_ / name;
            auto out = open_out(p);
            out << j.dump(2) << "\n";
            close_out(out, p);
        }
        return manifest_;
    }

    const ScenarioConfig& config() const { return config_; }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point start) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        manifest_.stage_seconds.emplace_back(name, secs);
    }

    const ScenarioConfig& config_;
    fs::path dir_;
    RunManifest manifest_;
    std::vector<std::string> files_;
};

json profile_meta(const SolutionProfile& p, const std::string& role) {
    return {{"role", role},
            {"t", p.t},
            {"converged", p.converged},
            {"iterations", p.iterations},
            {"residual_inf", num(p.residual_inf)},
            {"scaled_residual", num(p.scaled_residual)},
            {"e0_norm", num(p.e0_norm)},
            {"decay_coeff", num(p.decay_coeff)},
            {"stability_mu", num(p.stability_mu)}};
}

json membership_json(const MembershipReport& m) {
    return {{"member", m.member},
            {"strictly_ordered", m.strictly_ordered},
            {"min_gap_lower", num(m.min_gap_lower)},
            {"min_gap_upper", num(m.min_gap_upper)},
            {"tail_gap_lower", num(m.tail_gap_lower)},
            {"tail_gap_upper", num(m.tail_gap_upper)}};
}

NewtonOptions newton_options(const RunSettings& r) {
    NewtonOptions o;
    o.tol = r.newton_tol;
    o.maxit = r.newton_maxit;
    return o;
}

/// Minimal-branch start and the traced branch from t0 = -start_factor tau*.
struct BranchRun {
    double tau = 0.0;
    double t0 = 0.0;
    SolutionProfile start;
    Branch branch;
};

BranchRun compute_branch(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    BranchRun b;
    b.tau = run.stage("tau_star", [&] { return tau_star(inst).weighted; });
    b.t0 = -r.start_factor * std::max(b.tau, 1.0);
    b.start = run.stage("branch_start", [&] {
        SolutionProfile p = solve_from_subsolution(inst, b.t0, newton_options(r));
        if (!p.converged) {
            std::ostringstream msg;
            msg << "Newton from the subsolution failed at t = " << b.t0;
            throw Error(ErrorKind::no_convergence, msg.str());
        }
        return p;
    });
    b.branch = run.stage("branch", [&] {
        ContinuationOptions co;
        co.ds = r.ds;
        co.ds_max = r.ds_max;
        co.tol = r.continuation_tol;
        co.t_min = b.t0 - 1e-9 * (1.0 + std::abs(b.t0));
        co.t_max = b.tau + 1.0;
        return trace_branch(inst, b.t0, b.start.u, co);
    });
    return b;
}

Vector random_bumps(std::mt19937_64& rng, const RadialGrid& grid) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double R = grid.radius();
    Vector s(grid.size(), 0.0);
    const int bumps = 1 + static_cast<int>(unit(rng) * 3.0);
    for (int b = 0; b < bumps; ++b) {
        const double center = unit(rng) * R / 4.0;
        const double width = 0.2 + unit(rng) * 3.0;
        const double amp = unit(rng) * 10.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double z = (grid.r(i) - center) / width;
            s[i] += amp * std::exp(-z * z);
        }
    }
    return s;
}

void command_check(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    const ProblemConfig& pc = run.config().problem;
    json out;
    out["lambda1"] = inst.lambda1();
    out["lambda2"] = num(inst.eigen().lambda2);
    out["simple"] = inst.eigen().simple;
    out["brackets_lambda1"] = inst.brackets_lambda1();
    out["mu_lower"] = inst.nonlinearity().mu_lower;
    out["mu_upper"] = inst.nonlinearity().mu_upper;

    run.stage("slack", [&] {
        const SlackReport& s = inst.slack();
        out["slack"] = {{"theta", s.theta},
                        {"sup_lower", num(s.sup_lower)},
                        {"sup_upper", num(s.sup_upper)},
                        {"argsup_lower", s.argsup_lower},
                        {"argsup_upper", s.argsup_upper},
                        {"lower_at_boundary", s.lower_at_boundary},
                        {"upper_at_boundary", s.upper_at_boundary},
                        {"slope_pos", num(s.slope_pos)},
                        {"slope_neg", num(s.slope_neg)}};
        try {
            derive_slack_constants(inst.nonlinearity(), pc.nonlinearity.sample_lo, pc.nonlinearity.sample_hi,
                                   pc.nonlinearity.samples);
            out["slack"]["slope_error"] = nullptr;
        } catch (const Error& e) {
            out["slack"]["slope_error"] = e.what();
        }
        const SigmaGrowthReport g = check_sigma_growth(inst.nonlinearity(), inst.dim(), pc.nonlinearity.sample_hi);
        out["sigma_growth"] = {{"sigma", g.sigma},
                               {"max_ratio_tail", num(g.max_ratio_tail)},
                               {"max_ratio_tail_doubled", num(g.max_ratio_tail_doubled)},
                               {"compliant", g.compliant}};
    });

    run.stage("weight", [&] {
        const MomentReport m = check_P1(pc.weight, inst.grid());
        out["moments"] = {{"mass", m.mass},
                          {"second_moment", m.second_moment},
                          {"sup_P", m.sup_P},
                          {"tail_exponent", m.tail_exponent},
                          {"mass_window_change", m.mass_window_change},
                          {"second_moment_window_change", m.second_moment_window_change},
                          {"stable", m.stable}};
        const double R = inst.grid().radius();
        std::vector<double> probes;
        for (double f : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) probes.push_back(f * R);
        const PotentialBoundReport p = check_P2(pc.weight, inst.grid(), probes);
        out["potential"] = {{"constant_estimate", p.constant_estimate},
                            {"potential_at_origin", p.potential_at_origin},
                            {"probes", p.probes},
                            {"scaled_values", p.scaled_values},
                            {"tail_spread", p.tail_spread},
                            {"tail_bounded", p.tail_bounded}};
    });

    bool pass = true;
    std::mt19937_64 rng(r.seed);
    run.stage("comparison", [&] {
        const double mu = 0.9 * inst.lambda1();
        double worst = std::numeric_limits<double>::infinity();
        int failures = 0;
        for (int k = 0; k < r.comparison_samples; ++k) {
            const Vector s = random_bumps(rng, inst.grid());
            Vector rhs(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) rhs[i] = inst.mass()[i] * s[i];
            const ComparisonCheck c = check_comparison(inst.laplacian(), inst.mass(), mu, inst.lambda1(), rhs);
            if (!c.pass) ++failures;
            if (c.max_abs_u > 0.0) worst = std::min(worst, c.min_u / c.max_abs_u);
        }
        out["comparison"] = {{"mu", mu},
                             {"samples", r.comparison_samples},
                             {"failures", failures},
                             {"min_relative", num(worst)}};
        pass = pass && failures == 0;
    });

    const double tau = tau_star(inst).weighted;
    out["tau_star"] = tau;
    if (inst.brackets_lambda1() && r.nonexistence_starts > 0) {
        run.stage("nonexistence", [&] {
            const double t = tau + 1.0;
            const NonlinearSystem sys(inst, t);
            std::uniform_real_distribution<double> amp(-20.0, 20.0);
            int converged = 0;
            for (int k = 0; k < r.nonexistence_starts; ++k) {
                Vector u0 = random_bumps(rng, inst.grid());
                const double a = amp(rng);
                for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = a * inst.phi1()[i] - u0[i];
                if (newton_solve(sys, u0, newton_options(r)).converged) ++converged;
            }
            out["nonexistence"] = {{"t", t}, {"starts", r.nonexistence_starts}, {"converged", converged}};
            pass = pass && converged == 0;
        });
    }
    out["pass"] = pass;
    run.write_json("check.json", out);
    if (!pass) run.set_status(3);
}

void command_eigen(Run& run, const ProblemInstance& inst) {
    const EigenPair& e = inst.eigen();
    const RadialGrid& grid = inst.grid();
    const fs::path p = run.file("eigen.csv");
    auto out = open_out(p);
    out << "r,phi1,r^{N-2}phi1\n";
    const Vector w = grid.decay_weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << fmt(grid.r(i)) << "," << fmt(e.phi1[i]) << "," << fmt(w[i] * e.phi1[i]) << "\n";
    }
    close_out(out, p);
    json extrapolated = nullptr;
    const GridConfig& gc = run.config().problem.grid;
    if (gc.stretch == 1.0 && gc.nodes >= 7) {
        const ExtrapolatedEigenvalue x = run.stage("extrapolate", [&] {
            return extrapolate_lambda1(gc.dim, gc.radius, gc.nodes, run.config().problem.weight.evaluator(),
                                       gc.farfield, run.config().problem.eigen);
        });
        extrapolated = {{"value", x.extrapolated}, {"coarse_nodes", x.coarse_nodes}, {"coarse", x.coarse}};
    }
    run.write_json("eigen.json", {{"lambda1", e.lambda1},
                                  {"lambda1_extrapolated", extrapolated},
                                  {"C1", e.decay_C1},
                                  {"C2", e.decay_C2},
                                  {"normalization_residual", e.normalization_residual},
                                  {"plateau_ratio", e.plateau_ratio},
                                  {"lambda2", num(e.lambda2)},
                                  {"simple", e.simple},
                                  {"iterations", e.iterations},
                                  {"residual", e.residual},
                                  {"residual_weighted", e.residual_weighted}});
}

Vector start_vector(const RunSettings& r, const ProblemInstance& inst, double t) {
    if (!r.start_file.empty()) return read_profile_csv(inst.grid(), r.start_file);
    if (inst.nonlinearity().mu_lower < inst.lambda1()) return build_subsolution(inst, t);
    return Vector(inst.grid().size(), 0.0);
}

void command_solve(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    const double t = std::isnan(r.t) ? run.config().problem.forcing.t : r.t;
    json report;
    SolutionProfile prof;
    if (r.method == "monotone") {
        const Vector w = run.stage("subsolution", [&] { return build_subsolution(inst, t); });
        std::string source;
        Vector upper;
        run.stage("supersolution", [&] {
            try {
                const Supersolution sup = build_supersolution(inst, r.super_height, r.super_r1, r.super_r2);
                report["supersolution_t_threshold"] = sup.t_threshold;
                if (t <= sup.t_threshold) {
                    upper = sup.v;
                    source = "plateau";
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::ramp_failed) throw;
                report["supersolution_t_threshold"] = nullptr;
            }
            if (upper.empty()) {
                const SolutionProfile above = solve_from_subsolution(inst, t + r.monotone_gap, newton_options(r));
                if (!above.converged) {
                    std::ostringstream msg;
                    msg << "no supersolution at t = " << t << ": Newton failed at t + gap = " << t + r.monotone_gap;
                    throw Error(ErrorKind::no_convergence, msg.str());
                }
                upper = above.u;
                source = "solution_at_t_plus_gap";
            }
        });
        const OrderedInterval iv = OrderedInterval::make(w, upper);
        MonotoneOptions mo;
        mo.tol = r.monotone_tol;
        MonotoneTrace trace;
        prof = run.stage("monotone", [&] { return monotone_iterate(inst, t, iv, mo, &trace); });
        report["interval_margin"] = iv.ordering_margin;
        report["upper_source"] = source;
        report["steps"] = trace.steps;
        report["min_increment"] = num(trace.min_increment);
        report["shift"] = trace.shift;
    } else {
        const Vector u0 = run.stage("start", [&] { return start_vector(r, inst, t); });
        const NonlinearSystem sys(inst, t);
        NewtonResult res;
        if (r.method == "newton") {
            res = run.stage("newton", [&] { return newton_solve(sys, u0, newton_options(r)); });
        } else {
            PicardOptions po;
            po.tol = r.picard_tol;
            po.maxit = r.picard_maxit;
            res = run.stage("picard", [&] { return picard_iterate(sys, u0, po); });
        }
        prof = make_profile(inst, t, res.u, res.iterations, res.converged);
    }
    if (prof.converged) prof.stability_mu = stability_mu(inst, prof.u);
    report["t"] = t;
    report["method"] = r.method;
    report["converged"] = prof.converged;
    report["iterations"] = prof.iterations;
    report["residual_inf"] = num(prof.residual_inf);
    report["scaled_residual"] = num(prof.scaled_residual);
    report["e0_norm"] = num(prof.e0_norm);
    report["decay_coeff"] = num(prof.decay_coeff);
    report["stability_mu"] = num(prof.stability_mu);
    run.write_profile("solution", inst.grid(), prof.u, profile_meta(prof, r.method));
    run.write_json("report.json", report);
    if (!prof.converged) run.set_status(2);
}

json branch_summary(const BranchRun& b) {
    double t_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : b.branch.points) t_max = std::max(t_max, p.t);
    return {{"points", b.branch.points.size()},
            {"stop", std::string(to_string(b.branch.stop))},
            {"t_start", b.t0},
            {"t_max", t_max},
            {"tau_star", b.tau}};
}

void command_branch(Run& run, const ProblemInstance& inst) {
    const BranchRun b = compute_branch(run, inst);
    emit_bifurcation(b.branch, run.file("branch.csv"));
    run.write_json("branch.json", branch_summary(b));
    if (run.config().run.write_profiles) {
        for (std::size_t k = 0; k < b.branch.points.size(); ++k) {
            const BranchPoint& p = b.branch.points[k];
            char stem[32];
            std::snprintf(stem, sizeof stem, "profiles/point_%04zu", k);
            run.write_profile(stem, inst.grid(), p.u,
                              {{"role", "branch"},
                               {"t", p.t},
                               {"index", k},
                               {"arclength", p.arclength},
                               {"stability_mu", num(p.stability_mu)}});
        }
    }
}

void command_alpha(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    const BranchRun b = compute_branch(run, inst);
    emit_bifurcation(b.branch, run.file("branch.csv"));
    FoldResult fa = run.stage("detect_fold", [&] { return detect_fold(inst, b.branch); });
    const FoldResult fb = run.stage("bisect_alpha", [&] {
        BisectOptions bo;
        bo.dt_min = r.bisect_dt_min;
        bo.t_cap = b.tau + 1.0;
        return bisect_alpha(inst, b.t0, b.start.u, bo);
    });
    const double gap = std::abs(fa.alpha - fb.alpha);
    run.write_profile("fold", inst.grid(), fa.u_fold.u, profile_meta(fa.u_fold, "fold"));
    run.write_json("alpha.json", {{"alpha_arclength", fa.alpha},
                                  {"alpha_bisection", fb.alpha},
                                  {"agreement_gap", gap},
                                  {"tau_star", b.tau},
                                  {"below_tau_star", fa.alpha <= b.tau && fb.alpha <= b.tau},
                                  {"bisection_no_fold", fb.no_fold},
                                  {"bisection_attempts", fb.newton_attempts},
                                  {"polish_offset", fa.polish_offset},
                                  {"fold_u_at_0", fa.u_fold.u.front()},
                                  {"fold_stability_mu", num(fa.u_fold.stability_mu)},
                                  {"branch", branch_summary(b)}});
}

void command_two(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    const BranchRun b = compute_branch(run, inst);
    const FoldResult fa = run.stage("detect_fold", [&] { return detect_fold(inst, b.branch); });
    const double tq = std::isnan(r.t) ? fa.alpha - 0.5 * (1.0 + std::abs(fa.alpha)) : r.t;
    const TwoSolutions two = run.stage("two_solutions", [&] { return two_solutions(inst, tq, b.branch, fa); });
    run.write_profile("lower", inst.grid(), two.lower.u, profile_meta(two.lower, "lower"));
    run.write_profile("upper", inst.grid(), two.upper.u, profile_meta(two.upper, "upper"));
    run.write_json("two.json", {{"t", tq},
                                {"alpha", fa.alpha},
                                {"separation", two.separation},
                                {"lower", profile_meta(two.lower, "lower")},
                                {"upper", profile_meta(two.upper, "upper")},
                                {"interval_margin", two.interval.ordering_margin},
                                {"lower_membership", membership_json(two.lower_membership)},
                                {"upper_membership", membership_json(two.upper_membership)}});
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::io_error, "malformed JSON in '" + path.string() + "': " + e.what());
    }
}

bool is_profile_csv(const fs::path& path) {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    return header.rfind("r,u,", 0) == 0;
}

void command_verify(Run& run, const ProblemInstance& inst) {
    const RunSettings& r = run.config().run;
    if (r.solutions_dir.empty()) throw Error(ErrorKind::config_error, "[run] solutions_dir: required by verify");
    const fs::path dir = r.solutions_dir;
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io_error, "not a directory: '" + dir.string() + "'");
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv" && is_profile_csv(entry.path())) {
            csvs.push_back(entry.path());
        }
    }
    std::sort(csvs.begin(), csvs.end());
    json reports = json::array();
    int passed = 0;
    run.stage("verify", [&] {
        for (const auto& csv : csvs) {
            fs::path meta = csv;
            meta.replace_extension(".json");
            if (!fs::exists(meta)) throw Error(ErrorKind::io_error, "no metadata '" + meta.string() + "' for profile");
            const json m = read_json_file(meta);
            if (!m.contains("t") || !m["t"].is_number()) {
                throw Error(ErrorKind::io_error, "'" + meta.string() + "' has no numeric t");
            }
            const double t = m["t"].get<double>();
            const Vector u = read_profile_csv(inst.grid(), csv);
            const std::string id = fs::relative(csv, dir).generic_string();
            const VerificationReport rep = verify_solution(inst, t, u, r.id, id);
            json entries = json::array();
            for (const auto& e : rep.entries) {
                const char* kind = e.kind == CheckKind::upper_bound   ? "upper_bound"
                                   : e.kind == CheckKind::lower_bound ? "lower_bound"
                                                                       : "info";
                entries.push_back({{"name", e.name},
                                   {"value", num(e.value)},
                                   {"bound", num(e.bound)},
                                   {"tolerance", num(e.tolerance)},
                                   {"kind", kind},
                                   {"pass", e.pass}});
            }
            const bool ok = rep.pass();
            if (ok) ++passed;
            reports.push_back({{"instance_id", rep.instance_id},
                               {"solution_id", rep.solution_id},
                               {"t", t},
                               {"pass", ok},
                               {"entries", entries}});
        }
    });
    const int count = static_cast<int>(csvs.size());
    run.write_json("report.json",
                   {{"reports", reports}, {"summary", {{"count", count}, {"passed", passed}, {"failed", count - passed}}}});
    if (passed != count) run.set_status(3);
}

}  // namespace

fs::path resolve_output_dir(const RunSettings& run) {
    if (const char* env = std::getenv(output_dir_variable); env && *env) return env;
    return run.output_dir;
}

RunManifest run_scenario(const ScenarioConfig& config) { return run_scenario(config, resolve_output_dir(config.run)); }

RunManifest run_scenario(const ScenarioConfig& config, const fs::path& output_dir) {
    std::error_code ec;
    fs::create_directories(output_dir, ec);
    if (ec) throw Error(ErrorKind::io_error, "cannot create '" + output_dir.string() + "': " + ec.message());
    Run run(config, output_dir);
    const ProblemInstance inst = run.stage("instance", [&] { return ProblemInstance::create(config.problem); });
    const std::string& cmd = config.run.command;
    if (cmd == "check") {
        command_check(run, inst);
    } else if (cmd == "eigen") {
        command_eigen(run, inst);
    } else if (cmd == "solve") {
        command_solve(run, inst);
    } else if (cmd == "branch") {
        command_branch(run, inst);
    } else if (cmd == "alpha") {
        command_alpha(run, inst);
    } else if (cmd == "two") {
        command_two(run, inst);
    } else if (cmd == "verify") {
        command_verify(run, inst);
    } else {
        throw Error(ErrorKind::config_error, "[run] command: unknown command '" + cmd + "'");
    }
    return run.finish();
}

void emit_bifurcation(const Branch& branch, const fs::path& path) {
    if (branch.points.empty()) throw Error(ErrorKind::io_error, "empty branch");
    std::vector<std::size_t> order(branch.points.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return branch.points[a].arclength < branch.points[b].arclength;
    });
    auto out = open_out(path);
    out << "index,t,u_at_0,e0_norm,residual_inf,stability_mu,arclength\n";
    for (std::size_t k = 0; k < order.size(); ++k) {
        const BranchPoint& p = branch.points[order[k]];
        out << k << "," << fmt(p.t) << "," << fmt(p.u_at_0) << "," << fmt(p.e0_norm) << "," << fmt(p.scaled_residual)
            << "," << fmt(p.stability_mu) << "," << fmt(p.arclength) << "\n";
    }
    close_out(out, path);
}

void write_profile_csv(const RadialGrid& grid, std::span<const double> u, const fs::path& path) {
    auto out = open_out(path);
    out << "r,u,r^{N-2}u\n";
    const Vector w = grid.decay_weights();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << fmt(grid.r(i)) << "," << fmt(u[i]) << "," << fmt(w[i] * u[i]) << "\n";
    }
    close_out(out, path);
}

Vector read_profile_csv(const RadialGrid& grid, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("r,u", 0) != 0) throw Error(ErrorKind::io_error, "'" + path.string() + "' lacks an r,u header");
    std::vector<double> rs;
    std::vector<double> us;
    int number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        char* end = nullptr;
        const double r = std::strtod(line.c_str(), &end);
        if (*end != ',') throw Error(ErrorKind::io_error, path.string() + ":" + std::to_string(number) + ": bad row");
        const double u = std::strtod(end + 1, &end);
        if (*end != ',' && *end != '\0' && *end != '\r') {
            throw Error(ErrorKind::io_error, path.string() + ":" + std::to_string(number) + ": bad row");
        }
        if (!rs.empty() && !(r > rs.back())) {
            throw Error(ErrorKind::io_error, path.string() + ":" + std::to_string(number) + ": r not increasing");
        }
        rs.push_back(r);
        us.push_back(u);
    }
    if (rs.empty()) throw Error(ErrorKind::io_error, "'" + path.string() + "' has no rows");
    Vector out(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.r(i);
        const auto it = std::lower_bound(rs.begin(), rs.end(), x);
        if (it == rs.begin()) {
            out[i] = us.front();
        } else if (it == rs.end()) {
            out[i] = us.back();
        } else {
            const auto k = static_cast<std::size_t>(it - rs.begin());
            const double a = (x - rs[k - 1]) / (rs[k] - rs[k - 1]);
            out[i] = (1.0 - a) * us[k - 1] + a * us[k];
        }
    }
    return out;
}

std::uint32_t crc32_of_text(const std::string& text) {
    boost::crc_32_type crc;
    crc.process_bytes(text.data(), text.size());
    return crc.checksum();
}

std::uint32_t crc32_of_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open '" + path.string() + "'");
    boost::crc_32_type crc;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) crc.process_bytes(buf, static_cast<std::size_t>(in.gcount()));
    return crc.checksum();
}

int exit_code_for(const std::exception& e) noexcept {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        return err->kind() == ErrorKind::config_error || err->kind() == ErrorKind::io_error ? 1 : 2;
    }
    return 2;
}

std::vector<SweepItem> run_sweep(const std::vector<std::string>& config_paths, unsigned jobs) {
    std::vector<SweepItem> items(config_paths.size());
    std::vector<ScenarioConfig> configs(config_paths.size());
    for (std::size_t k = 0; k < config_paths.size(); ++k) {
        items[k].config_path = config_paths[k];
        try {
            configs[k] = load_config(config_paths[k]);
        } catch (const std::exception& e) {
            items[k].exit_code = exit_code_for(e);
            items[k].message = e.what();
        }
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < items.size(); k = next++) {
            if (items[k].exit_code != 0) continue;
            try {
                const fs::path dir = resolve_output_dir(configs[k].run) / configs[k].run.id;
                items[k].manifest = run_scenario(configs[k], dir);
                items[k].exit_code = items[k].manifest.status;
            } catch (const std::exception& e) {
                items[k].exit_code = exit_code_for(e);
                items[k].message = e.what();
            }
        }
    };
    const unsigned width = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(items.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < width; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return items;
}

}  // namespace apfold::app
