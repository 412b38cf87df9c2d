#include "apfold/problem.hpp"

#include "apfold/error.hpp"
#include "apfold/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace apfold {

namespace {

double interpolate(std::span<const double> xs, std::span<const double> ys, double x) {
    if (x <= xs.front()) return ys.front();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.end()) return ys.back();
    const auto k = static_cast<std::size_t>(it - xs.begin());
    const double a = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return (1.0 - a) * ys[k - 1] + a * ys[k];
}

double log1p_exp(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

double logistic(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

SlackReport compute_slack(const NonlinearitySpec& g, double lo, double hi, std::size_t samples) {
    SlackReport rep;
    rep.sup_lower = -std::numeric_limits<double>::infinity();
    rep.sup_upper = -std::numeric_limits<double>::infinity();
    std::size_t arg_lower = 0;
    std::size_t arg_upper = 0;
    const double step = (hi - lo) / static_cast<double>(samples - 1);
    for (std::size_t k = 0; k < samples; ++k) {
        const double s = (k + 1 == samples) ? hi : lo + step * static_cast<double>(k);
        const double gs = g.g(s);
        const double a = g.mu_lower * s - gs;
        const double b = g.mu_upper * s - gs;
        if (a > rep.sup_lower) {
            rep.sup_lower = a;
            arg_lower = k;
        }
        if (b > rep.sup_upper) {
            rep.sup_upper = b;
            arg_upper = k;
        }
    }
    rep.argsup_lower = lo + step * static_cast<double>(arg_lower);
    rep.argsup_upper = lo + step * static_cast<double>(arg_upper);
    rep.lower_at_boundary = arg_lower == 0 || arg_lower + 1 == samples;
    rep.upper_at_boundary = arg_upper == 0 || arg_upper + 1 == samples;
    rep.theta = std::max({0.0, rep.sup_lower, rep.sup_upper});
    rep.slope_pos = (g.g(hi) - g.g(0.75 * hi)) / (0.25 * hi);
    rep.slope_neg = (g.g(lo) - g.g(0.75 * lo)) / (0.25 * lo);
    return rep;
}

void require_slopes(const NonlinearitySpec& g, const SlackReport& rep) {
    std::ostringstream msg;
    if (!(g.mu_lower < g.mu_upper)) {
        msg << "mu_lower = " << g.mu_lower << " is not below mu_upper = " << g.mu_upper;
    } else if (rep.slope_pos < g.mu_upper * (1.0 - 1e-6)) {
        msg << "secant slope " << rep.slope_pos << " at +infinity is below mu_upper = " << g.mu_upper;
    } else if (rep.slope_neg > g.mu_lower * (1.0 + 1e-6)) {
        msg << "secant slope " << rep.slope_neg << " at -infinity exceeds mu_lower = " << g.mu_lower;
    } else {
        return;
    }
    throw Error(ErrorKind::slope_violation, msg.str());
}

/// -d ln P / d ln r at r.
double local_exponent(const WeightSpec& weight, double r) {
    const double d = 1e-3;
    const double a = weight(r * (1.0 - d));
    const double b = weight(r * (1.0 + d));
    return -(std::log(b) - std::log(a)) / std::log((1.0 + d) / (1.0 - d));
}

/// sigma int_0^{r_j} r^{N-1+m} P dr on dual cells clipped at node j.
double clipped_moment(const RadialGrid& grid, std::span<const double> p, int m, std::size_t j) {
    const auto vol = grid.volumes();
    const auto N = static_cast<double>(grid.dim());
    double s = 0.0;
    for (std::size_t i = 0; i < j; ++i) s += vol[i] * std::pow(grid.r(i), m) * p[i];
    const double inner = j > 0 ? 0.5 * (grid.r(j - 1) + grid.r(j)) : 0.0;
    const double part = grid.sphere_area() * (std::pow(grid.r(j), N) - std::pow(inner, N)) / N;
    return s + part * std::pow(grid.r(j), m) * p[j];
}

}  // namespace

double WeightSpec::operator()(double r) const {
    switch (preset) {
        case WeightPreset::rational_decay: return std::pow(1.0 + r * r, -params.at(0));
        case WeightPreset::exponential: return std::exp(-params.at(0) * r);
        case WeightPreset::constant: return params.at(0);
        case WeightPreset::table:
            if (r <= radii.back()) return interpolate(radii, values, r);
            return values.back() * std::pow(radii.back() / r, params.at(0));
    }
    return 0.0;
}

std::function<double(double)> WeightSpec::evaluator() const {
    return [w = *this](double r) { return w(r); };
}

WeightSpec WeightSpec::rational_decay(double power) { return {WeightPreset::rational_decay, {power}, {}, {}}; }
WeightSpec WeightSpec::exponential(double rate) { return {WeightPreset::exponential, {rate}, {}, {}}; }
WeightSpec WeightSpec::constant(double value) { return {WeightPreset::constant, {value}, {}, {}}; }

WeightSpec WeightSpec::table(std::vector<double> radii, std::vector<double> values, double tail_power) {
    if (radii.size() < 2 || radii.size() != values.size() || radii.front() != 0.0 ||
        std::adjacent_find(radii.begin(), radii.end(), std::greater_equal<>()) != radii.end()) {
        throw Error(ErrorKind::config_error,
                    "weight table needs >= 2 knots with equal lengths, increasing radii starting at 0");
    }
    return {WeightPreset::table, {tail_power}, std::move(radii), std::move(values)};
}

double NonlinearitySpec::g(double s) const {
    switch (preset) {
        case NonlinearityPreset::softplus: return mu_lower * s + (mu_upper - mu_lower) * log1p_exp(s) - offset;
        case NonlinearityPreset::linear: return mu_lower * s + offset;
        case NonlinearityPreset::zero: return 0.0;
    }
    return 0.0;
}

double NonlinearitySpec::g_prime(double s) const {
    switch (preset) {
        case NonlinearityPreset::softplus: return mu_lower + (mu_upper - mu_lower) * logistic(s);
        case NonlinearityPreset::linear: return mu_lower;
        case NonlinearityPreset::zero: return 0.0;
    }
    return 0.0;
}

bool NonlinearitySpec::monotone() const {
    switch (preset) {
        case NonlinearityPreset::softplus: return mu_lower >= 0.0 && mu_upper >= 0.0;
        case NonlinearityPreset::linear: return mu_lower >= 0.0;
        case NonlinearityPreset::zero: return true;
    }
    return false;
}

NonlinearitySpec NonlinearitySpec::softplus(double mu_lower, double mu_upper, double offset) {
    return {NonlinearityPreset::softplus, mu_lower, mu_upper, offset};
}

NonlinearitySpec NonlinearitySpec::linear(double slope, double intercept) {
    return {NonlinearityPreset::linear, slope, slope, intercept};
}

NonlinearitySpec NonlinearitySpec::zero() { return {NonlinearityPreset::zero, 0.0, 0.0, 0.0}; }

NonlinearitySpec NonlinearityConfig::resolve(double lambda1) const {
    switch (preset) {
        case NonlinearityPreset::softplus:
            return NonlinearitySpec::softplus(mu_lower.resolve(lambda1), mu_upper.resolve(lambda1), offset);
        case NonlinearityPreset::linear: return NonlinearitySpec::linear(mu_lower.resolve(lambda1), offset);
        case NonlinearityPreset::zero: return NonlinearitySpec::zero();
    }
    return NonlinearitySpec::zero();
}

double ForcingSpec::raw(double r) const {
    switch (profile) {
        case ForcingProfile::zero: return 0.0;
        case ForcingProfile::gaussian: return amplitude * std::exp(-(r / width) * (r / width));
        case ForcingProfile::table: return r <= radii.back() ? interpolate(radii, values, r) : 0.0;
    }
    return 0.0;
}

SlackReport derive_slack_constants(const NonlinearitySpec& g, double lo, double hi, std::size_t samples) {
    if (!(lo <= -50.0 && hi >= 50.0) || samples < 3) {
        std::ostringstream msg;
        msg << "slack sampling range [" << lo << ", " << hi << "] must cover [-50, 50] with >= 3 samples";
        throw Error(ErrorKind::config_error, msg.str());
    }
    SlackReport rep = compute_slack(g, lo, hi, samples);
    require_slopes(g, rep);
    return rep;
}

SigmaGrowthReport check_sigma_growth(const NonlinearitySpec& g, int dim, double hi) {
    SigmaGrowthReport rep;
    rep.sigma = static_cast<double>(dim) / static_cast<double>(dim - 2);
    constexpr int k_samples = 1001;
    bool nonincreasing = true;
    auto scan = [&](double top, bool track) {
        double m = -std::numeric_limits<double>::infinity();
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 0; k < k_samples; ++k) {
            const double s = top / 10.0 + (top - top / 10.0) * k / (k_samples - 1);
            const double ratio = g.g(s) / std::pow(s, rep.sigma);
            m = std::max(m, ratio);
            if (track && std::abs(ratio) > std::abs(prev) * (1.0 + 1e-12)) nonincreasing = false;
            prev = ratio;
        }
        return m;
    };
    rep.max_ratio_tail = scan(hi, true);
    rep.max_ratio_tail_doubled = scan(2.0 * hi, false);
    rep.compliant = nonincreasing && std::abs(rep.max_ratio_tail_doubled) < std::abs(rep.max_ratio_tail);
    return rep;
}

MomentReport check_P1(const WeightSpec& weight, const RadialGrid& grid) {
    const std::size_t n = grid.size();
    Vector p(n);
    MomentReport rep;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = weight(grid.r(i));
        if (!(p[i] > 0.0) || !std::isfinite(p[i])) {
            std::ostringstream msg;
            msg << "P(" << grid.r(i) << ") = " << p[i];
            throw Error(ErrorKind::non_positive_weight, msg.str());
        }
        rep.sup_P = std::max(rep.sup_P, p[i]);
    }

    const auto N = static_cast<double>(grid.dim());
    const double sigma = grid.sphere_area();
    auto windowed = [&](std::size_t j, int m, double* tail_out, double* k_out) {
        const double rj = grid.r(j);
        const double k = local_exponent(weight, rj);
        if (!(k > N + m)) {
            std::ostringstream msg;
            msg << "decay exponent " << k << " at r = " << rj << " does not exceed N + " << m;
            throw Error(ErrorKind::divergent_moment, msg.str());
        }
        const double tail = sigma * p[j] * std::pow(rj, N + m) / (k - N - m);
        if (tail_out) *tail_out = tail;
        if (k_out) *k_out = k;
        return clipped_moment(grid, p, m, j) + tail;
    };

    const std::size_t half = grid.first_at_or_above(0.5 * grid.radius());
    rep.mass = windowed(n - 1, 0, &rep.mass_tail, &rep.tail_exponent);
    rep.second_moment = windowed(n - 1, 2, &rep.second_moment_tail, nullptr);
    const double mass_half = windowed(half, 0, nullptr, nullptr);
    const double second_half = windowed(half, 2, nullptr, nullptr);
    rep.mass_window_change = std::abs(rep.mass - mass_half) / std::abs(rep.mass);
    rep.second_moment_window_change = std::abs(rep.second_moment - second_half) / std::abs(rep.second_moment);
    rep.stable = rep.mass_window_change < 0.01 && rep.second_moment_window_change < 0.01;
    if (!rep.stable) {
        std::ostringstream msg;
        msg << "moments change by " << rep.mass_window_change << " and " << rep.second_moment_window_change
            << " between the [0, R/2] and [0, R] windows";
        throw Error(ErrorKind::divergent_moment, msg.str());
    }
    return rep;
}

PotentialBoundReport check_P2(const WeightSpec& weight, const RadialGrid& grid, std::span<const double> probes) {
    PotentialBoundReport rep;
    if (probes.empty()) throw Error(ErrorKind::probe_out_of_range, "no probe radii given");
    for (double r : probes) {
        if (!(r > 0.0 && r <= grid.radius())) {
            std::ostringstream msg;
            msg << "probe radius " << r << " outside (0, " << grid.radius() << "]";
            throw Error(ErrorKind::probe_out_of_range, msg.str());
        }
    }
    const std::size_t n = grid.size();
    Vector rho(n);
    for (std::size_t i = 0; i < n; ++i) rho[i] = weight(grid.r(i));
    Vector I = riesz_potential(grid, rho);
    const double scale = static_cast<double>(grid.dim() - 2) * grid.sphere_area();
    for (double& x : I) x *= scale;

    rep.potential_at_origin = I[0];
    const double p = static_cast<double>(grid.dim() - 2);
    const double r_max = *std::max_element(probes.begin(), probes.end());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double r : probes) {
        const double v = std::pow(r, p) * interpolate(grid.nodes(), I, r);
        rep.probes.push_back(r);
        rep.scaled_values.push_back(v);
        rep.constant_estimate = std::max(rep.constant_estimate, v);
        if (r >= r_max / 10.0) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    rep.tail_spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
    rep.tail_bounded = std::isfinite(rep.constant_estimate) && rep.tail_spread <= 0.05;
    return rep;
}

ProblemInstance::ProblemInstance(const ProblemConfig& config, RadialGrid grid)
    : config_(config), grid_(std::move(grid)) {}

ProblemInstance ProblemInstance::create(const ProblemConfig& config) {
    const GridConfig& gc = config.grid;
    ProblemInstance inst(config, build_grid(gc.dim, gc.radius, gc.nodes, gc.stretch));
    const RadialGrid& grid = inst.grid_;
    inst.laplacian_ = assemble_laplacian(grid, gc.farfield);
    const auto weight = config.weight.evaluator();
    inst.mass_ = assemble_weight_mass(grid, weight, gc.farfield);
    inst.weight_values_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) inst.weight_values_[i] = weight(grid.r(i));

    inst.eigen_ = first_eigenpair(grid, inst.laplacian_, inst.mass_, config.eigen);
    inst.nonlinearity_ = config.nonlinearity.resolve(inst.eigen_.lambda1);
    const NonlinearityConfig& nc = config.nonlinearity;
    inst.slack_ = compute_slack(inst.nonlinearity_, nc.sample_lo, nc.sample_hi, std::max<std::size_t>(nc.samples, 3));

    Vector raw(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) raw[i] = config.forcing.raw(grid.r(i));
    Decomposition d = decompose_forcing(raw, inst.eigen_, grid, inst.mass_);
    inst.f1_ = std::move(d.f1);
    inst.f1_projection_ = d.t;
    return inst;
}

ProblemConfig canonical_config(std::size_t nodes, double radius, FarField farfield) {
    ProblemConfig c;
    c.weight = WeightSpec::rational_decay(3.0);
    c.nonlinearity = NonlinearityConfig{};
    c.forcing = ForcingSpec{};
    c.grid = GridConfig{3, radius, nodes, 1.0, farfield};
    return c;
}

Decomposition decompose_forcing(std::span<const double> f, const EigenPair& eigen, const RadialGrid& grid,
                                std::span<const double> mass) {
    const double nrm = weighted_inner(grid, mass, eigen.phi1, eigen.phi1);
    if (std::abs(nrm - 1.0) > 1e-8) {
        std::ostringstream msg;
        msg << "int P phi1^2 dx = " << nrm;
        throw Error(ErrorKind::not_normalized, msg.str());
    }
    Decomposition d;
    d.t = weighted_inner(grid, mass, f, eigen.phi1);
    d.f1.resize(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) d.f1[i] = f[i] - d.t * eigen.phi1[i];
    return d;
}

}  // namespace apfold
