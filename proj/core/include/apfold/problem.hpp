#pragma once

#include "apfold/eigensolver.hpp"
#include "apfold/radial_grid.hpp"
#include "apfold/tridiagonal.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace apfold {

enum class WeightPreset { rational_decay, exponential, constant, table };

/// Radial weight profile P(r) > 0.
struct WeightSpec {
    WeightPreset preset = WeightPreset::rational_decay;
    /// rational_decay: {power}; exponential: {rate}; constant: {value};
    /// table: {tail_power}.
    std::vector<double> params;
    /// Table knots (table preset only); linear interpolation inside,
    /// power-law continuation values.back() * (radii.back() / r)^tail_power outside.
    std::vector<double> radii;
    std::vector<double> values;

    double operator()(double r) const;
    std::function<double(double)> evaluator() const;

    /// P(r) = (1 + r^2)^{-power}.
    static WeightSpec rational_decay(double power);
    /// P(r) = exp(-rate r).
    static WeightSpec exponential(double rate);
    static WeightSpec constant(double value);
    static WeightSpec table(std::vector<double> radii, std::vector<double> values, double tail_power);
};

enum class NonlinearityPreset { softplus, linear, zero };

/// g, g' and the slopes mu_lower < lambda1 < mu_upper bracketing it.
struct NonlinearitySpec {
    NonlinearityPreset preset = NonlinearityPreset::softplus;
    double mu_lower = 0.0;
    double mu_upper = 0.0;
    /// softplus: constant subtracted from g; linear: intercept.
    double offset = 0.0;

    double g(double s) const;
    double g_prime(double s) const;
    bool monotone() const;

    /// g(s) = mu_lower s + (mu_upper - mu_lower) ln(1 + e^s) - offset.
    static NonlinearitySpec softplus(double mu_lower, double mu_upper, double offset);
    /// g(s) = slope s + intercept (both slopes set to `slope`).
    static NonlinearitySpec linear(double slope, double intercept = 0.0);
    static NonlinearitySpec zero();
};

enum class ForcingProfile { zero, gaussian, table };

/// Radial profile for the component f1 of the forcing orthogonal to phi1.
/// The profile is P-orthogonalized against phi1 when the instance is built.
struct ForcingSpec {
    double t = 0.0;
    ForcingProfile profile = ForcingProfile::zero;
    /// gaussian: amplitude exp(-(r/width)^2).
    double amplitude = 0.0;
    double width = 1.0;
    /// table: linear interpolation, zero beyond the last knot.
    std::vector<double> radii;
    std::vector<double> values;

    double raw(double r) const;
};

struct GridConfig {
    int dim = 3;
    double radius = 40.0;
    std::size_t nodes = 4000;
    double stretch = 1.0;
    FarField farfield = FarField::robin_decay;
};

/// Slopes may be given as multiples of lambda1; they are resolved once the
/// eigenpair is known.
struct SlopeValue {
    double value = 0.0;
    bool relative_to_lambda1 = false;
    double resolve(double lambda1) const { return relative_to_lambda1 ? value * lambda1 : value; }
};

struct NonlinearityConfig {
    NonlinearityPreset preset = NonlinearityPreset::softplus;
    SlopeValue mu_lower{0.5, true};
    SlopeValue mu_upper{2.0, true};
    double offset = 1.0;
    /// Sampling range for the slack constant and growth checks.
    double sample_lo = -50.0;
    double sample_hi = 50.0;
    std::size_t samples = 200001;

    NonlinearitySpec resolve(double lambda1) const;
};

struct ProblemConfig {
    WeightSpec weight;
    NonlinearityConfig nonlinearity;
    ForcingSpec forcing;
    GridConfig grid;
    EigenOptions eigen;
};

struct SlackReport {
    double theta = 0.0;
    /// sup over samples of mu_lower s - g(s) and mu_upper s - g(s).
    double sup_lower = 0.0;
    double sup_upper = 0.0;
    /// Sample at which each supremum was attained.
    double argsup_lower = 0.0;
    double argsup_upper = 0.0;
    /// Warnings: the supremum sits on the edge of the sampled range.
    bool lower_at_boundary = false;
    bool upper_at_boundary = false;
    /// Secant slopes over the outer quarter of each half-range.
    double slope_pos = 0.0;
    double slope_neg = 0.0;
};

/// Theta = max(0, sup (mu_lower s - g), sup (mu_upper s - g)) over `samples`
/// equispaced points in [lo, hi]. Throws Error(slope_violation) if
/// mu_lower >= mu_upper, if the secant slope near +hi is below
/// mu_upper (1 - 1e-6), or if the secant slope near lo exceeds
/// mu_lower (1 + 1e-6). Throws Error(config_error) unless [lo, hi] covers
/// [-50, 50].
SlackReport derive_slack_constants(const NonlinearitySpec& g, double lo, double hi, std::size_t samples);

struct SigmaGrowthReport {
    double sigma = 0.0;
    /// max of g(s)/s^sigma over [hi/10, hi] and over [hi/5, 2 hi].
    double max_ratio_tail = 0.0;
    double max_ratio_tail_doubled = 0.0;
    bool compliant = false;
};

/// sigma = N/(N-2); compliant when the tail ratio is non-increasing across
/// the top decade and shrinks when the range doubles.
SigmaGrowthReport check_sigma_growth(const NonlinearitySpec& g, int dim, double hi);

struct MomentReport {
    double mass = 0.0;
    double second_moment = 0.0;
    double sup_P = 0.0;
    /// Power-law tail corrections included in the two moments.
    double mass_tail = 0.0;
    double second_moment_tail = 0.0;
    /// Local decay exponent k = -d ln P / d ln r at R.
    double tail_exponent = 0.0;
    /// Relative change between the [0, R/2] and [0, R] evaluations.
    double mass_window_change = 0.0;
    double second_moment_window_change = 0.0;
    bool stable = false;
};

/// int P dx and int |x|^2 P dx with a power-law tail correction beyond the
/// window edge. Throws Error(non_positive_weight) or Error(divergent_moment)
/// when the tail exponent cannot make the second moment finite or the
/// [0, R/2] and [0, R] values differ by 1% or more.
MomentReport check_P1(const WeightSpec& weight, const RadialGrid& grid);

struct PotentialBoundReport {
    /// max over probes of r^{N-2} I(r), I the raw kernel integral
    /// int P(y) |x - y|^{2-N} dy.
    double constant_estimate = 0.0;
    double potential_at_origin = 0.0;
    std::vector<double> probes;
    std::vector<double> scaled_values;
    /// Relative spread (max - min) / max of r^{N-2} I(r) over the probes in
    /// the largest decade [max probe / 10, max probe].
    double tail_spread = 0.0;
    /// tail_spread <= 0.05: the scaled potential has settled on a plateau.
    bool tail_bounded = false;
};

/// Throws Error(probe_out_of_range) for probes outside (0, R].
PotentialBoundReport check_P2(const WeightSpec& weight, const RadialGrid& grid, std::span<const double> probes);

/// Discretized problem -Delta u = P (g(u) + t phi1 + f1) with its first
/// eigenpair, resolved nonlinearity and slack constant. Immutable once built.
class ProblemInstance {
public:
    static ProblemInstance create(const ProblemConfig& config);

    const ProblemConfig& config() const noexcept { return config_; }
    const RadialGrid& grid() const noexcept { return grid_; }
    const TridiagonalOperator& laplacian() const noexcept { return laplacian_; }
    /// Diagonal of M_P.
    std::span<const double> mass() const noexcept { return mass_; }
    /// P at every node (unmasked).
    std::span<const double> weight_values() const noexcept { return weight_values_; }
    const EigenPair& eigen() const noexcept { return eigen_; }
    std::span<const double> phi1() const noexcept { return eigen_.phi1; }
    double lambda1() const noexcept { return eigen_.lambda1; }
    const NonlinearitySpec& nonlinearity() const noexcept { return nonlinearity_; }
    const SlackReport& slack() const noexcept { return slack_; }
    double theta() const noexcept { return slack_.theta; }
    std::span<const double> f1() const noexcept { return f1_; }
    /// Coefficient removed from the raw forcing profile by the projection.
    double f1_projection() const noexcept { return f1_projection_; }
    FarField farfield() const noexcept { return laplacian_.farfield; }
    int dim() const noexcept { return grid_.dim(); }

    /// mu_lower < lambda1 < mu_upper.
    bool brackets_lambda1() const noexcept {
        return nonlinearity_.mu_lower < eigen_.lambda1 && eigen_.lambda1 < nonlinearity_.mu_upper;
    }

    double g(double s) const { return nonlinearity_.g(s); }
    double g_prime(double s) const { return nonlinearity_.g_prime(s); }

private:
    ProblemInstance(const ProblemConfig& config, RadialGrid grid);

    ProblemConfig config_;
    RadialGrid grid_;
    TridiagonalOperator laplacian_;
    Vector mass_;
    Vector weight_values_;
    EigenPair eigen_;
    NonlinearitySpec nonlinearity_;
    SlackReport slack_;
    Vector f1_;
    double f1_projection_ = 0.0;
};

/// N = 3, P = (1 + r^2)^{-3}, softplus g with slopes (0.5, 2) lambda1 and
/// offset 1, f1 = 0.
ProblemConfig canonical_config(std::size_t nodes = 4000, double radius = 40.0,
                               FarField farfield = FarField::robin_decay);

struct Decomposition {
    double t = 0.0;
    Vector f1;
};

/// f = t phi1 + f1 with t = int P f phi1 dx. Throws Error(not_normalized)
/// when |int P phi1^2 dx - 1| > 1e-8.
Decomposition decompose_forcing(std::span<const double> f, const EigenPair& eigen, const RadialGrid& grid,
                                std::span<const double> mass);

}  // namespace apfold
