#pragma once

#include "apfold/radial_grid.hpp"

#include <functional>
#include <iosfwd>
#include <string_view>
#include <span>

namespace apfold {

/// Far-field closure at r = R. The origin always carries the symmetry
/// condition u'(0) = 0.
enum class FarField {
    /// u'(R) + ((N-2)/R) u(R) = 0: exact for the decaying harmonic r^{-(N-2)}.
    robin_decay,
    /// u(R) = 0.
    dirichlet,
};

std::string_view to_string(FarField f) noexcept;

/// Row i couples u_{i-1}, u_i, u_{i+1} with coefficients sub[i], diag[i],
/// super[i]; sub[0] and super[n-1] are zero.
struct TridiagonalOperator {
    Vector sub;
    Vector diag;
    Vector super;
    FarField farfield = FarField::robin_decay;

    std::size_t size() const noexcept { return diag.size(); }

    Vector apply(std::span<const double> u) const;
    /// |sub_i| + |diag_i| + |super_i|.
    double row_magnitude(std::size_t i) const;
    /// max_i |sub_i| + |diag_i| + |super_i| (the infinity norm).
    double norm_inf() const;
    /// Copy with diag_i += shift_i.
    TridiagonalOperator shifted(std::span<const double> shift) const;
    /// Copy with diag_i += c * mass_i.
    TridiagonalOperator shifted(double c, std::span<const double> mass) const;
};

/// Conservative finite-volume discretization of -u'' - ((N-1)/r) u'.
///
/// Row i is (1/V_i) times the flux balance over dual cell i, so A = V^{-1} K
/// with K symmetric. Off-diagonals are negative and diagonals positive.
/// With dirichlet the last row becomes the identity row u_{n-1} = rhs.
TridiagonalOperator assemble_laplacian(const RadialGrid& grid, FarField farfield);

/// Diagonal of M_P: P(r_i) at each node, zero at the constrained node when
/// farfield is dirichlet. Throws Error(non_positive_weight) if P(r_i) <= 0 or
/// is not finite at any node.
Vector assemble_weight_mass(const RadialGrid& grid, const std::function<double(double)>& weight,
                            FarField farfield);

/// Thomas elimination. Throws Error(singular_operator) when a pivot falls
/// below 1e-14 times the magnitude of its row.
Vector solve_tridiagonal(const TridiagonalOperator& op, std::span<const double> rhs);

/// CSV dump with header "index,r,sub,diag,super".
void write_operator_csv(std::ostream& out, const RadialGrid& grid, const TridiagonalOperator& op);

}  // namespace apfold
