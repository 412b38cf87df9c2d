#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace apfold {

/// Grid function: one value per radial node.
using Vector = std::vector<double>;

/// Radial nodes 0 = r_0 < r_1 < ... < r_{n-1} = R for a radially symmetric
/// problem in R^N.
///
/// The grid also owns the geometry of the conservative (finite-volume)
/// discretization: the dual-cell volumes sigma_{N-1} * int r^{N-1} dr over
/// [r_{i-1/2}, r_{i+1/2}] and the face conductances sigma_{N-1} r_{i+1/2}^{N-1} / h_i.
/// Quadrature, the Dirichlet energy and the discrete Laplacian all use these
/// same quantities, which makes the Laplacian self-adjoint in the quadrature
/// inner product.
class RadialGrid {
public:
    int dim() const noexcept { return dim_; }
    double radius() const noexcept { return nodes_.back(); }
    std::size_t size() const noexcept { return nodes_.size(); }
    /// Geometric ratio between consecutive spacings (1 means uniform).
    double stretch() const noexcept { return stretch_; }
    /// Surface area of the unit sphere S^{N-1}.
    double sphere_area() const noexcept { return sphere_area_; }

    std::span<const double> nodes() const noexcept { return nodes_; }
    double r(std::size_t i) const { return nodes_[i]; }
    double spacing(std::size_t i) const { return nodes_[i + 1] - nodes_[i]; }
    std::span<const double> volumes() const noexcept { return volumes_; }
    std::span<const double> conductances() const noexcept { return conductances_; }

    /// r^{N-2} at every node.
    Vector decay_weights() const;
    /// Index of the first node with r >= x (size() if none).
    std::size_t first_at_or_above(double x) const;

    friend RadialGrid build_grid(int dim, double radius, std::size_t nodes, double stretch);

private:
    RadialGrid() = default;

    int dim_ = 3;
    double stretch_ = 1.0;
    double sphere_area_ = 0.0;
    Vector nodes_;
    Vector volumes_;
    Vector conductances_;
};

/// Throws Error(bad_grid_config) unless dim >= 3, radius > 0, nodes >= 3 and
/// stretch >= 1. Uniform spacing R/(n-1) for stretch == 1; otherwise
/// h_i = h_0 * stretch^i.
RadialGrid build_grid(int dim, double radius, std::size_t nodes, double stretch = 1.0);

/// Area of the unit sphere in R^dim, 2 pi^{dim/2} / Gamma(dim/2).
double unit_sphere_area(int dim);

/// Discrete int_{B_R} v dx (box rule on the dual cells).
double weighted_integral(const RadialGrid& grid, std::span<const double> v);

/// Discrete int_{B_R} |grad u|^2 dx = sum sigma r_{i+1/2}^{N-1} ((u_{i+1}-u_i)/h_i)^2 h_i.
double dirichlet_energy(const RadialGrid& grid, std::span<const double> u);

/// Energy of the harmonic extension u(R) (R/r)^{N-2} outside B_R:
/// (N-2) sigma_{N-1} R^{N-2} u(R)^2.
double exterior_energy(const RadialGrid& grid, double boundary_value);

}  // namespace apfold
