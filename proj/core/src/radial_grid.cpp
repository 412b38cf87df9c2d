#include "apfold/radial_grid.hpp"

#include "apfold/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace apfold {

double unit_sphere_area(int dim) {
    // |S^0| = 2, |S^1| = 2 pi, |S^{d-1}| = 2 pi |S^{d-3}| / (d - 2)
    double area = (dim % 2 == 1) ? 2.0 : 2.0 * std::numbers::pi;
    for (int d = (dim % 2 == 1) ? 3 : 4; d <= dim; d += 2) {
        area *= 2.0 * std::numbers::pi / static_cast<double>(d - 2);
    }
    return area;
}

RadialGrid build_grid(int dim, double radius, std::size_t nodes, double stretch) {
    if (dim < 3 || !(radius > 0.0) || nodes < 3 || !(stretch >= 1.0) || !std::isfinite(radius) ||
        !std::isfinite(stretch)) {
        std::ostringstream msg;
        msg << "need N >= 3, R > 0, n >= 3, stretch >= 1 (got N=" << dim << ", R=" << radius
            << ", n=" << nodes << ", stretch=" << stretch << ")";
        throw Error(ErrorKind::bad_grid_config, msg.str());
    }

    RadialGrid grid;
    grid.dim_ = dim;
    grid.stretch_ = stretch;
    grid.sphere_area_ = unit_sphere_area(dim);

    const std::size_t n = nodes;
    grid.nodes_.resize(n);
    if (stretch == 1.0) {
        const double h = radius / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) grid.nodes_[i] = h * static_cast<double>(i);
    } else {
        const double cells = static_cast<double>(n - 1);
        const double h0 = radius * (stretch - 1.0) / (std::pow(stretch, cells) - 1.0);
        grid.nodes_[0] = 0.0;
        double h = h0;
        for (std::size_t i = 1; i < n; ++i) {
            grid.nodes_[i] = grid.nodes_[i - 1] + h;
            h *= stretch;
        }
    }
    grid.nodes_.back() = radius;

    for (std::size_t i = 1; i < n; ++i) {
        if (!(grid.nodes_[i] > grid.nodes_[i - 1])) {
            throw Error(ErrorKind::bad_grid_config, "stretch factor produced non-increasing nodes");
        }
    }

    const double sigma = grid.sphere_area_;
    const auto N = static_cast<double>(dim);
    grid.conductances_.resize(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = grid.nodes_[i + 1] - grid.nodes_[i];
        const double face = 0.5 * (grid.nodes_[i + 1] + grid.nodes_[i]);
        grid.conductances_[i] = sigma * std::pow(face, N - 1.0) / h;
    }

    grid.volumes_.resize(n);
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double outer = (i + 1 < n) ? 0.5 * (grid.nodes_[i] + grid.nodes_[i + 1]) : radius;
        grid.volumes_[i] = sigma * (std::pow(outer, N) - std::pow(inner, N)) / N;
        inner = outer;
    }
    return grid;
}

Vector RadialGrid::decay_weights() const {
    Vector w(nodes_.size());
    const auto p = static_cast<double>(dim_ - 2);
    std::transform(nodes_.begin(), nodes_.end(), w.begin(), [p](double r) { return std::pow(r, p); });
    return w;
}

std::size_t RadialGrid::first_at_or_above(double x) const {
    return static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
}

double weighted_integral(const RadialGrid& grid, std::span<const double> v) {
    const auto vol = grid.volumes();
    double sum = 0.0;
    for (std::size_t i = 0; i < vol.size(); ++i) sum += vol[i] * v[i];
    return sum;
}

double dirichlet_energy(const RadialGrid& grid, std::span<const double> u) {
    const auto c = grid.conductances();
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double d = u[i + 1] - u[i];
        sum += c[i] * d * d;
    }
    return sum;
}

double exterior_energy(const RadialGrid& grid, double boundary_value) {
    const double R = grid.radius();
    const auto N = static_cast<double>(grid.dim());
    return (N - 2.0) * grid.sphere_area() * std::pow(R, N - 2.0) * boundary_value * boundary_value;
}

}  // namespace apfold
