#include "apfold/tridiagonal.hpp"

#include "apfold/error.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace apfold {

std::string_view to_string(FarField f) noexcept {
    return f == FarField::robin_decay ? "robin_decay" : "dirichlet";
}

Vector TridiagonalOperator::apply(std::span<const double> u) const {
    const std::size_t n = size();
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double v = diag[i] * u[i];
        if (i > 0) v += sub[i] * u[i - 1];
        if (i + 1 < n) v += super[i] * u[i + 1];
        out[i] = v;
    }
    return out;
}

double TridiagonalOperator::row_magnitude(std::size_t i) const {
    return std::abs(sub[i]) + std::abs(diag[i]) + std::abs(super[i]);
}

double TridiagonalOperator::norm_inf() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size(); ++i) m = std::max(m, row_magnitude(i));
    return m;
}

TridiagonalOperator TridiagonalOperator::shifted(std::span<const double> shift) const {
    TridiagonalOperator out = *this;
    for (std::size_t i = 0; i < size(); ++i) out.diag[i] += shift[i];
    return out;
}

TridiagonalOperator TridiagonalOperator::shifted(double c, std::span<const double> mass) const {
    TridiagonalOperator out = *this;
    for (std::size_t i = 0; i < size(); ++i) out.diag[i] += c * mass[i];
    return out;
}

TridiagonalOperator assemble_laplacian(const RadialGrid& grid, FarField farfield) {
    const std::size_t n = grid.size();
    const auto c = grid.conductances();
    const auto vol = grid.volumes();

    TridiagonalOperator op;
    op.farfield = farfield;
    op.sub.assign(n, 0.0);
    op.diag.assign(n, 0.0);
    op.super.assign(n, 0.0);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        op.diag[i] += c[i];
        op.diag[i + 1] += c[i];
        op.super[i] -= c[i];
        op.sub[i + 1] -= c[i];
    }
    if (farfield == FarField::robin_decay) {
        // Flux of the exterior harmonic extension u(R) (R/r)^{N-2} through r = R.
        const auto N = static_cast<double>(grid.dim());
        op.diag[n - 1] += (N - 2.0) * grid.sphere_area() * std::pow(grid.radius(), N - 2.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        op.sub[i] /= vol[i];
        op.diag[i] /= vol[i];
        op.super[i] /= vol[i];
    }
    if (farfield == FarField::dirichlet) {
        op.sub[n - 1] = 0.0;
        op.diag[n - 1] = 1.0;
    }
    return op;
}

Vector assemble_weight_mass(const RadialGrid& grid, const std::function<double(double)>& weight,
                            FarField farfield) {
    const std::size_t n = grid.size();
    Vector m(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = weight(grid.r(i));
        if (!(p > 0.0) || !std::isfinite(p)) {
            std::ostringstream msg;
            msg << "P(" << grid.r(i) << ") = " << p << " at node " << i;
            throw Error(ErrorKind::non_positive_weight, msg.str());
        }
        m[i] = p;
    }
    if (farfield == FarField::dirichlet) m[n - 1] = 0.0;
    return m;
}

Vector solve_tridiagonal(const TridiagonalOperator& op, std::span<const double> rhs) {
    const std::size_t n = op.size();
    Vector cp(n);
    Vector x(n);
    double pivot = op.diag[0];
    for (std::size_t i = 0;; ++i) {
        if (!(std::abs(pivot) > 1e-14 * op.row_magnitude(i)) || !std::isfinite(pivot)) {
            std::ostringstream msg;
            msg << "pivot " << pivot << " at row " << i;
            throw Error(ErrorKind::singular_operator, msg.str());
        }
        cp[i] = op.super[i] / pivot;
        x[i] = ((i > 0 ? rhs[i] - op.sub[i] * x[i - 1] : rhs[i])) / pivot;
        if (i + 1 == n) break;
        pivot = op.diag[i + 1] - op.sub[i + 1] * cp[i];
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cp[i] * x[i + 1];
    return x;
}

void write_operator_csv(std::ostream& out, const RadialGrid& grid, const TridiagonalOperator& op) {
    out << "index,r,sub,diag,super\n";
    out.precision(17);
    for (std::size_t i = 0; i < op.size(); ++i) {
        out << i << ',' << grid.r(i) << ',' << op.sub[i] << ',' << op.diag[i] << ',' << op.super[i]
            << '\n';
    }
}

}  // namespace apfold
