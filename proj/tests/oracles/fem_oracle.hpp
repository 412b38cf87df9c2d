#pragma once

// Dense P1 finite-element discretization of the radial weighted eigenproblem,
// independent of the finite-volume operator in the library. Test code only.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <stdexcept>

namespace apfold::oracle {

/// Smallest eigenvalue of int u' v' r^{N-1} dr + c u(R) v(R) = lambda int P u v r^{N-1} dr
/// on nodes 0 = r_0 < ... < r_{n-1} = R. `robin` adds c = (N-2) R^{N-2};
/// otherwise u(R) = 0 is imposed by dropping the last node.
inline double fem_lambda1(int dim, double radius, int nodes, const std::function<double(double)>& weight,
                          bool robin) {
    static const double gx[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                 0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
    static const double gw[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                 0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    const int n = nodes;
    const double h = radius / (n - 1);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e + 1 < n; ++e) {
        const double a = e * h;
        for (int q = 0; q < 6; ++q) {
            const double xi = 0.5 * (gx[q] + 1.0);
            const double r = a + xi * h;
            const double w = 0.5 * gw[q] * h * std::pow(r, dim - 1);
            const double phi[2] = {1.0 - xi, xi};
            const double dphi[2] = {-1.0 / h, 1.0 / h};
            const double p = weight(r);
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) {
                    K(e + i, e + j) += w * dphi[i] * dphi[j];
                    M(e + i, e + j) += w * p * phi[i] * phi[j];
                }
            }
        }
    }
    int m = n;
    if (robin) {
        K(n - 1, n - 1) += (dim - 2) * std::pow(radius, dim - 2);
    } else {
        m = n - 1;
    }
    // The inverted pencil M x = nu K x keeps K (well conditioned, positive
    // definite) on the right; the direct pencil would need the badly scaled M.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(M.topLeftCorner(m, m), K.topLeftCorner(m, m),
                                                                     Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense generalized eigensolve failed");
    return 1.0 / solver.eigenvalues().maxCoeff();
}

/// Second-order Richardson extrapolation from spacings h and h/2.
inline double richardson(double coarse, double fine) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace apfold::oracle
