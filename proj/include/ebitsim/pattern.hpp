#pragma once

#include <vector>

#include "ebitsim/types.hpp"

namespace ebitsim {

/**
 * Tomographic pattern kernels f_nm(x) = d/dx [psi_n(x) phi_m(x)], where
 * phi_m is the unbounded second solution of the quadrature Schroedinger
 * equation u'' = (4x^2 - 4m - 2) u at the same eigenvalue, normalized so the
 * Wronskian psi_m phi_m' - psi_m' phi_m equals 2. Averaging f_km(x1) f_ln(x2)
 * with the right phase factor over homodyne samples estimates rho_{kl,mn}
 * directly.
 *
 * phi_m has no closed form that is safe to hand-copy, so it is integrated
 * outward from parity-determined initial values with classical RK4 on a
 * uniform grid, and the kernels are stored with their derivatives for cubic
 * Hermite interpolation. The correctness oracle is the orthogonality
 * integral: for index pairs on matching diagonals (a - b = n - m),
 *   integral f_nm(x) psi_a(x) psi_b(x) dx = delta_{na} delta_{mb}.
 * Pairs on different diagonals are not orthogonal in principle (products
 * psi_a psi_b with fixed a-b are linearly dependent across diagonals), and
 * the estimator never pairs them: the phase average removes every term with
 * l - n different from the target before the x integrals matter.
 */
class PatternTable {
  public:
    PatternTable(int n_max, int points = 8193, double halfwidth = 8.0);

    int n_max() const { return n_max_; }
    double halfwidth() const { return halfwidth_; }

    /// Kernel value, sign-folded through parity f(-x) = (-1)^{n+m} f(x).
    double f(int n, int m, double x) const;

    /// All kernels at one point; out(n,m) = f_nm(x). out must be presized.
    void eval_all(double x, Eigen::MatrixXd& out) const;

    /// Worst |integral - expected| over the matching-diagonal test set.
    double orthogonality_defect() const { return defect_; }

  private:
    int n_max_;
    int points_;
    double halfwidth_;
    double h_;
    // Kernel and derivative per (n,m) pair at the grid nodes on [0, L].
    std::vector<Eigen::VectorXd> fvals_;
    std::vector<Eigen::VectorXd> fders_;
    double defect_ = 0.0;

    int pair_index(int n, int m) const { return n * (n_max_ + 1) + m; }
};

} // namespace ebitsim
