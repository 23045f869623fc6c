#include "ebitsim/pattern.hpp"

#include <cmath>

#include "ebitsim/fock.hpp"

namespace ebitsim {

namespace {

// Outward RK4 integration of u'' = (4x^2 - 4m - 2) u, storing (u, u') at
// every node of the uniform grid.
void integrate_irregular(int m, int points, double h, Eigen::VectorXd& u,
                         Eigen::VectorXd& du) {
    auto coeff = [m](double x) { return 4.0 * x * x - 4.0 * m - 2.0; };

    u.resize(points);
    du.resize(points);
    // Parity fixes one of (u, u') to zero at the origin; the other follows
    // from the Wronskian normalization psi phi' - psi' phi = 2.
    if (m % 2 == 0) {
        u[0] = 0.0;
        du[0] = 2.0 / psi_n(m, 0.0);
    } else {
        u[0] = -2.0 / psi_derivative_table(m, 0.0)[m];
        du[0] = 0.0;
    }
    for (int i = 0; i + 1 < points; ++i) {
        double x = i * h;
        double a = u[i], b = du[i];
        double k1u = b, k1v = coeff(x) * a;
        double k2u = b + 0.5 * h * k1v;
        double k2v = coeff(x + 0.5 * h) * (a + 0.5 * h * k1u);
        double k3u = b + 0.5 * h * k2v;
        double k3v = coeff(x + 0.5 * h) * (a + 0.5 * h * k2u);
        double k4u = b + h * k3v;
        double k4v = coeff(x + h) * (a + h * k3u);
        u[i + 1] = a + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        du[i + 1] = b + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    }
}

} // namespace

PatternTable::PatternTable(int n_max, int points, double halfwidth)
    : n_max_(n_max), points_(points), halfwidth_(halfwidth) {
    if (n_max < 1)
        throw std::invalid_argument("PatternTable: n_max must be >= 1");
    if (points < 9 || points % 2 == 0)
        throw std::invalid_argument("PatternTable: points must be odd and >= 9");
    if (!(halfwidth > 1.0))
        throw std::invalid_argument("PatternTable: halfwidth must exceed 1");
    h_ = halfwidth_ / double(points_ - 1);

    const int nb = n_max_ + 1;

    // psi_n and psi_n' at every node.
    Eigen::MatrixXd psi(nb, points_), dpsi(nb, points_);
    for (int i = 0; i < points_; ++i) {
        double x = i * h_;
        psi.col(i) = psi_table(n_max_, x);
        dpsi.col(i) = psi_derivative_table(n_max_, x);
    }

    // Irregular partners phi_m and phi_m'.
    Eigen::MatrixXd phi(nb, points_), dphi(nb, points_);
    for (int m = 0; m < nb; ++m) {
        Eigen::VectorXd u, du;
        integrate_irregular(m, points_, h_, u, du);
        phi.row(m) = u.transpose();
        dphi.row(m) = du.transpose();
    }

    // Kernels f = psi' phi + psi phi' and their derivatives, where both
    // second derivatives are eliminated through the defining equations:
    // f' = (8x^2 - 4(n+m) - 4) psi phi + 2 psi' phi'.
    fvals_.resize(nb * nb);
    fders_.resize(nb * nb);
    for (int n = 0; n < nb; ++n)
        for (int m = 0; m < nb; ++m) {
            Eigen::VectorXd fv(points_), fd(points_);
            for (int i = 0; i < points_; ++i) {
                double x = i * h_;
                fv[i] = dpsi(n, i) * phi(m, i) + psi(n, i) * dphi(m, i);
                fd[i] = (8.0 * x * x - 4.0 * (n + m) - 4.0) * psi(n, i) *
                            phi(m, i) +
                        2.0 * dpsi(n, i) * dphi(m, i);
            }
            fvals_[pair_index(n, m)] = std::move(fv);
            fders_[pair_index(n, m)] = std::move(fd);
        }

    // Orthogonality self-test on matching diagonals by composite Simpson;
    // all integrands here are even, so twice the half-line integral.
    defect_ = 0.0;
    for (int n = 0; n < nb; ++n)
        for (int m = 0; m < nb; ++m)
            for (int a = 0; a < nb; ++a) {
                int b = a - (n - m);
                if (b < 0 || b >= nb)
                    continue;
                const Eigen::VectorXd& fv = fvals_[pair_index(n, m)];
                double acc = 0.0;
                for (int i = 0; i < points_; ++i) {
                    double w = (i == 0 || i == points_ - 1) ? 1.0
                               : (i % 2 == 1)               ? 4.0
                                                            : 2.0;
                    acc += w * fv[i] * psi(a, i) * psi(b, i);
                }
                double integral = 2.0 * acc * h_ / 3.0;
                double expected = (n == a && m == b) ? 1.0 : 0.0;
                defect_ = std::max(defect_, std::abs(integral - expected));
            }
}

double PatternTable::f(int n, int m, double x) const {
    if (n < 0 || n > n_max_ || m < 0 || m > n_max_)
        throw std::invalid_argument("PatternTable::f: order out of range");
    double sign = 1.0;
    if (x < 0) {
        x = -x;
        if ((n + m) % 2 == 1)
            sign = -1.0;
    }
    if (x >= halfwidth_)
        x = halfwidth_; // tail clamp; data mass beyond the table is ~e^{-128}
    double cell = x / h_;
    int i = std::min(points_ - 2, static_cast<int>(cell));
    double t = cell - i;
    const Eigen::VectorXd& fv = fvals_[pair_index(n, m)];
    const Eigen::VectorXd& fd = fders_[pair_index(n, m)];
    double t2 = t * t, t3 = t2 * t;
    double v = (2 * t3 - 3 * t2 + 1) * fv[i] + (t3 - 2 * t2 + t) * h_ * fd[i] +
               (-2 * t3 + 3 * t2) * fv[i + 1] + (t3 - t2) * h_ * fd[i + 1];
    return sign * v;
}

void PatternTable::eval_all(double x, Eigen::MatrixXd& out) const {
    const int nb = n_max_ + 1;
    double ax = std::abs(x);
    bool flip = x < 0;
    if (ax >= halfwidth_)
        ax = halfwidth_;
    double cell = ax / h_;
    int i = std::min(points_ - 2, static_cast<int>(cell));
    double t = cell - i;
    double t2 = t * t, t3 = t2 * t;
    double w0 = 2 * t3 - 3 * t2 + 1, w1 = (t3 - 2 * t2 + t) * h_;
    double w2 = -2 * t3 + 3 * t2, w3 = (t3 - t2) * h_;
    for (int n = 0; n < nb; ++n)
        for (int m = 0; m < nb; ++m) {
            const Eigen::VectorXd& fv = fvals_[pair_index(n, m)];
            const Eigen::VectorXd& fd = fders_[pair_index(n, m)];
            double v = w0 * fv[i] + w1 * fd[i] + w2 * fv[i + 1] + w3 * fd[i + 1];
            out(n, m) = (flip && (n + m) % 2 == 1) ? -v : v;
        }
}

} // namespace ebitsim
