#include "ebitsim/fock.hpp"

#include <cmath>

namespace ebitsim {

namespace {

// Recursion in terms of psi itself:
//   psi_{n+1}(x) = sqrt(2/(n+1)) * z * psi_n(x) - sqrt(n/(n+1)) * psi_{n-1}(x),
// with z = sqrt(2) x. Carries the Gaussian inside the iterate, so no
// overflow and no factorial evaluation.
void fill_psi(Eigen::VectorXd& out, double x, double psi0) {
    const int n_max = static_cast<int>(out.size()) - 1;
    const double z = std::sqrt(2.0) * x;
    out[0] = psi0;
    if (n_max >= 1)
        out[1] = std::sqrt(2.0) * z * out[0];
    for (int n = 1; n < n_max; ++n)
        out[n + 1] = std::sqrt(2.0 / (n + 1)) * z * out[n] -
                     std::sqrt(double(n) / (n + 1)) * out[n - 1];
}

const double kPsi0Scale = std::pow(2.0 / M_PI, 0.25);

} // namespace

Eigen::VectorXd psi_table(int n_max, double x) {
    if (n_max < 0)
        throw std::invalid_argument("psi_table: n_max must be >= 0");
    Eigen::VectorXd out(n_max + 1);
    fill_psi(out, x, kPsi0Scale * std::exp(-x * x));
    return out;
}

Eigen::VectorXd hermite_scaled_table(int n_max, double x) {
    if (n_max < 0)
        throw std::invalid_argument("hermite_scaled_table: n_max must be >= 0");
    Eigen::VectorXd out(n_max + 1);
    fill_psi(out, x, kPsi0Scale);
    return out;
}

double psi_n(int n, double x) {
    if (n < 0)
        throw std::invalid_argument("psi_n: n must be >= 0");
    return psi_table(n, x)[n];
}

Eigen::VectorXd psi_derivative_table(int n_max, double x) {
    Eigen::VectorXd psi = psi_table(n_max, x);
    Eigen::VectorXd out(n_max + 1);
    out[0] = -2.0 * x * psi[0];
    for (int n = 1; n <= n_max; ++n)
        out[n] = 2.0 * std::sqrt(double(n)) * psi[n - 1] - 2.0 * x * psi[n];
    return out;
}

Eigen::VectorXcd povm_vector(double x, double theta, const FockTruncation& trunc) {
    Eigen::VectorXd psi = psi_table(trunc.n_max, x);
    Eigen::VectorXcd out(trunc.per_mode());
    for (int n = 0; n <= trunc.n_max; ++n)
        out[n] = std::polar(psi[n], -n * theta);
    return out;
}

DensityMatrix global_phase_average(const DensityMatrix& rho) {
    const FockTruncation& t = rho.trunc();
    Eigen::MatrixXcd out = rho.elements();
    for (int a = 0; a < t.dim(); ++a)
        for (int b = 0; b < t.dim(); ++b) {
            int total_a = t.mode1_of(a) + t.mode2_of(a);
            int total_b = t.mode1_of(b) + t.mode2_of(b);
            if (total_a != total_b)
                out(a, b) = 0.0;
        }
    return DensityMatrix(t, std::move(out));
}

namespace {

// Positive square root of a Hermitian matrix; small negative eigenvalues
// from rounding are clamped to zero.
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
    Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.trunc() != sigma.trunc())
        throw std::invalid_argument("fidelity: truncation mismatch");
    Eigen::MatrixXcd sr = hermitian_sqrt(rho.elements());
    Eigen::MatrixXcd inner = sr * sigma.elements() * sr;
    // inner is Hermitian PSD up to rounding; sum of sqrt eigenvalues.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(inner, Eigen::EigenvaluesOnly);
    double s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    double f = s * s;
    return std::min(1.0, std::max(0.0, f));
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.trunc() != sigma.trunc())
        throw std::invalid_argument("trace_distance: truncation mismatch");
    Eigen::MatrixXcd diff = rho.elements() - sigma.elements();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

GaussHermite gauss_hermite(int n) {
    if (n < 1)
        throw std::invalid_argument("gauss_hermite: need at least one node");
    // Jacobi matrix for physicists' Hermite polynomials (weight e^{-t^2}):
    // off-diagonal beta_k = sqrt(k/2). Nodes are its eigenvalues, weights
    // sqrt(pi) * v_k(0)^2 with v the normalized eigenvectors.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        double b = std::sqrt(k / 2.0);
        jacobi(k - 1, k) = b;
        jacobi(k, k - 1) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussHermite rule;
    rule.x = es.eigenvalues();
    rule.w = Eigen::VectorXd(n);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int k = 0; k < n; ++k) {
        double v0 = es.eigenvectors()(0, k);
        rule.w[k] = sqrt_pi * v0 * v0;
    }
    // Substitute t = sqrt(2) x to move to the e^{-2x^2} weight.
    const double s = std::sqrt(2.0);
    rule.x /= s;
    rule.w /= s;
    return rule;
}

} // namespace ebitsim
