#pragma once

#include "ebitsim/types.hpp"

namespace ebitsim {

/**
 * Quadrature eigenfunction of the number state,
 *   psi_n(x) = (2/pi)^{1/4} (2^n n!)^{-1/2} H_n(sqrt(2) x) e^{-x^2},
 * in the convention x = (a + a^dag)/2 where the vacuum has variance 1/4.
 * Evaluated by upward recursion, stable for the n used here.
 */
double psi_n(int n, double x);

/// psi_0..psi_n_max at one point, one recursion pass.
Eigen::VectorXd psi_table(int n_max, double x);

/// d/dx of psi_0..psi_n_max, from psi_n' = 2 sqrt(n) psi_{n-1} - 2 x psi_n.
Eigen::VectorXd psi_derivative_table(int n_max, double x);

/**
 * Scaled Hermite functions h_n(x) = psi_n(x) e^{x^2} (the polynomial part).
 * Useful with the e^{-2x^2} quadrature weight: psi_n psi_m = h_n h_m e^{-2x^2}
 * without overflow at large |x|.
 */
Eigen::VectorXd hermite_scaled_table(int n_max, double x);

/**
 * Single-mode quadrature measurement vector at local-oscillator phase theta:
 * component n is <n|x,theta> = e^{-i n theta} psi_n(x), so that
 * |<x,theta|psi>|^2 is the distribution of X(theta) = x cos(theta) - y sin(theta).
 * The phase sign pairs with that rotation; see docs/conventions in README.
 */
Eigen::VectorXcd povm_vector(double x, double theta, const FockTruncation& trunc);

/**
 * Projection onto the total-photon-number block diagonal: zeroes every
 * element rho_{kl,mn} with k+l != m+n. Idempotent and trace preserving.
 * Homodyne data taken with only a relative phase cannot determine the
 * discarded coherences.
 */
DensityMatrix global_phase_average(const DensityMatrix& rho);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clamped to [0,1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Trace distance (1/2)||rho - sigma||_1.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

/**
 * Gauss-Hermite rule adapted to the weight e^{-2x^2}:
 *   integral f(x) e^{-2x^2} dx = sum_i w[i] f(x[i])
 * exactly for polynomial f of degree < 2n. Nodes and weights via the
 * Golub-Welsch eigenvalue method.
 */
struct GaussHermite {
    Eigen::VectorXd x;
    Eigen::VectorXd w;
};
GaussHermite gauss_hermite(int n);

} // namespace ebitsim
