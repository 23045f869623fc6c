#pragma once

#include <vector>

#include "ebitsim/sampler.hpp"
#include "ebitsim/types.hpp"

namespace ebitsim {

enum class ReconstructionMethod { max_likelihood, pattern_function };

struct ReconstructionConfig {
    int n_max = 4;
    ReconstructionMethod method = ReconstructionMethod::max_likelihood;
    int max_iterations = 2000;
    /// Trace distance between successive iterates that counts as converged.
    double convergence_tol = 1e-6;
    /// Grid used by the pattern-kernel tables and their self-test.
    int quadrature_points = 8193;
    double quadrature_halfwidth = 8.0;
};

/// Empty when valid, otherwise names the violated field.
std::string validate_reconstruction(const ReconstructionConfig& c);

struct MlResult {
    DensityMatrix rho;
    int iterations;
    double final_log_likelihood;
    bool converged;
};

/**
 * Iterative maximum-likelihood reconstruction, rho <- N[R rho R] with
 * R = sum_i Pi_i / Tr[rho Pi_i], from quadrature projectors at LO phases
 * theta_1 = 0, theta_2 = -chi_i.
 *
 * Homodyne data with only a relative phase cannot see coherences between
 * different total photon numbers, and the flat likelihood directions this
 * creates let the raw iteration wander inside ridges connecting physically
 * distinct states. The iteration therefore runs on the identifiable sector:
 * states block-diagonal in total photon number, for which Tr[rho Pi] equals
 * the phase-averaged-POVM probability exactly. Within that family the
 * update is the exact RrhoR map of the averaged POVM, so the likelihood is
 * non-decreasing (asserted every iteration) and the result is what
 * global_phase_average of a full reconstruction would be.
 *
 * Equal per-bin sample counts make the POVM normalization operator
 * proportional to the identity (the x integral of the projectors is exact),
 * so trace renormalization is the complete correction.
 *
 * Throws std::invalid_argument on fewer than 1000 samples. On reaching
 * max_iterations the best iterate is returned with converged = false.
 */
MlResult ml_reconstruct(const std::vector<QuadratureSample>& samples,
                        const ReconstructionConfig& config);

/**
 * Direct estimator: rho_{kl,mn} averages the pattern-kernel product
 * f_km(x1) f_ln(x2) e^{i(l-n)chi} over samples, for k+l = m+n only (other
 * coherences are unobservable and left zero). Bins at chi = 0 and pi carry
 * half weight: the scan covers [0, pi] and the density is even in chi, so
 * the half-weighted grid is exactly a uniform average over the full circle.
 *
 * The result is Hermitian and nearly unit trace but in general not positive
 * semidefinite; that is inherent to unconstrained direct estimation and is
 * why DensityMatrix defers positivity checks to validate().
 *
 * Throws std::runtime_error if the kernel orthogonality self-test exceeds
 * 1e-6, and std::invalid_argument on fewer than 1000 samples.
 */
DensityMatrix pattern_reconstruct(const std::vector<QuadratureSample>& samples,
                                  const ReconstructionConfig& config);

struct ReconstructionReport {
    double fidelity;
    double trace_distance;
    /// Recovered efficiency rho_{10,10} + rho_{01,01}.
    double eta_hat;
    /// |rho_{10,01}| / sqrt(rho_{10,10} rho_{01,01}); 1 when losses hit the
    /// coherence and the populations equally.
    double visibility;
    /// Total weight in the k+l >= 2 diagonal, spurious for this source.
    double multiphoton_weight;
};

ReconstructionReport reconstruction_report(const DensityMatrix& rho_hat,
                                           const DensityMatrix& rho_true);

} // namespace ebitsim
