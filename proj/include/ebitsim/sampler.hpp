#pragma once

#include <cstdint>
#include <vector>

#include "ebitsim/rng.hpp"
#include "ebitsim/types.hpp"

namespace ebitsim {

/**
 * One heralded detection event: the effective relative phase of its bin and
 * the quadrature readings of the two time-bins plus the vacuum calibration
 * bin.
 */
struct QuadratureSample {
    double chi;
    double x1;
    double x2;
    double x_vac;
};

/**
 * Scan protocol: n_samples events equally distributed over the phase grid.
 * chi is the single observable phase combination; scanning the preparation
 * phase or the local-oscillator phase difference produces identical data.
 */
struct ScanConfig {
    std::int64_t n_samples = 1000000;
    std::vector<double> phase_grid; // chi values in [0, pi]
    double eta = 0.605;
    double alpha = 1.0 / 1.4142135623730951;
    double beta = 1.0 / 1.4142135623730951;
    std::uint64_t seed = 1;
    bool include_vacuum_bin = true;
};

/// Uniform inclusive grid of n values over [0, pi].
std::vector<double> default_phase_grid(int n_bins);

/// Empty when valid, otherwise names the violated condition.
std::string validate_scan(const ScanConfig& config);

/**
 * Joint quadrature density of the two time-bins at effective phase chi:
 *
 *   p(x1,x2) = (1-eta) g(x1) g(x2)
 *            + eta g(x1) g(x2) [4 a^2 x1^2 + 4 b^2 x2^2 + 8 a b x1 x2 cos(chi)]
 *
 * with g(x) = sqrt(2/pi) e^{-2x^2}. Single-mode marginals are chi
 * independent; the correlation <x1 x2> = eta a b cos(chi)/2.
 */
double joint_pdf(double x1, double x2, double chi, double eta,
                 double alpha = 1.0 / 1.4142135623730951,
                 double beta = 1.0 / 1.4142135623730951);

/**
 * One draw from joint_pdf. The vacuum branch and the balanced photon branch
 * are sampled exactly (the latter through the sum/difference rotation, where
 * the photon lands in one combination with probability (1 ± cos chi)/2);
 * unbalanced amplitudes fall back to rejection sampling with a bounded
 * envelope. The rejection loop is capped at 1e4 attempts; reaching the cap
 * throws, since it means the envelope constant is wrong.
 */
std::pair<double, double> sample_pair(double chi, double eta, double alpha,
                                      double beta, Rng& rng);

/**
 * Full scan. Events are ordered by (bin, draw index); each bin uses an
 * independent RNG stream, so the dataset is reproducible from the seed
 * alone. phi_state is the preparation phase of the simulated state: bin
 * labels record the scan variable chi, while the sampled distribution sits
 * at effective phase phi_state + chi.
 */
std::vector<QuadratureSample> run_scan(const ScanConfig& config,
                                       double phi_state = 0.0);

} // namespace ebitsim
