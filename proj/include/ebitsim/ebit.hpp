#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "ebitsim/types.hpp"

namespace ebitsim {

/**
 * Physical parameters of the preparation stage. The heralded state is a
 * single photon delocalized over two consecutive time bins; its relative
 * phase phi is set by the pump repetition period and the preparation
 * interferometer delay, phi = Omega_p (T_p - T/2) with Omega_p = 2 pi c / lambda.
 */
struct ExperimentParams {
    double pump_wavelength_m = 393e-9;
    double pulse_separation_s = 12.3e-9;
    double interferometer_delay_s = 2 * 12.3e-9;
    double arm_transmission = 1.0;
    double efficiency = 0.605;
    std::optional<double> idler_bandwidth_hz;
    /// When set, used directly instead of the delay-derived phase.
    std::optional<double> phi_rad;
};

/// Empty string when valid, otherwise the name of the offending field.
std::string validate_params(const ExperimentParams& p);

/**
 * Relative ebit phase phi = Omega_p (T_p - T/2) reduced to [0, 2pi).
 *
 * Omega_p T_p is of order 6e7 rad, so the reduction is done on the cycle
 * count c (T_p - T/2) / lambda in extended precision before taking the
 * fractional part; reducing the raw angle would lose ~9 digits.
 *
 * The heralding bandwidth condition sigma_i >> pi/T_p suppresses first-order
 * interference between the bins. Violations do not change the simulated
 * state, so they are reported through `warn` rather than as errors.
 */
double phi_from_delays(const ExperimentParams& params,
                       const std::function<void(const std::string&)>& warn = {});

/**
 * Heralded amplitudes when the long interferometer arm has amplitude
 * transmission t: alpha = 1/sqrt(1+t^2), beta = t/sqrt(1+t^2). Loss in one
 * arm only rebalances the superposition (and lowers the rate); the heralded
 * state stays pure.
 */
std::pair<double, double> arm_loss_amplitudes(double t);

/// alpha |1,0> + beta e^{-i phi} |0,1> on the truncated basis.
TwoModeKet make_ebit(double alpha, double beta, double phi,
                     const FockTruncation& trunc);

/**
 * Efficiency-degraded state rho = (1-eta)|00><00| + eta |psi><psi|.
 * Preparation and detection losses act on the photon as a whole, so both
 * diagonal one-photon weights and the coherence scale by the same eta.
 */
DensityMatrix heralded_state(const TwoModeKet& ket, double eta);

} // namespace ebitsim
