#include "ebitsim/ebit.hpp"

#include <cmath>

namespace ebitsim {

namespace {
constexpr double kSpeedOfLight = 299792458.0; // m/s
}

std::string validate_params(const ExperimentParams& p) {
    if (!(p.pump_wavelength_m > 0))
        return "pump_wavelength_m";
    if (!(p.pulse_separation_s > 0))
        return "pulse_separation_s";
    if (!(p.interferometer_delay_s >= 0))
        return "interferometer_delay_s";
    if (!(p.arm_transmission >= 0 && p.arm_transmission <= 1))
        return "arm_transmission";
    if (!(p.efficiency >= 0 && p.efficiency <= 1))
        return "efficiency";
    if (p.idler_bandwidth_hz && !(*p.idler_bandwidth_hz > 0))
        return "idler_bandwidth_hz";
    if (p.phi_rad && !std::isfinite(*p.phi_rad))
        return "phi_rad";
    return {};
}

double phi_from_delays(const ExperimentParams& params,
                       const std::function<void(const std::string&)>& warn) {
    std::string bad = validate_params(params);
    if (!bad.empty())
        throw std::invalid_argument("phi_from_delays: invalid " + bad);

    if (warn && params.idler_bandwidth_hz) {
        double threshold = M_PI / params.pulse_separation_s;
        if (*params.idler_bandwidth_hz <= threshold)
            warn("idler bandwidth " + std::to_string(*params.idler_bandwidth_hz) +
                 " Hz does not exceed pi/T_p = " + std::to_string(threshold) +
                 " Hz; first-order interference between bins is not suppressed");
    }

    if (params.phi_rad) {
        double two_pi = 2.0 * M_PI;
        double phi = std::fmod(*params.phi_rad, two_pi);
        if (phi < 0)
            phi += two_pi;
        return phi;
    }

    // Cycle count n = c (T_p - T/2) / lambda; phi = 2 pi frac(n). The
    // halving of T and the subtraction are exact near T = 2 T_p, so the
    // fractional part keeps full precision even though n ~ 1e7.
    long double n_cycles = (long double)kSpeedOfLight *
                           ((long double)params.pulse_separation_s -
                            (long double)params.interferometer_delay_s / 2.0L) /
                           (long double)params.pump_wavelength_m;
    long double frac = n_cycles - std::floor(n_cycles);
    double phi = static_cast<double>(2.0L * (long double)M_PI * frac);
    if (phi >= 2.0 * M_PI) // guard against rounding up at the wrap point
        phi -= 2.0 * M_PI;
    return phi;
}

std::pair<double, double> arm_loss_amplitudes(double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("arm_loss_amplitudes: t must be in [0,1]");
    double norm = std::sqrt(1.0 + t * t);
    return {1.0 / norm, t / norm};
}

TwoModeKet make_ebit(double alpha, double beta, double phi,
                     const FockTruncation& trunc) {
    if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-10)
        throw std::invalid_argument("make_ebit: alpha^2 + beta^2 must be 1");
    if (alpha < 0 || beta < 0)
        throw std::invalid_argument("make_ebit: amplitudes must be >= 0, the "
                                    "relative phase is carried by phi");
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(trunc.dim());
    amps[trunc.flat(1, 0)] = alpha;
    amps[trunc.flat(0, 1)] = beta * std::polar(1.0, -phi);
    return TwoModeKet(trunc, std::move(amps));
}

DensityMatrix heralded_state(const TwoModeKet& ket, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("heralded_state: eta must be in [0,1]");
    const FockTruncation& t = ket.trunc;
    Eigen::MatrixXcd rho = eta * (ket.amplitudes * ket.amplitudes.adjoint());
    rho(t.flat(0, 0), t.flat(0, 0)) += 1.0 - eta;
    return DensityMatrix(t, std::move(rho));
}

} // namespace ebitsim
