#include "ebitsim/sampler.hpp"

#include <cmath>
#include <stdexcept>

namespace ebitsim {

std::vector<double> default_phase_grid(int n_bins) {
    if (n_bins < 1)
        throw std::invalid_argument("default_phase_grid: need at least 1 bin");
    std::vector<double> grid(n_bins);
    if (n_bins == 1) {
        grid[0] = 0.0;
        return grid;
    }
    for (int k = 0; k < n_bins; ++k)
        grid[k] = M_PI * double(k) / double(n_bins - 1);
    return grid;
}

std::string validate_scan(const ScanConfig& c) {
    if (c.n_samples < 1)
        return "n_samples must be >= 1";
    if (c.phase_grid.empty())
        return "phase_grid must not be empty";
    for (double chi : c.phase_grid)
        if (!(chi >= 0.0 && chi <= M_PI + 1e-12))
            return "phase_grid values must lie in [0, pi]";
    if (c.n_samples % static_cast<std::int64_t>(c.phase_grid.size()) != 0)
        return "n_samples must be divisible by the number of phase bins";
    if (!(c.eta >= 0.0 && c.eta <= 1.0))
        return "eta must be in [0,1]";
    if (!(c.alpha >= 0.0) || !(c.beta >= 0.0))
        return "alpha and beta must be >= 0";
    if (std::abs(c.alpha * c.alpha + c.beta * c.beta - 1.0) > 1e-10)
        return "alpha^2 + beta^2 must be 1";
    return {};
}

namespace {

inline double gaussian_marginal(double x) {
    return std::sqrt(2.0 / M_PI) * std::exp(-2.0 * x * x);
}

// |x| distributed as the one-photon quadrature law |psi_1|^2: x^2 follows
// Gamma(3/2, rate 2), assembled from its chi-square and exponential parts.
inline double photon_quadrature(Rng& rng) {
    double z = rng.normal();
    double g = 0.25 * z * z + 0.5 * rng.exponential();
    double x = std::sqrt(g);
    return (rng.uniform() < 0.5) ? -x : x;
}

inline double vacuum_quadrature(Rng& rng) { return 0.5 * rng.normal(); }

} // namespace

double joint_pdf(double x1, double x2, double chi, double eta, double alpha,
                 double beta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("joint_pdf: eta must be in [0,1]");
    if (std::abs(alpha * alpha + beta * beta - 1.0) > 1e-10)
        throw std::invalid_argument("joint_pdf: alpha^2 + beta^2 must be 1");
    double gg = gaussian_marginal(x1) * gaussian_marginal(x2);
    double photon = 4.0 * alpha * alpha * x1 * x1 +
                    4.0 * beta * beta * x2 * x2 +
                    8.0 * alpha * beta * x1 * x2 * std::cos(chi);
    return (1.0 - eta) * gg + eta * gg * photon;
}

std::pair<double, double> sample_pair(double chi, double eta, double alpha,
                                      double beta, Rng& rng) {
    if (rng.uniform() >= eta)
        return {vacuum_quadrature(rng), vacuum_quadrature(rng)};

    if (std::abs(alpha - beta) < 1e-12) {
        // In the sum/difference coordinates u,v = (x1 ± x2)/sqrt(2) the
        // balanced photon density factorizes into a two-component mixture:
        // photon in u with weight (1 + cos chi)/2, else in v.
        double u, v;
        if (rng.uniform() < 0.5 * (1.0 + std::cos(chi))) {
            u = photon_quadrature(rng);
            v = vacuum_quadrature(rng);
        } else {
            u = vacuum_quadrature(rng);
            v = photon_quadrature(rng);
        }
        const double s = 1.0 / std::sqrt(2.0);
        return {s * (u + v), s * (u - v)};
    }

    // Rejection sampling for unbalanced amplitudes. Proposal: photon in a
    // uniformly chosen mode, q = g(x1)g(x2) 2(x1^2+x2^2). The target photon
    // density divided by q is bounded by m below.
    double cos_chi = std::cos(chi);
    double m = 2.0 * (std::max(alpha, beta) * std::max(alpha, beta) +
                      alpha * beta);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        double x1, x2;
        if (rng.uniform() < 0.5) {
            x1 = photon_quadrature(rng);
            x2 = vacuum_quadrature(rng);
        } else {
            x1 = vacuum_quadrature(rng);
            x2 = photon_quadrature(rng);
        }
        double target = 4.0 * alpha * alpha * x1 * x1 +
                        4.0 * beta * beta * x2 * x2 +
                        8.0 * alpha * beta * x1 * x2 * cos_chi;
        double proposal = 2.0 * (x1 * x1 + x2 * x2);
        if (rng.uniform() * m * proposal < target)
            return {x1, x2};
    }
    throw std::runtime_error("sample_pair: rejection cap reached, envelope "
                             "constant violated");
}

std::vector<QuadratureSample> run_scan(const ScanConfig& config,
                                       double phi_state) {
    std::string bad = validate_scan(config);
    if (!bad.empty())
        throw std::invalid_argument("run_scan: " + bad);

    const std::int64_t per_bin =
        config.n_samples / static_cast<std::int64_t>(config.phase_grid.size());
    std::vector<QuadratureSample> out;
    out.reserve(static_cast<std::size_t>(config.n_samples));
    for (std::size_t bin = 0; bin < config.phase_grid.size(); ++bin) {
        Rng rng = Rng::for_bin(config.seed, bin);
        double chi_label = config.phase_grid[bin];
        double chi_effective = phi_state + chi_label;
        for (std::int64_t i = 0; i < per_bin; ++i) {
            auto [x1, x2] = sample_pair(chi_effective, config.eta,
                                        config.alpha, config.beta, rng);
            double x_vac =
                config.include_vacuum_bin ? vacuum_quadrature(rng) : 0.0;
            out.push_back({chi_label, x1, x2, x_vac});
        }
    }
    return out;
}

} // namespace ebitsim
