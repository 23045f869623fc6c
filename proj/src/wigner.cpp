#include "ebitsim/wigner.hpp"

#include <cmath>

namespace ebitsim {

double w0(double x, double y) {
    return (2.0 / M_PI) * std::exp(-2.0 * (x * x + y * y));
}

double w1(double x, double y) {
    double r2 = x * x + y * y;
    return (2.0 / M_PI) * std::exp(-2.0 * r2) * (4.0 * r2 - 1.0);
}

std::pair<double, double> rotate_mode2(double x2, double y2, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    return {x2 * c - y2 * s, x2 * s + y2 * c};
}

double wigner_analytic(const PhasePoint4& p, double phi, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0))
        throw std::invalid_argument("wigner_analytic: eta must be in [0,1]");
    auto [x2p, y2p] = rotate_mode2(p.x2, p.y2, phi);
    double w0_1 = w0(p.x1, p.y1);
    double w0_2 = w0(x2p, y2p);
    double cross = 8.0 * w0_1 * w0_2 * (p.x1 * x2p + p.y1 * y2p);
    double pure = 0.5 * (cross + w1(p.x1, p.y1) * w0_2 + w0_1 * w1(x2p, y2p));
    return (1.0 - eta) * w0_1 * w0(p.x2, p.y2) + eta * pure;
}

CorrelationCoords correlation_coordinates(const PhasePoint4& p, double phi) {
    auto [x2p, y2p] = rotate_mode2(p.x2, p.y2, phi);
    const double s = 1.0 / std::sqrt(2.0);
    return {s * (p.x1 + x2p), s * (p.y1 + y2p),
            s * (p.x1 - x2p), s * (p.y1 - y2p)};
}

namespace {

int workspace_size(int nb, double max_alpha_sq) {
    int grown = static_cast<int>(std::ceil(2.6 * max_alpha_sq + 16.0));
    return std::max(nb + 8, grown);
}

// Eigendecomposition of the Hermitian generator K = i(a^dag - a) on an
// nw-dimensional space, in its real symmetric tridiagonal similarity form
// T = S^+ K S, S = diag(i^n), which has off-diagonals sqrt(n+1). The
// diagonal phases of S cancel inside parity_block, so they never appear.
void build_generator(int nw, Eigen::MatrixXd& evecs, Eigen::VectorXd& evals) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(nw, nw);
    for (int n = 0; n + 1 < nw; ++n) {
        double b = std::sqrt(double(n + 1));
        t(n, n + 1) = b;
        t(n + 1, n) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    evecs = es.eigenvectors();
    evals = es.eigenvalues();
}

// A(r e^{i theta})_{mn} for the first nb rows/columns, from the generator
// eigendecomposition: D(r) = exp(-i r K), A = D P D^+ with P the photon
// number parity, and the polar angle enters only as e^{i(theta+pi/2)(m-n)}
// on the radial block.
Eigen::MatrixXcd parity_block_impl(int nb, const Eigen::MatrixXd& evecs_top,
                                   const Eigen::MatrixXd& evecs,
                                   const Eigen::VectorXd& evals, double r,
                                   double theta) {
    const int nw = static_cast<int>(evals.size());
    Eigen::VectorXcd phase(nw);
    for (int j = 0; j < nw; ++j)
        phase[j] = std::polar(1.0, -r * evals[j]);
    Eigen::MatrixXcd rows = (evecs_top * phase.asDiagonal()) * evecs.transpose();
    Eigen::VectorXd parity(nw);
    for (int k = 0; k < nw; ++k)
        parity[k] = (k % 2 == 0) ? 1.0 : -1.0;
    Eigen::MatrixXcd g = rows * parity.asDiagonal() * rows.adjoint();
    Eigen::MatrixXcd out(nb, nb);
    for (int m = 0; m < nb; ++m)
        for (int n = 0; n < nb; ++n)
            out(m, n) = std::polar(1.0, (theta + M_PI / 2.0) * (m - n)) * g(m, n);
    return out;
}

// W = (2/pi)^2 sum rho_{kl,mn} A1_{mk} A2_{nl}
double contract_parity(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& a1,
                       const Eigen::MatrixXcd& a2, int nb) {
    complexd acc = 0.0;
    for (int k = 0; k < nb; ++k)
        for (int l = 0; l < nb; ++l)
            for (int m = 0; m < nb; ++m)
                for (int n = 0; n < nb; ++n)
                    acc += rho(k * nb + l, m * nb + n) * a1(m, k) * a2(n, l);
    return (2.0 / M_PI) * (2.0 / M_PI) * acc.real();
}

} // namespace

WignerEvaluator::WignerEvaluator(const DensityMatrix& rho, double max_alpha_sq)
    : rho_(rho.elements()),
      nb_(rho.trunc().per_mode()),
      max_alpha_sq_(max_alpha_sq) {
    if (!(max_alpha_sq >= 0))
        throw std::invalid_argument("WignerEvaluator: max_alpha_sq must be >= 0");
    nw_ = workspace_size(nb_, max_alpha_sq);
    build_generator(nw_, evecs_, evals_);
    evecs_top_ = evecs_.topRows(nb_);

    // Convergence check at the worst displacement: both modes at the
    // maximal radius, once with this workspace and once with a larger one.
    double r = std::sqrt(max_alpha_sq);
    Eigen::MatrixXd evecs_big;
    Eigen::VectorXd evals_big;
    build_generator(nw_ + 4, evecs_big, evals_big);
    Eigen::MatrixXcd a_here =
        parity_block_impl(nb_, evecs_top_, evecs_, evals_, r, 0.0);
    Eigen::MatrixXcd a_big = parity_block_impl(
        nb_, evecs_big.topRows(nb_), evecs_big, evals_big, r, 0.0);
    double w_here = contract_parity(rho_, a_here, a_here, nb_);
    double w_big = contract_parity(rho_, a_big, a_big, nb_);
    if (std::abs(w_here - w_big) > 1e-6)
        throw TruncationError(
            "displaced-parity workspace did not converge: dim " +
            std::to_string(nw_) + " vs " + std::to_string(nw_ + 4) +
            " differ by " + std::to_string(std::abs(w_here - w_big)));
}

Eigen::MatrixXcd WignerEvaluator::parity_block(double r, double theta) const {
    return parity_block_impl(nb_, evecs_top_, evecs_, evals_, r, theta);
}

const Eigen::MatrixXcd& WignerEvaluator::cached_block(int mode, double x,
                                                      double y) const {
    double r = std::hypot(x, y);
    double theta = (r > 0) ? std::atan2(y, x) : 0.0;
    ModeCache& c = cache_[mode];
    if (c.r != r || c.theta != theta) {
        c.block = parity_block(r, theta);
        c.r = r;
        c.theta = theta;
    }
    return c.block;
}

double WignerEvaluator::operator()(const PhasePoint4& p) const {
    double a1_sq = p.x1 * p.x1 + p.y1 * p.y1;
    double a2_sq = p.x2 * p.x2 + p.y2 * p.y2;
    if (a1_sq > max_alpha_sq_ * (1 + 1e-12) ||
        a2_sq > max_alpha_sq_ * (1 + 1e-12))
        throw std::invalid_argument(
            "WignerEvaluator: point outside the workspace radius");
    const Eigen::MatrixXcd& a1 = cached_block(0, p.x1, p.y1);
    const Eigen::MatrixXcd& a2 = cached_block(1, p.x2, p.y2);
    return contract_parity(rho_, a1, a2, nb_);
}

double wigner_from_rho(const DensityMatrix& rho, const PhasePoint4& p) {
    double max_sq = std::max(p.x1 * p.x1 + p.y1 * p.y1,
                             p.x2 * p.x2 + p.y2 * p.y2);
    WignerEvaluator eval(rho, max_sq);
    return eval(p);
}

const char* section_name(Section s) {
    switch (s) {
    case Section::x1y1: return "x1y1";
    case Section::x1x2: return "x1x2";
    case Section::x1y2: return "x1y2";
    case Section::xplus_yplus: return "xplus_yplus";
    case Section::xminus_yminus: return "xminus_yminus";
    }
    return "?";
}

bool section_from_name(const std::string& name, Section& out) {
    for (Section s : {Section::x1y1, Section::x1x2, Section::x1y2,
                      Section::xplus_yplus, Section::xminus_yminus}) {
        if (name == section_name(s)) {
            out = s;
            return true;
        }
    }
    return false;
}

PhasePoint4 section_point(Section s, double a1, double a2, double fixed1,
                          double fixed2, double phi) {
    switch (s) {
    case Section::x1y1:
        return {a1, a2, fixed1, fixed2}; // fixed = (x2, y2)
    case Section::x1x2:
        return {a1, fixed1, a2, fixed2}; // fixed = (y1, y2)
    case Section::x1y2:
        return {a1, fixed1, fixed2, a2}; // fixed = (y1, x2)
    case Section::xplus_yplus:
    case Section::xminus_yminus: {
        // Invert x± = (x1 ± x2')/sqrt(2) and the same for y, then undo the
        // mode-2 rotation.
        double xp, yp, xm, ym;
        if (s == Section::xplus_yplus) {
            xp = a1; yp = a2; xm = fixed1; ym = fixed2;
        } else {
            xm = a1; ym = a2; xp = fixed1; yp = fixed2;
        }
        const double inv = 1.0 / std::sqrt(2.0);
        double x1 = inv * (xp + xm), y1 = inv * (yp + ym);
        double x2p = inv * (xp - xm), y2p = inv * (yp - ym);
        auto [x2, y2] = rotate_mode2(x2p, y2p, -phi);
        return {x1, y1, x2, y2};
    }
    }
    throw std::logic_error("section_point: unknown section");
}

double axis_value(const AxisSpec& a, int i) {
    if (a.count < 2)
        throw std::invalid_argument("AxisSpec: need at least 2 points");
    return a.min + (a.max - a.min) * double(i) / double(a.count - 1);
}

namespace {

template <typename F>
WignerGrid fill_grid(Section s, const AxisSpec& axis1, const AxisSpec& axis2,
                     double fixed1, double fixed2, double phi, double eta,
                     F&& value_at) {
    WignerGrid grid{s, fixed1, fixed2, phi, eta, axis1, axis2,
                    Eigen::MatrixXd(axis1.count, axis2.count)};
    for (int i = 0; i < axis1.count; ++i) {
        double a1 = axis_value(axis1, i);
        for (int j = 0; j < axis2.count; ++j) {
            double a2 = axis_value(axis2, j);
            grid.values(i, j) =
                value_at(section_point(s, a1, a2, fixed1, fixed2, phi));
        }
    }
    return grid;
}

} // namespace

WignerGrid export_section_analytic(Section s, const AxisSpec& axis1,
                                   const AxisSpec& axis2, double fixed1,
                                   double fixed2, double phi, double eta) {
    return fill_grid(s, axis1, axis2, fixed1, fixed2, phi, eta,
                     [&](const PhasePoint4& p) {
                         return wigner_analytic(p, phi, eta);
                     });
}

WignerGrid export_section_rho(const DensityMatrix& rho, Section s,
                              const AxisSpec& axis1, const AxisSpec& axis2,
                              double fixed1, double fixed2, double phi,
                              double eta_tag) {
    // Largest |alpha|^2 any grid point can reach in either mode. The map
    // from section coordinates to the 4-D point is affine, so the maximum
    // sits at a grid corner.
    double max_alpha_sq = 0.0;
    for (double a1 : {axis1.min, axis1.max})
        for (double a2 : {axis2.min, axis2.max}) {
            PhasePoint4 p = section_point(s, a1, a2, fixed1, fixed2, phi);
            max_alpha_sq = std::max({max_alpha_sq,
                                     p.x1 * p.x1 + p.y1 * p.y1,
                                     p.x2 * p.x2 + p.y2 * p.y2});
        }
    max_alpha_sq += 1e-9;
    WignerEvaluator eval(rho, max_alpha_sq);
    return fill_grid(s, axis1, axis2, fixed1, fixed2, phi, eta_tag,
                     [&](const PhasePoint4& p) { return eval(p); });
}

} // namespace ebitsim
