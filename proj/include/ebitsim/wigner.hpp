#pragma once

#include <utility>

#include "ebitsim/types.hpp"

namespace ebitsim {

/// One point of the two-mode phase space, vacuum variance 1/4 in every axis.
struct PhasePoint4 {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

/// Vacuum Wigner function (2/pi) e^{-2x^2-2y^2}.
double w0(double x, double y);

/// One-photon Wigner function (2/pi) e^{-2x^2-2y^2} (4x^2+4y^2-1).
double w1(double x, double y);

/// Phase-space rotation of the second time-bin:
/// x2' = x2 cos(phi) - y2 sin(phi), y2' = x2 sin(phi) + y2 cos(phi).
std::pair<double, double> rotate_mode2(double x2, double y2, double phi);

/**
 * Closed-form 4-D Wigner function of the efficiency-degraded balanced ebit
 * (alpha = beta = 1/sqrt(2)) with relative phase phi:
 *
 *   W = (1-eta) W0(x1,y1) W0(x2,y2)
 *     + eta/2 [ 8 W0(x1,y1) W0(x2',y2') (x1 x2' + y1 y2')
 *               + W1(x1,y1) W0(x2',y2') + W0(x1,y1) W1(x2',y2') ]
 *
 * with (x2',y2') the rotated mode-2 coordinates. Unbalanced states have no
 * closed form here; use wigner_from_rho.
 */
double wigner_analytic(const PhasePoint4& p, double phi, double eta);

/// Correlation quadratures x± = (x1 ± x2')/sqrt(2), y± = (y1 ± y2')/sqrt(2).
struct CorrelationCoords {
    double x_plus, y_plus, x_minus, y_minus;
};
CorrelationCoords correlation_coordinates(const PhasePoint4& p, double phi);

/// Raised when the displaced-parity workspace fails its convergence check.
struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Wigner values of an arbitrary density matrix via the displaced-parity
 * expectation W(a1,a2) = (2/pi)^2 Tr[rho D(a1)D(a2) P P D(a1)^+ D(a2)^+],
 * a_j = x_j + i y_j.
 *
 * Displacements are built on an enlarged workspace. The required size grows
 * with the displacement: empirically dim ~ 2.6|a|^2 + 16 keeps the error
 * below 1e-7, far above the fixed margins one might guess. The constructor
 * sizes the workspace from max_alpha_sq, then verifies convergence by
 * comparing against a workspace four states larger at the worst radius;
 * disagreement beyond 1e-6 raises TruncationError.
 */
class WignerEvaluator {
  public:
    WignerEvaluator(const DensityMatrix& rho, double max_alpha_sq);

    /// |x_j + i y_j|^2 must be <= max_alpha_sq given at construction.
    double operator()(const PhasePoint4& p) const;

    int workspace_dim() const { return nw_; }

  private:
    struct ModeCache {
        double r = -1, theta = 0;
        Eigen::MatrixXcd block;
    };

    Eigen::MatrixXcd parity_block(double r, double theta) const;
    const Eigen::MatrixXcd& cached_block(int mode, double x, double y) const;

    Eigen::MatrixXcd rho_;
    int nb_;
    int nw_;
    double max_alpha_sq_;
    Eigen::MatrixXd evecs_;      // eigenvectors of the real tridiagonal form
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_top_;  // first nb_ rows of evecs_
    mutable ModeCache cache_[2];
};

/// One-shot convenience wrapper around WignerEvaluator.
double wigner_from_rho(const DensityMatrix& rho, const PhasePoint4& p);

/// Named 2-D sections through the 4-D phase space.
enum class Section { x1y1, x1x2, x1y2, xplus_yplus, xminus_yminus };

const char* section_name(Section s);
bool section_from_name(const std::string& name, Section& out);

/// Uniform inclusive grid axis.
struct AxisSpec {
    double min = -3.0, max = 3.0;
    int count = 121;
};

/// i-th coordinate of the inclusive axis; requires count >= 2.
double axis_value(const AxisSpec& a, int i);

/**
 * Wigner values over a rectangular grid of one section. axis1 varies along
 * rows of `values`, axis2 along columns. fixed1/fixed2 are the two held
 * coordinates; for the correlation sections they are the conjugate pair and
 * phi enters the coordinate mapping itself.
 */
struct WignerGrid {
    Section section;
    double fixed1 = 0, fixed2 = 0;
    double phi = 0, eta = 1;
    AxisSpec axis1, axis2;
    Eigen::MatrixXd values;
};

/// Map section coordinates (a1, a2) plus the fixed pair to a 4-D point.
PhasePoint4 section_point(Section s, double a1, double a2, double fixed1,
                          double fixed2, double phi);

WignerGrid export_section_analytic(Section s, const AxisSpec& axis1,
                                   const AxisSpec& axis2, double fixed1,
                                   double fixed2, double phi, double eta);

/// eta_tag only labels the output; the state itself is rho.
WignerGrid export_section_rho(const DensityMatrix& rho, Section s,
                              const AxisSpec& axis1, const AxisSpec& axis2,
                              double fixed1, double fixed2, double phi,
                              double eta_tag);

} // namespace ebitsim
