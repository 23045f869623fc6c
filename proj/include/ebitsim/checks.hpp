#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ebitsim/sampler.hpp"
#include "ebitsim/types.hpp"

namespace ebitsim {

/// One named pass/fail outcome with the measured numbers in `detail`.
struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// ------------------------------------------------- statistical utilities

/**
 * Regularized upper incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a), by the
 * standard series (x < a+1) / continued-fraction (x >= a+1) split. Relative
 * accuracy ~1e-14 over the range used here (chi-squared tails).
 */
double regularized_gamma_q(double a, double x);

/// Survival probability P(X >= chi2) for a chi-squared variable with df
/// degrees of freedom: Q(df/2, chi2/2).
double chi_squared_pvalue(double chi2, int df);

/// Fixed 5-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre5 {
    double x[5];
    double w[5];
};
const GaussLegendre5& gauss_legendre5();

/// Two-sample Kolmogorov-Smirnov statistic sup|F_a - F_b|. Sorts both
/// inputs in place.
double ks_two_sample(std::vector<double>& a, std::vector<double>& b);

/**
 * Chi-squared goodness of fit of (x1,x2) pairs against joint_pdf at phase
 * chi: 40x40 cells on [-3,3]^2, per-cell expectations by 5x5 Gauss-Legendre,
 * cells with expected count below 5 pooled into one group together with the
 * out-of-range remainder. No parameters are fitted, so df = groups - 1.
 */
struct GofResult {
    double chi2 = 0;
    int df = 0;
    double p = 0;
};
GofResult joint_gof(const std::vector<QuadratureSample>& samples, double chi,
                    double eta, double alpha, double beta);

// ----------------------------------------------------------- check suites

/// Called with each result as it completes, so long runs can stream output.
using CheckSink = std::function<void(const CheckResult&)>;

/**
 * Fast per-module self-checks: quadrature orthonormality, closed-form
 * cross-checks, sampler moments, kernel orthogonality, estimator smoke
 * tests, serialization round-trips. `quick` trims the statistical sample
 * counts (seconds instead of tens of seconds).
 */
std::vector<CheckResult> run_invariant_checks(bool quick,
                                              const CheckSink& progress = {});

/**
 * The eight end-to-end criteria at full dataset sizes (two 1e6-sample
 * reconstructions plus several auxiliary scans; takes a few minutes).
 * Tolerances are pinned inside, sized as >= 4.5 sigma of the estimator in
 * question so the outcomes are seed-robust.
 */
std::vector<CheckResult> run_acceptance_criteria(const CheckSink& progress = {});

} // namespace ebitsim
