#include "ebitsim/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "ebitsim/fock.hpp"
#include "ebitsim/pattern.hpp"

namespace ebitsim {

std::string validate_reconstruction(const ReconstructionConfig& c) {
    if (c.n_max < 1)
        return "n_max must be >= 1";
    if (c.max_iterations < 1)
        return "max_iterations must be >= 1";
    if (!(c.convergence_tol > 0))
        return "convergence_tol must be > 0";
    if (c.quadrature_points < 9 || c.quadrature_points % 2 == 0)
        return "quadrature_points must be odd and >= 9";
    if (!(c.quadrature_halfwidth > 1.0))
        return "quadrature_halfwidth must exceed 1";
    return {};
}

namespace {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/**
 * Canonical ordering of the (k,l) basis pairs by total photon number
 * s = k+l, then by k. Block-diagonal states are contiguous d_s x d_s
 * blocks in this ordering.
 */
struct SectorLayout {
    int nb;                       // states per mode
    std::vector<int> offset;      // first position of each sector
    std::vector<int> dim;         // sector sizes
    std::vector<int> mode1;       // k of each position
    std::vector<int> mode2;       // l of each position

    explicit SectorLayout(int n_max) : nb(n_max + 1) {
        int n_sectors = 2 * n_max + 1;
        offset.resize(n_sectors);
        dim.resize(n_sectors);
        int pos = 0;
        for (int s = 0; s < n_sectors; ++s) {
            offset[s] = pos;
            int k_lo = std::max(0, s - n_max);
            int k_hi = std::min(n_max, s);
            dim[s] = k_hi - k_lo + 1;
            for (int k = k_lo; k <= k_hi; ++k) {
                mode1.push_back(k);
                mode2.push_back(s - k);
                ++pos;
            }
        }
    }

    int total() const { return nb * nb; }
    int n_sectors() const { return static_cast<int>(dim.size()); }
};

/// Samples of one phase bin: pair-product rows plus the bin phase.
struct ChiGroup {
    double chi;
    RowMat u; // total() x count, rows in SectorLayout order
};

std::vector<ChiGroup> group_samples(const std::vector<QuadratureSample>& samples,
                                    const SectorLayout& lay) {
    std::map<double, std::vector<const QuadratureSample*>> by_chi;
    for (const auto& s : samples)
        by_chi[s.chi].push_back(&s);

    std::vector<ChiGroup> groups;
    groups.reserve(by_chi.size());
    const int n_max = lay.nb - 1;
    for (auto& [chi, rows] : by_chi) {
        ChiGroup g;
        g.chi = chi;
        g.u.resize(lay.total(), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t j = 0; j < rows.size(); ++j) {
            Eigen::VectorXd p1 = psi_table(n_max, rows[j]->x1);
            Eigen::VectorXd p2 = psi_table(n_max, rows[j]->x2);
            for (int r = 0; r < lay.total(); ++r)
                g.u(r, static_cast<Eigen::Index>(j)) =
                    p1[lay.mode1[r]] * p2[lay.mode2[r]];
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

/**
 * Mode-2 phase factor of the (k,l) basis pair at scan phase chi. The scan
 * convention turns the analysis phase in the same sense the preparation
 * phase enters, so the coherence rho_{10,01} = C shows up in the x1 x2
 * correlations as Re[C e^{+i chi}] = |C| cos(arg C + chi). Only phi = 0
 * and phi = pi data are blind to this sign.
 */
Eigen::VectorXcd bin_phases(int nb, double chi) {
    Eigen::VectorXcd q(nb);
    for (int l = 0; l < nb; ++l)
        q[l] = std::polar(1.0, l * chi);
    return q;
}

} // namespace

MlResult ml_reconstruct(const std::vector<QuadratureSample>& samples,
                        const ReconstructionConfig& config) {
    std::string bad = validate_reconstruction(config);
    if (!bad.empty())
        throw std::invalid_argument("ml_reconstruct: " + bad);
    if (samples.size() < 1000)
        throw std::invalid_argument("ml_reconstruct: need at least 1000 "
                                    "samples, got " +
                                    std::to_string(samples.size()));

    const SectorLayout lay(config.n_max);
    const int n_sectors = lay.n_sectors();
    const std::vector<ChiGroup> groups = group_samples(samples, lay);
    const double n_total = static_cast<double>(samples.size());

    // Per-group phase factors of each layout position.
    std::vector<Eigen::VectorXcd> phases(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        Eigen::VectorXcd ql = bin_phases(lay.nb, groups[g].chi);
        phases[g].resize(lay.total());
        for (int r = 0; r < lay.total(); ++r)
            phases[g][r] = ql[lay.mode2[r]];
    }

    // Maximally mixed start: block-diagonal, full rank, basis independent.
    std::vector<Eigen::MatrixXcd> rho(n_sectors);
    for (int s = 0; s < n_sectors; ++s)
        rho[s] = Eigen::MatrixXcd::Identity(lay.dim[s], lay.dim[s]) /
                 double(lay.total());

    std::vector<Eigen::MatrixXd> rho_rot(n_sectors);   // Re[q* rho q] per group
    std::vector<Eigen::MatrixXcd> r_op(n_sectors);     // accumulated R blocks
    std::vector<Eigen::MatrixXd> s_acc(n_sectors);     // per-group scratch
    Eigen::ArrayXd w;

    // Last accepted state, its likelihood, its R operator, and its
    // per-group sample probabilities. Full R rho R steps are fast but not
    // monotone: they can ascend into a shoulder of the likelihood whose
    // only exits are too curved for any multiplicative step. When a full
    // step fails, the rescue is a line search along the straight mixture
    // toward the top eigenvector of R. The likelihood is concave over the
    // state set, so that segment ascends whenever the iterate is not yet
    // optimal, and it restores directions the multiplicative update has
    // driven to the edge of the cone.
    std::vector<Eigen::MatrixXcd> acc_rho;
    std::vector<Eigen::MatrixXcd> acc_r;
    std::vector<Eigen::ArrayXd> acc_p(groups.size());
    std::vector<Eigen::ArrayXd> cur_p(groups.size());
    double acc_ll = -std::numeric_limits<double>::infinity();
    double eps = 1.0;
    bool full_step = false; // current rho came from an undiluted step
    int accepts = 0;
    double ll = acc_ll;
    int it = 0;
    bool converged = false;

    // Early steps from the flat start are diluted: the first undiluted
    // updates swing hard enough to drive still-needed directions to the
    // edge of the state space, from where the multiplicative update only
    // crawls back. The ramp reaches full steps once the iterate has
    // oriented itself.
    constexpr int warmup = 16;
    auto step_eps = [](int accepted) {
        return accepted >= warmup ? 1.0 : (accepted + 1) / double(warmup);
    };

    auto block_distance = [&](const std::vector<Eigen::MatrixXcd>& a,
                              const std::vector<Eigen::MatrixXcd>& b) {
        double d = 0.0;
        for (int s = 0; s < n_sectors; ++s) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
                a[s] - b[s], Eigen::EigenvaluesOnly);
            d += 0.5 * es.eigenvalues().cwiseAbs().sum();
        }
        return d;
    };
    auto renormalize = [&](std::vector<Eigen::MatrixXcd>& m) {
        double trace = 0.0;
        for (int s = 0; s < n_sectors; ++s) {
            m[s] = 0.5 * (m[s] + m[s].adjoint().eval());
            trace += m[s].trace().real();
        }
        for (int s = 0; s < n_sectors; ++s)
            m[s] /= trace;
        // The multiplicative update can never revive an eigenvalue once it
        // reaches zero, and the first few steps from the flat start swing
        // hard enough to crush directions the optimum still needs. A
        // vanishing floor under the spectrum keeps every direction alive;
        // it biases the result by orders of magnitude less than the
        // convergence tolerance.
        constexpr double floor = 1e-12;
        for (int s = 0; s < n_sectors; ++s) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m[s]);
            if (es.eigenvalues().minCoeff() >= floor)
                continue;
            Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
            m[s] = es.eigenvectors() * ev.asDiagonal() *
                   es.eigenvectors().adjoint();
        }
    };

    for (; it < config.max_iterations; ++it) {
        for (int s = 0; s < n_sectors; ++s)
            r_op[s].setZero(lay.dim[s], lay.dim[s]);
        ll = 0.0;

        for (std::size_t g = 0; g < groups.size(); ++g) {
            const RowMat& u = groups[g].u;
            const Eigen::VectorXcd& q = phases[g];
            const Eigen::Index count = u.cols();

            // Probability of each sample under the current state:
            // w_j = sum over sector blocks of u^T Re[q* rho q] u.
            for (int s = 0; s < n_sectors; ++s) {
                const int off = lay.offset[s], d = lay.dim[s];
                rho_rot[s].resize(d, d);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        rho_rot[s](a, b) = (std::conj(q[off + a]) *
                                            rho[s](a, b) * q[off + b])
                                               .real();
            }
            w.setZero(count);
            for (int s = 0; s < n_sectors; ++s) {
                const int off = lay.offset[s], d = lay.dim[s];
                const Eigen::MatrixXd& rt = rho_rot[s];
                for (int a = 0; a < d; ++a) {
                    auto ra = u.row(off + a).transpose().array();
                    w += rt(a, a) * ra.square();
                    for (int b = a + 1; b < d; ++b)
                        w += (2.0 * rt(a, b)) * ra *
                             u.row(off + b).transpose().array();
                }
            }
            w = w.max(1e-300);
            cur_p[g] = w;
            ll += w.log().sum();
            w = w.inverse();

            // R += sum_j |v_j><v_j| / w_j restricted to the blocks.
            for (int s = 0; s < n_sectors; ++s) {
                const int off = lay.offset[s], d = lay.dim[s];
                Eigen::MatrixXd& sa = s_acc[s];
                sa.resize(d, d);
                for (int a = 0; a < d; ++a) {
                    auto ra = u.row(off + a).transpose().array();
                    sa(a, a) = (w * ra.square()).sum();
                    for (int b = a + 1; b < d; ++b) {
                        sa(a, b) = (w * ra *
                                    u.row(off + b).transpose().array())
                                       .sum();
                        sa(b, a) = sa(a, b);
                    }
                }
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        r_op[s](a, b) += q[off + a] * sa(a, b) *
                                         std::conj(q[off + b]);
            }
        }

        for (int s = 0; s < n_sectors; ++s)
            r_op[s] /= n_total; // scale only for conditioning

        // Optimality certificate and escape hatch in one. The accepted
        // state maximizes the likelihood iff R(acc) <= I on the whole
        // space; the top eigenvalue of acc_r measures the remaining
        // ascent, since the mixture toward its eigenvector v gains
        // n (lam - 1) per unit step at t = 0 and the likelihood is
        // concave over the state set. Returns true when no resolvable
        // ascent is left, otherwise stores the best mixture in rho.
        // Both checks are needed: a full R rho R step can sit still on a
        // shoulder of the likelihood (a fixed point of the map with
        // crushed eigenvalues) that the certificate rejects.
        auto fw_step = [&]() -> bool {
            int s_best = 0;
            Eigen::VectorXcd v_best;
            double lam = -std::numeric_limits<double>::infinity();
            for (int s = 0; s < n_sectors; ++s) {
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(acc_r[s]);
                double top = es.eigenvalues().maxCoeff();
                if (top > lam) {
                    lam = top;
                    s_best = s;
                    v_best = es.eigenvectors().col(lay.dim[s] - 1);
                }
            }
            if (lam - 1.0 < 1e-10)
                return true;

            // Probability of each sample under the candidate pure state.
            std::vector<Eigen::ArrayXd> pure_p(groups.size());
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const RowMat& u = groups[g].u;
                const Eigen::VectorXcd& q = phases[g];
                const int off = lay.offset[s_best], d = lay.dim[s_best];
                Eigen::ArrayXcd amp =
                    Eigen::ArrayXcd::Zero(groups[g].u.cols());
                for (int a = 0; a < d; ++a)
                    amp += (std::conj(q[off + a]) * v_best[a]) *
                           u.row(off + a)
                               .transpose()
                               .array()
                               .cast<complexd>();
                pure_p[g] = amp.abs2().max(1e-300);
            }

            // d/dt of sum log((1-t) p + t q) falls monotonically in t and
            // starts positive, so bisect for its root.
            auto slope = [&](double t) {
                double d = 0.0;
                for (std::size_t g = 0; g < groups.size(); ++g)
                    d += ((pure_p[g] - acc_p[g]) /
                          ((1.0 - t) * acc_p[g] + t * pure_p[g]))
                             .sum();
                return d;
            };
            double lo = 0.0, hi = 1.0 - 1e-9;
            if (slope(hi) >= 0.0) {
                lo = hi;
            } else {
                for (int round = 0; round < 60; ++round) {
                    double mid = 0.5 * (lo + hi);
                    (slope(mid) > 0.0 ? lo : hi) = mid;
                }
            }
            double t_star = lo;
            double ll_mix = 0.0;
            for (std::size_t g = 0; g < groups.size(); ++g)
                ll_mix += ((1.0 - t_star) * acc_p[g] + t_star * pure_p[g])
                              .log()
                              .sum();
            if (!std::isfinite(ll_mix))
                throw std::runtime_error(
                    "ml_reconstruct: likelihood ascent failed, iteration " +
                    std::to_string(it));
            if (ll_mix <= acc_ll + 1e-9 * (1.0 + std::abs(acc_ll)))
                return true; // gain too small to resolve in double sums

            rho = acc_rho;
            for (int s = 0; s < n_sectors; ++s)
                rho[s] *= 1.0 - t_star;
            rho[s_best] += t_star * (v_best * v_best.adjoint());
            full_step = false;
            renormalize(rho);
            return false;
        };

        if (ll + 1e-10 * (1.0 + std::abs(ll)) >= acc_ll) {
            const bool small_move =
                full_step &&
                block_distance(rho, acc_rho) < config.convergence_tol;
            acc_rho = rho;
            acc_r = r_op;
            acc_ll = ll;
            acc_p.swap(cur_p);
            if (small_move) {
                if (fw_step()) {
                    converged = true;
                    ++it;
                    break;
                }
                continue; // certificate failed: escape the shoulder
            }
            eps = step_eps(accepts++);
            for (int s = 0; s < n_sectors; ++s) {
                Eigen::MatrixXcd d =
                    (1.0 - eps) * Eigen::MatrixXcd::Identity(lay.dim[s],
                                                             lay.dim[s]) +
                    eps * acc_r[s];
                rho[s] = d * acc_rho[s] * d;
            }
            full_step = eps == 1.0;
            renormalize(rho);
            continue;
        }

        // The proposed step lowered the likelihood: the map overshot.
        // Resume from the accepted state along the guaranteed-ascent line.
        if (fw_step()) {
            converged = true;
            ++it;
            break;
        }
    }
    if (!acc_rho.empty())
        rho = std::move(acc_rho);
    ll = acc_ll;

    // Back to the natural flat (k,l) ordering.
    const FockTruncation t(config.n_max);
    Eigen::MatrixXcd full =
        Eigen::MatrixXcd::Zero(lay.total(), lay.total());
    for (int s = 0; s < n_sectors; ++s) {
        const int off = lay.offset[s], d = lay.dim[s];
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                int fa = t.flat(lay.mode1[off + a], lay.mode2[off + a]);
                int fb = t.flat(lay.mode1[off + b], lay.mode2[off + b]);
                full(fa, fb) = rho[s](a, b);
            }
    }
    full = 0.5 * (full + full.adjoint().eval());
    return MlResult{DensityMatrix(FockTruncation(config.n_max), std::move(full)),
                    it, ll, converged};
}

DensityMatrix pattern_reconstruct(const std::vector<QuadratureSample>& samples,
                                  const ReconstructionConfig& config) {
    std::string bad = validate_reconstruction(config);
    if (!bad.empty())
        throw std::invalid_argument("pattern_reconstruct: " + bad);
    if (samples.size() < 1000)
        throw std::invalid_argument("pattern_reconstruct: need at least 1000 "
                                    "samples, got " +
                                    std::to_string(samples.size()));

    PatternTable table(config.n_max, config.quadrature_points,
                       config.quadrature_halfwidth);
    if (table.orthogonality_defect() > 1e-6)
        throw std::runtime_error(
            "pattern_reconstruct: kernel orthogonality self-test failed, "
            "defect " +
            std::to_string(table.orthogonality_defect()));

    const FockTruncation trunc(config.n_max);
    const int nb = trunc.per_mode();

    // Phase factors and estimator weights per distinct bin. Endpoint bins
    // represent one point of the symmetric continuation to [0, 2pi), inner
    // bins two; halving the endpoints makes the circle average uniform.
    struct BinData {
        double weight;
        Eigen::VectorXcd exp_l; // e^{i j chi}, j = -n_max..n_max shifted
    };
    std::map<double, BinData> bins;
    for (const auto& s : samples) {
        if (bins.count(s.chi))
            continue;
        BinData b;
        bool endpoint = std::abs(s.chi) < 1e-12 ||
                        std::abs(s.chi - M_PI) < 1e-12;
        b.weight = endpoint ? 0.5 : 1.0;
        b.exp_l.resize(2 * nb - 1);
        for (int j = -(nb - 1); j <= nb - 1; ++j)
            b.exp_l[j + nb - 1] = std::polar(1.0, j * s.chi);
        bins[s.chi] = std::move(b);
    }

    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(trunc.dim(), trunc.dim());
    Eigen::MatrixXd f1(nb, nb), f2(nb, nb);
    double weight_sum = 0.0;
    for (const auto& s : samples) {
        const BinData& b = bins[s.chi];
        table.eval_all(s.x1, f1);
        table.eval_all(s.x2, f2);
        weight_sum += b.weight;
        for (int k = 0; k < nb; ++k)
            for (int l = 0; l < nb; ++l)
                for (int m = 0; m < nb; ++m) {
                    int n = k + l - m;
                    if (n < 0 || n >= nb)
                        continue;
                    acc(trunc.flat(k, l), trunc.flat(m, n)) +=
                        b.weight * f1(k, m) * f2(l, n) *
                        b.exp_l[(l - n) + nb - 1];
                }
    }
    acc /= weight_sum;
    acc = 0.5 * (acc + acc.adjoint().eval());
    return DensityMatrix(trunc, std::move(acc));
}

ReconstructionReport reconstruction_report(const DensityMatrix& rho_hat,
                                           const DensityMatrix& rho_true) {
    if (rho_hat.trunc() != rho_true.trunc())
        throw std::invalid_argument("reconstruction_report: truncation mismatch");
    ReconstructionReport rep{};
    rep.fidelity = fidelity(rho_hat, rho_true);
    rep.trace_distance = trace_distance(rho_hat, rho_true);
    double p10 = rho_hat.element(1, 0, 1, 0).real();
    double p01 = rho_hat.element(0, 1, 0, 1).real();
    rep.eta_hat = p10 + p01;
    // Direct estimates can push a tiny population negative; report zero
    // visibility there instead of a complex square root.
    rep.visibility = (p10 > 0 && p01 > 0)
                         ? std::abs(rho_hat.element(1, 0, 0, 1)) /
                               std::sqrt(p10 * p01)
                         : 0.0;
    const FockTruncation& t = rho_hat.trunc();
    double multi = 0.0;
    for (int k = 0; k <= t.n_max; ++k)
        for (int l = 0; l <= t.n_max; ++l)
            if (k + l >= 2)
                multi += rho_hat.element(k, l, k, l).real();
    rep.multiphoton_weight = multi;
    return rep;
}

} // namespace ebitsim
