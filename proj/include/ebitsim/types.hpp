#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ebitsim {

using complexd = std::complex<double>;

/**
 * Truncated two-mode Fock basis. Each mode keeps photon numbers 0..n_max,
 * so the joint space has dimension (n_max+1)^2. The pair (k,l) of photon
 * numbers maps to the flat row-major index k*(n_max+1)+l; every matrix and
 * file format in this project uses that ordering.
 */
struct FockTruncation {
    int n_max = 4;

    explicit FockTruncation(int n_max_ = 4) : n_max(n_max_) {
        if (n_max < 1)
            throw std::invalid_argument("FockTruncation: n_max must be >= 1");
    }

    int per_mode() const { return n_max + 1; }
    int dim() const { return per_mode() * per_mode(); }
    int flat(int k, int l) const { return k * per_mode() + l; }
    int mode1_of(int flat_index) const { return flat_index / per_mode(); }
    int mode2_of(int flat_index) const { return flat_index % per_mode(); }

    bool operator==(const FockTruncation& o) const { return n_max == o.n_max; }
    bool operator!=(const FockTruncation& o) const { return n_max != o.n_max; }
};

/// Pure two-mode state; amplitudes indexed by FockTruncation::flat.
struct TwoModeKet {
    FockTruncation trunc;
    Eigen::VectorXcd amplitudes;

    TwoModeKet(const FockTruncation& t, Eigen::VectorXcd amps)
        : trunc(t), amplitudes(std::move(amps)) {
        if (amplitudes.size() != trunc.dim())
            throw std::invalid_argument("TwoModeKet: amplitude vector length "
                                        "does not match truncation");
        double norm2 = amplitudes.squaredNorm();
        if (std::abs(norm2 - 1.0) > 1e-12)
            throw std::invalid_argument("TwoModeKet: state not normalized, "
                                        "|psi|^2 = " + std::to_string(norm2));
    }
};

/**
 * Two-mode density operator on the truncated basis.
 *
 * The constructor enforces hermiticity only. Unit trace and positivity are
 * checked by validate(): direct sampling estimators legitimately produce
 * operators that are Hermitian but slightly off-trace and non-positive, and
 * those must still be representable.
 */
class DensityMatrix {
  public:
    DensityMatrix(const FockTruncation& t, Eigen::MatrixXcd elements)
        : trunc_(t), elements_(std::move(elements)) {
        if (elements_.rows() != trunc_.dim() || elements_.cols() != trunc_.dim())
            throw std::invalid_argument("DensityMatrix: element matrix shape "
                                        "does not match truncation");
        double dev = (elements_ - elements_.adjoint()).cwiseAbs().maxCoeff();
        if (dev > 1e-12)
            throw std::invalid_argument("DensityMatrix: not Hermitian, max "
                                        "deviation " + std::to_string(dev));
    }

    const FockTruncation& trunc() const { return trunc_; }
    const Eigen::MatrixXcd& elements() const { return elements_; }

    complexd element(int k, int l, int m, int n) const {
        return elements_(trunc_.flat(k, l), trunc_.flat(m, n));
    }

    double trace() const { return elements_.trace().real(); }

    /**
     * Full physicality check: trace 1 within 1e-10 and smallest eigenvalue
     * >= -1e-10. Returns an empty string on success, otherwise a message
     * naming the violated condition.
     */
    std::string validate() const {
        double tr = trace();
        if (std::abs(tr - 1.0) > 1e-10)
            return "trace = " + std::to_string(tr) + ", expected 1";
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(elements_,
                                                           Eigen::EigenvaluesOnly);
        double lo = es.eigenvalues().minCoeff();
        if (lo < -1e-10)
            return "smallest eigenvalue = " + std::to_string(lo) +
                   ", matrix not positive semidefinite";
        return {};
    }

  private:
    FockTruncation trunc_;
    Eigen::MatrixXcd elements_;
};

} // namespace ebitsim
