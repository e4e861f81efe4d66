#pragma once

// Dense operator algebra for small qubit (x) truncated-mode spaces:
// Kronecker products, Pauli and Fock operators, Hermitian propagators,
// adaptive time-dependent evolution and expectation values. Units: hbar = 1.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mcqed/errors.hpp"
#include "mcqed/integrator.hpp"

namespace mcqed {

using cplx = std::complex<double>;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

} // namespace mcqed

namespace mcqed::qops {

// ---------------------------------------------------------------------------
// Tensor factors

class Factor {
public:
    enum class Kind { qubit, mode };

    static Factor qubit() { return Factor(Kind::qubit, 1); }
    static Factor mode(int n_max) {
        if (n_max < 1) {
            throw ValidationError("mode cutoff n_max must be >= 1");
        }
        return Factor(Kind::mode, n_max);
    }

    Kind kind() const { return kind_; }
    int n_max() const { return n_max_; }
    Eigen::Index dim() const { return kind_ == Kind::qubit ? 2 : n_max_ + 1; }

    bool operator==(const Factor&) const = default;

private:
    Factor(Kind kind, int n_max) : kind_(kind), n_max_(n_max) {}
    Kind kind_;
    int n_max_;
};

/// Ordered list of tensor factors. Factor 0 is the outermost (slowest) index.
class SpaceDescriptor {
public:
    SpaceDescriptor() = default;
    explicit SpaceDescriptor(std::vector<Factor> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) {
            throw ValidationError("space needs at least one factor");
        }
    }

    const std::vector<Factor>& factors() const { return factors_; }

    Eigen::Index dimension() const {
        return std::accumulate(factors_.begin(), factors_.end(), Eigen::Index{1},
                               [](Eigen::Index acc, const Factor& f) { return acc * f.dim(); });
    }

    /// Flat index of a product basis state; one local index per factor.
    Eigen::Index basis_index(const std::vector<Eigen::Index>& local) const {
        if (local.size() != factors_.size()) {
            throw ValidationError("basis label has wrong number of factors");
        }
        Eigen::Index idx = 0;
        for (std::size_t f = 0; f < factors_.size(); ++f) {
            if (local[f] < 0 || local[f] >= factors_[f].dim()) {
                throw ValidationError("basis label out of range");
            }
            idx = idx * factors_[f].dim() + local[f];
        }
        return idx;
    }

    bool operator==(const SpaceDescriptor&) const = default;

private:
    std::vector<Factor> factors_;
};

// ---------------------------------------------------------------------------
// Building blocks

inline OperatorMatrix tensor_product(const OperatorMatrix& a, const OperatorMatrix& b) {
    OperatorMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

template <class... Rest>
OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b, const Rest&... rest) {
    if constexpr (sizeof...(rest) == 0) {
        return tensor_product(a, b);
    } else {
        return kron(tensor_product(a, b), rest...);
    }
}

inline OperatorMatrix identity(Eigen::Index dim) { return OperatorMatrix::Identity(dim, dim); }

// Qubit basis convention: index 0 = |up> (sigma_z = +1), index 1 = |down>.
inline OperatorMatrix sigma_x() {
    OperatorMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}
inline OperatorMatrix sigma_y() {
    OperatorMatrix m(2, 2);
    m << 0, -kI, kI, 0;
    return m;
}
inline OperatorMatrix sigma_z() {
    OperatorMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}
/// sigma_+ = |up><down|
inline OperatorMatrix sigma_plus() {
    OperatorMatrix m = OperatorMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}
inline OperatorMatrix sigma_minus() { return sigma_plus().adjoint(); }

/// Lowering operator on {|0>, ..., |n_max>}: <n-1|a|n> = sqrt(n).
inline OperatorMatrix annihilator(int n_max) {
    if (n_max < 1) {
        throw ValidationError("annihilator: n_max must be >= 1");
    }
    OperatorMatrix a = OperatorMatrix::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}
inline OperatorMatrix creator(int n_max) { return annihilator(n_max).adjoint(); }
inline OperatorMatrix number_operator(int n_max) {
    const OperatorMatrix a = annihilator(n_max);
    return a.adjoint() * a;
}

/// Places `op` on factor `which` of `space`, identities elsewhere.
inline OperatorMatrix embed(const SpaceDescriptor& space, const OperatorMatrix& op,
                            std::size_t which) {
    const auto& fs = space.factors();
    if (which >= fs.size() || op.rows() != fs[which].dim() || op.cols() != fs[which].dim()) {
        throw ValidationError("embed: operator does not match the target factor");
    }
    OperatorMatrix out = identity(1);
    for (std::size_t f = 0; f < fs.size(); ++f) {
        out = tensor_product(out, f == which ? op : identity(fs[f].dim()));
    }
    return out;
}

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}
inline OperatorMatrix anticommutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b + b * a;
}

/// max |A - A^dagger| over entries.
inline double hermiticity_defect(const OperatorMatrix& a) {
    if (a.rows() != a.cols()) {
        throw ValidationError("hermiticity_defect: matrix is not square");
    }
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline double max_abs(const OperatorMatrix& a) { return a.cwiseAbs().maxCoeff(); }

/// ||U^dagger U - 1||_max
inline double unitarity_defect(const OperatorMatrix& u) {
    return max_abs(u.adjoint() * u - identity(u.rows()));
}

// ---------------------------------------------------------------------------
// States

class QuantumState {
public:
    /// Normalizes `amplitudes`; a zero vector is rejected.
    QuantumState(SpaceDescriptor space, StateVector amplitudes)
        : space_(std::move(space)), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != space_.dimension()) {
            throw ValidationError("state length does not match the space dimension");
        }
        const double nrm = amplitudes_.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) {
            throw ValidationError("state vector has zero or non-finite norm");
        }
        amplitudes_ /= nrm;
    }

    static QuantumState basis(const SpaceDescriptor& space, const std::vector<Eigen::Index>& label) {
        StateVector v = StateVector::Zero(space.dimension());
        v[space.basis_index(label)] = 1.0;
        return QuantumState(space, std::move(v));
    }

    const SpaceDescriptor& space() const { return space_; }
    const StateVector& amplitudes() const { return amplitudes_; }
    double norm() const { return amplitudes_.norm(); }

private:
    SpaceDescriptor space_;
    StateVector amplitudes_;
};

inline double fidelity(const StateVector& a, const StateVector& b) {
    return std::norm(a.dot(b));
}

// ---------------------------------------------------------------------------
// Evolution

inline OperatorMatrix propagator(const OperatorMatrix& h, double t) {
    const double defect = hermiticity_defect(h);
    if (defect > 1e-10) {
        std::ostringstream msg;
        msg << "propagator: Hamiltonian is not Hermitian (defect " << defect << ")";
        throw ValidationError(msg.str());
    }
    const OperatorMatrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(hs);
    if (es.info() != Eigen::Success) {
        throw NumericalError("propagator: eigendecomposition failed");
    }
    const Eigen::VectorXcd phases =
        (es.eigenvalues().cast<cplx>() * (-kI * t)).array().exp().matrix();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1.0;
    double max_step = 0.1;
    double relative_tolerance = 1e-9;

    void validate() const {
        if (!(t_end >= t_start)) {
            throw ValidationError("time grid: t_end must be >= t_start");
        }
        if (!(max_step > 0.0)) {
            throw ValidationError("time grid: max_step must be positive");
        }
        if (!(relative_tolerance > 0.0 && relative_tolerance <= 1e-3)) {
            throw ValidationError("time grid: tolerance must lie in (0, 1e-3]");
        }
    }

    /// n >= 2 equally spaced times including both ends.
    std::vector<double> uniform_samples(std::size_t n) const {
        std::vector<double> ts(n);
        for (std::size_t i = 0; i < n; ++i) {
            ts[i] = n == 1 ? t_end
                           : t_start + (t_end - t_start) * static_cast<double>(i) /
                                           static_cast<double>(n - 1);
        }
        return ts;
    }
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
};

/// Action form: apply(t, psi, out) writes H(t) psi into out.
using HamiltonianAction = std::function<void(double, const StateVector&, StateVector&)>;
using HamiltonianFunction = std::function<OperatorMatrix(double)>;

inline Trajectory evolve_with_action(const HamiltonianAction& apply, const StateVector& psi0,
                                     const TimeGrid& grid, std::span<const double> sample_times) {
    grid.validate();
    for (double s : sample_times) {
        if (s < grid.t_start || s > grid.t_end) {
            throw ValidationError("sample time outside the time grid");
        }
    }
    AdaptiveOptions opts;
    opts.relative_tolerance = grid.relative_tolerance;
    opts.max_step = grid.max_step;
    opts.error_time_scale = grid.t_end - grid.t_start;

    Trajectory traj;
    traj.times.reserve(sample_times.size());
    traj.states.reserve(sample_times.size());
    StateVector hpsi(psi0.size());
    auto rhs = [&](double t, const StateVector& y, StateVector& dy) {
        apply(t, y, hpsi);
        dy = -kI * hpsi;
    };
    integrate_dopri5(rhs, psi0, grid.t_start, sample_times, opts,
                     [&](std::size_t, double t, const StateVector& y) {
                         traj.times.push_back(t);
                         traj.states.push_back(y);
                     });
    return traj;
}

/// Integrates i d/dt psi = H(t) psi with adaptive Dormand-Prince steps.
inline Trajectory evolve_time_dependent(const HamiltonianFunction& h_of_t,
                                        const QuantumState& psi0, const TimeGrid& grid,
                                        std::span<const double> sample_times) {
    const Eigen::Index dim = psi0.space().dimension();
    HamiltonianAction apply = [&](double t, const StateVector& y, StateVector& out) {
        const OperatorMatrix h = h_of_t(t);
        if (h.rows() != dim || h.cols() != dim) {
            throw ValidationError("evolve_time_dependent: Hamiltonian dimension mismatch");
        }
        out.noalias() = h * y;
    };
    return evolve_with_action(apply, psi0.amplitudes(), grid, sample_times);
}

inline cplx expectation(const OperatorMatrix& op, const StateVector& psi) {
    if (op.rows() != psi.size() || op.cols() != psi.size()) {
        throw ValidationError("expectation: dimension mismatch");
    }
    return psi.dot(op * psi);
}

inline cplx expectation(const OperatorMatrix& op, const QuantumState& psi) {
    return expectation(op, psi.amplitudes());
}

} // namespace mcqed::qops
