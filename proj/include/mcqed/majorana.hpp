#pragma once

// One-dimensional Majorana and Dirac wave equations on a periodic box.
//
// Complex form:  i d/dt psi = (c sigma_x p - i m c^2 sigma_y K) psi,  psi in C^2
// Real form:     i d/dt Psi = [c (1 (x) sigma_x) p - m c^2 sigma_x (x) sigma_y] Psi,
//                Psi = (Re psi1, Re psi2, Im psi1, Im psi2)  in R^4
//
// The complex form is antilinear (K conjugates), so it is integrated with
// adaptive Runge-Kutta steps and serves as the oracle. The real form is
// linear and is propagated exactly mode by mode.

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "mcqed/errors.hpp"
#include "mcqed/integrator.hpp"
#include "mcqed/qops.hpp"
#include "mcqed/spectral.hpp"

namespace mcqed::majorana {

struct MEParams {
    double m = 1.0;
    double c = 1.0;

    void validate() const {
        if (!(m >= 0.0)) throw ValidationError("majorana: mass must be >= 0");
        if (!(c > 0.0)) throw ValidationError("majorana: speed c must be > 0");
    }
    double rest_energy() const { return m * c * c; }
};

class ComplexSpinorField {
public:
    /// values: n_points x 2
    ComplexSpinorField(SpatialGrid grid, Eigen::MatrixXcd values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.rows() != static_cast<Eigen::Index>(grid_.size()) || values_.cols() != 2) {
            throw ValidationError("complex spinor field must be n_points x 2");
        }
    }

    const SpatialGrid& grid() const { return grid_; }
    const Eigen::MatrixXcd& values() const { return values_; }
    double norm() const { return std::sqrt(values_.squaredNorm() * grid_.dx()); }

private:
    SpatialGrid grid_;
    Eigen::MatrixXcd values_;
};

class RealSpinorField {
public:
    /// values: n_points x 4, columns (psi1_re, psi2_re, psi1_im, psi2_im)
    RealSpinorField(SpatialGrid grid, Eigen::MatrixXd values)
        : grid_(grid), values_(std::move(values)) {
        if (values_.rows() != static_cast<Eigen::Index>(grid_.size()) || values_.cols() != 4) {
            throw ValidationError("real spinor field must be n_points x 4");
        }
    }

    const SpatialGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& values() const { return values_; }
    double norm() const { return std::sqrt(values_.squaredNorm() * grid_.dx()); }

private:
    SpatialGrid grid_;
    Eigen::MatrixXd values_;
};

namespace detail {

inline void require_normalized(double norm, const char* who) {
    if (std::abs(norm - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << who << ": input field is not normalized (norm " << norm << ")";
        throw ValidationError(msg.str());
    }
}

inline void check_nyquist(const Eigen::MatrixXcd& cols, const SpatialGrid& grid,
                          Diagnostics* diag) {
    const double frac = spectral::nyquist_fraction(cols, grid);
    if (frac > 1e-12) {
        std::ostringstream msg;
        msg << "field carries relative amplitude " << frac
            << " at the Nyquist momentum; increase n_points";
        warn(diag, msg.str());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// Encoding

inline RealSpinorField to_real_spinor(const ComplexSpinorField& psi) {
    const auto& v = psi.values();
    Eigen::MatrixXd out(v.rows(), 4);
    out.col(0) = v.col(0).real();
    out.col(1) = v.col(1).real();
    out.col(2) = v.col(0).imag();
    out.col(3) = v.col(1).imag();
    return RealSpinorField(psi.grid(), std::move(out));
}

inline ComplexSpinorField from_real_spinor(const RealSpinorField& big_psi) {
    const auto& v = big_psi.values();
    Eigen::MatrixXcd out(v.rows(), 2);
    for (Eigen::Index j = 0; j < v.rows(); ++j) {
        out(j, 0) = cplx(v(j, 0), v(j, 2));
        out(j, 1) = cplx(v(j, 1), v(j, 3));
    }
    return ComplexSpinorField(big_psi.grid(), std::move(out));
}

/// psi_c = i sigma_y sigma_z psi^* = -sigma_x psi^*
inline ComplexSpinorField charge_conjugate(const ComplexSpinorField& psi) {
    const auto& v = psi.values();
    Eigen::MatrixXcd out(v.rows(), 2);
    out.col(0) = -v.col(1).conjugate();
    out.col(1) = -v.col(0).conjugate();
    return ComplexSpinorField(psi.grid(), std::move(out));
}

// ---------------------------------------------------------------------------
// Per-momentum Hamiltonians

inline double mode_energy(double p, const MEParams& params) {
    const double cp = params.c * p;
    const double mc2 = params.rest_energy();
    return std::sqrt(cp * cp + mc2 * mc2);
}

/// H_D(p) = c p sigma_x + m c^2 sigma_z
inline OperatorMatrix dirac_hamiltonian(double p, const MEParams& params) {
    return params.c * p * qops::sigma_x() + params.rest_energy() * qops::sigma_z();
}

inline OperatorMatrix kinetic_generator() {
    return qops::kron(qops::identity(2), qops::sigma_x());
}
inline OperatorMatrix mass_generator() { return qops::kron(qops::sigma_x(), qops::sigma_y()); }

/// H(p) = c p (1 (x) sigma_x) - m c^2 (sigma_x (x) sigma_y)
inline OperatorMatrix majorana_hamiltonian(double p, const MEParams& params) {
    return params.c * p * kinetic_generator() - params.rest_energy() * mass_generator();
}

// Both Hamiltonians square to E(p)^2 times the identity, so
// exp(-i H t) = cos(E t) - i sin(E t) H / E exactly.
inline OperatorMatrix squared_to_scalar_propagator(const OperatorMatrix& h, double energy,
                                                   double t) {
    const Eigen::Index n = h.rows();
    if (energy == 0.0) return qops::identity(n);
    return std::cos(energy * t) * qops::identity(n) - kI * (std::sin(energy * t) / energy) * h;
}

inline OperatorMatrix majorana_mode_propagator(double p, const MEParams& params, double t) {
    return squared_to_scalar_propagator(majorana_hamiltonian(p, params), mode_energy(p, params), t);
}

inline OperatorMatrix dirac_mode_propagator(double p, const MEParams& params, double t) {
    return squared_to_scalar_propagator(dirac_hamiltonian(p, params), mode_energy(p, params), t);
}

// ---------------------------------------------------------------------------
// Evolution

namespace detail {

inline Eigen::MatrixXcd propagate_modes(const Eigen::MatrixXcd& cols, const SpatialGrid& grid,
                                        double t, auto&& mode_propagator) {
    Eigen::MatrixXcd hat = spectral::forward(cols);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        const OperatorMatrix u = mode_propagator(grid.momentum(j), t);
        hat.row(r) = (u * hat.row(r).transpose()).transpose();
    }
    return spectral::inverse(hat);
}

} // namespace detail

struct RealEvolution {
    RealSpinorField field;
    double imaginary_residue;
};

/// Exact spectral propagation of the real four-spinor. Aborts with a
/// NumericalError if the propagated field is not real to 1e-8.
inline RealEvolution evolve_me_real_checked(const RealSpinorField& psi0, const MEParams& params,
                                            double t, Diagnostics* diag = nullptr) {
    params.validate();
    detail::require_normalized(psi0.norm(), "evolve_me_real");
    const Eigen::MatrixXcd cols = psi0.values().cast<cplx>();
    detail::check_nyquist(cols, psi0.grid(), diag);
    const Eigen::MatrixXcd out =
        detail::propagate_modes(cols, psi0.grid(), t, [&](double p, double tt) {
            return majorana_mode_propagator(p, params, tt);
        });
    const double residue = out.imag().cwiseAbs().maxCoeff();
    if (residue > 1e-8) {
        std::ostringstream msg;
        msg << "evolve_me_real: propagated field has imaginary residue " << residue
            << " (encoding broken)";
        throw NumericalError(msg.str());
    }
    return {RealSpinorField(psi0.grid(), out.real()), residue};
}

inline RealSpinorField evolve_me_real(const RealSpinorField& psi0, const MEParams& params,
                                      double t, Diagnostics* diag = nullptr) {
    return evolve_me_real_checked(psi0, params, t, diag).field;
}

inline ComplexSpinorField evolve_dirac(const ComplexSpinorField& psi0, const MEParams& params,
                                       double t, Diagnostics* diag = nullptr) {
    params.validate();
    detail::check_nyquist(psi0.values(), psi0.grid(), diag);
    return ComplexSpinorField(
        psi0.grid(), detail::propagate_modes(psi0.values(), psi0.grid(), t, [&](double p, double tt) {
            return dirac_mode_propagator(p, params, tt);
        }));
}

struct ComplexIntegration {
    double relative_tolerance = 1e-10;
    double max_step = 0.05;
};

/// Runge-Kutta oracle for the complex (antilinear) Majorana equation.
/// Returns the field at each of `times` (non-decreasing, starting >= 0).
inline std::vector<ComplexSpinorField> evolve_me_complex(const ComplexSpinorField& psi0,
                                                         const MEParams& params,
                                                         std::span<const double> times,
                                                         const ComplexIntegration& integ = {},
                                                         Diagnostics* diag = nullptr) {
    params.validate();
    detail::require_normalized(psi0.norm(), "evolve_me_complex");
    detail::check_nyquist(psi0.values(), psi0.grid(), diag);

    const SpatialGrid grid = psi0.grid();
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXd p = grid.momenta();
    const double c = params.c;
    const double mc2 = params.rest_energy();

    Eigen::FFT<double> fft;
    std::vector<cplx> buf_in(static_cast<std::size_t>(n)), buf_hat, buf_out;
    Eigen::VectorXcd p_psi1(n), p_psi2(n);

    auto apply_p = [&](const cplx* src, Eigen::VectorXcd& dst) {
        std::copy(src, src + n, buf_in.begin());
        fft.fwd(buf_hat, buf_in);
        for (Eigen::Index j = 0; j < n; ++j) buf_hat[static_cast<std::size_t>(j)] *= p[j];
        fft.inv(buf_out, buf_hat);
        std::copy(buf_out.begin(), buf_out.end(), dst.data());
    };

    // d/dt psi1 = -i c p psi2 + i mc^2 psi2^*
    // d/dt psi2 = -i c p psi1 - i mc^2 psi1^*
    auto rhs = [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        apply_p(y.data(), p_psi1);
        apply_p(y.data() + n, p_psi2);
        dy.head(n) = -kI * c * p_psi2 + kI * mc2 * y.tail(n).conjugate();
        dy.tail(n) = -kI * c * p_psi1 - kI * mc2 * y.head(n).conjugate();
    };

    Eigen::VectorXcd y0(2 * n);
    y0.head(n) = psi0.values().col(0);
    y0.tail(n) = psi0.values().col(1);

    AdaptiveOptions opts;
    opts.relative_tolerance = integ.relative_tolerance;
    opts.absolute_tolerance = integ.relative_tolerance;
    opts.max_step = integ.max_step;

    std::vector<ComplexSpinorField> out;
    out.reserve(times.size());
    integrate_dopri5(rhs, y0, 0.0, times, opts, [&](std::size_t, double, const Eigen::VectorXcd& y) {
        Eigen::MatrixXcd v(n, 2);
        v.col(0) = y.head(n);
        v.col(1) = y.tail(n);
        out.emplace_back(grid, std::move(v));
    });
    return out;
}

inline ComplexSpinorField evolve_me_complex(const ComplexSpinorField& psi0, const MEParams& params,
                                            double t, const ComplexIntegration& integ = {},
                                            Diagnostics* diag = nullptr) {
    const double times[] = {t};
    return evolve_me_complex(psi0, params, times, integ, diag).front();
}

// ---------------------------------------------------------------------------
// Observables

/// <(1 (x) sigma_x) p> on the real four-spinor. Vanishes for real fields.
inline double kinetic_helicity_expect(const RealSpinorField& big_psi) {
    return spectral::momentum_expectation(big_psi.values().cast<cplx>(), big_psi.grid(),
                                          kinetic_generator(), [](double p) { return p; })
        .real();
}

inline OperatorMatrix exchange_generator() {
    return qops::kron(qops::sigma_y(), qops::sigma_x());
}

/// <(sigma_y (x) sigma_x) p>
inline double exchange_helicity_expect(const RealSpinorField& big_psi) {
    return spectral::momentum_expectation(big_psi.values().cast<cplx>(), big_psi.grid(),
                                          exchange_generator(), [](double p) { return p; })
        .real();
}

inline OperatorMatrix pseudo_helicity_spin() { return kinetic_generator() - exchange_generator(); }

/// <Sigma~> = <(1 (x) sigma_x - sigma_y (x) sigma_x) p>
inline double pseudo_helicity_expect(const RealSpinorField& big_psi) {
    return spectral::momentum_expectation(big_psi.values().cast<cplx>(), big_psi.grid(),
                                          pseudo_helicity_spin(), [](double p) { return p; })
        .real();
}

/// ||[Sigma~(p), H(p)]||_max for one momentum. Nonzero whenever m p != 0:
/// the 1 (x) sigma_x part fails against the mass term. Conservation holds only
/// for expectation values on real fields.
inline double pseudo_helicity_commutator_norm(double p, const MEParams& params) {
    return qops::max_abs(qops::commutator(p * pseudo_helicity_spin(), majorana_hamiltonian(p, params)));
}

/// <sigma_x p> for a complex two-spinor (pseudo-helicity of the Dirac field).
inline double sigma_x_momentum_expect(const ComplexSpinorField& psi) {
    return spectral::momentum_expectation(psi.values(), psi.grid(), qops::sigma_x(),
                                          [](double p) { return p; })
        .real();
}

inline double position_mean(const Eigen::MatrixXcd& cols, const SpatialGrid& grid) {
    const Eigen::VectorXd density = cols.cwiseAbs2().rowwise().sum();
    return density.dot(grid.positions()) * grid.dx();
}
inline double position_mean(const ComplexSpinorField& psi) {
    return position_mean(psi.values(), psi.grid());
}
inline double position_mean(const RealSpinorField& big_psi) {
    return position_mean(big_psi.values().cast<cplx>(), big_psi.grid());
}

inline double momentum_mean(const Eigen::MatrixXcd& cols, const SpatialGrid& grid) {
    return spectral::momentum_expectation(cols, grid,
                                          qops::identity(cols.cols()), [](double p) { return p; })
        .real();
}
inline double momentum_mean(const ComplexSpinorField& psi) {
    return momentum_mean(psi.values(), psi.grid());
}

// ---------------------------------------------------------------------------
// Initial conditions

/// psi(x) ~ exp(-(x - x0)^2 / 4 w^2 + i p0 x) * spinor, normalized on the grid.
inline ComplexSpinorField gaussian_wavepacket(const SpatialGrid& grid, double x0, double p0,
                                              double width, const Eigen::Vector2cd& spinor,
                                              Diagnostics* diag = nullptr) {
    if (!(width > 0.0)) throw ValidationError("gaussian_wavepacket: width must be positive");
    if (spinor.norm() == 0.0) throw ValidationError("gaussian_wavepacket: zero spinor");
    if (width <= grid.dx()) {
        warn(diag, "gaussian_wavepacket: width does not exceed the grid spacing");
    }
    if (std::abs(x0) + 6.0 * width > 0.5 * grid.length()) {
        warn(diag, "gaussian_wavepacket: packet is not well inside the periodic box");
    }
    const auto n = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd v(n, 2);
    const Eigen::Vector2cd s = spinor / spinor.norm();
    for (Eigen::Index j = 0; j < n; ++j) {
        const double x = grid.position(static_cast<std::size_t>(j));
        const double d = x - x0;
        const cplx envelope = std::exp(cplx(-d * d / (4.0 * width * width), p0 * x));
        v(j, 0) = envelope * s[0];
        v(j, 1) = envelope * s[1];
    }
    v /= std::sqrt(v.squaredNorm() * grid.dx());
    return ComplexSpinorField(grid, std::move(v));
}

} // namespace mcqed::majorana
