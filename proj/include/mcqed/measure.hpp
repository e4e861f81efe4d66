#pragma once

// Pseudo-helicity measurement by slope probing.
//
// kinetic:  U2(k) = exp(-i (k p / 2)(1 (x) sigma_y)), observable 1 (x) sigma_z,
//           so <F(k)> = <cos(kp)(1 (x) sz) - sin(kp)(1 (x) sx)> and the slope
//           at k = 0 is -<(1 (x) sx) p>.
// exchange: U1(k) = exp(-i k p (sigma_x (x) 1)), observable sigma_z (x) sigma_x,
//           slope 2 <(sigma_y (x) sigma_x) p>.
//
// Both run on a four-component field over a periodic grid (p spectral) or on
// a qubit (x) qubit (x) mode circuit state (p as a mode quadrature).

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "mcqed/cqed.hpp"
#include "mcqed/errors.hpp"
#include "mcqed/majorana.hpp"
#include "mcqed/qops.hpp"
#include "mcqed/spectral.hpp"

namespace mcqed::measure {

enum class ProtocolTarget { kinetic, exchange };

inline const char* to_string(ProtocolTarget t) {
    return t == ProtocolTarget::kinetic ? "kinetic" : "exchange";
}

inline ProtocolTarget parse_protocol_target(const std::string& s) {
    if (s == "kinetic") return ProtocolTarget::kinetic;
    if (s == "exchange") return ProtocolTarget::exchange;
    throw ValidationError("unknown protocol target '" + s + "' (kinetic | exchange)");
}

struct SlopeEstimate {
    double value = 0.0;
    double step = 0.0;
    int order = 2;
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr int kDefaultOrder = 2;

/// Spin part G of the generator exp(-i k p G).
inline OperatorMatrix rotation_spin(ProtocolTarget t) {
    return t == ProtocolTarget::kinetic
               ? OperatorMatrix(0.5 * qops::kron(qops::identity(2), qops::sigma_y()))
               : qops::kron(qops::sigma_x(), qops::identity(2));
}

inline OperatorMatrix measured_observable(ProtocolTarget t) {
    return t == ProtocolTarget::kinetic ? qops::kron(qops::identity(2), qops::sigma_z())
                                        : qops::kron(qops::sigma_z(), qops::sigma_x());
}

/// exp(-i k p G) for one momentum value. G^2 is a multiple of the identity
/// for both targets, so the exponential is a cos/sin pair.
inline OperatorMatrix uk_rotation(double k, ProtocolTarget t, double p) {
    const OperatorMatrix g = rotation_spin(t);
    const double half = t == ProtocolTarget::kinetic ? 0.5 : 1.0;
    const double angle = k * p * half;
    return std::cos(angle) * qops::identity(4) - kI * (std::sin(angle) / half) * g;
}

/// Circuit context: exp(-i k G (x) p) on qubit (x) qubit (x) mode with
/// p = i sqrt(m' omega_r2 / 2)(a^dag - a).
inline OperatorMatrix uk_rotation(double k, ProtocolTarget t, int n_max, double m_prime,
                                  double omega_r2) {
    const OperatorMatrix gen =
        qops::kron(rotation_spin(t), cqed::momentum_quadrature(n_max, m_prime, omega_r2));
    return qops::propagator(gen, k);
}

// ---------------------------------------------------------------------------
// Field context

/// Four complex components over a periodic grid (the rotated real field).
struct FourSpinorField {
    SpatialGrid grid;
    Eigen::MatrixXcd values;  // n_points x 4

    static FourSpinorField from(const majorana::RealSpinorField& f) {
        return {f.grid(), f.values().cast<cplx>()};
    }
    double norm() const { return std::sqrt(values.squaredNorm() * grid.dx()); }
};

inline FourSpinorField apply_uk(double k, ProtocolTarget t, const FourSpinorField& f) {
    if (f.values.cols() != 4) throw ValidationError("apply_uk: field needs four components");
    Eigen::MatrixXcd hat = spectral::forward(f.values);
    for (std::size_t j = 0; j < f.grid.size(); ++j) {
        const auto r = static_cast<Eigen::Index>(j);
        hat.row(r) = (uk_rotation(k, t, f.grid.momentum(j)) * hat.row(r).transpose()).transpose();
    }
    return {f.grid, spectral::inverse(hat)};
}

inline double spin_expect(const FourSpinorField& f, const OperatorMatrix& spin) {
    return spectral::momentum_expectation(f.values, f.grid, spin, [](double) { return 1.0; })
        .real();
}

/// <F(k)> by rotating the state and measuring the bare observable.
inline double protocol_expect(const FourSpinorField& f, double k, ProtocolTarget t) {
    return spin_expect(apply_uk(k, t, f), measured_observable(t));
}

/// <F(k)> for the kinetic branch from the conjugated observable
/// cos(kp)(1 (x) sz) - sin(kp)(1 (x) sx), without rotating the state.
inline double f_observable_conjugated(const FourSpinorField& f, double k) {
    const OperatorMatrix sz = qops::kron(qops::identity(2), qops::sigma_z());
    const OperatorMatrix sx = qops::kron(qops::identity(2), qops::sigma_x());
    const cplx c = spectral::momentum_expectation(f.values, f.grid, sz,
                                                  [k](double p) { return std::cos(k * p); });
    const cplx s = spectral::momentum_expectation(f.values, f.grid, sx,
                                                  [k](double p) { return std::sin(k * p); });
    return (c - s).real();
}

inline double f_observable_expect(const FourSpinorField& f, double k) {
    return protocol_expect(f, k, ProtocolTarget::kinetic);
}

/// <G p> computed directly (no protocol).
inline double generator_momentum_expect(const FourSpinorField& f, const OperatorMatrix& spin) {
    return spectral::momentum_expectation(f.values, f.grid, spin, [](double p) { return p; })
        .real();
}

// ---------------------------------------------------------------------------
// Slopes

/// Central difference at k = 0: order 2 uses +-h, order 4 also +-2h.
inline SlopeEstimate slope_at_zero(const std::function<double(double)>& f,
                                   double step = kDefaultStep, int order = kDefaultOrder) {
    if (!(step > 0.0)) throw ValidationError("slope_at_zero: step must be positive");
    if (order != 2 && order != 4) throw ValidationError("slope_at_zero: order must be 2 or 4");
    double v;
    if (order == 2) {
        v = (f(step) - f(-step)) / (2.0 * step);
    } else {
        v = (-f(2 * step) + 8.0 * f(step) - 8.0 * f(-step) + f(-2 * step)) / (12.0 * step);
    }
    return {v, step, order};
}

inline SlopeEstimate kinetic_slope(const FourSpinorField& f, double step = kDefaultStep,
                                   int order = kDefaultOrder) {
    return slope_at_zero([&](double k) { return protocol_expect(f, k, ProtocolTarget::kinetic); },
                         step, order);
}

inline SlopeEstimate exchange_slope(const FourSpinorField& f, double step = kDefaultStep,
                                    int order = kDefaultOrder) {
    return slope_at_zero(
        [&](double k) { return protocol_expect(f, k, ProtocolTarget::exchange); }, step, order);
}

/// <Sigma~> = -kinetic_slope - exchange_slope / 2
inline double reconstruct_helicity(const SlopeEstimate& kinetic, const SlopeEstimate& exchange) {
    return -kinetic.value - 0.5 * exchange.value;
}

struct HelicityReading {
    SlopeEstimate kinetic;
    SlopeEstimate exchange;
    double reconstructed = 0.0;
    double direct = 0.0;
};

inline HelicityReading read_helicity(const majorana::RealSpinorField& psi,
                                     double step = kDefaultStep, int order = kDefaultOrder) {
    const auto f = FourSpinorField::from(psi);
    HelicityReading r;
    r.kinetic = kinetic_slope(f, step, order);
    r.exchange = exchange_slope(f, step, order);
    r.reconstructed = reconstruct_helicity(r.kinetic, r.exchange);
    r.direct = majorana::pseudo_helicity_expect(psi);
    return r;
}

// ---------------------------------------------------------------------------
// Circuit context

struct CircuitContext {
    int n_max = 10;
    double m_prime = 1.0;
    double omega_r2 = 1.0;

    OperatorMatrix momentum() const {
        return qops::kron(qops::identity(4), cqed::momentum_quadrature(n_max, m_prime, omega_r2));
    }
};

inline double protocol_expect(const StateVector& psi, const CircuitContext& ctx, double k,
                              ProtocolTarget t) {
    const StateVector rotated = uk_rotation(k, t, ctx.n_max, ctx.m_prime, ctx.omega_r2) * psi;
    const OperatorMatrix obs = qops::kron(measured_observable(t), qops::identity(ctx.n_max + 1));
    return qops::expectation(obs, rotated).real();
}

inline SlopeEstimate circuit_slope(const StateVector& psi, const CircuitContext& ctx,
                                   ProtocolTarget t, double step = kDefaultStep,
                                   int order = kDefaultOrder) {
    return slope_at_zero([&](double k) { return protocol_expect(psi, ctx, k, t); }, step, order);
}

/// <(1 (x) sx - sy (x) sx) p> on a circuit state.
inline double circuit_helicity_direct(const StateVector& psi, const CircuitContext& ctx) {
    const OperatorMatrix spin = majorana::pseudo_helicity_spin();
    const OperatorMatrix op =
        qops::kron(spin, cqed::momentum_quadrature(ctx.n_max, ctx.m_prime, ctx.omega_r2));
    return qops::expectation(op, psi).real();
}

// ---------------------------------------------------------------------------
// Random test states

/// A sum of two Gaussian packets with random centres, momenta, widths and
/// spinors, encoded as a real four-spinor.
inline majorana::RealSpinorField random_real_packet(const SpatialGrid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double spread = grid.length() / 20.0;
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), 2);
    for (int n = 0; n < 2; ++n) {
        const Eigen::Vector2cd spinor(cplx(u(rng), u(rng)), cplx(u(rng), u(rng)));
        const double x0 = spread * u(rng);
        const double p0 = 2.0 * u(rng);
        const double width = 1.3 + 0.3 * u(rng);
        const auto pkt = majorana::gaussian_wavepacket(grid, x0, p0, width, spinor);
        v += (0.5 + 0.5 * std::abs(u(rng))) * pkt.values();
    }
    v /= std::sqrt(v.squaredNorm() * grid.dx());
    return majorana::to_real_spinor(majorana::ComplexSpinorField(grid, std::move(v)));
}

} // namespace mcqed::measure
