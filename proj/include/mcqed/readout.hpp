#pragma once

// Dispersive readout of a qubit through a two-side leaky cavity.
//
// Frequencies are angular; the readout numbers use 2 pi x MHz (rad/us).
// kappa is compared with chi in the same units, so the lifetime 1/kappa =
// 160 ns enters as kappa = 2 pi x 6.25.

#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcqed/cqed.hpp"
#include "mcqed/errors.hpp"
#include "mcqed/integrator.hpp"
#include "mcqed/qops.hpp"

namespace mcqed::readout {

inline constexpr double kDispersiveRatio = 5.0;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double to_degrees(double rad) { return rad * 180.0 / kPi; }

struct ReadoutParams {
    double g = 0.0;
    double detuning = 0.0;  // omega_r - omega_q
    double kappa = 0.0;
    double omega_r = 0.0;
    cqed::DriveParams drive{};

    double omega_q() const { return omega_r - detuning; }

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        if (!(g >= 0.0)) v.push_back("g must be >= 0");
        if (!(detuning != 0.0) || !std::isfinite(detuning)) v.push_back("detuning must be nonzero");
        if (!(kappa > 0.0)) v.push_back("kappa must be > 0");
        if (!(omega_r >= 0.0)) v.push_back("omega_r must be >= 0");
        if (!(drive.epsilon >= 0.0)) v.push_back("drive epsilon must be >= 0");
        return v;
    }

    void validate(Diagnostics* diag = nullptr) const {
        const auto v = violations();
        if (!v.empty()) {
            std::string msg = "readout parameters violate:";
            for (const auto& s : v) msg += "\n  " + s;
            throw ValidationError(msg);
        }
        if (g > 0.0 && std::abs(detuning) < kDispersiveRatio * g) {
            std::ostringstream msg;
            msg << "readout: |detuning| / g = " << std::abs(detuning) / g
                << " is below " << kDispersiveRatio << "; dispersive picture is marginal";
            warn(diag, msg.str());
        }
    }
};

/// chi = g^2 / detuning
inline double dispersive_shift(double g, double detuning) {
    if (detuning == 0.0) throw ValidationError("dispersive_shift: detuning must be nonzero");
    return g * g / detuning;
}

/// Coupling that produces a cavity pull interval 2 chi at this detuning.
inline double coupling_for_interval(double interval, double detuning) {
    if (!(interval * detuning > 0.0)) {
        throw ValidationError("coupling_for_interval: interval and detuning need the same sign");
    }
    return std::sqrt(0.5 * interval * detuning);
}

/// Second-order dispersive Hamiltonian in the frame rotating at omega_d:
/// (w_r - w_d) a^dag a + (w_q - w_d)/2 sz + chi_H a^dag a sz + chi_H/2 sz
///   + (g eps / D') sx + eps (a^dag + a),   chi_H = -g^2 / D'.
/// With D' = w_r - w_q the qubit pulls the cavity down when excited.
inline OperatorMatrix dispersive_hamiltonian(const ReadoutParams& p, int n_max) {
    p.validate();
    const double chi_h = -dispersive_shift(p.g, p.detuning);
    const double eps = p.drive.epsilon;
    const OperatorMatrix a = qops::annihilator(n_max);
    const OperatorMatrix n = qops::number_operator(n_max);
    const auto iq = qops::identity(2);
    const auto im = qops::identity(n_max + 1);
    const OperatorMatrix sz = qops::kron(qops::sigma_z(), im);
    return (p.omega_r - p.drive.omega_d) * qops::kron(iq, n) +
           0.5 * (p.omega_q() - p.drive.omega_d) * sz + chi_h * qops::kron(qops::sigma_z(), n) +
           0.5 * chi_h * sz + (p.g * eps / p.detuning) * qops::kron(qops::sigma_x(), im) +
           eps * qops::kron(iq, OperatorMatrix(a + a.adjoint()));
}

/// Undriven Jaynes-Cummings Hamiltonian for the same qubit and cavity.
inline OperatorMatrix exact_jc_hamiltonian(const ReadoutParams& p, int n_max) {
    p.validate();
    return cqed::jc_hamiltonian(p.omega_q(), p.omega_r, p.g, n_max);
}

struct SpectrumPoint {
    double omega = 0.0;
    cplx amplitude_ratio;
    double phase = 0.0;
};

/// b_in -> a_out transfer kappa / (kappa + i(chi sz + w_r - w_d - omega)).
inline SpectrumPoint output_spectrum(double omega, const ReadoutParams& p, int sigma_z) {
    if (sigma_z != 1 && sigma_z != -1) throw ValidationError("output_spectrum: sigma_z must be +-1");
    const double chi = dispersive_shift(p.g, p.detuning);
    const cplx r = p.kappa / cplx(p.kappa, chi * sigma_z + p.omega_r - p.drive.omega_d - omega);
    return {omega, r, std::arg(r)};
}

inline std::vector<SpectrumPoint> spectrum_sweep(const ReadoutParams& p, int sigma_z,
                                                 double omega_lo, double omega_hi,
                                                 std::size_t points) {
    if (points < 2) throw ValidationError("spectrum_sweep: need at least 2 points");
    std::vector<SpectrumPoint> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        const double w = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) /
                                        static_cast<double>(points - 1);
        out.push_back(output_spectrum(w, p, sigma_z));
    }
    return out;
}

struct PhaseShift {
    double theta_plus = 0.0;
    double theta_minus = 0.0;
    double chi = 0.0;
    double interval = 0.0;  // 2 chi
};

/// theta_pm = -+ arctan(chi / kappa)
inline PhaseShift phase_shift(double g, double detuning, double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("phase_shift: kappa must be > 0");
    PhaseShift s;
    s.chi = dispersive_shift(g, detuning);
    s.theta_plus = -std::atan(s.chi / kappa);
    s.theta_minus = -s.theta_plus;
    s.interval = 2.0 * s.chi;
    return s;
}

// ---------------------------------------------------------------------------
// Mean-field cavity response

inline cplx steady_state_field(const ReadoutParams& p, int sigma_z) {
    const double chi = dispersive_shift(p.g, p.detuning);
    return -kI * p.drive.epsilon / cplx(p.kappa, p.omega_r - p.drive.omega_d + chi * sigma_z);
}

struct FieldTrajectory {
    std::vector<double> times;
    std::vector<cplx> alpha;
};

/// d<a>/dt = -i[(w_r - w_d) + chi sz]<a> - i eps - kappa <a>
inline FieldTrajectory cavity_mean_field(const ReadoutParams& p, int sigma_z, double t_end,
                                         std::size_t samples, cplx alpha0 = 0.0,
                                         double tolerance = 1e-11) {
    p.validate();
    if (sigma_z != 1 && sigma_z != -1) throw ValidationError("cavity_mean_field: sigma_z must be +-1");
    if (!(t_end > 0.0) || samples < 2) {
        throw ValidationError("cavity_mean_field: need t_end > 0 and at least 2 samples");
    }
    const double chi = dispersive_shift(p.g, p.detuning);
    const cplx rate = -kI * (p.omega_r - p.drive.omega_d + chi * sigma_z) - p.kappa;
    const cplx drive = -kI * p.drive.epsilon;
    std::vector<double> ts(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        ts[i] = t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
    }
    AdaptiveOptions opts;
    opts.relative_tolerance = tolerance;
    opts.absolute_tolerance = tolerance * std::max(1.0, std::abs(drive / p.kappa));
    const double w = std::abs(rate);
    opts.max_step = w > 0.0 ? 0.5 / w : t_end;
    FieldTrajectory out;
    Eigen::VectorXcd y0(1);
    y0[0] = alpha0;
    integrate_dopri5(
        [&](double, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) { dy[0] = rate * y[0] + drive; },
        y0, 0.0, ts, opts, [&](std::size_t, double t, const Eigen::VectorXcd& y) {
            out.times.push_back(t);
            out.alpha.push_back(y[0]);
        });
    return out;
}

// ---------------------------------------------------------------------------
// Reference readout numbers

struct ReadoutSetup {
    double detuning_1 = kTwoPi * 600.0;  // omega_r1 - omega_1
    double detuning_2 = kTwoPi * 300.0;  // omega_r2 - omega_2
    double kappa = kTwoPi * 6.25;        // 1 / 160 ns
    double interval_1 = kTwoPi * 29.6;   // quoted pull interval for CPB 1
};

struct QubitReadout {
    double chi = 0.0;
    double interval_mhz = 0.0;
    double theta_deg = 0.0;  // |theta|
};

struct ReadoutSummary {
    double g = 0.0;
    double g_mhz = 0.0;
    QubitReadout cpb1;
    QubitReadout cpb2;
    double reference_theta1_deg = 134.0 / 2.0;  // 134 pi / 360
    double reference_theta2_deg = 268.0 / 2.0;  // 268 pi / 360
    bool theta2_discrepancy = false;
};

/// Derives g from the first interval and applies it to both qubits.
inline ReadoutSummary summarize_readout(const ReadoutSetup& s = {}) {
    ReadoutSummary r;
    r.g = coupling_for_interval(s.interval_1, s.detuning_1);
    r.g_mhz = r.g / kTwoPi;
    auto one = [&](double detuning) {
        const auto ps = phase_shift(r.g, detuning, s.kappa);
        return QubitReadout{ps.chi, ps.interval / kTwoPi, to_degrees(std::abs(ps.theta_plus))};
    };
    r.cpb1 = one(s.detuning_1);
    r.cpb2 = one(s.detuning_2);
    r.theta2_discrepancy = std::abs(r.cpb2.theta_deg - r.reference_theta2_deg) > 0.5;
    return r;
}

} // namespace mcqed::readout
