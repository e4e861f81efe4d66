#pragma once

// Circuit-QED Hamiltonian chain: Cooper-pair box, Jaynes-Cummings coupling,
// driven and dressed frames, the interaction-picture Hamiltonian with its
// three rotating-wave limits, and the two-qubit composite scheme whose
// effective dynamics is the real-form Majorana Hamiltonian.
//
// Tensor order: single channel = qubit (x) mode,
//               composite      = qubit1 (x) qubit2 (x) mode.
// Qubit basis index 0 is |up> (sigma_z = +1).

#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mcqed/errors.hpp"
#include "mcqed/integrator.hpp"
#include "mcqed/qops.hpp"

namespace mcqed::cqed {

using qops::QuantumState;
using qops::SpaceDescriptor;

// Separation factor below which a "much larger than" condition is warned.
inline constexpr double kHierarchyRatio = 5.0;

// ---------------------------------------------------------------------------
// Cooper-pair box and Jaynes-Cummings

struct CPBParams {
    double E_c = 1.0;
    double E_j = 0.1;
    double N_g = 0.5;
    double flux_ratio = 0.0;  // Phi / Phi_0

    void validate() const {
        if (!(E_c > 0.0)) throw ValidationError("cpb: E_c must be > 0");
        if (!(E_j >= 0.0)) throw ValidationError("cpb: E_j must be >= 0");
        if (!(N_g >= 0.0 && N_g <= 1.0)) throw ValidationError("cpb: N_g must lie in [0, 1]");
    }
    double electrostatic_energy() const { return 4.0 * E_c * (1.0 - 2.0 * N_g); }
    double josephson_energy() const { return 2.0 * E_j * std::cos(kPi * flux_ratio); }
};

/// H = -(E_el/2) sigma_z - (E_J/2) sigma_x in the charge basis.
inline OperatorMatrix cpb_hamiltonian(const CPBParams& p) {
    p.validate();
    return -0.5 * p.electrostatic_energy() * qops::sigma_z() -
           0.5 * p.josephson_energy() * qops::sigma_x();
}

/// omega_r a^dag a + (omega/2) sigma_z + g (a^dag sigma_- + a sigma_+), qubit (x) mode.
inline OperatorMatrix jc_hamiltonian(double omega, double omega_r, double g, int n_max) {
    const auto q = qops::identity(2);
    const auto f = qops::identity(n_max + 1);
    const OperatorMatrix a = qops::annihilator(n_max);
    return omega_r * qops::kron(q, qops::number_operator(n_max)) +
           0.5 * omega * qops::kron(qops::sigma_z(), f) +
           g * (qops::kron(qops::sigma_minus(), a.adjoint()) + qops::kron(qops::sigma_plus(), a));
}

/// a^dag a + sigma_+ sigma_-
inline OperatorMatrix jc_excitation_number(int n_max) {
    return qops::kron(qops::identity(2), qops::number_operator(n_max)) +
           qops::kron(qops::sigma_plus() * qops::sigma_minus(), qops::identity(n_max + 1));
}

// ---------------------------------------------------------------------------
// Drive and frames

struct DriveParams {
    double epsilon = 0.0;
    double omega_d = 0.0;
    double phi = 0.0;

    void validate() const {
        if (!(epsilon >= 0.0)) throw ValidationError("drive: epsilon must be >= 0");
    }
};

struct DerivedFrameParams {
    double alpha_mag = 0.0;
    double Omega_d = 0.0;
    double delta_prime = 0.0;
    double theta_prime = 0.0;
    double Omega = 0.0;

    /// Frame quantities for a qubit of splitting `omega` in a cavity at
    /// `omega_r`, driven by `drive`. Warns when delta' is not an integer
    /// multiple of 2 pi Omega_d (delta' = 0 qualifies).
    static DerivedFrameParams derive(double omega, double omega_r, double g,
                                     const DriveParams& drive, Diagnostics* diag = nullptr) {
        drive.validate();
        const double detuning = omega_r - drive.omega_d;
        if (detuning == 0.0) {
            throw ValidationError("frame: cavity-drive detuning must be nonzero");
        }
        DerivedFrameParams f;
        f.alpha_mag = drive.epsilon / std::abs(detuning);
        f.Omega_d = 2.0 * g * drive.epsilon / detuning;
        f.delta_prime = omega - drive.omega_d;
        f.Omega = std::hypot(f.Omega_d, f.delta_prime);
        if (f.Omega_d != 0.0) {
            f.theta_prime = std::atan(f.delta_prime / f.Omega_d);
        } else {
            f.theta_prime = f.delta_prime == 0.0 ? 0.0 : std::copysign(kPi / 2, f.delta_prime);
        }
        if (f.delta_prime != 0.0) {
            const double n = f.Omega_d == 0.0 ? 0.5 : f.delta_prime / (2.0 * kPi * f.Omega_d);
            if (std::abs(n - std::round(n)) > 1e-6) {
                std::ostringstream msg;
                msg << "frame: delta' = " << f.delta_prime
                    << " is not an integer multiple of 2 pi Omega_d (ratio " << n << ")";
                warn(diag, msg.str());
            }
        }
        return f;
    }
};

/// Displaced frame rotating at omega_d:
/// D a^dag a + g (a^dag s- + a s+) + (delta'/2) sz + (Omega_d/2)(s- e^{-i phi} + s+ e^{i phi})
inline OperatorMatrix driven_jc_hamiltonian(double omega, double omega_r, double g,
                                            const DriveParams& drive, int n_max) {
    const auto f = DerivedFrameParams::derive(omega, omega_r, g, drive);
    const double detuning = omega_r - drive.omega_d;
    const OperatorMatrix a = qops::annihilator(n_max);
    const auto id_f = qops::identity(n_max + 1);
    const cplx e = std::exp(kI * drive.phi);
    return detuning * qops::kron(qops::identity(2), qops::number_operator(n_max)) +
           g * (qops::kron(qops::sigma_minus(), a.adjoint()) +
                qops::kron(qops::sigma_plus(), a)) +
           0.5 * f.delta_prime * qops::kron(qops::sigma_z(), id_f) +
           0.5 * f.Omega_d *
               qops::kron(std::conj(e) * qops::sigma_minus() + e * qops::sigma_plus(), id_f);
}

/// The same Hamiltonian written in the eigenbasis of its drive terms:
/// D a^dag a + (Omega/2) sz + (g/2)[a e^{-i phi}(cos t' sz - sin t' sx + s+ - s-) + h.c.]
/// With this sign of t' it is isospectral to the driven form at -delta'.
inline OperatorMatrix dressed_jc_hamiltonian(double omega, double omega_r, double g,
                                             const DriveParams& drive, int n_max) {
    const auto f = DerivedFrameParams::derive(omega, omega_r, g, drive);
    const double detuning = omega_r - drive.omega_d;
    const OperatorMatrix a = qops::annihilator(n_max);
    const OperatorMatrix spin = std::cos(f.theta_prime) * qops::sigma_z() -
                                std::sin(f.theta_prime) * qops::sigma_x() + qops::sigma_plus() -
                                qops::sigma_minus();
    const OperatorMatrix half = 0.5 * g * std::exp(-kI * drive.phi) * qops::kron(spin, a);
    return detuning * qops::kron(qops::identity(2), qops::number_operator(n_max)) +
           0.5 * f.Omega * qops::kron(qops::sigma_z(), qops::identity(n_max + 1)) + half +
           half.adjoint();
}

// ---------------------------------------------------------------------------
// Hamiltonians built from oscillating terms

/// H(t) = H_static + sum_j (A_j e^{-i nu_j t} + h.c.)
class OscillatingHamiltonian {
public:
    explicit OscillatingHamiltonian(Eigen::Index dim)
        : dim_(dim), static_(OperatorMatrix::Zero(dim, dim)) {}

    Eigen::Index dimension() const { return dim_; }

    /// Adds op e^{-i nu t} + h.c. Terms sharing |nu| are merged so each
    /// frequency costs one pair of sparse products per application.
    void add(const OperatorMatrix& op, double nu) {
        check(op);
        if (nu == 0.0) {
            add_static(op + op.adjoint());
            return;
        }
        const OperatorMatrix canon = nu > 0.0 ? op : OperatorMatrix(op.adjoint());
        const double w = std::abs(nu);
        for (auto& term : terms_) {
            if (term.nu == w) {
                term.op += canon;
                term.sparse = term.op.sparseView();
                term.sparse_adj = term.op.adjoint().eval().sparseView();
                return;
            }
        }
        terms_.push_back({canon, w, canon.sparseView(), canon.adjoint().eval().sparseView()});
    }

    void add_static(const OperatorMatrix& h) {
        check(h);
        static_ += h;
        static_sparse_ = static_.sparseView();
    }

    struct Term {
        OperatorMatrix op;
        double nu;
        Eigen::SparseMatrix<cplx, Eigen::RowMajor> sparse;
        Eigen::SparseMatrix<cplx, Eigen::RowMajor> sparse_adj;
    };
    const std::vector<Term>& terms() const { return terms_; }
    const OperatorMatrix& static_part() const { return static_; }

    /// Fastest |nu|, zero for a static Hamiltonian.
    double fastest_frequency() const {
        double w = 0.0;
        for (const auto& term : terms_) w = std::max(w, term.nu);
        return w;
    }

    OperatorMatrix at(double t) const {
        OperatorMatrix h = static_;
        for (const auto& term : terms_) {
            const cplx ph = std::exp(-kI * term.nu * t);
            h += ph * term.op + std::conj(ph) * term.op.adjoint();
        }
        return h;
    }

    void apply(double t, const StateVector& y, StateVector& out) const {
        if (static_sparse_.nonZeros() > 0) {
            out.noalias() = static_sparse_ * y;
        } else {
            out.setZero(y.size());
        }
        for (const auto& term : terms_) {
            const cplx ph = std::exp(-kI * term.nu * t);
            out.noalias() += ph * (term.sparse * y);
            out.noalias() += std::conj(ph) * (term.sparse_adj * y);
        }
    }

    qops::HamiltonianAction action() const {
        return [this](double t, const StateVector& y, StateVector& out) { apply(t, y, out); };
    }

    /// Conjugates every term by a fixed unitary: A -> V A V^dagger.
    OscillatingHamiltonian rotated(const OperatorMatrix& v) const {
        OscillatingHamiltonian out(dim_);
        if (static_sparse_.nonZeros() > 0) out.add_static(v * static_ * v.adjoint());
        for (const auto& term : terms_) out.add(v * term.op * v.adjoint(), term.nu);
        return out;
    }

private:
    void check(const OperatorMatrix& op) const {
        if (op.rows() != dim_ || op.cols() != dim_) {
            throw ValidationError("oscillating Hamiltonian: term dimension mismatch");
        }
    }

    Eigen::Index dim_;
    OperatorMatrix static_;
    Eigen::SparseMatrix<cplx, Eigen::RowMajor> static_sparse_;
    std::vector<Term> terms_;
};

/// Second-order Magnus average over one common period T of all terms:
/// (-i / 2T) int_0^T dt1 int_0^t1 dt2 [H(t1), H(t2)].
/// The inner integral is exact; the outer one uses `points` midpoint nodes.
inline OperatorMatrix magnus_second_order(const OscillatingHamiltonian& h, double period,
                                          int points = 4000) {
    if (!(period > 0.0) || points < 2) {
        throw ValidationError("magnus_second_order: need a positive period and >= 2 nodes");
    }
    // H(t) = sum_j c_j(t) M_j with c_j = exp(i w_j t)
    std::vector<OperatorMatrix> mats{h.static_part()};
    std::vector<double> freqs{0.0};
    for (const auto& term : h.terms()) {
        mats.push_back(term.op);
        freqs.push_back(-term.nu);
        mats.push_back(term.op.adjoint());
        freqs.push_back(term.nu);
    }
    const std::size_t k = mats.size();
    Eigen::MatrixXcd weight = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(k),
                                                     static_cast<Eigen::Index>(k));
    const double dt = period / points;
    for (int n = 0; n < points; ++n) {
        const double t1 = (n + 0.5) * dt;
        for (std::size_t j = 0; j < k; ++j) {
            const cplx outer = std::exp(kI * freqs[j] * t1);
            for (std::size_t l = 0; l < k; ++l) {
                const cplx inner = freqs[l] == 0.0
                                       ? cplx(t1)
                                       : (std::exp(kI * freqs[l] * t1) - 1.0) / (kI * freqs[l]);
                weight(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) +=
                    outer * inner * dt;
            }
        }
    }
    OperatorMatrix out = OperatorMatrix::Zero(h.dimension(), h.dimension());
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t l = j + 1; l < k; ++l) {
            const cplx w = weight(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l)) -
                           weight(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(j));
            out += w * qops::commutator(mats[j], mats[l]);
        }
    }
    return (-kI / (2.0 * period)) * out;
}

// ---------------------------------------------------------------------------
// Interaction picture and its rotating-wave limits

enum class EffectiveKind { jc, anti_jc, longitudinal };

inline const char* to_string(EffectiveKind kind) {
    switch (kind) {
    case EffectiveKind::jc: return "jc";
    case EffectiveKind::anti_jc: return "anti-jc";
    case EffectiveKind::longitudinal: return "longitudinal";
    }
    return "?";
}

inline EffectiveKind parse_effective_kind(const std::string& s) {
    if (s == "jc") return EffectiveKind::jc;
    if (s == "anti-jc") return EffectiveKind::anti_jc;
    if (s == "longitudinal") return EffectiveKind::longitudinal;
    throw ValidationError("unknown effective kind '" + s + "' (jc | anti-jc | longitudinal)");
}

/// Operators of one qubit and the mode, already embedded in a larger space.
struct QubitModeOps {
    OperatorMatrix a, sz, sp, sm;

    static QubitModeOps embedded(const SpaceDescriptor& space, std::size_t qubit,
                                 std::size_t mode) {
        const int n_max = space.factors().at(mode).n_max();
        return {qops::embed(space, qops::annihilator(n_max), mode),
                qops::embed(space, qops::sigma_z(), qubit),
                qops::embed(space, qops::sigma_plus(), qubit),
                qops::embed(space, qops::sigma_minus(), qubit)};
    }
};

/// One drive channel:
/// (g/2)[a e^{-i Delta t} e^{-i phi}(sz + s+ e^{i Omega t} - s- e^{-i Omega t}) + h.c.]
struct ChannelParams {
    double g = 0.0;
    double Delta = 0.0;
    double Omega = 0.0;
    double phi = 0.0;
};

/// Adds the channel to `h`. With `keep_only` set, only the part that
/// survives the rotating-wave approximation for that kind is added.
inline void add_channel(OscillatingHamiltonian& h, const QubitModeOps& ops,
                        const ChannelParams& ch, const EffectiveKind* keep_only = nullptr) {
    const cplx amp = 0.5 * ch.g * std::exp(-kI * ch.phi);
    const bool all = keep_only == nullptr;
    if (all || *keep_only == EffectiveKind::longitudinal) h.add(amp * ops.a * ops.sz, ch.Delta);
    if (all || *keep_only == EffectiveKind::jc) h.add(amp * ops.a * ops.sp, ch.Delta - ch.Omega);
    if (all || *keep_only == EffectiveKind::anti_jc) {
        h.add(-amp * ops.a * ops.sm, ch.Delta + ch.Omega);
    }
}

inline SpaceDescriptor qubit_mode_space(int n_max) {
    return SpaceDescriptor({qops::Factor::qubit(), qops::Factor::mode(n_max)});
}

inline OscillatingHamiltonian interaction_terms(const ChannelParams& ch, int n_max) {
    const auto space = qubit_mode_space(n_max);
    OscillatingHamiltonian h(space.dimension());
    add_channel(h, QubitModeOps::embedded(space, 0, 1), ch);
    return h;
}

inline OscillatingHamiltonian effective_terms(EffectiveKind kind, const ChannelParams& ch,
                                              int n_max) {
    const auto space = qubit_mode_space(n_max);
    OscillatingHamiltonian h(space.dimension());
    add_channel(h, QubitModeOps::embedded(space, 0, 1), ch, &kind);
    return h;
}

/// Interaction-picture Hamiltonian of one driven channel at time t.
inline OperatorMatrix interaction_hamiltonian(double t, double g, double Delta, double Omega,
                                              double phi, int n_max) {
    return interaction_terms({g, Delta, Omega, phi}, n_max).at(t);
}

/// jc:           (g/2)(a s+ e^{-i phi} + a^dag s- e^{i phi})
/// anti_jc:     -(g/2)(a s- e^{-i phi} + a^dag s+ e^{i phi})
/// longitudinal: (g/2)(a e^{-i(Delta t + phi)} + h.c.) sz
inline OperatorMatrix effective_hamiltonian(EffectiveKind kind, double g, double phi,
                                            double Delta, double t, int n_max) {
    const auto space = qubit_mode_space(n_max);
    const auto ops = QubitModeOps::embedded(space, 0, 1);
    const cplx e = std::exp(-kI * phi);
    OperatorMatrix half;
    switch (kind) {
    case EffectiveKind::jc: half = 0.5 * g * e * ops.a * ops.sp; break;
    case EffectiveKind::anti_jc: half = -0.5 * g * e * ops.a * ops.sm; break;
    case EffectiveKind::longitudinal:
        half = 0.5 * g * std::exp(-kI * (Delta * t + phi)) * ops.a * ops.sz;
        break;
    }
    return half + half.adjoint();
}

/// Detuning that makes `kind` resonant for dressed splitting Omega. The
/// longitudinal kind needs Omega >> Delta; `longitudinal_ratio` sets Delta/Omega.
inline ChannelParams resonant_channel(EffectiveKind kind, double g, double Omega, double phi,
                                      double longitudinal_ratio = 0.1) {
    switch (kind) {
    case EffectiveKind::jc: return {g, Omega, Omega, phi};
    case EffectiveKind::anti_jc: return {g, -Omega, Omega, phi};
    case EffectiveKind::longitudinal: return {g, longitudinal_ratio * Omega, Omega, phi};
    }
    throw ValidationError("unknown effective kind");
}

/// Initial state that the rotating-wave limit of `kind` moves:
/// jc |down, 1>, anti-jc |down, 0>, longitudinal |up, 0>.
inline QuantumState rwa_reference_state(EffectiveKind kind, int n_max) {
    const auto space = qubit_mode_space(n_max);
    switch (kind) {
    case EffectiveKind::jc: return QuantumState::basis(space, {1, 1});
    case EffectiveKind::anti_jc: return QuantumState::basis(space, {1, 0});
    case EffectiveKind::longitudinal: return QuantumState::basis(space, {0, 0});
    }
    throw ValidationError("unknown effective kind");
}

struct FidelityTrace {
    std::vector<double> times;
    std::vector<double> fidelity;

    double min() const {
        double m = 1.0;
        for (double f : fidelity) m = std::min(m, f);
        return m;
    }
};

struct EvolutionOptions {
    double relative_tolerance = 1e-9;
    double max_step = 0.0;  // 0 picks a fraction of the fastest period
    // Per-step error control is enough for fidelity comparisons over many
    // thousand drive periods; per-unit-time control is much slower there.
    bool error_per_unit_time = false;
};

namespace detail {

inline FidelityTrace compare_evolutions(const OscillatingHamiltonian& exact,
                                        const OscillatingHamiltonian& approx,
                                        const StateVector& psi0, double t_end,
                                        std::size_t samples, const EvolutionOptions& opts) {
    if (samples < 2) throw ValidationError("fidelity trace needs at least 2 samples");
    if (!(t_end > 0.0)) throw ValidationError("fidelity horizon must be positive");
    const qops::TimeGrid grid{0.0, t_end, opts.max_step > 0.0 ? opts.max_step : t_end,
                              opts.relative_tolerance};
    grid.validate();
    const auto ts = grid.uniform_samples(samples);
    auto run = [&](const OscillatingHamiltonian& h) {
        AdaptiveOptions ao;
        ao.relative_tolerance = opts.relative_tolerance;
        ao.error_time_scale = opts.error_per_unit_time ? t_end : 0.0;
        ao.max_step = opts.max_step;
        if (ao.max_step <= 0.0) {
            const double w = h.fastest_frequency();
            ao.max_step = w > 0.0 ? 2.0 / w : t_end / 20.0;
        }
        std::vector<StateVector> states;
        StateVector hy(psi0.size());
        integrate_dopri5(
            [&](double t, const StateVector& y, StateVector& dy) {
                h.apply(t, y, hy);
                dy = -kI * hy;
            },
            psi0, 0.0, ts, ao,
            [&](std::size_t, double, const StateVector& y) { states.push_back(y); });
        return states;
    };
    const auto full = run(exact);
    const auto eff = run(approx);
    FidelityTrace out;
    out.times = ts;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out.fidelity.push_back(qops::fidelity(full[i], eff[i]));
    }
    return out;
}

} // namespace detail

/// |<psi_full(t)|psi_eff(t)>|^2 at `samples` uniform times in [0, T], where
/// psi_full evolves under the complete channel and psi_eff under the
/// rotating-wave limit `kind`.
inline FidelityTrace rwa_fidelity(const ChannelParams& ch, EffectiveKind kind,
                                  const QuantumState& psi0, double T, std::size_t samples,
                                  const EvolutionOptions& opts = {}) {
    const auto& fs = psi0.space().factors();
    if (fs.size() != 2 || fs[0].kind() != qops::Factor::Kind::qubit ||
        fs[1].kind() != qops::Factor::Kind::mode) {
        throw ValidationError("rwa_fidelity: state must live on qubit (x) mode");
    }
    const int n_max = fs[1].n_max();
    return detail::compare_evolutions(interaction_terms(ch, n_max),
                                      effective_terms(kind, ch, n_max), psi0.amplitudes(), T,
                                      samples, opts);
}

// ---------------------------------------------------------------------------
// Composite two-qubit scheme

struct SchemeParams {
    double omega_1 = 0.0, omega_2 = 0.0;
    double omega_r1 = 0.0, omega_r2 = 0.0;
    double omega_d1 = 0.0, omega_d2 = 0.0, omega_d3 = 0.0, omega_d4 = 0.0;
    double phi_1 = kPi / 2, phi_2 = -kPi / 2, phi_3 = 0.0, phi_4 = 0.0;
    double g = 0.0;
    double Omega_1 = 0.0, Omega_2 = 0.0, Omega_3 = 0.0, Omega_4 = 0.0;
    double Delta = 0.0;

    double Delta_1() const { return omega_r2 - omega_d1; }
    double Delta_2() const { return omega_r2 - omega_d2; }

    /// Every broken hard invariant, one message each.
    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        auto positive = [&](double x, const char* name) {
            if (!(x > 0.0)) v.push_back(std::string(name) + " must be > 0");
        };
        positive(omega_1, "omega_1");
        positive(omega_2, "omega_2");
        positive(omega_r1, "omega_r1");
        positive(omega_r2, "omega_r2");
        positive(omega_d1, "omega_d1");
        positive(omega_d2, "omega_d2");
        positive(omega_d3, "omega_d3");
        positive(omega_d4, "omega_d4");
        positive(g, "g");
        positive(Omega_1, "Omega_1");
        positive(Omega_2, "Omega_2");
        positive(Omega_3, "Omega_3");
        positive(Omega_4, "Omega_4");
        positive(Delta, "Delta");
        auto same = [&](double a, double b) {
            return std::abs(a - b) <= 1e-9 * std::max({std::abs(a), std::abs(b), 1e-300});
        };
        auto describe = [](const char* lhs, double a, const char* rhs, double b) {
            std::ostringstream msg;
            msg << lhs << " = " << a << " must equal " << rhs << " = " << b;
            return msg.str();
        };
        if (!same(Delta_1(), Omega_1)) {
            v.push_back(describe("Delta_1 = omega_r2 - omega_d1", Delta_1(), "Omega_1", Omega_1));
        }
        if (!same(Delta_2(), -Omega_2)) {
            v.push_back(
                describe("Delta_2 = omega_r2 - omega_d2", Delta_2(), "-Omega_2", -Omega_2));
        }
        if (!same(omega_r1 - omega_d3, Delta)) {
            v.push_back(describe("omega_r1 - omega_d3", omega_r1 - omega_d3, "Delta", Delta));
        }
        if (!same(omega_r2 - omega_d4, Delta)) {
            v.push_back(describe("omega_r2 - omega_d4", omega_r2 - omega_d4, "Delta", Delta));
        }
        return v;
    }

    /// Throws ValidationError listing all violations; hierarchy shortfalls
    /// become warnings.
    void validate(Diagnostics* diag = nullptr) const {
        const auto v = violations();
        if (!v.empty()) {
            std::string msg = "scheme parameters violate:";
            for (const auto& s : v) msg += "\n  " + s;
            throw ValidationError(msg);
        }
        auto hierarchy = [&](double big, double small, const char* what) {
            if (big < kHierarchyRatio * small) {
                std::ostringstream msg;
                msg << "scheme: " << what << " only by a factor " << big / small;
                warn(diag, msg.str());
            }
        };
        const double kinetic = std::max(Omega_1, Omega_2);
        hierarchy(Delta, kinetic, "Delta exceeds Delta_1");
        hierarchy(omega_d1 - omega_r1, kinetic, "delta_1 = omega_d1 - omega_r1 exceeds Delta_1");
        hierarchy(Omega_3, Delta, "Omega_3 exceeds Delta");
        hierarchy(Omega_4, Delta, "Omega_4 exceeds Delta");
    }
};

/// The reference level scheme in angular frequency per ns (omega = 2 pi f[GHz]).
/// The coupling g and the strong-drive splittings Omega_3, Omega_4 are not
/// fixed by the scheme and are supplied in GHz.
inline SchemeParams reference_scheme(double g_ghz, double Omega_3_ghz, double Omega_4_ghz) {
    const double w = 2.0 * kPi;
    SchemeParams s;
    s.omega_1 = w * 4.4;
    s.omega_2 = w * 9.7;
    s.omega_r1 = w * 5.0;
    s.omega_r2 = w * 10.0;
    s.omega_d1 = w * 9.9;
    s.omega_d2 = w * 10.1;
    s.omega_d3 = w * 4.5;
    s.omega_d4 = w * 9.5;
    s.Omega_1 = s.omega_r2 - s.omega_d1;
    s.Omega_2 = s.omega_d2 - s.omega_r2;
    s.Delta = s.omega_r1 - s.omega_d3;
    s.g = w * g_ghz;
    s.Omega_3 = w * Omega_3_ghz;
    s.Omega_4 = w * Omega_4_ghz;
    return s;
}

/// drive: couplings as generated, (sz (x) 1 + 1 (x) sz) on the exchange channel.
/// simulation: after the fixed single-qubit rotations, (sx (x) 1 + 1 (x) sy).
enum class CompositeFrame { drive, simulation };

inline SpaceDescriptor composite_space(int n_max) {
    return SpaceDescriptor({qops::Factor::qubit(), qops::Factor::qubit(), qops::Factor::mode(n_max)});
}

/// V = H (x) R (x) 1 with H the Hadamard gate and R = (1 + i sx)/sqrt 2,
/// so that V (sz (x) 1) V^dag = sx (x) 1, V (1 (x) sz) V^dag = 1 (x) sy and
/// 1 (x) sx is left unchanged.
inline OperatorMatrix frame_rotation(int n_max) {
    const double r = 1.0 / std::sqrt(2.0);
    OperatorMatrix had(2, 2);
    had << r, r, r, -r;
    const OperatorMatrix rot = r * (qops::identity(2) + kI * qops::sigma_x());
    return qops::kron(had, rot, qops::identity(n_max + 1));
}

/// Effective composite Hamiltonian:
/// (g/2)(S1 + S2)(a^dag e^{i Delta t} + a e^{-i Delta t}) + (g/2) i (a^dag - a)(1 (x) sx)
/// with S1 + S2 = sz (x) 1 + 1 (x) sz (drive) or sx (x) 1 + 1 (x) sy (simulation).
inline OperatorMatrix composite_hamiltonian_effective(const SchemeParams& s, double t, int n_max,
                                                      CompositeFrame frame = CompositeFrame::simulation) {
    const auto q = qops::identity(2);
    const auto f = qops::identity(n_max + 1);
    const OperatorMatrix a = qops::annihilator(n_max);
    const OperatorMatrix spin = frame == CompositeFrame::drive
                                    ? OperatorMatrix(qops::kron(qops::sigma_z(), q) +
                                                     qops::kron(q, qops::sigma_z()))
                                    : OperatorMatrix(qops::kron(qops::sigma_x(), q) +
                                                     qops::kron(q, qops::sigma_y()));
    const OperatorMatrix field = a.adjoint() * std::exp(kI * s.Delta * t) +
                                 a * std::exp(-kI * s.Delta * t);
    return 0.5 * s.g * qops::kron(spin, f) * qops::kron(q, q, field) +
           0.5 * s.g * kI * qops::kron(q, qops::sigma_x(), OperatorMatrix(a.adjoint() - a));
}

/// Sum of the four drive channels with all oscillating terms retained:
/// channels 1, 2 (kinetic, detunings +Omega_1 and -Omega_2) and 4 act on
/// qubit 2, channel 3 on qubit 1. With drop_fast_terms only the
/// rotating-wave survivors remain, which reproduces the effective form.
inline OscillatingHamiltonian composite_terms(const SchemeParams& s, int n_max,
                                              CompositeFrame frame, bool drop_fast_terms) {
    const auto space = composite_space(n_max);
    const auto q1 = QubitModeOps::embedded(space, 0, 2);
    const auto q2 = QubitModeOps::embedded(space, 1, 2);
    OscillatingHamiltonian h(space.dimension());
    auto channel = [&](const QubitModeOps& ops, ChannelParams ch, EffectiveKind kind) {
        add_channel(h, ops, ch, drop_fast_terms ? &kind : nullptr);
    };
    // Resonance conditions are imposed exactly (validated to 1e-9 relative).
    channel(q2, {s.g, s.Omega_1, s.Omega_1, s.phi_1}, EffectiveKind::jc);
    channel(q2, {s.g, -s.Omega_2, s.Omega_2, s.phi_2}, EffectiveKind::anti_jc);
    channel(q1, {s.g, s.Delta, s.Omega_3, s.phi_3}, EffectiveKind::longitudinal);
    channel(q2, {s.g, s.Delta, s.Omega_4, s.phi_4}, EffectiveKind::longitudinal);
    return frame == CompositeFrame::drive ? h : h.rotated(frame_rotation(n_max));
}

inline OperatorMatrix composite_hamiltonian_full(const SchemeParams& s, double t, int n_max,
                                                 CompositeFrame frame = CompositeFrame::simulation,
                                                 bool drop_fast_terms = false) {
    return composite_terms(s, n_max, frame, drop_fast_terms).at(t);
}

/// Full versus effective composite evolution from psi0 (qubit1 (x) qubit2 (x) mode).
inline FidelityTrace composite_fidelity(const SchemeParams& s, const QuantumState& psi0, double T,
                                        std::size_t samples, const EvolutionOptions& opts = {},
                                        CompositeFrame frame = CompositeFrame::simulation) {
    const auto& fs = psi0.space().factors();
    if (fs.size() != 3 || fs[2].kind() != qops::Factor::Kind::mode) {
        throw ValidationError("composite_fidelity: state must live on qubit (x) qubit (x) mode");
    }
    const int n_max = fs[2].n_max();
    return detail::compare_evolutions(composite_terms(s, n_max, frame, false),
                                      composite_terms(s, n_max, frame, true), psi0.amplitudes(),
                                      T, samples, opts);
}

/// One exchange period 2 pi / (g^2 / 2 Delta).
inline double exchange_period(const SchemeParams& s) {
    return 2.0 * kPi * 2.0 * s.Delta / (s.g * s.g);
}

// ---------------------------------------------------------------------------
// Identification with the Majorana parameters

struct MEIdentification {
    double m_prime = 1.0;
    double c_sim = 0.0;
    double m_sim = 0.0;
    double mc2 = 0.0;
};

/// p = i sqrt(m' omega_r2 / 2)(a^dag - a), c = g sqrt(1 / (2 m' omega_r2)),
/// m c^2 = g^2 / (2 Delta).
inline MEIdentification identify_me_params(double g, double Delta, double omega_r2,
                                           double m_prime) {
    if (!(g > 0.0 && Delta > 0.0 && omega_r2 > 0.0 && m_prime > 0.0)) {
        throw ValidationError("identify_me_params: g, Delta, omega_r2 and m' must be positive");
    }
    MEIdentification id;
    id.m_prime = m_prime;
    id.c_sim = g * std::sqrt(1.0 / (2.0 * m_prime * omega_r2));
    id.mc2 = g * g / (2.0 * Delta);
    id.m_sim = id.mc2 / (id.c_sim * id.c_sim);
    return id;
}

/// Mode quadrature standing in for the momentum: i sqrt(m' omega_r2 / 2)(a^dag - a).
inline OperatorMatrix momentum_quadrature(int n_max, double m_prime, double omega_r2) {
    const OperatorMatrix a = qops::annihilator(n_max);
    return kI * std::sqrt(0.5 * m_prime * omega_r2) * (a.adjoint() - a);
}

/// Places (Re psi1, Re psi2, Im psi1, Im psi2) on qubit1 (real/imaginary
/// flag) (x) qubit2 (spinor index), with the mode in vacuum.
inline QuantumState encode_initial_state(const Eigen::Vector2cd& psi, int n_max) {
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
        throw ValidationError("encode_initial_state: spinor must be normalized");
    }
    const auto space = composite_space(n_max);
    StateVector v = StateVector::Zero(space.dimension());
    v[space.basis_index({0, 0, 0})] = psi[0].real();
    v[space.basis_index({0, 1, 0})] = psi[1].real();
    v[space.basis_index({1, 0, 0})] = psi[0].imag();
    v[space.basis_index({1, 1, 0})] = psi[1].imag();
    return QuantumState(space, std::move(v));
}

} // namespace mcqed::cqed
