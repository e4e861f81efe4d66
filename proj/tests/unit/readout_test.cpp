#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mcqed/readout.hpp"

using namespace mcqed;
using namespace mcqed::readout;

namespace {

constexpr double w = kTwoPi;

Eigen::VectorXd lowest(const OperatorMatrix& h, int count) {
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(h);
    Eigen::VectorXd ev = es.eigenvalues();
    std::sort(ev.data(), ev.data() + ev.size());
    return ev.head(count);
}

ReadoutParams line_center(double g, double detuning, double kappa, double eps = 0.0) {
    ReadoutParams p;
    p.g = g;
    p.detuning = detuning;
    p.kappa = kappa;
    p.omega_r = w * 5000.0;
    p.drive = {eps, p.omega_r, 0.0};
    return p;
}

} // namespace

TEST(DispersiveShift, Values) {
    const double g = w * 94.2338;
    EXPECT_NEAR(dispersive_shift(g, w * 600.0) / w, 14.8, 1e-3);
    EXPECT_NEAR(dispersive_shift(g, w * 300.0) / w, 29.6, 1e-3);
    EXPECT_EQ(dispersive_shift(0.0, w * 300.0), 0.0);
    EXPECT_LT(dispersive_shift(g, -w * 300.0), 0.0);
    EXPECT_THROW(dispersive_shift(g, 0.0), ValidationError);
}

TEST(DispersiveShift, CouplingInversion) {
    const double g = coupling_for_interval(w * 29.6, w * 600.0);
    EXPECT_NEAR(g / w, std::sqrt(29.6 * 600.0 / 2.0), 1e-9);
    EXPECT_NEAR(2 * dispersive_shift(g, w * 600.0), w * 29.6, 1e-9);
    EXPECT_THROW(coupling_for_interval(w * 29.6, -w * 600.0), ValidationError);
}

TEST(DispersiveHamiltonian, Hermitian) {
    auto p = line_center(w * 50.0, w * 600.0, w * 6.25, w * 2.0);
    p.drive.omega_d = p.omega_r - w * 3.0;
    EXPECT_LT(qops::hermiticity_defect(dispersive_hamiltonian(p, 8)), 1e-15);
}

TEST(DispersiveHamiltonian, PullConditionedOnQubit) {
    // eps = 0, lab frame (omega_d = 0): cavity spacing omega_r + chi_H sz.
    const int n_max = 6;
    ReadoutParams p;
    p.g = 0.2;
    p.detuning = 2.0;
    p.kappa = 0.1;
    p.omega_r = 10.0;
    const double chi = dispersive_shift(p.g, p.detuning);
    const OperatorMatrix h = dispersive_hamiltonian(p, n_max);
    const auto space = cqed::qubit_mode_space(n_max);
    for (Eigen::Index s : {0, 1}) {
        const double sz = s == 0 ? 1.0 : -1.0;
        for (Eigen::Index n = 0; n < n_max; ++n) {
            const auto i0 = space.basis_index({s, n}), i1 = space.basis_index({s, n + 1});
            EXPECT_NEAR(h(i1, i1).real() - h(i0, i0).real(), p.omega_r - chi * sz, 1e-12);
        }
    }
}

TEST(DispersiveHamiltonian, PullSignFollowsDetuning) {
    ReadoutParams a;
    a.g = 0.2;
    a.detuning = 2.0;
    a.kappa = 0.1;
    a.omega_r = 10.0;
    ReadoutParams b = a;
    b.detuning = -2.0;
    const auto ha = dispersive_hamiltonian(a, 3), hb = dispersive_hamiltonian(b, 3);
    const auto space = cqed::qubit_mode_space(3);
    const auto u0 = space.basis_index({0, 0}), u1 = space.basis_index({0, 1});
    const double pa = ha(u1, u1).real() - ha(u0, u0).real() - a.omega_r;
    const double pb = hb(u1, u1).real() - hb(u0, u0).real() - b.omega_r;
    EXPECT_NEAR(pa, -pb, 1e-14);
    EXPECT_LT(pa, 0.0);
}

TEST(DispersiveHamiltonian, SecondOrderAgainstExactJc) {
    // Lowest four levels (n = 0, 1 for both qubit states), up to the
    // constant -g^2 / 2D'. Error ~ g^4 / D'^3, so halving g cuts it by 16.
    const int n_max = 10;
    auto error = [&](double ratio) {
        ReadoutParams p;
        p.detuning = 1.0;
        p.g = ratio * p.detuning;
        p.kappa = 0.01;
        p.omega_r = 10.0;
        const double offset = -p.g * p.g / (2 * p.detuning);
        const auto exact = lowest(exact_jc_hamiltonian(p, n_max), 4);
        const auto disp = lowest(dispersive_hamiltonian(p, n_max), 4);
        return (exact - disp - Eigen::VectorXd::Constant(4, offset)).cwiseAbs().maxCoeff();
    };
    const double e1 = error(0.1), e2 = error(0.05);
    EXPECT_LT(e1, 5 * std::pow(0.1, 4));
    EXPECT_GT(e1 / e2, 8.0);
    EXPECT_LT(e1 / e2, 32.0);
}

TEST(OutputSpectrum, LineCenterPhase) {
    const auto p = line_center(w * 94.2, w * 600.0, w * 6.25);
    const double chi = dispersive_shift(p.g, p.detuning);
    const auto up = output_spectrum(0.0, p, 1), down = output_spectrum(0.0, p, -1);
    EXPECT_NEAR(std::abs(up.amplitude_ratio - p.kappa / cplx(p.kappa, chi)), 0.0, 1e-15);
    EXPECT_NEAR(up.phase, -std::atan(chi / p.kappa), 1e-14);
    EXPECT_NEAR(down.phase, std::atan(chi / p.kappa), 1e-14);
    EXPECT_DOUBLE_EQ(up.phase, std::arg(up.amplitude_ratio));
}

TEST(OutputSpectrum, NoPullNoPhase) {
    const auto p = line_center(0.0, w * 600.0, w * 6.25);
    const auto r = output_spectrum(0.0, p, 1);
    EXPECT_NEAR(std::abs(r.amplitude_ratio - 1.0), 0.0, 1e-15);
    EXPECT_EQ(r.phase, 0.0);
}

TEST(OutputSpectrum, LorentzianShiftedByPull) {
    const auto p = line_center(w * 40.0, w * 600.0, w * 6.25);
    const double chi = dispersive_shift(p.g, p.detuning);
    for (int sz : {1, -1}) {
        const auto sweep = spectrum_sweep(p, sz, -w * 60.0, w * 60.0, 4001);
        auto peak = std::max_element(sweep.begin(), sweep.end(), [](auto& a, auto& b) {
            return std::norm(a.amplitude_ratio) < std::norm(b.amplitude_ratio);
        });
        EXPECT_NEAR(peak->omega, chi * sz, w * 0.03);
        EXPECT_NEAR(std::norm(peak->amplitude_ratio), 1.0, 1e-5);
        // half maximum at distance kappa from the centre
        const double centre = chi * sz;
        EXPECT_NEAR(std::norm(output_spectrum(centre + p.kappa, p, sz).amplitude_ratio), 0.5, 1e-12);
        EXPECT_NEAR(std::norm(output_spectrum(centre - p.kappa, p, sz).amplitude_ratio), 0.5, 1e-12);
        for (const auto& pt : sweep) EXPECT_LE(std::abs(pt.amplitude_ratio), 1.0 + 1e-15);
    }
}

TEST(PhaseShift, ReferenceReadoutNumbers) {
    const ReadoutSetup setup;
    const auto r = summarize_readout(setup);
    EXPECT_NEAR(r.g_mhz, 94.2, 0.05);
    EXPECT_NEAR(r.cpb1.interval_mhz, 29.6, 1e-9);
    EXPECT_NEAR(r.cpb2.interval_mhz, 59.2, 0.1);
    EXPECT_NEAR(r.cpb1.theta_deg, 67.1, 0.05);
    EXPECT_NEAR(r.cpb1.theta_deg, 134.0 / 2.0, 0.5);
    EXPECT_NEAR(r.cpb2.theta_deg, 78.1, 0.05);
    EXPECT_TRUE(r.theta2_discrepancy);
}

TEST(PhaseShift, Antisymmetric) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 100.0);
    for (int i = 0; i < 50; ++i) {
        const auto s = phase_shift(u(rng), u(rng) * (i % 2 ? 1 : -1), u(rng));
        EXPECT_DOUBLE_EQ(s.theta_plus, -s.theta_minus);
        EXPECT_DOUBLE_EQ(s.interval, 2 * s.chi);
    }
}

TEST(PhaseShift, VanishesWithoutCoupling) {
    const auto s = phase_shift(0.0, w * 600.0, w * 6.25);
    EXPECT_EQ(s.theta_plus, 0.0);
    EXPECT_EQ(s.interval, 0.0);
    EXPECT_THROW(phase_shift(1.0, 1.0, 0.0), ValidationError);
}

TEST(MeanField, FreeDecay) {
    const auto p = line_center(w * 20.0, w * 600.0, w * 6.25);
    const auto tr = cavity_mean_field(p, 1, 3.0 / p.kappa, 31, cplx(1.0, 0.0));
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        EXPECT_NEAR(std::abs(tr.alpha[i]), std::exp(-p.kappa * tr.times[i]), 1e-9);
    }
}

TEST(MeanField, ApproachesSteadyState) {
    auto p = line_center(w * 94.2, w * 600.0, w * 6.25, w * 1.0);
    p.drive.omega_d = p.omega_r - w * 4.0;
    for (int sz : {1, -1}) {
        const cplx ss = steady_state_field(p, sz);
        const double chi = dispersive_shift(p.g, p.detuning);
        const cplx rate = -kI * (p.omega_r - p.drive.omega_d + chi * sz) - p.kappa;
        // transient e^{-kappa t} is still e^{-10} at 10 / kappa; compare the
        // full closed form there and the steady state at 20 / kappa
        const auto tr = cavity_mean_field(p, sz, 10.0 / p.kappa, 11);
        const double t = tr.times.back();
        EXPECT_NEAR(std::abs(tr.alpha.back() - ss * (1.0 - std::exp(rate * t))), 0.0,
                    1e-8 * std::abs(ss));
        const auto late = cavity_mean_field(p, sz, 20.0 / p.kappa, 3);
        EXPECT_NEAR(std::abs(late.alpha.back() - ss), 0.0, 1e-8 * std::abs(ss));
    }
}

TEST(MeanField, PhaseSplittingMatchesPhaseShift) {
    const auto p = line_center(w * 94.2, w * 600.0, w * 6.25, w * 1.0);
    const double chi = dispersive_shift(p.g, p.detuning);
    const double dphi = std::arg(steady_state_field(p, -1) / steady_state_field(p, 1));
    EXPECT_NEAR(dphi, 2 * std::atan(chi / p.kappa), 1e-12);
    const auto s = phase_shift(p.g, p.detuning, p.kappa);
    EXPECT_NEAR(dphi, s.theta_minus - s.theta_plus, 1e-12);
}

TEST(Params, ViolationsCollected) {
    ReadoutParams p;
    p.g = -1.0;
    p.kappa = -0.5;
    EXPECT_EQ(p.violations().size(), 3u);  // g, detuning, kappa
    try {
        p.validate();
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("kappa"), std::string::npos);
    }
}

TEST(Params, WeakDetuningWarns) {
    auto p = line_center(w * 200.0, w * 600.0, w * 6.25);
    Diagnostics d;
    p.validate(&d);
    EXPECT_EQ(d.warnings().size(), 1u);
    p.g = w * 94.2;
    Diagnostics ok;
    p.validate(&ok);
    EXPECT_TRUE(ok.empty());
}
