#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "mcqed/measure.hpp"

using namespace mcqed;
using namespace mcqed::measure;
using majorana::RealSpinorField;

namespace {

const SpatialGrid kGrid(256, 40.0);

// Plane wave at a grid momentum with a fixed four-spinor (complex allowed).
FourSpinorField plane_wave(std::size_t j, const Eigen::Vector4cd& spin) {
    const double p = kGrid.momentum(j);
    Eigen::MatrixXcd v(static_cast<Eigen::Index>(kGrid.size()), 4);
    const Eigen::Vector4cd s = spin / spin.norm();
    for (std::size_t i = 0; i < kGrid.size(); ++i) {
        const cplx phase = std::exp(kI * p * kGrid.position(i)) / std::sqrt(kGrid.length());
        v.row(static_cast<Eigen::Index>(i)) = (phase * s).transpose();
    }
    return {kGrid, v};
}

Eigen::Vector4cd product(const Eigen::Vector2cd& q1, const Eigen::Vector2cd& q2) {
    Eigen::Vector4cd out;
    out << q1[0] * q2[0], q1[0] * q2[1], q1[1] * q2[0], q1[1] * q2[1];
    return out;
}

const Eigen::Vector2cd kUp(1.0, 0.0);
const Eigen::Vector2cd kXPlus = Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0);
const Eigen::Vector2cd kYPlus = Eigen::Vector2cd(1.0, kI) / std::sqrt(2.0);

} // namespace

TEST(Rotation, IdentityAtZero) {
    for (auto t : {ProtocolTarget::kinetic, ProtocolTarget::exchange}) {
        EXPECT_LT(qops::max_abs(uk_rotation(0.0, t, 1.7) - qops::identity(4)), 1e-15);
        EXPECT_LT(qops::max_abs(uk_rotation(0.0, t, 4, 1.0, 2.0) - qops::identity(4 * 5)), 1e-13);
    }
}

TEST(Rotation, GroupProperties) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (auto t : {ProtocolTarget::kinetic, ProtocolTarget::exchange}) {
        for (int i = 0; i < 20; ++i) {
            const double k1 = u(rng), k2 = u(rng), p = 3 * u(rng);
            const OperatorMatrix a = uk_rotation(k1, t, p);
            EXPECT_LT(qops::unitarity_defect(a), 1e-10);
            EXPECT_LT(qops::max_abs(a * uk_rotation(-k1, t, p) - qops::identity(4)), 1e-12);
            EXPECT_LT(qops::max_abs(a * uk_rotation(k2, t, p) - uk_rotation(k1 + k2, t, p)), 1e-12);
        }
        const OperatorMatrix c1 = uk_rotation(0.3, t, 5, 1.0, 2.0);
        const OperatorMatrix c2 = uk_rotation(-0.8, t, 5, 1.0, 2.0);
        EXPECT_LT(qops::unitarity_defect(c1), 1e-10);
        EXPECT_LT(qops::max_abs(c1 * c2 - uk_rotation(-0.5, t, 5, 1.0, 2.0)), 1e-12);
    }
}

TEST(Rotation, MatchesMatrixExponential) {
    for (auto t : {ProtocolTarget::kinetic, ProtocolTarget::exchange}) {
        const double k = 0.7, p = -1.3;
        EXPECT_LT(qops::max_abs(uk_rotation(k, t, p) - qops::propagator(p * rotation_spin(t), k)),
                  1e-13);
    }
}

TEST(Observable, AtZeroIsBareSigmaZ) {
    std::mt19937_64 rng(2);
    const auto f = FourSpinorField::from(random_real_packet(kGrid, rng));
    EXPECT_NEAR(f_observable_expect(f, 0.0),
                spin_expect(f, qops::kron(qops::identity(2), qops::sigma_z())), 1e-12);
}

TEST(Observable, TwoEvaluationsAgree) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 5; ++i) {
        const auto f = FourSpinorField::from(random_real_packet(kGrid, rng));
        const double k = u(rng);
        EXPECT_NEAR(f_observable_expect(f, k), f_observable_conjugated(f, k), 1e-10);
    }
}

TEST(Observable, MomentumEigenmodeClosedForms) {
    const std::size_t j = 5;
    const double p0 = kGrid.momentum(j);
    const auto up = plane_wave(j, product(kUp, kUp));
    const auto xp = plane_wave(j, product(kUp, kXPlus));
    for (double k : {0.0, 0.2, 1.1}) {
        EXPECT_NEAR(f_observable_expect(up, k), std::cos(k * p0), 1e-12);
        EXPECT_NEAR(f_observable_expect(xp, k), -std::sin(k * p0), 1e-12);
    }
    EXPECT_NEAR(kinetic_slope(xp, 1e-3, 4).value, -p0, 1e-9);
}

TEST(Slope, EvenFunctionHasZeroSlope) {
    EXPECT_EQ(slope_at_zero([](double k) { return k * k; }, 1e-3, 2).value, 0.0);
    EXPECT_EQ(slope_at_zero([](double k) { return k * k; }, 1e-3, 4).value, 0.0);
}

TEST(Slope, SecondOrderAccuracy) {
    auto f = [](double k) { return std::sin(3 * k); };
    EXPECT_NEAR(slope_at_zero(f, 1e-3, 2).value, 3.0, 5e-6);
    const double e1 = std::abs(slope_at_zero(f, 1e-2, 2).value - 3.0);
    const double e2 = std::abs(slope_at_zero(f, 5e-3, 2).value - 3.0);
    EXPECT_NEAR(e1 / e2, 4.0, 0.05);
    const double q1 = std::abs(slope_at_zero(f, 4e-2, 4).value - 3.0);
    const double q2 = std::abs(slope_at_zero(f, 2e-2, 4).value - 3.0);
    EXPECT_NEAR(q1 / q2, 16.0, 0.5);
}

TEST(Slope, RejectsBadArguments) {
    auto f = [](double k) { return k; };
    EXPECT_THROW(slope_at_zero(f, 0.0, 2), ValidationError);
    EXPECT_THROW(slope_at_zero(f, 1e-3, 3), ValidationError);
}

TEST(Exchange, ProductStateSlope) {
    const std::size_t j = 7;
    const double p0 = kGrid.momentum(j);
    const auto f = plane_wave(j, product(kYPlus, kXPlus));
    EXPECT_NEAR(std::abs(exchange_slope(f, 1e-3, 4).value), 2 * p0, 1e-9);
    EXPECT_NEAR(exchange_slope(f, 1e-3, 4).value, 2 * p0, 1e-9);
}

TEST(Exchange, SymmetricPacketAtRestHasZeroSlope) {
    const auto psi = majorana::to_real_spinor(
        majorana::gaussian_wavepacket(kGrid, 0.0, 0.0, 2.0, Eigen::Vector2cd(1.0, kI)));
    EXPECT_NEAR(exchange_slope(FourSpinorField::from(psi)).value, 0.0, 1e-12);
}

TEST(Exchange, MatchesOperatorOracle) {
    std::mt19937_64 rng(5);
    const OperatorMatrix yx = qops::kron(qops::sigma_y(), qops::sigma_x());
    for (int i = 0; i < 5; ++i) {
        const auto f = FourSpinorField::from(random_real_packet(kGrid, rng));
        const double oracle = 2 * generator_momentum_expect(f, yx);
        const double e1 = std::abs(exchange_slope(f, 2e-3).value - oracle);
        const double e2 = std::abs(exchange_slope(f, 1e-3).value - oracle);
        EXPECT_LT(e2, 1e-5);
        EXPECT_NEAR(e1 / e2, 4.0, 0.1);
    }
}

TEST(Reconstruct, PlugIn) {
    EXPECT_DOUBLE_EQ(reconstruct_helicity({-1.5, 1e-3, 2}, {0.0, 1e-3, 2}), 1.5);
    EXPECT_DOUBLE_EQ(reconstruct_helicity({0.0, 1e-3, 2}, {0.0, 1e-3, 2}), 0.0);
    // <(1 x sx) p> = p0 with no exchange part
    const std::size_t j = 3;
    const auto f = plane_wave(j, product(kUp, kXPlus));
    EXPECT_NEAR(reconstruct_helicity(kinetic_slope(f, 1e-3, 4), exchange_slope(f, 1e-3, 4)),
                kGrid.momentum(j), 1e-9);
}

TEST(Reconstruct, ZeroMomentumState) {
    const auto psi = majorana::to_real_spinor(
        majorana::gaussian_wavepacket(kGrid, 0.0, 0.0, 2.0, Eigen::Vector2cd(1.0, 0.0)));
    EXPECT_NEAR(read_helicity(psi).reconstructed, 0.0, 1e-12);
}

TEST(Reconstruct, ProtocolTracksOracleWithQuadraticError) {
    // |reconstructed - direct| ~ C step^2 with C stable under halving.
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
        const auto psi = random_real_packet(kGrid, rng);
        const auto a = read_helicity(psi, 2e-3);
        const auto b = read_helicity(psi, 1e-3);
        const double ca = std::abs(a.reconstructed - a.direct) / (4e-6);
        const double cb = std::abs(b.reconstructed - b.direct) / (1e-6);
        EXPECT_LT(std::abs(b.reconstructed - b.direct), 1e-4);
        if (cb > 1e-6) {
            EXPECT_NEAR(ca / cb, 1.0, 0.05) << "state " << i;
        }
    }
}

TEST(Reconstruct, ConservedAlongMajoranaTrajectory) {
    std::mt19937_64 rng(7);
    const auto psi0 = random_real_packet(kGrid, rng);
    const majorana::MEParams params{1.0, 1.0};
    const double h0 = read_helicity(psi0).reconstructed;
    double spread = 0.0;
    for (double t : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const double h = read_helicity(majorana::evolve_me_real(psi0, params, t)).reconstructed;
        spread = std::max(spread, std::abs(h - h0));
    }
    EXPECT_LT(spread / std::max(std::abs(h0), 1e-3), 1e-4);
}

TEST(Circuit, SlopesMatchDirectExpectations) {
    const CircuitContext ctx{12, 1.3, 2.0};
    const auto space = cqed::composite_space(ctx.n_max);
    // spin product state (sy+ on qubit 1, sx+ on qubit 2) times a coherent-ish mode state
    StateVector mode = StateVector::Zero(ctx.n_max + 1);
    mode[0] = 1.0;
    mode[1] = cplx(0.3, 0.4);
    mode[2] = 0.1;
    mode.normalize();
    const Eigen::Vector4cd spin = product(kYPlus, kXPlus);
    StateVector psi(space.dimension());
    for (int s = 0; s < 4; ++s) psi.segment(s * (ctx.n_max + 1), ctx.n_max + 1) = spin[s] * mode;

    const OperatorMatrix p = ctx.momentum();
    const OperatorMatrix kin = qops::kron(majorana::kinetic_generator(), qops::identity(ctx.n_max + 1)) * p;
    const OperatorMatrix exch = qops::kron(majorana::exchange_generator(), qops::identity(ctx.n_max + 1)) * p;
    const auto ks = circuit_slope(psi, ctx, ProtocolTarget::kinetic, 1e-3, 4);
    const auto es = circuit_slope(psi, ctx, ProtocolTarget::exchange, 1e-3, 4);
    EXPECT_NEAR(ks.value, -qops::expectation(kin, psi).real(), 1e-9);
    EXPECT_NEAR(es.value, 2 * qops::expectation(exch, psi).real(), 1e-9);
    EXPECT_NEAR(reconstruct_helicity(ks, es), circuit_helicity_direct(psi, ctx), 1e-9);
}

TEST(Target, Names) {
    EXPECT_EQ(parse_protocol_target("kinetic"), ProtocolTarget::kinetic);
    EXPECT_EQ(parse_protocol_target(to_string(ProtocolTarget::exchange)), ProtocolTarget::exchange);
    EXPECT_THROW(parse_protocol_target("mass"), ValidationError);
}
