#pragma once

// Embedded Dormand-Prince 5(4) integrator for complex vector ODEs.
//
// The right-hand side is written into a caller-owned buffer so that hot
// loops (spectral Majorana oracle, composite circuit Hamiltonian) do not
// allocate per stage. Output is reported only at the requested sample
// times; steps are clipped so that every sample time is hit exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include <Eigen/Dense>

#include "mcqed/errors.hpp"

namespace mcqed {

struct AdaptiveOptions {
    double relative_tolerance = 1e-9;
    // Negative means "same as relative_tolerance".
    double absolute_tolerance = -1.0;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;
    std::size_t max_steps = 100'000'000;
    // When positive, the local tolerance of a step h is scaled by
    // min(1, h / error_time_scale) (error per unit step), so accumulated
    // error over a horizon of that length stays at the tolerance level.
    double error_time_scale = 0.0;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

namespace detail {

struct DormandPrince {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b - b* (fifth minus fourth order weights)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

} // namespace detail

/// Integrates dy/dt = rhs(t, y) from t0 through each of `sample_times`
/// (non-decreasing, all >= t0) and calls observe(index, t, y) at each.
///
/// rhs must have the signature void(double t, const VectorXcd& y, VectorXcd& dydt).
/// Throws NumericalError when the step size underflows; the message names
/// the time at which the integrator got stuck.
template <class Rhs, class Observer>
IntegrationStats integrate_dopri5(Rhs&& rhs, Eigen::VectorXcd y, double t0,
                                  std::span<const double> sample_times,
                                  const AdaptiveOptions& opts, Observer&& observe) {
    using Eigen::VectorXcd;
    using DP = detail::DormandPrince;

    if (!(opts.relative_tolerance > 0.0)) {
        throw ValidationError("integrator tolerance must be positive");
    }
    if (!(opts.max_step > 0.0)) {
        throw ValidationError("integrator max_step must be positive");
    }
    const double rtol = opts.relative_tolerance;
    const double atol = opts.absolute_tolerance < 0.0 ? rtol : opts.absolute_tolerance;

    IntegrationStats stats;
    const Eigen::Index n = y.size();
    VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n);

    double t = t0;
    rhs(t, y, k1);
    ++stats.rhs_evaluations;

    double h = opts.initial_step;
    if (h <= 0.0) {
        const double scale = std::max(k1.cwiseAbs().maxCoeff(), 1e-12);
        h = std::min(opts.max_step, 0.01 / scale);
    }

    for (std::size_t idx = 0; idx < sample_times.size(); ++idx) {
        const double target = sample_times[idx];
        if (target < t) {
            throw ValidationError("sample times must be non-decreasing and not precede t0");
        }
        while (t < target) {
            if (stats.accepted + stats.rejected >= opts.max_steps) {
                std::ostringstream msg;
                msg << "integrator exceeded " << opts.max_steps << " steps at t=" << t;
                throw NumericalError(msg.str());
            }
            const double remaining = target - t;
            bool clipped = false;
            double step = std::min(h, opts.max_step);
            if (step >= remaining) {
                step = remaining;
                clipped = true;
            }
            const double min_step = 1e-13 * std::max(1.0, std::abs(t));
            if (step < min_step && !clipped) {
                std::ostringstream msg;
                msg << "step-size underflow at t=" << t << " (h=" << step << ")";
                throw NumericalError(msg.str());
            }

            tmp = y + step * DP::a21 * k1;
            rhs(t + DP::c2 * step, tmp, k2);
            tmp = y + step * (DP::a31 * k1 + DP::a32 * k2);
            rhs(t + DP::c3 * step, tmp, k3);
            tmp = y + step * (DP::a41 * k1 + DP::a42 * k2 + DP::a43 * k3);
            rhs(t + DP::c4 * step, tmp, k4);
            tmp = y + step * (DP::a51 * k1 + DP::a52 * k2 + DP::a53 * k3 + DP::a54 * k4);
            rhs(t + DP::c5 * step, tmp, k5);
            tmp = y + step * (DP::a61 * k1 + DP::a62 * k2 + DP::a63 * k3 + DP::a64 * k4 +
                              DP::a65 * k5);
            rhs(t + step, tmp, k6);
            y_new = y + step * (DP::b1 * k1 + DP::b3 * k3 + DP::b4 * k4 + DP::b5 * k5 +
                                DP::b6 * k6);
            rhs(t + step, y_new, k7);
            stats.rhs_evaluations += 6;

            tmp = step * (DP::e1 * k1 + DP::e3 * k3 + DP::e4 * k4 + DP::e5 * k5 +
                          DP::e6 * k6 + DP::e7 * k7);
            const double unit =
                opts.error_time_scale > 0.0 ? std::min(1.0, step / opts.error_time_scale) : 1.0;
            double err = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                err = std::max(err, std::abs(tmp[i]) / (unit * sc));
            }
            if (!std::isfinite(err) || !y_new.allFinite()) {
                std::ostringstream msg;
                msg << "non-finite solution at t=" << t;
                throw NumericalError(msg.str());
            }

            const double order = opts.error_time_scale > 0.0 ? 0.25 : 0.2;
            const double factor =
                err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -order), 0.2, 5.0);
            if (err <= 1.0) {
                t = clipped ? target : t + step;
                y.swap(y_new);
                k1.swap(k7);
                ++stats.accepted;
                // A clipped step says nothing about the natural step size.
                if (!clipped || factor < 1.0) {
                    h = step * factor;
                }
            } else {
                ++stats.rejected;
                h = step * std::max(factor, 0.2);
                if (h < min_step) {
                    std::ostringstream msg;
                    msg << "step-size underflow at t=" << t << " (h=" << h << ")";
                    throw NumericalError(msg.str());
                }
            }
        }
        observe(idx, t, static_cast<const VectorXcd&>(y));
    }
    return stats;
}

} // namespace mcqed
