#pragma once

// Periodic grid and FFT plumbing shared by the field modules.

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "mcqed/errors.hpp"
#include "mcqed/qops.hpp"

namespace mcqed {

/// Periodic box [-L/2, L/2) with n points (power of two, >= 16).
/// Momenta follow the DFT ordering; the Nyquist index n/2 carries +p_max.
class SpatialGrid {
public:
    SpatialGrid(std::size_t n_points, double length) : n_(n_points), length_(length) {
        if (n_points < 16 || !std::has_single_bit(n_points)) {
            throw ValidationError("spatial grid: n_points must be a power of two >= 16");
        }
        if (!(length > 0.0)) {
            throw ValidationError("spatial grid: length must be positive");
        }
    }

    std::size_t size() const { return n_; }
    double length() const { return length_; }
    double dx() const { return length_ / static_cast<double>(n_); }
    std::size_t nyquist_index() const { return n_ / 2; }

    double position(std::size_t j) const { return -0.5 * length_ + static_cast<double>(j) * dx(); }

    double momentum(std::size_t j) const {
        const double dk = 2.0 * kPi / length_;
        const auto jj = static_cast<double>(j);
        return j <= n_ / 2 ? dk * jj : dk * (jj - static_cast<double>(n_));
    }

    Eigen::VectorXd positions() const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) x[static_cast<Eigen::Index>(j)] = position(j);
        return x;
    }

    Eigen::VectorXd momenta() const {
        Eigen::VectorXd p(static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) p[static_cast<Eigen::Index>(j)] = momentum(j);
        return p;
    }

    bool operator==(const SpatialGrid&) const = default;

private:
    std::size_t n_;
    double length_;
};

namespace spectral {

// Forward transforms are unnormalized; inverse carries 1/N (Eigen's default),
// so sum_x |f|^2 dx = (dx / N) sum_p |f_hat|^2.

inline Eigen::MatrixXcd forward(const Eigen::MatrixXcd& cols) {
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd out(cols.rows(), cols.cols());
    std::vector<cplx> in(static_cast<std::size_t>(cols.rows())), res;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
        for (Eigen::Index r = 0; r < cols.rows(); ++r) in[static_cast<std::size_t>(r)] = cols(r, c);
        fft.fwd(res, in);
        for (Eigen::Index r = 0; r < cols.rows(); ++r) out(r, c) = res[static_cast<std::size_t>(r)];
    }
    return out;
}

inline Eigen::MatrixXcd inverse(const Eigen::MatrixXcd& cols) {
    Eigen::FFT<double> fft;
    Eigen::MatrixXcd out(cols.rows(), cols.cols());
    std::vector<cplx> in(static_cast<std::size_t>(cols.rows())), res;
    for (Eigen::Index c = 0; c < cols.cols(); ++c) {
        for (Eigen::Index r = 0; r < cols.rows(); ++r) in[static_cast<std::size_t>(r)] = cols(r, c);
        fft.inv(res, in);
        for (Eigen::Index r = 0; r < cols.rows(); ++r) out(r, c) = res[static_cast<std::size_t>(r)];
    }
    return out;
}

/// Applies f(p) to every column in momentum space.
template <class Fn>
Eigen::MatrixXcd apply_momentum_function(const Eigen::MatrixXcd& cols, const SpatialGrid& grid,
                                         Fn&& f) {
    Eigen::MatrixXcd hat = forward(cols);
    for (std::size_t j = 0; j < grid.size(); ++j) {
        hat.row(static_cast<Eigen::Index>(j)) *= f(grid.momentum(j));
    }
    return inverse(hat);
}

/// sum_j f(p_j) psi_hat_j^dagger S psi_hat_j * dx / N for a spin operator S
/// acting on the columns of `cols` (one column per spinor component).
template <class Fn>
cplx momentum_expectation(const Eigen::MatrixXcd& cols, const SpatialGrid& grid,
                          const OperatorMatrix& spin, Fn&& f) {
    if (spin.rows() != cols.cols() || spin.cols() != cols.cols()) {
        throw ValidationError("momentum_expectation: spin operator does not match components");
    }
    const Eigen::MatrixXcd hat = forward(cols);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto row = hat.row(static_cast<Eigen::Index>(j));
        const cplx quad = (row.conjugate() * spin * row.transpose())(0, 0);
        acc += f(grid.momentum(j)) * quad;
    }
    return acc * grid.dx() / static_cast<double>(grid.size());
}

/// Largest Nyquist-row amplitude relative to the largest amplitude overall.
inline double nyquist_fraction(const Eigen::MatrixXcd& cols, const SpatialGrid& grid) {
    const Eigen::MatrixXcd hat = forward(cols);
    const double peak = hat.cwiseAbs().maxCoeff();
    if (peak == 0.0) return 0.0;
    return hat.row(static_cast<Eigen::Index>(grid.nyquist_index())).cwiseAbs().maxCoeff() / peak;
}

} // namespace spectral
} // namespace mcqed
