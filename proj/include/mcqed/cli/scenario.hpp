#pragma once

// Runs one configured scenario and writes its CSV files, report.txt and
// manifest.txt into the output directory.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mcqed/cli/config.hpp"
#include "mcqed/cli/io.hpp"
#include "mcqed/cqed.hpp"
#include "mcqed/majorana.hpp"
#include "mcqed/measure.hpp"
#include "mcqed/readout.hpp"

namespace mcqed::cli {

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

struct RunResult {
    std::string report;
    std::vector<ManifestEntry> manifest;
    std::vector<std::string> warnings;
};

namespace detail {

class Report {
public:
    void line(const std::string& s) { text_ += s + "\n"; }
    void kv(const std::string& k, const std::string& v) { line(k + ": " + v); }
    void kv(const std::string& k, double v) { kv(k, format_double(v)); }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

inline std::vector<double> uniform_times(double t_end, std::size_t n) {
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) {
        ts[i] = t_end * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return ts;
}

inline majorana::ComplexSpinorField packet(const ScenarioConfig& c, Diagnostics* d) {
    const SpatialGrid grid(c.field.n_points, c.field.length);
    return majorana::gaussian_wavepacket(grid, c.packet.x0, c.packet.p0, c.packet.width,
                                         c.packet.spinor, d);
}

inline void run_evolve(const ScenarioConfig& c, ArtifactWriter& out, Report& rep,
                       Diagnostics& diag) {
    const majorana::MEParams params{c.field.m, c.field.c};
    const auto psi0 = packet(c, &diag);
    const auto ts = uniform_times(c.evolve.t_end, c.evolve.samples);
    const bool me = c.kind == ScenarioKind::evolve_majorana;
    rep.kv("equation", me ? "majorana (real four-spinor, exact per-mode propagation)"
                          : "dirac (complex two-spinor, exact per-mode propagation)");
    rep.kv("m", params.m);
    rep.kv("c", params.c);
    rep.kv("n_points", static_cast<double>(c.field.n_points));
    rep.kv("length", c.field.length);

    std::vector<std::string> header{"t", "norm", "position_mean",
                                    me ? "pseudo_helicity" : "sigma_x_momentum"};
    std::vector<majorana::ComplexSpinorField> oracle;
    if (me && c.evolve.compare_oracle) {
        header.push_back("oracle_max_diff");
        majorana::ComplexIntegration integ;
        integ.relative_tolerance = c.evolve.oracle_tolerance;
        oracle = majorana::evolve_me_complex(psi0, params, ts, integ, &diag);
    }
    CsvTable table(header);
    double final_norm = 1.0, worst_diff = 0.0;
    const auto real0 = majorana::to_real_spinor(psi0);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        std::vector<double> row{ts[i]};
        if (me) {
            const auto f = majorana::evolve_me_real(real0, params, ts[i], &diag);
            final_norm = f.norm();
            row.insert(row.end(), {f.norm(), majorana::position_mean(f),
                                   majorana::pseudo_helicity_expect(f)});
            if (!oracle.empty()) {
                const double d =
                    (majorana::to_real_spinor(oracle[i]).values() - f.values()).cwiseAbs().maxCoeff();
                worst_diff = std::max(worst_diff, d);
                row.push_back(d);
            }
        } else {
            const auto f = majorana::evolve_dirac(psi0, params, ts[i], &diag);
            final_norm = f.norm();
            row.insert(row.end(), {f.norm(), majorana::position_mean(f),
                                   majorana::sigma_x_momentum_expect(f)});
        }
        table.add_row(row);
    }
    const std::string name = me ? "trajectory_majorana.csv" : "trajectory_dirac.csv";
    out.write(name, table);
    rep.kv("final norm", final_norm);
    if (std::abs(final_norm - 1.0) > 1e-8) {
        throw NumericalError("evolve: norm drifted to " + format_double(final_norm));
    }
    if (!oracle.empty()) rep.kv("max |real - encoded oracle|", worst_diff);
}

inline void run_validate_rwa(const ScenarioConfig& c, ArtifactWriter& out, Report& rep) {
    const auto& r = c.rwa;
    const auto ch = cqed::resonant_channel(r.kind, r.g, r.Omega, r.phi, r.longitudinal_ratio);
    const auto psi0 =
        qops::QuantumState::basis(cqed::qubit_mode_space(r.n_max), {r.qubit, r.photons});
    const double T = r.horizon / r.g;
    cqed::EvolutionOptions opts;
    opts.relative_tolerance = r.tolerance;
    const auto tr = cqed::rwa_fidelity(ch, r.kind, psi0, T, r.samples, opts);
    CsvTable table({"t", "fidelity_full_vs_eff"});
    for (std::size_t i = 0; i < tr.times.size(); ++i) table.add_row({tr.times[i], tr.fidelity[i]});
    out.write("rwa_fidelity.csv", table);
    rep.kv("kind", cqed::to_string(r.kind));
    rep.kv("g", r.g);
    rep.kv("Omega", r.Omega);
    rep.kv("Delta", ch.Delta);
    rep.kv("g/Omega", r.g / r.Omega);
    rep.kv("horizon g T", r.horizon);
    rep.kv("initial state", std::string(r.qubit == 0 ? "up" : "down") + ", n=" +
                                std::to_string(r.photons));
    rep.kv("min fidelity", tr.min());
}

inline void run_composite(const ScenarioConfig& c, ArtifactWriter& out, Report& rep,
                          Diagnostics& diag) {
    const auto s = c.scheme();
    s.validate(&diag);
    const auto& cs = c.composite;
    const double T = cs.periods * cqed::exchange_period(s);
    const auto id = cqed::identify_me_params(s.g, s.Delta, s.omega_r2, 1.0);
    rep.kv("frame rotation", "Hadamard on qubit 1, (1 + i sigma_x)/sqrt(2) on qubit 2");
    rep.kv("g [2pi GHz]", s.g / (2 * kPi));
    rep.kv("Delta [2pi GHz]", s.Delta / (2 * kPi));
    rep.kv("Omega_1 [2pi GHz]", s.Omega_1 / (2 * kPi));
    rep.kv("Omega_3 [2pi GHz]", s.Omega_3 / (2 * kPi));
    rep.kv("Omega_4 [2pi GHz]", s.Omega_4 / (2 * kPi));
    rep.kv("mc^2 [2pi MHz]", 1000.0 * id.mc2 / (2 * kPi));
    rep.kv("exchange period [ns]", cqed::exchange_period(s));
    rep.kv("horizon [ns]", T);
    rep.kv("n_max", static_cast<double>(cs.n_max));

    std::vector<std::pair<std::string, qops::QuantumState>> states;
    const auto space = cqed::composite_space(cs.n_max);
    for (const auto& b : cs.basis_states) {
        const std::string label = std::string(b[0] ? "d" : "u") + (b[1] ? "d" : "u");
        states.emplace_back("basis_" + label, qops::QuantumState::basis(space, {b[0], b[1], 0}));
    }
    for (std::size_t i = 0; i < cs.spinors.size(); ++i) {
        states.emplace_back("spinor_" + std::to_string(i),
                            cqed::encode_initial_state(cs.spinors[i], cs.n_max));
    }
    cqed::EvolutionOptions opts;
    opts.relative_tolerance = cs.tolerance;
    for (const auto& [label, psi0] : states) {
        const auto tr = cqed::composite_fidelity(s, psi0, T, cs.samples, opts);
        CsvTable table({"t", "fidelity_full_vs_eff"});
        for (std::size_t i = 0; i < tr.times.size(); ++i) {
            table.add_row({tr.times[i], tr.fidelity[i]});
        }
        out.write("composite_" + label + ".csv", table);
        rep.kv("min fidelity " + label, tr.min());
    }
}

inline void run_measure(const ScenarioConfig& c, ArtifactWriter& out, Report& rep,
                        Diagnostics& diag) {
    const majorana::MEParams params{c.field.m, c.field.c};
    const SpatialGrid grid(c.field.n_points, c.field.length);
    std::vector<majorana::RealSpinorField> states;
    if (c.measure.random_states == 0) {
        states.push_back(majorana::to_real_spinor(packet(c, &diag)));
    } else {
        std::mt19937_64 rng(c.seed);
        for (std::size_t i = 0; i < c.measure.random_states; ++i) {
            states.push_back(measure::random_real_packet(grid, rng));
        }
    }
    rep.kv("seed", static_cast<double>(c.seed));
    rep.kv("states", static_cast<double>(states.size()));
    rep.kv("step", c.measure.step);
    rep.kv("order", static_cast<double>(c.measure.order));
    double worst = 0.0, worst_spread = 0.0;
    for (std::size_t s = 0; s < states.size(); ++s) {
        CsvTable table({"t", "slope_kinetic", "slope_exchange", "helicity_reconstructed",
                        "helicity_direct"});
        double first = 0.0, spread = 0.0;
        for (std::size_t i = 0; i < c.measure.times.size(); ++i) {
            const double t = c.measure.times[i];
            const auto f = t == 0.0 ? states[s] : majorana::evolve_me_real(states[s], params, t, &diag);
            const auto r = measure::read_helicity(f, c.measure.step, c.measure.order);
            table.add_row({t, r.kinetic.value, r.exchange.value, r.reconstructed, r.direct});
            worst = std::max(worst, std::abs(r.reconstructed - r.direct));
            if (i == 0) first = r.reconstructed;
            spread = std::max(spread, std::abs(r.reconstructed - first));
        }
        worst_spread = std::max(worst_spread, spread);
        out.write(states.size() == 1 ? "helicity.csv" : "helicity_" + std::to_string(s) + ".csv",
                  table);
    }
    rep.kv("max |reconstructed - direct|", worst);
    rep.kv("max drift of reconstructed helicity", worst_spread);
}

inline void write_branch(ArtifactWriter& out, const std::string& name,
                         const readout::ReadoutParams& p, int sz, double span, std::size_t points) {
    const double w = readout::kTwoPi;
    const double centre = p.omega_r - p.drive.omega_d;
    const auto sweep = readout::spectrum_sweep(p, sz, centre - w * span, centre + w * span, points);
    CsvTable table({"omega", "re_ratio", "im_ratio", "magnitude", "phase_deg"});
    for (const auto& pt : sweep) {
        table.add_row({pt.omega / w, pt.amplitude_ratio.real(), pt.amplitude_ratio.imag(),
                       std::abs(pt.amplitude_ratio), readout::to_degrees(pt.phase)});
    }
    out.write(name, table);
}

inline void run_readout(const ScenarioConfig& c, ArtifactWriter& out, Report& rep,
                        Diagnostics& diag) {
    const double w = readout::kTwoPi;
    const auto& r = c.readout;
    readout::ReadoutSetup setup;
    setup.detuning_1 = w * r.detuning_1;
    setup.detuning_2 = w * r.detuning_2;
    setup.kappa = w * r.kappa;
    setup.interval_1 = w * r.interval_1;
    auto sum = readout::summarize_readout(setup);
    const bool derived = !r.g.has_value();
    if (!derived) {
        sum.g = w * *r.g;
        sum.g_mhz = *r.g;
        auto one = [&](double detuning) {
            const auto ps = readout::phase_shift(sum.g, detuning, setup.kappa);
            return readout::QubitReadout{ps.chi, ps.interval / w,
                                         readout::to_degrees(std::abs(ps.theta_plus))};
        };
        sum.cpb1 = one(setup.detuning_1);
        sum.cpb2 = one(setup.detuning_2);
        sum.theta2_discrepancy = std::abs(sum.cpb2.theta_deg - sum.reference_theta2_deg) > 0.5;
    }
    rep.kv("kappa", fixed(r.kappa, 2) + " MHz (1/kappa = " + fixed(1000.0 / r.kappa, 0) +
                        " ns, compared with chi in the same units)");
    rep.kv("coupling g/2pi", fixed(sum.g_mhz, 4) + " MHz" +
                                 (derived ? " (derived from the " + fixed(r.interval_1, 1) +
                                                " MHz interval)"
                                          : " (given)"));
    rep.kv("cpb1 detuning", fixed(r.detuning_1, 1) + " MHz");
    rep.kv("cpb1 chi/2pi", fixed(sum.cpb1.chi / w, 4) + " MHz");
    rep.kv("cpb1 pull interval", fixed(sum.cpb1.interval_mhz, 1) + " MHz");
    rep.kv("cpb1 phase shift", "+-" + fixed(sum.cpb1.theta_deg, 1) + " deg (reference 134pi/360 = " +
                                   fixed(sum.reference_theta1_deg, 1) + " deg)");
    rep.kv("cpb2 detuning", fixed(r.detuning_2, 1) + " MHz");
    rep.kv("cpb2 chi/2pi", fixed(sum.cpb2.chi / w, 4) + " MHz");
    rep.kv("cpb2 pull interval", fixed(sum.cpb2.interval_mhz, 1) + " MHz");
    rep.kv("cpb2 phase shift", "+-" + fixed(sum.cpb2.theta_deg, 1) + " deg (reference 268pi/360 = " +
                                   fixed(sum.reference_theta2_deg, 1) + " deg)");
    if (sum.theta2_discrepancy) {
        rep.line("DISCREPANCY cpb2 phase: arctan(chi2/kappa) = " + fixed(sum.cpb2.theta_deg, 1) +
                 " deg, reference 268pi/360 = " + fixed(sum.reference_theta2_deg, 1) +
                 " deg is twice the cpb1 value");
    }

    readout::ReadoutParams p;
    p.g = sum.g;
    p.kappa = setup.kappa;
    p.omega_r = w * 10000.0;
    p.drive = {0.0, p.omega_r - w * r.drive_detuning, 0.0};
    for (int q : {1, 2}) {
        p.detuning = q == 1 ? setup.detuning_1 : setup.detuning_2;
        p.validate(&diag);
        for (int sz : {1, -1}) {
            write_branch(out,
                         "spectrum_cpb" + std::to_string(q) + (sz > 0 ? "_up" : "_down") + ".csv",
                         p, sz, r.span, r.points);
        }
    }
}

inline void run_sweep(const ScenarioConfig& c, ArtifactWriter& out, Report& rep) {
    const auto& s = c.sweep;
    CsvTable table({"kind", "g_over_omega", "min_fidelity"});
    cqed::EvolutionOptions opts;
    opts.relative_tolerance = s.tolerance;
    for (auto kind : s.kinds) {
        std::vector<std::pair<double, double>> pts;
        for (double ratio : s.ratios) {
            const double g = ratio * s.Omega;
            const auto ch = cqed::resonant_channel(kind, g, s.Omega, 0.0);
            const auto tr = cqed::rwa_fidelity(ch, kind, cqed::rwa_reference_state(kind, s.n_max),
                                               s.horizon / g, s.samples, opts);
            pts.emplace_back(ratio, tr.min());
            table.add_cells({cqed::to_string(kind), format_double(ratio), format_double(tr.min())});
        }
        auto sorted = pts;
        std::sort(sorted.begin(), sorted.end());
        bool monotone = true;
        for (std::size_t i = 1; i < sorted.size(); ++i) {
            monotone = monotone && sorted[i].second <= sorted[i - 1].second;
        }
        rep.kv(std::string("fidelity decreasing in g/Omega for ") + cqed::to_string(kind),
               monotone ? "yes" : "no");
    }
    out.write("sweep.csv", table);
}

} // namespace detail

/// Runs the scenario; ValidationError and NumericalError propagate.
inline RunResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
    ArtifactWriter out(out_dir);
    detail::Report rep;
    Diagnostics diag;
    rep.kv("scenario", to_string(cfg.kind));
    switch (cfg.kind) {
    case ScenarioKind::evolve_majorana:
    case ScenarioKind::evolve_dirac: detail::run_evolve(cfg, out, rep, diag); break;
    case ScenarioKind::validate_rwa: detail::run_validate_rwa(cfg, out, rep); break;
    case ScenarioKind::composite: detail::run_composite(cfg, out, rep, diag); break;
    case ScenarioKind::measure_helicity: detail::run_measure(cfg, out, rep, diag); break;
    case ScenarioKind::readout_spectrum: detail::run_readout(cfg, out, rep, diag); break;
    case ScenarioKind::sweep: detail::run_sweep(cfg, out, rep); break;
    }
    for (const auto& w : diag.warnings()) rep.line("warning: " + w);
    out.write("report.txt", rep.str());
    RunResult res;
    res.report = rep.str();
    out.finish();
    res.manifest = out.entries();
    res.warnings = diag.warnings();
    return res;
}

} // namespace mcqed::cli
