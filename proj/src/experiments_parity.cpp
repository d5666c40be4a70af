// Copyright 2026 The qfb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "experiments.hpp"
#include "qfb/csv.hpp"
#include "qfb/error.hpp"
#include "qfb/random.hpp"

namespace qfb::app {

using config::Block;
using config::Range;

namespace {

constexpr const char* kLabels[cavity::kStates] = {"00", "01", "10", "11"};

std::string pair_name(const char* prefix, std::size_t i, std::size_t j) {
    return std::string(prefix) + "_" + kLabels[i] + "_" + kLabels[j];
}

double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    return phi < 0.0 ? phi + two_pi : phi;
}

struct ShotRun {
    ParitySetup setup;
    std::vector<entangle::ParityShot> shots;
};

ShotRun simulate(Block& root, Context& ctx, const std::function<void(ParitySetup&)>& adjust = {}) {
    ShotRun run;
    const std::size_t n_shots = read_shots(root, "n_shots", 100000);
    const auto cav = read_cavity(root.block("cavity"));
    run.setup = read_parity(root.block("parity"), cav);
    double duration = 0.0;
    const auto decoherence = read_decoherence(root.optional_block("decoherence"), duration);
    if (adjust) {
        adjust(run.setup);
    }
    root.finish();

    entangle::ShotBatchOptions opts;
    opts.seed = ctx.seed();
    opts.threads = ctx.threads();
    opts.decoherence = decoherence;
    opts.decoherence_time_us = duration;
    run.shots = entangle::simulate_parity_shots(entangle::TwoQubitDensityMatrix::plus_plus(), run.setup.stats,
                                                run.setup.factors, run.setup.threshold, n_shots, opts);
    return run;
}

nlohmann::ordered_json setup_json(const ParitySetup& s) {
    nlohmann::ordered_json j;
    j["tau_p_us"] = s.tau_p;
    j["window_us"] = {s.window.t_i, s.window.t_f};
    j["threshold"] = s.threshold;
    j["parity_fidelity"] = entangle::parity_fidelity(s.stats, s.threshold);
    j["signal_means"] = s.stats.mean;
    j["signal_var"] = s.stats.var;
    j["odd_phase_rad"] = s.odd_phase;
    j["even_phase_rad"] = s.even_phase;
    return j;
}

std::string state_json(const entangle::TwoQubitDensityMatrix& rho, const entangle::Metrics& m) {
    std::ostringstream os;
    entangle::write_state_json(os, rho, m);
    return os.str();
}

}  // namespace

void parity_dephasing(Block& root, Context& ctx) {
    const auto cav = read_cavity(root.block("cavity"));
    Block sweep = root.block("sweep");
    const auto taus = sweep.numbers("tau_p_us", Range::positive());
    const double dt = sweep.number_or("dt_us", 1.0 / (10.0 * cav.kappa()), Range::positive());
    const double traj_tau = sweep.number_or("trajectory_tau_p_us", taus.back(), Range::positive());
    sweep.finish();
    root.finish();

    std::ostringstream os;
    os << "tau_p_us";
    for (const char* prefix : {"abs_rho", "decay", "phase_rad"}) {
        for (std::size_t i = 0; i < cavity::kStates; ++i) {
            for (std::size_t j = i + 1; j < cavity::kStates; ++j) {
                os << ',' << pair_name(prefix, i, j);
            }
        }
    }
    os << '\n';
    const auto initial = entangle::TwoQubitDensityMatrix::plus_plus();
    for (double tau : taus) {
        const auto traj = cavity::evolve_pointer(cav, tau, dt);
        const auto f = cavity::coherence_factors(traj, cav, tau);
        const auto rho = entangle::unconditioned_parity_map(initial, f);
        os << csv::num(tau);
        for (std::size_t i = 0; i < cavity::kStates; ++i) {
            for (std::size_t j = i + 1; j < cavity::kStates; ++j) {
                os << ',' << csv::num(std::abs(rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
            }
        }
        for (std::size_t i = 0; i < cavity::kStates; ++i) {
            for (std::size_t j = i + 1; j < cavity::kStates; ++j) {
                os << ',' << csv::num(f.at(i, j).decay);
            }
        }
        for (std::size_t i = 0; i < cavity::kStates; ++i) {
            for (std::size_t j = i + 1; j < cavity::kStates; ++j) {
                os << ',' << csv::num(f.at(i, j).phase);
            }
        }
        os << '\n';
    }
    ctx.write("parity_dephasing.csv", os.str());

    std::ostringstream traj_csv;
    cavity::write_trajectory_csv(traj_csv, cavity::evolve_pointer(cav, traj_tau, dt));
    ctx.write("pointer_trajectory.csv", traj_csv.str());
}

void parity_fidelity(Block& root, Context& ctx) {
    const auto cav = read_cavity(root.block("cavity"));
    Block sweep = root.block("sweep");
    const auto taus = sweep.numbers("tau_p_us", Range::positive());
    const auto etas = sweep.numbers_or("eta", {cav.eta}, Range{0.0, 1.0, true});
    const double start = sweep.number_or("window_start_us", 0.0, Range::non_negative());
    const double extra = sweep.number_or("window_extra_us", 0.0, Range::non_negative());
    const double dt = sweep.number_or("dt_us", 1.0 / (10.0 * cav.kappa()), Range::positive());
    sweep.finish();
    root.finish();

    std::ostringstream os;
    os << "tau_p_us,eta,threshold,eps_even,eps_odd,parity_fidelity,mean_00,mean_01,mean_10,mean_11,var,"
          "beta_0,beta_a,beta_b,beta_ba\n";
    for (double tau : taus) {
        for (double eta : etas) {
            auto c = cav;
            c.eta = eta;
            const auto traj = cavity::evolve_pointer(c, tau, dt);
            if (tau <= start) {
                throw ConfigError("config: sweep.window_start_us: must be below every tau_p_us");
            }
            const auto stats = cavity::signal_stats(traj, c, {start, tau + extra});
            const double th = entangle::optimal_parity_threshold(stats);
            const auto eps = entangle::parity_errors(stats, th);
            const auto beta = cavity::beta_from_means(stats.mean);
            os << csv::num(tau) << ',' << csv::num(eta) << ',' << csv::num(th) << ',' << csv::num(eps.eps_even) << ','
               << csv::num(eps.eps_odd) << ',' << csv::num(eps.fidelity());
            for (double m : stats.mean) {
                os << ',' << csv::num(m);
            }
            os << ',' << csv::num(stats.var) << ',' << csv::num(beta.b0) << ',' << csv::num(beta.bA) << ','
               << csv::num(beta.bB) << ',' << csv::num(beta.bBA) << '\n';
        }
    }
    ctx.write("parity_fidelity.csv", os.str());
}

void entangle_postselect(Block& root, Context& ctx) {
    double strict_eps = 0.01;
    if (auto ps = root.optional_block("postselect")) {
        strict_eps = ps->number_or("strict_eps", strict_eps, Range{0.0, 0.5, true});
        ps->finish();
    }
    const auto run = simulate(root, ctx);
    const auto& s = run.setup;

    struct Selection {
        const char* name;
        double threshold;
        std::function<bool(const entangle::ParityShot&)> keep;
        entangle::BellTarget target;
    };
    const double th_odd = entangle::postselection_threshold(s.stats, true, strict_eps);
    const double th_even = entangle::postselection_threshold(s.stats, false, strict_eps);
    const entangle::BellTarget odd{entangle::BellTarget::Label::kPhiPlusOdd, 0.0};
    const entangle::BellTarget even{entangle::BellTarget::Label::kPsiPlusEven, s.even_phase};
    const std::vector<Selection> selections = {
        {"odd", s.threshold, [](const entangle::ParityShot& p) { return p.m_p == -1; }, odd},
        {"even", s.threshold, [](const entangle::ParityShot& p) { return p.m_p == 1; }, even},
        {"odd_strict", th_odd, [th_odd](const entangle::ParityShot& p) { return p.v_int > th_odd; }, odd},
        {"even_strict", th_even, [th_even](const entangle::ParityShot& p) { return p.v_int < th_even; }, even},
    };

    std::ostringstream os;
    os << "selection,threshold,kept,p_success,concurrence,log_negativity,bell_fidelity,efficiency\n";
    nlohmann::ordered_json summary = setup_json(s);
    summary["n_shots"] = run.shots.size();
    summary["strict_eps"] = strict_eps;
    for (const auto& sel : selections) {
        const auto picked = entangle::postselect(run.shots, sel.keep);
        const auto rho = entangle::compensate_odd_phase(picked.rho, s.odd_phase);
        const auto m = entangle::evaluate(rho, sel.target.state(), picked.p_success);
        os << sel.name << ',' << csv::num(sel.threshold) << ',' << picked.kept << ',' << csv::num(m.p_success) << ','
           << csv::num(m.concurrence) << ',' << csv::num(m.log_negativity) << ',' << csv::num(m.bell_fidelity) << ','
           << csv::num(m.efficiency) << '\n';
        ctx.write(std::string("state_") + sel.name + ".json", state_json(rho, m));
    }
    ctx.write("postselection.csv", os.str());
    ctx.write("summary.json", summary.dump(2) + "\n");
}

void entangle_feedback(Block& root, Context& ctx) {
    Block fb = root.block("feedback");
    const auto n_phi = static_cast<std::size_t>(fb.integer_or("phi_points", 360, 2, 1000000));
    entangle::FeedbackSettings settings;
    settings.pulse_error = fb.number_or("pulse_error", 0.0, Range::probability());
    const bool override_phase = fb.has("even_phase_rad");
    const double even_phase = fb.number_or("even_phase_rad", 0.0);
    fb.finish();

    const auto run = simulate(root, ctx, [&](ParitySetup& s) {
        if (override_phase) {
            auto f = s.factors.at(0, 3);
            f.phase = s.odd_phase + even_phase;
            s.factors.set(0, 3, f);
            s.even_phase = even_phase;
        }
    });
    const auto& s = run.setup;
    settings.odd_frame_phase = s.odd_phase;

    const auto sweep = entangle::phase_sweep(run.shots, n_phi, settings);
    std::size_t best = 0;
    for (std::size_t k = 1; k < sweep.size(); ++k) {
        if (sweep[k].bell_fidelity > sweep[best].bell_fidelity) {
            best = k;
        }
    }
    std::ostringstream os;
    os << "phi_rad,bell_fidelity,concurrence,log_negativity,efficiency,is_argmax\n";
    for (std::size_t k = 0; k < sweep.size(); ++k) {
        const auto& m = sweep[k].metrics;
        os << csv::num(sweep[k].phi) << ',' << csv::num(m.bell_fidelity) << ',' << csv::num(m.concurrence) << ','
           << csv::num(m.log_negativity) << ',' << csv::num(m.efficiency) << ',' << (k == best ? 1 : 0) << '\n';
    }
    ctx.write("phi_sweep.csv", os.str());

    const auto det = entangle::feedback_entangle(run.shots, sweep[best].phi, settings);
    ctx.write("state_feedback.json", state_json(det.rho_avg, det.metrics));

    const auto odd = entangle::postselect(run.shots, [](const entangle::ParityShot& p) { return p.m_p == -1; });
    const auto odd_rho = entangle::compensate_odd_phase(odd.rho, s.odd_phase);
    const auto odd_m = entangle::evaluate(odd_rho, entangle::BellTarget{}.state(), odd.p_success);

    nlohmann::ordered_json summary = setup_json(s);
    summary["n_shots"] = run.shots.size();
    summary["phi_points"] = n_phi;
    summary["phi_argmax_rad"] = sweep[best].phi;
    summary["phi_law_rad"] = wrap_phase(0.5 * (std::numbers::pi - s.even_phase));
    summary["grid_spacing_rad"] = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
    summary["deterministic"] = {{"concurrence", det.metrics.concurrence},
                                {"log_negativity", det.metrics.log_negativity},
                                {"bell_fidelity", det.metrics.bell_fidelity},
                                {"efficiency", det.metrics.efficiency}};
    summary["postselected_odd"] = {{"concurrence", odd_m.concurrence},
                                   {"log_negativity", odd_m.log_negativity},
                                   {"p_success", odd_m.p_success},
                                   {"efficiency", odd_m.efficiency}};
    ctx.write("summary.json", summary.dump(2) + "\n");
}

}  // namespace qfb::app
