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

#include <cctype>
#include <limits>

#include "experiments.hpp"
#include "qfb/error.hpp"

namespace qfb::app {

using config::Block;
using config::Range;

std::size_t read_shots(Block& b, const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(b.integer_or(key, static_cast<std::int64_t>(fallback), 1, 1'000'000'000));
}

dynamics::TransitionRates read_rates(Block b) {
    // Inverse rates in us; 0 or inf switches a transition off.
    const double t01 = b.number("t01_us", Range::non_negative());
    const double t10 = b.number("t10_us", Range::non_negative());
    const double t12 = b.number("t12_us", Range::non_negative());
    const double t21 = b.number("t21_us", Range::non_negative());
    b.finish();
    return dynamics::TransitionRates::from_inverse(t01, t10, t12, t21);
}

readout::ShotModel read_shot_model(Block b) {
    readout::ShotModel m;
    const auto mu = b.numbers("mu", Range::any(), 3);
    if (mu.size() != 3) {
        throw ConfigError("config: " + b.path() + ".mu: expected 3 entries (levels 0, 1, 2)");
    }
    std::copy(mu.begin(), mu.end(), m.mu.begin());
    m.sigma = b.number("sigma", Range::positive());
    m.t_meas = b.number("t_meas_us", Range::positive());
    m.window.start = b.number_or("window_start_us", 0.0, Range::non_negative());
    m.window.length = b.number_or("window_length_us", m.t_meas - m.window.start, Range::positive());
    b.finish();
    m.validate();
    return m;
}

readout::Polarity read_polarity(Block& b, const std::string& key) {
    return b.text_or(key, "zero_high", {"zero_high", "zero_low"}) == "zero_high" ? readout::Polarity::kZeroHigh
                                                                                 : readout::Polarity::kZeroLow;
}

feedback::FeedbackProtocol read_feedback(Block b, const readout::ShotModel& model) {
    feedback::FeedbackProtocol p;
    p.threshold.v_th = b.number_or("threshold", 0.0);
    p.polarity = read_polarity(b, "polarity");
    const double t_pulse = b.number_or("t_pulse_us", 0.032, Range::positive());
    double tau_fb = 0.0;
    if (b.has("tau_fb_us")) {
        tau_fb = b.number("tau_fb_us", Range::positive());
        if (b.has("controller")) {
            throw ConfigError("config: " + b.path() + ": give either controller or tau_fb_us, not both");
        }
    } else {
        tau_fb = feedback::ControllerProfile::by_name(b.text_or("controller", "adwin", {"adwin", "cpld"})).tau_fb;
    }
    if (tau_fb <= t_pulse) {
        throw ConfigError("config: " + b.path() + ": latency must exceed t_pulse_us");
    }
    p.timing = feedback::LoopTiming::with_latency(tau_fb, model.t_meas, t_pulse);
    p.pi_error = b.number_or("pi_error", 0.005, Range::probability());
    p.jitter_us = b.number_or("jitter_us", 0.0, Range::non_negative());
    b.finish();
    p.validate();
    return p;
}

std::optional<feedback::FeedbackProtocol> parse_protocol(const std::string& id, const feedback::FeedbackProtocol& base) {
    if (id == "none") {
        return std::nullopt;
    }
    auto bad = [&] { return ConfigError("config: unknown protocol '" + id + "' (expected none or [Nx]Fb0|Fb1[+R12])"); };
    feedback::FeedbackProtocol p = base;
    std::string rest = id;
    p.rounds = 1;
    const auto x = rest.find('x');
    if (x != std::string::npos) {
        const std::string count = rest.substr(0, x);
        if (count.empty() || count.size() > 2 ||
            !std::all_of(count.begin(), count.end(), [](unsigned char c) { return std::isdigit(c); })) {
            throw bad();
        }
        p.rounds = std::stoi(count);
        rest = rest.substr(x + 1);
    }
    p.recover_12 = false;
    const std::string suffix = "+R12";
    if (rest.size() > suffix.size() && rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) == 0) {
        p.recover_12 = true;
        rest.resize(rest.size() - suffix.size());
    }
    if (rest == "Fb0") {
        p.target = feedback::Target::kGround;
    } else if (rest == "Fb1") {
        p.target = feedback::Target::kExcited;
    } else {
        throw bad();
    }
    if (p.rounds < 1) {
        throw bad();
    }
    return p;
}

readout::RegisterBenchConfig read_register(Block b) {
    b.text_or("preset", "reference", {"reference"});
    auto cfg = readout::RegisterBenchConfig::reference();
    if (b.has("excitation") || b.has("t1_a_us") || b.has("t1_b_us")) {
        const double excitation = b.number_or("excitation", 0.047, Range::closed(0.0, 0.5));
        cfg.rates[0] = readout::qubit_rates(excitation, b.number_or("t1_a_us", 23.0, Range::positive()));
        cfg.rates[1] = readout::qubit_rates(excitation, b.number_or("t1_b_us", 27.0, Range::positive()));
    }
    if (b.has("mu")) {
        const auto mu = b.numbers("mu", Range::any(), 9);
        if (mu.size() != 9) {
            throw ConfigError("config: " + b.path() + ".mu: expected 9 entries indexed a + 3 b");
        }
        std::copy(mu.begin(), mu.end(), cfg.shot.mu.begin());
    }
    cfg.shot.sigma = b.number_or("sigma", cfg.shot.sigma, Range::positive());
    cfg.shot.t_meas = b.number_or("t_meas_us", cfg.shot.t_meas, Range::positive());
    cfg.shot.window.start = b.number_or("window_start_us", cfg.shot.window.start, Range::non_negative());
    cfg.shot.window.length = b.number_or("window_length_us", cfg.shot.t_meas - cfg.shot.window.start, Range::positive());
    cfg.gap_us = b.number_or("gap_us", cfg.gap_us, Range::non_negative());
    cfg.pulse_lead_us = b.number_or("pulse_lead_us", cfg.pulse_lead_us, Range::non_negative());
    cfg.pi_error = b.number_or("pi_error", cfg.pi_error, Range::probability());
    b.finish();
    cfg.validate();
    return cfg;
}

cavity::CavityConfig read_cavity(Block b) {
    const std::string preset = b.text_or("preset", "parity_reference", {"parity_reference", "none"});
    cavity::CavityConfig cfg = preset == "parity_reference" ? cavity::CavityConfig::parity_reference()
                                                            : cavity::CavityConfig{};
    cfg.kappa_mhz = b.number_or("kappa_mhz", cfg.kappa_mhz, Range::positive());
    cfg.chi_a_mhz = b.number_or("chi_a_mhz", cfg.chi_a_mhz, Range::non_negative());
    cfg.chi_b_mhz = b.number_or("chi_b_mhz", cfg.chi_b_mhz, Range::non_negative());
    if (b.has("drive") && b.has("photons")) {
        throw ConfigError("config: " + b.path() + ": give either drive or photons, not both");
    }
    if (b.has("drive")) {
        cfg.drive = b.number("drive", Range::non_negative());
    } else if (b.has("photons") || preset == "parity_reference") {
        cfg.drive = cavity::CavityConfig::drive_for_photons(cfg.kappa(), b.number_or("photons", 2.5, Range::non_negative()));
    }
    cfg.drive_detuning_mhz = b.number_or("drive_detuning_mhz", cfg.drive_detuning_mhz);
    cfg.eta = b.number_or("eta", cfg.eta, Range{0.0, 1.0, true});
    cfg.lo_phase = b.number_or("lo_phase_rad", cfg.lo_phase);
    cfg.jpa_bandwidth_mhz = b.number_or("jpa_bandwidth_mhz", cfg.jpa_bandwidth_mhz, Range::non_negative());
    b.finish();
    cfg.validate();
    return cfg;
}

std::optional<entangle::Decoherence> read_decoherence(std::optional<Block> b, double& duration_us) {
    duration_us = 0.0;
    if (!b) {
        return std::nullopt;
    }
    entangle::Decoherence d;
    d.t1_a = b->number("t1_a_us", Range::non_negative());
    d.t2_a = b->number_or("t2_a_us", 2.0 * d.t1_a, Range::non_negative());
    d.t1_b = b->number("t1_b_us", Range::non_negative());
    d.t2_b = b->number_or("t2_b_us", 2.0 * d.t1_b, Range::non_negative());
    duration_us = b->number("duration_us", Range::non_negative());
    b->finish();
    d.validate();
    return d;
}

ParitySetup read_parity(Block b, const cavity::CavityConfig& cav) {
    ParitySetup s;
    s.cavity = cav;
    s.tau_p = b.number("tau_p_us", Range::positive());
    s.window.t_i = b.number_or("window_start_us", 0.0, Range::non_negative());
    s.window.t_f = b.number_or("window_end_us", s.tau_p, Range::positive());
    if (s.window.t_f <= s.window.t_i) {
        throw ConfigError("config: " + b.path() + ": window_end_us must exceed window_start_us");
    }
    const double dt = b.number_or("dt_us", 1.0 / (10.0 * cav.kappa()), Range::positive());
    const bool fixed_threshold = b.has("threshold");
    const double threshold = b.number_or("threshold", 0.0);
    b.finish();

    const auto traj = cavity::evolve_pointer(cav, s.tau_p, dt);
    s.stats = cavity::signal_stats(traj, cav, s.window);
    s.factors = cavity::coherence_factors(traj, cav, s.tau_p);
    s.threshold = fixed_threshold ? threshold : entangle::optimal_parity_threshold(s.stats);
    s.odd_phase = s.factors.at(1, 2).phase;
    s.even_phase = s.factors.at(0, 3).phase - s.odd_phase;
    return s;
}

}  // namespace qfb::app
