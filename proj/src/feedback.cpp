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

#include "qfb/feedback.hpp"

#include <cmath>
#include <ostream>

#include "qfb/csv.hpp"
#include "qfb/error.hpp"
#include "qfb/parallel.hpp"

namespace qfb::feedback {

namespace {

using readout::Outcome;

std::size_t target_level(Target t) { return t == Target::kGround ? 0 : 1; }

std::size_t noisy_pi(std::size_t level, dynamics::Transition transition, double pi_error, CounterRng& rng) {
    if (pi_error > 0.0 && rng.uniform() < pi_error) {
        return level;
    }
    return dynamics::pi_pulse_target(level, transition);
}

/// Runs every round of `protocol` on a definite level and returns the final level.
std::size_t apply_protocol(std::size_t level, const FeedbackProtocol& protocol, const ShotModel& model,
                           const TransitionRates& rates, CounterRng& rng, std::vector<RoundTrace>* trace) {
    const double tau_fb = protocol.timing.tau_fb();
    for (int r = 0; r < protocol.rounds; ++r) {
        if (protocol.recover_12 && r == protocol.rounds - 1) {
            level = noisy_pi(level, dynamics::Transition::k12, protocol.pi_error, rng);
        }
        const readout::Shot shot = readout::generate_shot(level, model, rates, rng);
        level = shot.post_state;
        const Outcome m = readout::digitize(shot.voltage, protocol.threshold, protocol.polarity);
        const bool fire = protocol.target == Target::kGround ? m == Outcome::kL : m == Outcome::kH;
        const double latency = tau_fb + (protocol.jitter_us > 0.0 ? protocol.jitter_us * rng.uniform() : 0.0);
        level = dynamics::sample_evolution(level, rates, latency, rng);
        if (fire) {
            level = noisy_pi(level, dynamics::Transition::k01, protocol.pi_error, rng);
        }
        if (trace != nullptr) {
            RoundTrace& t = (*trace)[static_cast<std::size_t>(r)];
            (m == Outcome::kH ? t.n_high : t.n_low) += 1;
            t.n_pulses += fire ? 1 : 0;
        }
    }
    return level;
}

struct ResetTally {
    std::size_t success = 0;
    std::array<std::size_t, 3> levels{};
    std::vector<RoundTrace> rounds;
};

}  // namespace

void LoopTiming::validate() const {
    require(t_meas >= 0.0 && t_process >= 0.0 && t_pulse >= 0.0, "loop timing components must be non-negative");
}

LoopTiming LoopTiming::with_latency(double tau_fb_us, double t_meas_us, double t_pulse_us) {
    require(tau_fb_us >= t_pulse_us, "latency shorter than the conditional pulse");
    return {t_meas_us, tau_fb_us - t_pulse_us, t_pulse_us};
}

ControllerProfile ControllerProfile::adwin() { return {"adwin", 2.4}; }

ControllerProfile ControllerProfile::cpld() { return {"cpld", 0.11}; }

ControllerProfile ControllerProfile::by_name(const std::string& name) {
    if (name == "adwin") return adwin();
    if (name == "cpld") return cpld();
    throw ArgumentError("unknown controller profile: " + name);
}

void FeedbackProtocol::validate() const {
    require(rounds >= 1, "feedback protocol needs at least one round");
    require(pi_error >= 0.0 && pi_error <= 1.0, "pi_error must be in [0,1]");
    require(jitter_us >= 0.0, "jitter must be non-negative");
    require(std::isfinite(threshold.v_th), "threshold must be finite");
    timing.validate();
}

std::string FeedbackProtocol::id() const {
    std::string label = target == Target::kGround ? "Fb0" : "Fb1";
    if (rounds > 1) {
        label = std::to_string(rounds) + "x" + label;
    }
    if (recover_12) {
        label += "+R12";
    }
    return label;
}

LevelPopulations theta_state(double theta) {
    const double s = std::sin(0.5 * theta);
    const double p1 = s * s;
    return {1.0 - p1, p1, 0.0};
}

double predict_reset_error(double theta, const TransitionRates& rates, const ReadoutErrorModel& err,
                           const LoopTiming& timing, int rounds) {
    require(theta >= 0.0 && theta <= M_PI + 1e-12, "theta must be in [0, pi]");
    require(rounds >= 1, "rounds must be at least 1");
    rates.validate();
    const double tau = timing.tau_fb();
    const double p12 = err.transition(1, 2);
    const double err0 = err.p(Outcome::kL, 0, 0) + err.p(Outcome::kH, 0, 1) + rates.g01 * tau;
    double err_pi = err.p(Outcome::kH, 1, 1) + err.p(Outcome::kL, 1, 0) + p12 + (rates.g10 + rates.g12) * tau;
    if (rounds >= 2) {
        err_pi = err0 + p12 + rates.g12 * tau;
    }
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return c * c * err0 + s * s * err_pi;
}

ResetResult run_reset(const LevelPopulations& initial, const std::optional<FeedbackProtocol>& protocol,
                      const ShotModel& model, const TransitionRates& rates, std::size_t n_shots,
                      const RunOptions& options) {
    require(n_shots >= 1, "run_reset: n_shots must be at least 1");
    initial.validate(1e-9);
    model.validate();
    rates.validate();
    const std::size_t n_rounds = protocol ? static_cast<std::size_t>(protocol->rounds) : 0;
    if (protocol) {
        protocol->validate();
    }
    const std::size_t goal = protocol ? target_level(protocol->target) : 0;

    ResetTally init;
    init.rounds.assign(n_rounds, RoundTrace{});
    const ResetTally total = parallel_reduce(
        n_shots, options.threads, init,
        [&](std::size_t begin, std::size_t end) {
            ResetTally local;
            local.rounds.assign(n_rounds, RoundTrace{});
            for (std::size_t i = begin; i < end; ++i) {
                CounterRng rng(options.seed, options.stream_offset + i, StreamTag::kReset);
                std::size_t level = dynamics::sample_level(initial, rng);
                if (protocol) {
                    level = apply_protocol(level, *protocol, model, rates, rng, &local.rounds);
                }
                local.success += level == goal ? 1 : 0;
                ++local.levels[level];
            }
            return local;
        },
        [](ResetTally a, const ResetTally& b) {
            a.success += b.success;
            for (std::size_t k = 0; k < 3; ++k) {
                a.levels[k] += b.levels[k];
            }
            for (std::size_t r = 0; r < a.rounds.size(); ++r) {
                a.rounds[r].n_high += b.rounds[r].n_high;
                a.rounds[r].n_low += b.rounds[r].n_low;
                a.rounds[r].n_pulses += b.rounds[r].n_pulses;
            }
            return a;
        });

    ResetResult out;
    out.n_shots = n_shots;
    out.p_target = static_cast<double>(total.success) / static_cast<double>(n_shots);
    out.p_err = 1.0 - out.p_target;
    out.p_err_stderr = std::sqrt(out.p_err * (1.0 - out.p_err) / static_cast<double>(n_shots));
    for (std::size_t k = 0; k < 3; ++k) {
        out.p_level[k] = static_cast<double>(total.levels[k]) / static_cast<double>(n_shots);
    }
    out.rounds = total.rounds;
    return out;
}

RepeatedInitResult run_repeated_init(double tau_init_us, Algorithm algorithm,
                                     const std::optional<FeedbackProtocol>& protocol, const TransitionRates& rates,
                                     const ShotModel& model, std::size_t n_cycles, const RunOptions& options,
                                     const RepeatedInitSettings& settings) {
    require(tau_init_us >= 0.0, "tau_init must be non-negative");
    require(settings.algorithm_pi_error >= 0.0 && settings.algorithm_pi_error <= 1.0,
            "algorithm_pi_error must be in [0,1]");
    require(n_cycles >= 100, "run_repeated_init: n_cycles must be at least 100");
    rates.validate();
    model.validate();
    if (protocol) {
        protocol->validate();
    }

    constexpr std::size_t kChains = 16;
    constexpr std::size_t kBurnIn = 1500;
    const std::size_t per_chain = (n_cycles + kChains - 1) / kChains;
    const LevelPopulations start = rates.all_zero() ? LevelPopulations::ground() : dynamics::steady_state(rates);

    const std::vector<double> chain_error = parallel_map(kChains, options.threads, [&](std::size_t c) {
        const std::uint64_t base = options.stream_offset + (static_cast<std::uint64_t>(c) << 32);
        CounterRng init_rng(options.seed, base, StreamTag::kRepeatedInit);
        std::size_t level = dynamics::sample_level(start, init_rng);
        std::size_t errors = 0;
        for (std::size_t k = 0; k < kBurnIn + per_chain; ++k) {
            CounterRng rng(options.seed, base + k + 1, StreamTag::kRepeatedInit);
            level = dynamics::sample_evolution(level, rates, tau_init_us, rng);
            if (protocol) {
                level = apply_protocol(level, *protocol, model, rates, rng, nullptr);
            }
            const readout::Shot check = readout::generate_shot(level, model, rates, rng);
            if (k >= kBurnIn &&
                readout::digitize(check.voltage, settings.check_threshold, settings.check_polarity) == Outcome::kL) {
                ++errors;
            }
            level = check.post_state;
            if (algorithm == Algorithm::kLeaveExcited) {
                level = noisy_pi(level, dynamics::Transition::k01, settings.algorithm_pi_error, rng);
            }
        }
        return static_cast<double>(errors) / static_cast<double>(per_chain);
    });

    double mean = 0.0;
    for (double e : chain_error) mean += e;
    mean /= static_cast<double>(kChains);
    double var = 0.0;
    for (double e : chain_error) var += (e - mean) * (e - mean);
    var /= static_cast<double>(kChains - 1);

    RepeatedInitResult out;
    out.p_err = mean;
    out.p_err_stderr = std::sqrt(var / static_cast<double>(kChains));
    out.n_cycles = per_chain * kChains;
    return out;
}

void write_sweep_header(std::ostream& os, const std::string& x_name) {
    os << x_name << ",p_err,p_err_stderr,protocol_id\n";
}

void write_sweep_header(std::ostream& os, const std::string& x_name, const std::vector<std::string>& extra_names) {
    os << x_name << ",p_err,p_err_stderr,protocol_id";
    for (const auto& name : extra_names) {
        os << ',' << name;
    }
    os << '\n';
}

void write_sweep_row(std::ostream& os, double x, double p_err, double p_err_stderr, const std::string& protocol_id,
                     const std::vector<std::string>& extra) {
    os << csv::num(x) << ',' << csv::num(p_err) << ',' << csv::num(p_err_stderr) << ',' << protocol_id;
    for (const auto& cell : extra) {
        os << ',' << cell;
    }
    os << '\n';
}

}  // namespace qfb::feedback
