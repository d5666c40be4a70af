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

#pragma once

// Latency-aware digital feedback on a single transmon: threshold comparator
// with fixed latency driving conditional pi pulses (reset to |0> or |1>),
// the first-order error budget for one and two cycles, and looped
// initialization experiments.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qfb/qubit_dynamics.hpp"
#include "qfb/readout.hpp"

namespace qfb::feedback {

using dynamics::LevelPopulations;
using dynamics::TransitionRates;
using readout::ReadoutErrorModel;
using readout::ShotModel;

/// Loop timing in us. tau_fb runs from the end of the measurement to the end
/// of the conditional pulse.
struct LoopTiming {
    double t_meas = 0.4;
    double t_process = 2.368;
    double t_pulse = 0.032;

    double tau_fb() const { return t_process + t_pulse; }
    void validate() const;
    /// Timing whose processing time makes tau_fb equal `tau_fb_us`.
    static LoopTiming with_latency(double tau_fb_us, double t_meas_us = 0.4, double t_pulse_us = 0.032);
};

struct ControllerProfile {
    std::string name;
    double tau_fb = 0.0;

    /// Sampling processor + triggered AWG (tau_fb = 2.4 us).
    static ControllerProfile adwin();
    /// Programmable-logic comparator (0.11 us response).
    static ControllerProfile cpld();
    static ControllerProfile by_name(const std::string& name);
};

enum class Target { kGround, kExcited };

struct FeedbackProtocol {
    Target target = Target::kGround;
    int rounds = 1;
    /// Unconditional pi pulse on 1<->2 before the final round.
    bool recover_12 = false;
    readout::Threshold threshold{};
    readout::Polarity polarity = readout::Polarity::kZeroHigh;
    LoopTiming timing{};
    double pi_error = 0.005;
    /// Extra random latency, uniform in [0, jitter_us]; zero by default.
    double jitter_us = 0.0;

    void validate() const;
    /// Label such as "Fb0", "2xFb0", "3xFb0+R12".
    std::string id() const;
};

/// Initial state cos(theta/2)|0> + sin(theta/2)|1>, read as classical weights.
LevelPopulations theta_state(double theta);

/// First-order error budget of reset to |0>. One round:
///   P(0) = p^L_00 + p^H_01 + G01 tau,
///   P(pi) = p^H_11 + p^L_10 + p12 + (G10 + G12) tau;
/// two or more rounds replace P(pi) with P(0) + p12 + G12 tau. Other angles
/// weight the two cases by cos^2(theta/2) and sin^2(theta/2).
double predict_reset_error(double theta, const TransitionRates& rates, const ReadoutErrorModel& err,
                           const LoopTiming& timing, int rounds);

struct RoundTrace {
    std::size_t n_high = 0;
    std::size_t n_low = 0;
    std::size_t n_pulses = 0;
};

struct ResetResult {
    double p_target = 0.0;
    double p_err = 0.0;
    double p_err_stderr = 0.0;
    std::size_t n_shots = 0;
    /// Final populations of |0>, |1>, |2>.
    std::array<double, 3> p_level{};
    std::vector<RoundTrace> rounds;
};

struct RunOptions {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// Offset that keeps streams of different sweep points disjoint.
    std::uint64_t stream_offset = 0;
};

/// Monte-Carlo feedback reset from `initial`. Without a protocol the
/// populations are read out unchanged (passive reference).
ResetResult run_reset(const LevelPopulations& initial, const std::optional<FeedbackProtocol>& protocol,
                      const ShotModel& model, const TransitionRates& rates, std::size_t n_shots,
                      const RunOptions& options);

enum class Algorithm { kLeaveExcited, kLeaveGround };

struct RepeatedInitResult {
    double p_err = 0.0;
    double p_err_stderr = 0.0;
    std::size_t n_cycles = 0;
};

/// Looped experiment: wait tau_init, initialize (feedback protocol or
/// nothing), measure (error if the qubit is not in |0>), then leave the
/// qubit in |1> (pi pulse) or |0>. Independent chains start from the steady
/// state and discard a burn-in before counting.
/// Digitization of the check measurement that closes each cycle; an L outcome counts as an error.
struct RepeatedInitSettings {
    readout::Threshold check_threshold{};
    readout::Polarity check_polarity = readout::Polarity::kZeroHigh;
    double algorithm_pi_error = 0.0;
};

/// Loops wait -> optional feedback -> check measurement -> algorithm pulse on 16 fixed chains.
RepeatedInitResult run_repeated_init(double tau_init_us, Algorithm algorithm,
                                     const std::optional<FeedbackProtocol>& protocol, const TransitionRates& rates,
                                     const ShotModel& model, std::size_t n_cycles, const RunOptions& options,
                                     const RepeatedInitSettings& settings = {});

/// Sweep CSV header: <x_name>,p_err,p_err_stderr,protocol_id
void write_sweep_header(std::ostream& os, const std::string& x_name);
/// Extra columns named in `extra_names` follow protocol_id.
void write_sweep_header(std::ostream& os, const std::string& x_name, const std::vector<std::string>& extra_names);
void write_sweep_row(std::ostream& os, double x, double p_err, double p_err_stderr, const std::string& protocol_id,
                     const std::vector<std::string>& extra = {});

}  // namespace qfb::feedback
