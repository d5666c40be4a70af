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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qfb/cavity.hpp"
#include "qfb/config.hpp"
#include "qfb/entangle.hpp"
#include "qfb/feedback.hpp"
#include "qfb/readout_bench.hpp"

namespace qfb::app {

/// Per-run state shared by experiments; all file output goes through write().
class Context {
  public:
    Context(std::uint64_t seed, unsigned threads, std::filesystem::path out_dir);

    std::uint64_t seed() const { return seed_; }
    unsigned threads() const { return threads_; }
    const std::filesystem::path& out_dir() const { return out_dir_; }

    void write(const std::string& name, const std::string& content);
    void warn(const std::string& message) { warnings_.push_back(message); }
    /// Marks the run as not converged (exit code 3) after writing artifacts.
    void fail_numerically(const std::string& message);

    const std::vector<std::string>& files() const { return files_; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    bool numerical_failure() const { return numerical_failure_; }

  private:
    std::uint64_t seed_;
    unsigned threads_;
    std::filesystem::path out_dir_;
    std::vector<std::string> files_;
    std::vector<std::string> warnings_;
    bool numerical_failure_ = false;
};

using ExperimentFn = void (*)(config::Block& root, Context& ctx);

void reset_sweep(config::Block& root, Context& ctx);
void repeated_init(config::Block& root, Context& ctx);
void readout_bench(config::Block& root, Context& ctx);
void qnd_bench(config::Block& root, Context& ctx);
void parity_dephasing(config::Block& root, Context& ctx);
void parity_fidelity(config::Block& root, Context& ctx);
void entangle_postselect(config::Block& root, Context& ctx);
void entangle_feedback(config::Block& root, Context& ctx);
void tomo_demo(config::Block& root, Context& ctx);

// Block readers; each consumes its block and rejects unknown keys.
dynamics::TransitionRates read_rates(config::Block b);
readout::ShotModel read_shot_model(config::Block b);
readout::Polarity read_polarity(config::Block& b, const std::string& key);
feedback::FeedbackProtocol read_feedback(config::Block b, const readout::ShotModel& model);
/// "none" gives no protocol; otherwise [Nx]Fb0|Fb1[+R12] on top of `base`.
std::optional<feedback::FeedbackProtocol> parse_protocol(const std::string& id, const feedback::FeedbackProtocol& base);
readout::RegisterBenchConfig read_register(config::Block b);
cavity::CavityConfig read_cavity(config::Block b);
std::optional<entangle::Decoherence> read_decoherence(std::optional<config::Block> b, double& duration_us);

/// Measurement settings shared by the entanglement experiments.
struct ParitySetup {
    cavity::CavityConfig cavity;
    double tau_p = 0.3;
    cavity::IntegrationWindow window;
    cavity::SignalStats stats;
    cavity::CoherenceFactors factors = cavity::CoherenceFactors::identity();
    double threshold = 0.0;
    /// Phase of the 01/10 coherence and the even-minus-odd phase.
    double odd_phase = 0.0;
    double even_phase = 0.0;
};
ParitySetup read_parity(config::Block b, const cavity::CavityConfig& cav);

std::size_t read_shots(config::Block& b, const std::string& key, std::size_t fallback);

}  // namespace qfb::app
