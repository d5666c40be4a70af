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

#include <array>
#include <complex>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace qfb::cavity {

using cd = std::complex<double>;

/// Two-qubit basis index s = 2*b + a, labels |BA>: 0 = 00, 1 = 01 (A excited), 2 = 10 (B excited), 3 = 11.
constexpr std::size_t kStates = 4;

/// Frequencies are entered in MHz and used internally as angular rates in rad/us.
struct CavityConfig {
    double kappa_mhz = 1.5;
    /// Half the resonance pull when the qubit is excited.
    double chi_a_mhz = 1.95;
    double chi_b_mhz = 1.95;
    /// Drive amplitude in sqrt(photons)/us.
    double drive = 0.0;
    /// Drive offset from the mean of the four pulled resonances.
    double drive_detuning_mhz = 0.0;
    double eta = 1.0;
    double lo_phase = 0.0;
    /// Single-pole low-pass on the signal mean; zero disables it.
    double jpa_bandwidth_mhz = 0.0;

    double kappa() const;
    double chi_a() const;
    double chi_b() const;
    /// Detuning of the drive from the state-s resonance, mean pull minus pull(s) plus the offset.
    std::array<double, kStates> detunings() const;
    void validate() const;

    /// Drive giving `nbar` steady-state photons for a resonant state.
    static double drive_for_photons(double kappa, double nbar);
    /// kappa/2pi = 1.5 MHz, chi/kappa ~ 1.3, chi mismatch 117.5 kHz, 2.5 resonant photons.
    static CavityConfig parity_reference();
};

struct PointerTrajectory {
    std::vector<double> times;
    std::array<std::vector<cd>, kStates> alpha;
    /// Drive switches off here; later samples are free ring-down.
    double pulse_end = 0.0;

    std::size_t size() const { return times.size(); }
};

/// Closed-form pointer amplitudes on a uniform grid, continued through ring-down until every |alpha| < 1e-3.
PointerTrajectory evolve_pointer(const CavityConfig& cfg, double tau_p, double dt);

struct IntegrationWindow {
    double t_i = 0.0;
    double t_f = 0.0;
    double length() const { return t_f - t_i; }
};

struct SignalStats {
    std::array<double, kStates> mean{};
    double var = 0.0;
    IntegrationWindow window{};

    double separation(std::size_t i, std::size_t j) const;
    double snr(std::size_t i, std::size_t j) const;
};

SignalStats signal_stats(const PointerTrajectory& traj, const CavityConfig& cfg, IntegrationWindow window);

struct BetaCoefficients {
    double b0 = 0.0;
    double bA = 0.0;
    double bB = 0.0;
    double bBA = 0.0;

    /// Forward model value for basis state s.
    double value(std::size_t s) const;
};

/// sigma_z = +1 for |0>.
double sigma_z(std::size_t s, std::size_t qubit);

BetaCoefficients beta_from_means(const std::array<double, kStates>& means);

struct PairFactor {
    double decay = 1.0;
    double phase = 0.0;

    cd multiplier() const { return std::polar(decay, phase); }
};

/// Off-diagonal multipliers keyed by ordered pair i < j; the (j, i) entry is the conjugate.
class CoherenceFactors {
  public:
    static CoherenceFactors identity();

    void set(std::size_t i, std::size_t j, PairFactor f);
    bool has(std::size_t i, std::size_t j) const;
    PairFactor at(std::size_t i, std::size_t j) const;
    cd multiplier(std::size_t i, std::size_t j) const;

  private:
    std::map<std::pair<std::size_t, std::size_t>, PairFactor> pairs_;
};

CoherenceFactors coherence_factors(const PointerTrajectory& traj, const CavityConfig& cfg, double tau_p);

void write_trajectory_csv(std::ostream& os, const PointerTrajectory& traj);

}  // namespace qfb::cavity
