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

// Classical three-level population dynamics of a transmon (levels 0, 1, 2).
//
// The populations obey dP/dt = G P with the tridiagonal generator
//
//        [ -g01        g10         0   ]
//    G = [  g01   -g10 - g12      g21  ]
//        [   0         g12       -g21  ]
//
// Direct 0 <-> 2 transitions are absent. Rates are in 1/us, times in us.

#include <array>
#include <cstddef>

#include <Eigen/Dense>

#include "qfb/random.hpp"

namespace qfb::dynamics {

/// Occupation probabilities of |0>, |1>, |2>.
struct LevelPopulations {
    double p0 = 1.0;
    double p1 = 0.0;
    double p2 = 0.0;

    double operator[](std::size_t level) const;
    double& operator[](std::size_t level);
    double sum() const { return p0 + p1 + p2; }

    Eigen::Vector3d vector() const { return {p0, p1, p2}; }
    static LevelPopulations from_vector(const Eigen::Vector3d& v);

    /// Throws ArgumentError unless every entry is in [0,1] and they sum to 1.
    void validate(double tol = 1e-12) const;

    static LevelPopulations ground() { return {1.0, 0.0, 0.0}; }
    static LevelPopulations level(std::size_t k);
};

/// Transition rates Gamma_ij (from i to j), 1/us.
struct TransitionRates {
    double g01 = 0.0;
    double g10 = 0.0;
    double g12 = 0.0;
    double g21 = 0.0;

    /// Builds rates from inverse rates (us); an infinite or zero time means no transition.
    static TransitionRates from_inverse(double t01, double t10, double t12, double t21);

    /// Total escape rate out of `level`.
    double escape_rate(std::size_t level) const;

    /// Rate from level `from` to level `to` (0 for non-adjacent pairs).
    double rate(std::size_t from, std::size_t to) const;

    Eigen::Matrix3d generator() const;
    void validate() const;
    bool all_zero() const { return g01 == 0.0 && g10 == 0.0 && g12 == 0.0 && g21 == 0.0; }
};

/// Qubit transition frequencies, GHz.
struct QubitFrequencies {
    double f01 = 5.0;
    double f12 = 4.7;

    /// f12 = f01 - anharmonicity.
    static QubitFrequencies with_anharmonicity(double f01_ghz, double anharmonicity_ghz = 0.3);
};

/// exp(G dt) applied to `pops`. Throws ArgumentError for dt < 0.
LevelPopulations evolve(const LevelPopulations& pops, const TransitionRates& rates, double dt_us);

/// Propagator exp(G dt) as a 3x3 matrix.
Eigen::Matrix3d propagator(const TransitionRates& rates, double dt_us);

/// Normalized kernel of the generator. Throws NumericalError when the
/// kernel is not one-dimensional (e.g. all rates zero).
LevelPopulations steady_state(const TransitionRates& rates);

struct TemperatureFit {
    double millikelvin = 0.0;
    /// Set when no excited population is present and T -> 0.
    bool degenerate = false;
    /// Number of levels that entered the fit.
    int levels_used = 0;
};

/// Boltzmann temperature from a log-linear least-squares fit of ln(p_k)
/// against level energy over the levels with nonzero population. With only
/// levels 0 and 1 this is T = h f01 / (k_B ln(p0/p1)).
TemperatureFit effective_temperature(const LevelPopulations& pops, const QubitFrequencies& freqs);

enum class Transition { k01, k12 };

/// Instantaneous pi pulse: swaps the two addressed populations with
/// probability 1 - pulse_error.
LevelPopulations apply_pi_pulse(const LevelPopulations& pops, Transition transition, double pulse_error = 0.0);

/// Samples the level occupied after `dt_us` of stochastic jumps starting
/// from a definite `level` (exact continuous-time Markov chain sampling).
std::size_t sample_evolution(std::size_t level, const TransitionRates& rates, double dt_us, CounterRng& rng);

/// Samples a level from `pops`.
std::size_t sample_level(const LevelPopulations& pops, CounterRng& rng);

/// Level reached by a pi pulse on `transition` from a definite `level`.
std::size_t pi_pulse_target(std::size_t level, Transition transition);

}  // namespace qfb::dynamics
