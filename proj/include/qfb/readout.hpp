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

// Single-shot dispersive readout of transmon qubits: voltage generation with
// relaxation/excitation during the measurement, threshold digitization into
// H/L, contrast analysis, postselection and repeated-measurement statistics.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qfb/qubit_dynamics.hpp"
#include "qfb/random.hpp"

namespace qfb::readout {

using dynamics::TransitionRates;

enum class Outcome { kH, kL };

/// Which side of the threshold the declared-|0> state sits on.
enum class Polarity { kZeroHigh, kZeroLow };

struct Threshold {
    double v_th = 0.0;
};

/// Integration window inside a measurement pulse, in us from pulse start.
struct Window {
    double start = 0.0;
    double length = 0.0;
    double end() const { return start + length; }
};

/// Gaussian single-shot model of one qubit.
struct ShotModel {
    /// Mean integrated voltage per level |0>, |1>, |2>.
    std::array<double, 3> mu{1.0, -1.0, -1.0};
    double sigma = 0.3;
    /// Measurement pulse length (us); jumps are sampled over the whole pulse.
    double t_meas = 0.4;
    Window window{0.0, 0.4};

    void validate() const;
    /// Model with level |2> sharing the |1> mean (binary digitization).
    static ShotModel binary(double mu0, double mu1, double sigma, double t_meas, Window window);
};

struct Shot {
    double voltage = 0.0;
    std::size_t pre_state = 0;
    std::size_t post_state = 0;
};

/// At most one level jump during the pulse; voltage is the window-weighted
/// mean of the pre/post-jump levels plus Normal(0, sigma).
Shot generate_shot(std::size_t true_state, const ShotModel& model, const TransitionRates& rates, CounterRng& rng);

/// Two-qubit register read through a common cavity. States are (a, b) with
/// a the level of qubit A; `mu` is indexed by a + 3 b.
struct RegisterShotModel {
    std::array<double, 9> mu{};
    double sigma = 0.3;
    double t_meas = 0.3;
    Window window{0.0, 0.3};

    void validate() const;
    double mean(std::size_t a, std::size_t b) const { return mu[a + 3 * b]; }
};

struct RegisterShot {
    double voltage = 0.0;
    std::array<std::size_t, 2> post{0, 0};
};

RegisterShot generate_register_shot(std::array<std::size_t, 2> states, const RegisterShotModel& model,
                                    const std::array<TransitionRates, 2>& rates, CounterRng& rng);

/// H iff v lies strictly on the declared-|0> side; v == threshold gives L.
Outcome digitize(double v, Threshold th, Polarity polarity);

struct ThresholdChoice {
    Threshold threshold;
    double contrast = 0.0;
    Polarity polarity = Polarity::kZeroHigh;
};

/// Threshold maximizing |CDF_0(v) - CDF_1(v)| over midpoints of the pooled
/// sorted samples; among a contiguous run of maximizing candidates the
/// midpoint of the run is returned.
ThresholdChoice optimal_threshold(std::span<const double> shots_prep0, std::span<const double> shots_prep1);

/// |CDF_0(th) - CDF_1(th)| at a fixed threshold, with the tie convention of digitize.
double contrast_at(std::span<const double> shots_prep0, std::span<const double> shots_prep1, Threshold th,
                   Polarity polarity);

/// p^M_{ij}: probability of result M with pre-measurement level i and
/// post-measurement level j.
class ReadoutErrorModel {
public:
    ReadoutErrorModel();

    double p(Outcome m, std::size_t i, std::size_t j) const;
    void set(Outcome m, std::size_t i, std::size_t j, double value);

    /// p_{ij} summed over outcomes (e.g. p12, leakage during readout).
    double transition(std::size_t i, std::size_t j) const;
    /// Probability that level i is reported as `m`.
    double outcome_probability(Outcome m, std::size_t i) const;

    /// Perfect QND readout: |0> -> H, |1>,|2> -> L, no transitions.
    static ReadoutErrorModel ideal();

    /// Throws ArgumentError unless rows are probability distributions.
    void validate(double tol = 1e-9) const;

private:
    // index: [m][i][j]
    std::array<std::array<std::array<double, 3>, 3>, 2> p_{};
};

/// Deterministic error model of generate_shot + digitize: Gaussian tails
/// composed with the single-jump time density (numerical quadrature).
ReadoutErrorModel analytic_error_model(const ShotModel& model, const TransitionRates& rates, Threshold th,
                                       Polarity polarity);

/// Monte-Carlo counter for p^M_{ij}.
class ErrorModelCounter {
public:
    void add(Outcome m, std::size_t pre, std::size_t post);
    ErrorModelCounter& operator+=(const ErrorModelCounter& other);
    std::size_t count(Outcome m, std::size_t pre, std::size_t post) const;
    std::size_t prepared(std::size_t pre) const;
    ReadoutErrorModel estimate() const;

private:
    std::array<std::array<std::array<std::size_t, 3>, 3>, 2> n_{};
};

struct PostselectedShots {
    std::vector<double> kept;
    double kept_fraction = 0.0;
    /// Set when no shot had M_A = H.
    bool empty = true;
};

/// Keeps the M_B voltages whose preceding M_A result was H.
PostselectedShots postselect_ground(std::span<const std::pair<Outcome, double>> pairs);

struct QndCorrelations {
    std::optional<double> p_h_given_h;
    std::optional<double> p_l_given_l;
    std::size_t n_h = 0;
    std::size_t n_l = 0;
};

/// Empirical P(M_C = H | M_B = H) and P(M_C = L | M_B = L); an entry is empty
/// when its conditioning outcome never occurred. Throws on an empty list.
QndCorrelations qnd_correlations(std::span<const std::pair<Outcome, Outcome>> shot_pairs);

/// Histogram CSV: bin_left,bin_right,count_prep0,count_prep1.
void write_histogram_csv(std::ostream& os, std::span<const double> shots_prep0, std::span<const double> shots_prep1,
                         std::size_t bins);

}  // namespace qfb::readout
