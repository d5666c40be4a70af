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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "qfb/cavity.hpp"
#include "qfb/random.hpp"

namespace qfb::entangle {

using cd = std::complex<double>;
using Matrix4cd = Eigen::Matrix4cd;
using Vector4cd = Eigen::Vector4cd;
using Matrix2cd = Eigen::Matrix2cd;

/// Basis |BA> ordered 00, 01, 10, 11; qubit B is the left tensor factor.
class TwoQubitDensityMatrix {
  public:
    /// Throws ArgumentError unless Hermitian and unit-trace within 1e-10 and eigenvalues >= -1e-9.
    explicit TwoQubitDensityMatrix(const Matrix4cd& m);

    static TwoQubitDensityMatrix from_pure(const Vector4cd& psi);
    static TwoQubitDensityMatrix maximally_mixed();
    /// (|00> + |01> + |10> + |11>) / 2
    static TwoQubitDensityMatrix plus_plus();

    const Matrix4cd& matrix() const { return m_; }
    cd operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
    double fidelity(const Vector4cd& psi) const;

  private:
    Matrix4cd m_;
};

/// Odd = (|01> + e^{-i phase}|10>)/sqrt2, even = (|00> + e^{-i phase}|11>)/sqrt2.
/// Naming follows the convention where Phi+ is the odd combination and Psi+ the even one.
struct BellTarget {
    enum class Label { kPhiPlusOdd, kPsiPlusEven };
    Label label = Label::kPhiPlusOdd;
    double phase = 0.0;

    Vector4cd state() const;
};

/// Operators on qubit A (right factor) and qubit B (left factor).
Matrix4cd on_a(const Matrix2cd& u);
Matrix4cd on_b(const Matrix2cd& u);
/// pi rotation about the equatorial axis at (phi - pi/2) from x, so phi = pi/2 is a pi pulse about x.
Matrix2cd feedback_pulse(double phi);
Matrix2cd rotation(double angle, double axis_phase);
TwoQubitDensityMatrix transform(const TwoQubitDensityMatrix& rho, const Matrix4cd& u);

TwoQubitDensityMatrix unconditioned_parity_map(const TwoQubitDensityMatrix& rho, const cavity::CoherenceFactors& f);

struct ParityShot {
    double v_int = 0.0;
    /// +1 below the threshold, -1 above.
    int m_p = 1;
    TwoQubitDensityMatrix rho_post = TwoQubitDensityMatrix::maximally_mixed();
};

int parity_outcome(double v_int, double threshold);

ParityShot conditioned_parity_shot(const TwoQubitDensityMatrix& rho, const cavity::SignalStats& stats,
                                   const cavity::CoherenceFactors& f, double threshold, CounterRng& rng);

/// Intrinsic decay applied after the measurement channel.
struct Decoherence {
    double t1_a = 0.0;
    double t2_a = 0.0;
    double t1_b = 0.0;
    double t2_b = 0.0;
    /// Zero T1/T2 means that process is off.
    void validate() const;
};

TwoQubitDensityMatrix apply_decoherence(const TwoQubitDensityMatrix& rho, const Decoherence& d, double duration_us);

struct ShotBatchOptions {
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::optional<Decoherence> decoherence;
    double decoherence_time_us = 0.0;
};

std::vector<ParityShot> simulate_parity_shots(const TwoQubitDensityMatrix& rho, const cavity::SignalStats& stats,
                                              const cavity::CoherenceFactors& f, double threshold, std::size_t n,
                                              const ShotBatchOptions& options);

/// Parity errors from Gaussian tails: eps_e = P(M=-1 | even), eps_o = P(M=+1 | odd).
struct ParityErrors {
    double eps_even = 0.0;
    double eps_odd = 0.0;
    double fidelity() const { return 1.0 - eps_even - eps_odd; }
};

ParityErrors parity_errors(const cavity::SignalStats& stats, double threshold);
double parity_fidelity(const cavity::SignalStats& stats, double threshold);
double optimal_parity_threshold(const cavity::SignalStats& stats);
/// Stricter threshold for postselection: the rejected parity leaks in with probability `eps`
/// (eps_even when keeping odd shots above it, eps_odd when keeping even shots below it).
double postselection_threshold(const cavity::SignalStats& stats, bool keep_odd, double eps);

double concurrence(const TwoQubitDensityMatrix& rho);
double log_negativity(const TwoQubitDensityMatrix& rho);
double ebit_efficiency(double p_success, const TwoQubitDensityMatrix& rho);
Matrix4cd partial_transpose_b(const Matrix4cd& m);

struct Metrics {
    double concurrence = 0.0;
    double log_negativity = 0.0;
    double bell_fidelity = 0.0;
    double p_success = 0.0;
    double efficiency = 0.0;
};

Metrics evaluate(const TwoQubitDensityMatrix& rho, const Vector4cd& target, double p_success);

/// Virtual z rotation on qubit B removing `odd_phase` from the 01/10 coherence.
TwoQubitDensityMatrix compensate_odd_phase(const TwoQubitDensityMatrix& rho, double odd_phase);

struct SelectedState {
    TwoQubitDensityMatrix rho = TwoQubitDensityMatrix::maximally_mixed();
    std::size_t kept = 0;
    double p_success = 0.0;
};

/// Average of kept shots; throws NumericalError when nothing is kept.
SelectedState postselect(const std::vector<ParityShot>& shots, const std::function<bool(const ParityShot&)>& keep);

struct FeedbackSettings {
    /// Frame rotation applied before metrics (see compensate_odd_phase).
    double odd_frame_phase = 0.0;
    /// Probability that the conditional pulse is skipped.
    double pulse_error = 0.0;
};

struct FeedbackOutcome {
    TwoQubitDensityMatrix rho_avg = TwoQubitDensityMatrix::maximally_mixed();
    Metrics metrics;
};

/// Applies the conditional pulse on qubit A for m_p = +1 shots and averages every shot.
FeedbackOutcome feedback_entangle(const std::vector<ParityShot>& shots, double phi, const FeedbackSettings& settings = {});

struct PhaseSweepPoint {
    double phi = 0.0;
    double bell_fidelity = 0.0;
    Metrics metrics;
};

std::vector<PhaseSweepPoint> phase_sweep(const std::vector<ParityShot>& shots, std::size_t n_points,
                                         const FeedbackSettings& settings = {});

void write_state_json(std::ostream& os, const TwoQubitDensityMatrix& rho, const Metrics& metrics);

}  // namespace qfb::entangle
