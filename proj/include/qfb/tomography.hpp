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
#include <iosfwd>
#include <string>
#include <vector>

#include "qfb/cavity.hpp"
#include "qfb/entangle.hpp"

namespace qfb::tomo {

using entangle::Matrix2cd;
using entangle::Matrix4cd;
using entangle::TwoQubitDensityMatrix;

struct PreRotation {
    std::string name;
    Matrix2cd u;
};

/// Pre-rotation pair applied before the joint readout.
struct Setting {
    PreRotation a;
    PreRotation b;

    Matrix4cd unitary() const;
};

/// I, X180, X90, mX90, Y90, mY90.
std::vector<PreRotation> standard_rotations();
/// I, X90, Y90, X180.
std::vector<PreRotation> minimal_rotations();

struct TomographySettings {
    std::vector<Setting> settings;
    cavity::BetaCoefficients beta{0.0, 1.0, 1.0, 1.0};
    std::size_t shots_per_setting = 10000;
    /// Single-shot voltage noise; the averaged record has noise_sd / sqrt(shots).
    double noise_sd = 1.0;

    static TomographySettings full(cavity::BetaCoefficients beta, std::size_t shots, double noise_sd);
    static TomographySettings minimal(cavity::BetaCoefficients beta, std::size_t shots, double noise_sd);

    Matrix4cd observable() const;
    double record_stderr() const;
    /// One for the fixed trace plus the rank of the traceless design.
    int design_rank() const;
    void validate() const;
};

struct MeasurementRecord {
    std::size_t setting_id = 0;
    double mean_v = 0.0;
    double stderr_v = 0.0;
};

/// Noise-free record value for one setting.
double expected_record(const Matrix4cd& rho, const TomographySettings& settings, std::size_t setting_id);

std::vector<MeasurementRecord> simulate_records(const TwoQubitDensityMatrix& rho, const TomographySettings& settings,
                                                std::uint64_t seed, unsigned threads = 1);

struct LinearEstimate {
    /// Hermitian and unit-trace, possibly with negative eigenvalues.
    Matrix4cd rho;
    double min_eigenvalue = 0.0;
    bool negative = false;
};

LinearEstimate linear_inversion(const std::vector<MeasurementRecord>& records, const TomographySettings& settings);

/// Closest physical state in eigenvalue space (negative weight redistributed over the remaining spectrum).
TwoQubitDensityMatrix project_to_physical(const Matrix4cd& rho);

/// Weighted Gaussian log-likelihood normalized by the total weight.
double log_likelihood(const Matrix4cd& rho, const std::vector<MeasurementRecord>& records,
                      const TomographySettings& settings);

struct MleOptions {
    int max_iterations = 5000;
    double gradient_tol = 1e-7;
};

struct MleResult {
    TwoQubitDensityMatrix rho = TwoQubitDensityMatrix::maximally_mixed();
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    /// Set when the iteration limit was hit; `rho` is then the best iterate.
    bool warning = false;
};

MleResult mle_reconstruct(const std::vector<MeasurementRecord>& records, const TomographySettings& settings,
                          const MleOptions& options = {});

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
double state_fidelity(const Matrix4cd& a, const Matrix4cd& b);

void write_records_csv(std::ostream& os, const std::vector<MeasurementRecord>& records,
                       const TomographySettings& settings);

}  // namespace qfb::tomo
