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

#include "qfb/qubit_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "qfb/error.hpp"

namespace qfb::dynamics {

namespace {

constexpr double kPlanck = 6.62607015e-34;     // J s
constexpr double kBoltzmann = 1.380649e-23;    // J / K

double inverse_or_zero(double t) {
    require(t >= 0.0, "inverse rates must be non-negative");
    if (t == 0.0 || std::isinf(t)) {
        return 0.0;
    }
    return 1.0 / t;
}

}  // namespace

double LevelPopulations::operator[](std::size_t level) const {
    switch (level) {
        case 0: return p0;
        case 1: return p1;
        case 2: return p2;
        default: throw ArgumentError("level index out of range: " + std::to_string(level));
    }
}

double& LevelPopulations::operator[](std::size_t level) {
    switch (level) {
        case 0: return p0;
        case 1: return p1;
        case 2: return p2;
        default: throw ArgumentError("level index out of range: " + std::to_string(level));
    }
}

LevelPopulations LevelPopulations::from_vector(const Eigen::Vector3d& v) {
    return {v[0], v[1], v[2]};
}

LevelPopulations LevelPopulations::level(std::size_t k) {
    LevelPopulations pops{0.0, 0.0, 0.0};
    pops[k] = 1.0;
    return pops;
}

void LevelPopulations::validate(double tol) const {
    for (double p : {p0, p1, p2}) {
        require(p >= -tol && p <= 1.0 + tol, "population outside [0,1]");
    }
    require(std::abs(sum() - 1.0) <= tol, "populations do not sum to 1");
}

TransitionRates TransitionRates::from_inverse(double t01, double t10, double t12, double t21) {
    return {inverse_or_zero(t01), inverse_or_zero(t10), inverse_or_zero(t12), inverse_or_zero(t21)};
}

double TransitionRates::escape_rate(std::size_t level) const {
    switch (level) {
        case 0: return g01;
        case 1: return g10 + g12;
        case 2: return g21;
        default: throw ArgumentError("level index out of range");
    }
}

double TransitionRates::rate(std::size_t from, std::size_t to) const {
    if (from == 0 && to == 1) return g01;
    if (from == 1 && to == 0) return g10;
    if (from == 1 && to == 2) return g12;
    if (from == 2 && to == 1) return g21;
    return 0.0;
}

Eigen::Matrix3d TransitionRates::generator() const {
    Eigen::Matrix3d g;
    g << -g01, g10, 0.0,
          g01, -g10 - g12, g21,
          0.0, g12, -g21;
    return g;
}

void TransitionRates::validate() const {
    for (double g : {g01, g10, g12, g21}) {
        require(std::isfinite(g) && g >= 0.0, "transition rates must be finite and non-negative");
    }
}

QubitFrequencies QubitFrequencies::with_anharmonicity(double f01_ghz, double anharmonicity_ghz) {
    require(f01_ghz > 0.0, "f01 must be positive");
    return {f01_ghz, f01_ghz - anharmonicity_ghz};
}

Eigen::Matrix3d propagator(const TransitionRates& rates, double dt_us) {
    require(dt_us >= 0.0, "evolve: negative time step");
    rates.validate();
    const Eigen::Matrix3d gen = rates.generator();
    if (dt_us == 0.0 || rates.all_zero()) {
        return Eigen::Matrix3d::Identity();
    }

    // Eigen-decomposition path: G = V diag(l) V^-1, exp(G t) = V diag(e^{l t}) V^-1.
    Eigen::EigenSolver<Eigen::Matrix3d> solver(gen);
    if (solver.info() == Eigen::Success) {
        const Eigen::Vector3cd lambda = solver.eigenvalues();
        const Eigen::Matrix3cd vecs = solver.eigenvectors();
        const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
        double min_gap = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                min_gap = std::min(min_gap, std::abs(lambda[i] - lambda[j]));
            }
        }
        const Eigen::FullPivLU<Eigen::Matrix3cd> lu(vecs);
        if (min_gap > 1e-10 * scale && lu.rcond() > 1e-8) {
            Eigen::Vector3cd expo;
            for (int i = 0; i < 3; ++i) {
                expo[i] = std::exp(lambda[i] * dt_us);
            }
            const Eigen::Matrix3cd prop = vecs * expo.asDiagonal() * lu.inverse();
            return prop.real();
        }
    }
    // Near-degenerate spectrum: scaling-and-squaring Pade.
    const Eigen::Matrix3d scaled = gen * dt_us;
    return scaled.exp();
}

LevelPopulations evolve(const LevelPopulations& pops, const TransitionRates& rates, double dt_us) {
    const Eigen::Matrix3d prop = propagator(rates, dt_us);
    Eigen::Vector3d out = prop * pops.vector();
    // The exact propagator is stochastic; strip round-off below zero and renormalize.
    out = out.cwiseMax(0.0);
    const double total = out.sum();
    if (total > 0.0) {
        out *= pops.sum() / total;
    }
    return LevelPopulations::from_vector(out);
}

LevelPopulations steady_state(const TransitionRates& rates) {
    rates.validate();
    if (rates.all_zero()) {
        throw NumericalError("steady_state: all rates are zero, no unique steady state");
    }
    const Eigen::Matrix3d gen = rates.generator();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(gen, Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (!(sv[1] > 1e-12 * sv[0])) {
        throw NumericalError("steady_state: generator kernel is not one-dimensional");
    }
    Eigen::Vector3d kernel = svd.matrixV().col(2);
    if (kernel.sum() < 0.0) {
        kernel = -kernel;
    }
    kernel = kernel.cwiseMax(0.0);
    kernel /= kernel.sum();
    return LevelPopulations::from_vector(kernel);
}

TemperatureFit effective_temperature(const LevelPopulations& pops, const QubitFrequencies& freqs) {
    require(freqs.f01 > 0.0, "f01 must be positive");
    require(pops.p0 > 0.0, "effective_temperature: ground population must be positive");
    constexpr double kPresent = 1e-15;
    if (pops.p1 <= kPresent && pops.p2 <= kPresent) {
        return {0.0, true, 1};
    }
    if (pops.p1 >= pops.p0) {
        throw ArgumentError("effective_temperature: inverted population, no positive temperature");
    }

    // Level energies expressed as temperatures E_k / k_B (kelvin).
    const double ghz_to_kelvin = kPlanck * 1e9 / kBoltzmann;
    const std::array<double, 3> energy{0.0, freqs.f01 * ghz_to_kelvin,
                                       (freqs.f01 + freqs.f12) * ghz_to_kelvin};
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < 3; ++k) {
        if (pops[k] > kPresent) {
            xs.push_back(energy[k]);
            ys.push_back(std::log(pops[k]));
        }
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    if (!(slope < 0.0)) {
        throw ArgumentError("effective_temperature: no positive temperature fits these populations");
    }
    return {-1000.0 / slope, false, static_cast<int>(xs.size())};
}

std::size_t pi_pulse_target(std::size_t level, Transition transition) {
    if (transition == Transition::k01) {
        return level == 0 ? 1 : level == 1 ? 0 : level;
    }
    return level == 1 ? 2 : level == 2 ? 1 : level;
}

LevelPopulations apply_pi_pulse(const LevelPopulations& pops, Transition transition, double pulse_error) {
    require(pulse_error >= 0.0 && pulse_error <= 1.0, "pulse_error must be in [0,1]");
    const std::size_t a = transition == Transition::k01 ? 0 : 1;
    const std::size_t b = a + 1;
    LevelPopulations out = pops;
    out[a] = pulse_error * pops[a] + (1.0 - pulse_error) * pops[b];
    out[b] = pulse_error * pops[b] + (1.0 - pulse_error) * pops[a];
    return out;
}

std::size_t sample_evolution(std::size_t level, const TransitionRates& rates, double dt_us, CounterRng& rng) {
    require(dt_us >= 0.0, "sample_evolution: negative duration");
    double t = 0.0;
    while (true) {
        const double escape = rates.escape_rate(level);
        t += rng.exponential(escape);
        if (!(t < dt_us)) {
            return level;
        }
        if (level == 1) {
            level = rng.uniform() * escape < rates.g10 ? 0 : 2;
        } else {
            level = 1;
        }
    }
}

std::size_t sample_level(const LevelPopulations& pops, CounterRng& rng) {
    const double u = rng.uniform() * pops.sum();
    if (u < pops.p0) return 0;
    if (u < pops.p0 + pops.p1) return 1;
    return 2;
}

}  // namespace qfb::dynamics
