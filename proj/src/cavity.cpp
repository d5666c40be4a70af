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

#include "qfb/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qfb/csv.hpp"
#include "qfb/error.hpp"

namespace qfb::cavity {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;
constexpr double kRingDownFloor = 1e-3;

/// (1 - exp(-mu h)) / mu, the integral of exp(-mu t) over [0, h].
cd exp_integral(cd mu, double h) {
    const cd x = mu * h;
    if (std::abs(x) < 1e-6) {
        return h * (1.0 - x / 2.0 + x * x / 6.0);
    }
    return (1.0 - std::exp(-x)) / mu;
}

/// Integral of exp(-mu t) over [t0, t1].
cd exp_integral(cd mu, double t0, double t1) { return std::exp(-mu * t0) * exp_integral(mu, t1 - t0); }

/// alpha(t_k + t) = fixed + (alpha_k - fixed) exp(-lambda t) inside one grid segment.
struct Segment {
    cd fixed;
    cd transient;
    cd lambda;
};

std::array<cd, kStates> rates_of(const CavityConfig& cfg) {
    const auto det = cfg.detunings();
    std::array<cd, kStates> out{};
    for (std::size_t s = 0; s < kStates; ++s) {
        out[s] = cd(0.5 * cfg.kappa(), det[s]);
    }
    return out;
}

Segment segment(const PointerTrajectory& traj, const CavityConfig& cfg, const std::array<cd, kStates>& lambda,
                std::size_t s, std::size_t k) {
    const bool driven = traj.times[k] < traj.pulse_end - 1e-12;
    const cd fixed = driven ? cfg.drive / lambda[s] : cd(0.0);
    return {fixed, traj.alpha[s][k] - fixed, lambda[s]};
}

/// Integral of alpha over [t0, t1] measured from the segment start.
cd integrate(const Segment& g, double t0, double t1) {
    return g.fixed * (t1 - t0) + g.transient * exp_integral(g.lambda, t0, t1);
}

/// Integral of alpha_i conj(alpha_j) over a full segment of length h.
cd integrate_product(const Segment& gi, const Segment& gj, double h) {
    const cd fj = std::conj(gj.fixed);
    const cd tj = std::conj(gj.transient);
    const cd lj = std::conj(gj.lambda);
    return gi.fixed * fj * h + gi.fixed * tj * exp_integral(lj, h) + gi.transient * fj * exp_integral(gi.lambda, h) +
           gi.transient * tj * exp_integral(gi.lambda + lj, h);
}

double max_abs(const PointerTrajectory& traj, std::size_t k) {
    double m = 0.0;
    for (std::size_t s = 0; s < kStates; ++s) {
        m = std::max(m, std::abs(traj.alpha[s][k]));
    }
    return m;
}

}  // namespace

double CavityConfig::kappa() const { return kTwoPi * kappa_mhz; }
double CavityConfig::chi_a() const { return kTwoPi * chi_a_mhz; }
double CavityConfig::chi_b() const { return kTwoPi * chi_b_mhz; }

std::array<double, kStates> CavityConfig::detunings() const {
    const std::array<double, kStates> pull{0.0, 2.0 * chi_a(), 2.0 * chi_b(), 2.0 * chi_a() + 2.0 * chi_b()};
    const double mean = 0.25 * (pull[0] + pull[1] + pull[2] + pull[3]);
    const double offset = kTwoPi * drive_detuning_mhz;
    std::array<double, kStates> out{};
    for (std::size_t s = 0; s < kStates; ++s) {
        out[s] = mean - pull[s] + offset;
    }
    return out;
}

void CavityConfig::validate() const {
    require(kappa_mhz > 0.0 && std::isfinite(kappa_mhz), "kappa must be positive");
    require(eta > 0.0 && eta <= 1.0, "eta must be in (0, 1]");
    require(std::isfinite(chi_a_mhz) && std::isfinite(chi_b_mhz), "dispersive shifts must be finite");
    require(std::isfinite(drive) && std::isfinite(drive_detuning_mhz) && std::isfinite(lo_phase),
            "drive parameters must be finite");
    require(jpa_bandwidth_mhz >= 0.0, "JPA bandwidth must be non-negative");
}

double CavityConfig::drive_for_photons(double kappa, double nbar) {
    require(kappa > 0.0 && nbar >= 0.0, "drive_for_photons: need kappa > 0 and nbar >= 0");
    return std::sqrt(nbar) * 0.5 * kappa;
}

CavityConfig CavityConfig::parity_reference() {
    CavityConfig cfg;
    cfg.kappa_mhz = 1.5;
    cfg.chi_b_mhz = 1.95;
    cfg.chi_a_mhz = 1.95 + 0.1175;
    cfg.drive = drive_for_photons(cfg.kappa(), 2.5);
    return cfg;
}

PointerTrajectory evolve_pointer(const CavityConfig& cfg, double tau_p, double dt) {
    cfg.validate();
    require(tau_p >= 0.0 && std::isfinite(tau_p), "evolve_pointer: tau_p must be non-negative");
    require(dt > 0.0 && dt <= (1.0 + 1e-12) / (10.0 * cfg.kappa()), "evolve_pointer: dt must be in (0, 1/(10 kappa)]");

    const auto lambda = rates_of(cfg);
    const std::size_t n_on = tau_p > 0.0 ? static_cast<std::size_t>(std::ceil(tau_p / dt - 1e-9)) : 0;
    const double h = n_on > 0 ? tau_p / static_cast<double>(n_on) : dt;

    std::array<cd, kStates> at_end{};
    double peak = 0.0;
    for (std::size_t s = 0; s < kStates; ++s) {
        at_end[s] = cfg.drive / lambda[s] * (1.0 - std::exp(-lambda[s] * tau_p));
        peak = std::max(peak, std::abs(at_end[s]));
    }
    std::size_t n_ring = 0;
    if (peak >= kRingDownFloor) {
        const double t_ring = 2.0 / cfg.kappa() * std::log(peak / kRingDownFloor);
        n_ring = static_cast<std::size_t>(std::ceil(t_ring / h)) + 1;
    }

    PointerTrajectory traj;
    traj.pulse_end = tau_p;
    const std::size_t n = n_on + n_ring + 1;
    traj.times.resize(n);
    for (auto& a : traj.alpha) {
        a.resize(n);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const double t = k <= n_on ? static_cast<double>(k) * h : tau_p + static_cast<double>(k - n_on) * h;
        traj.times[k] = t;
        for (std::size_t s = 0; s < kStates; ++s) {
            traj.alpha[s][k] = k <= n_on ? cfg.drive / lambda[s] * (1.0 - std::exp(-lambda[s] * t))
                                         : at_end[s] * std::exp(-lambda[s] * (t - tau_p));
        }
    }
    return traj;
}

double SignalStats::separation(std::size_t i, std::size_t j) const { return std::abs(mean.at(i) - mean.at(j)); }

double SignalStats::snr(std::size_t i, std::size_t j) const { return separation(i, j) / std::sqrt(2.0 * var); }

SignalStats signal_stats(const PointerTrajectory& traj, const CavityConfig& cfg, IntegrationWindow window) {
    cfg.validate();
    require(traj.size() >= 2, "signal_stats: trajectory too short");
    require(window.t_i >= traj.times.front() - 1e-12 && window.t_f <= traj.times.back() + 1e-12 &&
                window.t_f > window.t_i,
            "signal_stats: window outside the trajectory span");

    const double gain = std::sqrt(cfg.kappa() * cfg.eta);
    const cd lo = std::polar(1.0, -cfg.lo_phase);
    SignalStats out;
    out.window = window;
    out.var = 0.5 * window.length();

    if (cfg.jpa_bandwidth_mhz <= 0.0) {
        const auto lambda = rates_of(cfg);
        for (std::size_t s = 0; s < kStates; ++s) {
            cd total = 0.0;
            for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
                const double a = std::max(window.t_i, traj.times[k]);
                const double b = std::min(window.t_f, traj.times[k + 1]);
                if (b <= a) {
                    continue;
                }
                total += integrate(segment(traj, cfg, lambda, s, k), a - traj.times[k], b - traj.times[k]);
            }
            out.mean[s] = gain * std::real(lo * total);
        }
        return out;
    }

    // Filtered path: first-order hold on the grid, trapezoid over the window.
    const double wc = kTwoPi * cfg.jpa_bandwidth_mhz;
    for (std::size_t s = 0; s < kStates; ++s) {
        std::vector<double> y(traj.size(), 0.0);
        for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
            const double h = traj.times[k + 1] - traj.times[k];
            const double x0 = gain * std::real(lo * traj.alpha[s][k]);
            const double x1 = gain * std::real(lo * traj.alpha[s][k + 1]);
            const double decay = std::exp(-wc * h);
            y[k + 1] = y[k] * decay + (1.0 - decay) * 0.5 * (x0 + x1);
        }
        double total = 0.0;
        for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
            const double t0 = traj.times[k];
            const double t1 = traj.times[k + 1];
            const double a = std::max(window.t_i, t0);
            const double b = std::min(window.t_f, t1);
            if (b <= a) {
                continue;
            }
            const auto lerp = [&](double t) { return y[k] + (y[k + 1] - y[k]) * (t - t0) / (t1 - t0); };
            total += 0.5 * (lerp(a) + lerp(b)) * (b - a);
        }
        out.mean[s] = total;
    }
    return out;
}

double sigma_z(std::size_t s, std::size_t qubit) {
    require(s < kStates && qubit < 2, "sigma_z: index out of range");
    return ((s >> qubit) & 1U) != 0U ? -1.0 : 1.0;
}

double BetaCoefficients::value(std::size_t s) const {
    const double za = sigma_z(s, 0);
    const double zb = sigma_z(s, 1);
    return b0 + bA * za + bB * zb + bBA * za * zb;
}

BetaCoefficients beta_from_means(const std::array<double, kStates>& v) {
    for (double x : v) {
        require(std::isfinite(x), "beta_from_means: means must be finite");
    }
    return {0.25 * (v[0] + v[1] + v[2] + v[3]), 0.25 * (v[0] - v[1] + v[2] - v[3]),
            0.25 * (v[0] + v[1] - v[2] - v[3]), 0.25 * (v[0] - v[1] - v[2] + v[3])};
}

CoherenceFactors CoherenceFactors::identity() {
    CoherenceFactors f;
    for (std::size_t i = 0; i < kStates; ++i) {
        for (std::size_t j = i + 1; j < kStates; ++j) {
            f.set(i, j, PairFactor{});
        }
    }
    return f;
}

void CoherenceFactors::set(std::size_t i, std::size_t j, PairFactor f) {
    require(i < kStates && j < kStates && i != j, "CoherenceFactors: invalid pair");
    require(f.decay > 0.0 && f.decay <= 1.0 + 1e-12, "CoherenceFactors: decay must be in (0, 1]");
    if (i > j) {
        std::swap(i, j);
        f.phase = -f.phase;
    }
    pairs_[{i, j}] = f;
}

bool CoherenceFactors::has(std::size_t i, std::size_t j) const {
    return pairs_.count({std::min(i, j), std::max(i, j)}) != 0;
}

PairFactor CoherenceFactors::at(std::size_t i, std::size_t j) const {
    const auto it = pairs_.find({std::min(i, j), std::max(i, j)});
    if (it == pairs_.end()) {
        throw ArgumentError("CoherenceFactors: missing pair (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    PairFactor f = it->second;
    if (i > j) {
        f.phase = -f.phase;
    }
    return f;
}

cd CoherenceFactors::multiplier(std::size_t i, std::size_t j) const { return at(i, j).multiplier(); }

CoherenceFactors coherence_factors(const PointerTrajectory& traj, const CavityConfig& cfg, double tau_p) {
    cfg.validate();
    require(traj.size() >= 1, "coherence_factors: empty trajectory");
    require(std::abs(traj.pulse_end - tau_p) <= 1e-9, "coherence_factors: trajectory pulse length differs from tau_p");
    require(max_abs(traj, traj.size() - 1) < kRingDownFloor,
            "coherence_factors: trajectory does not cover the cavity ring-down");

    const auto lambda = rates_of(cfg);
    const auto det = cfg.detunings();
    CoherenceFactors out;
    for (std::size_t i = 0; i < kStates; ++i) {
        for (std::size_t j = i + 1; j < kStates; ++j) {
            cd overlap = 0.0;
            for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
                const double h = traj.times[k + 1] - traj.times[k];
                overlap += integrate_product(segment(traj, cfg, lambda, i, k), segment(traj, cfg, lambda, j, k), h);
            }
            // log of the multiplier is -i (Delta_i - Delta_j) * overlap.
            const cd log_mult = cd(0.0, -(det[i] - det[j])) * overlap;
            out.set(i, j, PairFactor{std::exp(std::clamp(log_mult.real(), -700.0, 0.0)), log_mult.imag()});
        }
    }
    return out;
}

void write_trajectory_csv(std::ostream& os, const PointerTrajectory& traj) {
    static const char* kLabels[kStates] = {"00", "01", "10", "11"};
    os << "t_us";
    for (const char* l : kLabels) {
        os << ",re_a" << l << ",im_a" << l;
    }
    os << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        os << csv::num(traj.times[k]);
        for (std::size_t s = 0; s < kStates; ++s) {
            os << ',' << csv::num(traj.alpha[s][k].real()) << ',' << csv::num(traj.alpha[s][k].imag());
        }
        os << '\n';
    }
}

}  // namespace qfb::cavity
