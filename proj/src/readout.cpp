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

#include "qfb/readout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "qfb/csv.hpp"
#include "qfb/error.hpp"

namespace qfb::readout {

namespace {

double overlap(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

void validate_window(double t_meas, const Window& w) {
    require(t_meas > 0.0, "t_meas must be positive");
    require(w.start >= 0.0 && w.length > 0.0 && w.end() <= t_meas + 1e-12,
            "integration window must lie inside the measurement pulse");
}

/// Target of a single jump out of `level`.
std::size_t jump_target(std::size_t level, const TransitionRates& rates, CounterRng& rng) {
    if (level == 1) {
        const double escape = rates.escape_rate(1);
        return rng.uniform() * escape < rates.g10 ? 0 : 2;
    }
    return 1;
}

/// Probability that a Gaussian shot with mean `m` digitizes to H.
double prob_high(double m, double sigma, Threshold th, Polarity polarity) {
    const double z = (th.v_th - m) / (sigma * std::sqrt(2.0));
    return polarity == Polarity::kZeroHigh ? 0.5 * std::erfc(z) : 0.5 * std::erfc(-z);
}

}  // namespace

void ShotModel::validate() const {
    require(sigma > 0.0, "sigma must be positive");
    validate_window(t_meas, window);
    for (double m : mu) {
        require(std::isfinite(m), "level means must be finite");
    }
}

ShotModel ShotModel::binary(double mu0, double mu1, double sigma, double t_meas, Window window) {
    ShotModel model;
    model.mu = {mu0, mu1, mu1};
    model.sigma = sigma;
    model.t_meas = t_meas;
    model.window = window;
    model.validate();
    return model;
}

Shot generate_shot(std::size_t true_state, const ShotModel& model, const TransitionRates& rates, CounterRng& rng) {
    require(true_state < 3, "generate_shot: level index out of range");
    Shot shot;
    shot.pre_state = true_state;
    shot.post_state = true_state;

    double frac_pre = 1.0;
    const double t_jump = rng.exponential(rates.escape_rate(true_state));
    if (t_jump < model.t_meas) {
        shot.post_state = jump_target(true_state, rates, rng);
        const Window& w = model.window;
        frac_pre = overlap(0.0, t_jump, w.start, w.end()) / w.length;
    }
    const double mean = frac_pre * model.mu[shot.pre_state] + (1.0 - frac_pre) * model.mu[shot.post_state];
    shot.voltage = mean + model.sigma * rng.normal();
    return shot;
}

void RegisterShotModel::validate() const {
    require(sigma > 0.0, "sigma must be positive");
    validate_window(t_meas, window);
}

RegisterShot generate_register_shot(std::array<std::size_t, 2> states, const RegisterShotModel& model,
                                    const std::array<TransitionRates, 2>& rates, CounterRng& rng) {
    std::array<double, 2> t_jump{};
    std::array<std::size_t, 2> post = states;
    for (std::size_t q = 0; q < 2; ++q) {
        require(states[q] < 3, "generate_register_shot: level index out of range");
        t_jump[q] = rng.exponential(rates[q].escape_rate(states[q]));
        if (t_jump[q] < model.t_meas) {
            post[q] = jump_target(states[q], rates[q], rng);
        } else {
            t_jump[q] = std::numeric_limits<double>::infinity();
        }
    }

    // Piecewise-constant register state across the window.
    const Window& w = model.window;
    std::array<double, 4> cuts{w.start, std::clamp(t_jump[0], w.start, w.end()),
                               std::clamp(t_jump[1], w.start, w.end()), w.end()};
    std::sort(cuts.begin(), cuts.end());
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double dt = cuts[k + 1] - cuts[k];
        if (dt <= 0.0) {
            continue;
        }
        const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
        const std::size_t a = mid < t_jump[0] ? states[0] : post[0];
        const std::size_t b = mid < t_jump[1] ? states[1] : post[1];
        integral += dt * model.mean(a, b);
    }
    RegisterShot shot;
    shot.voltage = integral / w.length + model.sigma * rng.normal();
    shot.post = post;
    return shot;
}

Outcome digitize(double v, Threshold th, Polarity polarity) {
    if (polarity == Polarity::kZeroHigh) {
        return v > th.v_th ? Outcome::kH : Outcome::kL;
    }
    return v < th.v_th ? Outcome::kH : Outcome::kL;
}

ThresholdChoice optimal_threshold(std::span<const double> shots_prep0, std::span<const double> shots_prep1) {
    require(!shots_prep0.empty() && !shots_prep1.empty(), "optimal_threshold: both shot sets must be non-empty");
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(shots_prep0.size() + shots_prep1.size());
    for (double v : shots_prep0) pooled.emplace_back(v, 0);
    for (double v : shots_prep1) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end());

    const double n0 = static_cast<double>(shots_prep0.size());
    const double n1 = static_cast<double>(shots_prep1.size());
    constexpr double kTieTol = 1e-12;

    std::size_t c0 = 0;
    std::size_t c1 = 0;
    double best = -1.0;
    double best_signed = 0.0;
    double run_first = pooled.front().first;
    double run_last = pooled.front().first;
    bool in_run = false;
    for (std::size_t k = 0; k + 1 < pooled.size(); ++k) {
        (pooled[k].second == 0 ? c0 : c1) += 1;
        if (pooled[k].first == pooled[k + 1].first) {
            continue;
        }
        const double candidate = 0.5 * (pooled[k].first + pooled[k + 1].first);
        const double diff = static_cast<double>(c0) / n0 - static_cast<double>(c1) / n1;
        const double mag = std::abs(diff);
        if (mag > best + kTieTol) {
            best = mag;
            best_signed = diff;
            run_first = run_last = candidate;
            in_run = true;
        } else if (in_run && std::abs(mag - best) <= kTieTol) {
            run_last = candidate;
        } else {
            in_run = false;
        }
    }

    ThresholdChoice choice;
    if (best < 0.0) {
        // Every sample has the same value.
        choice.threshold.v_th = pooled.front().first;
        choice.contrast = 0.0;
        return choice;
    }
    choice.threshold.v_th = 0.5 * (run_first + run_last);
    choice.contrast = best;
    // CDF_0 below CDF_1 means the |0> preparation sits at higher voltage.
    choice.polarity = best_signed <= 0.0 ? Polarity::kZeroHigh : Polarity::kZeroLow;
    return choice;
}

double contrast_at(std::span<const double> shots_prep0, std::span<const double> shots_prep1, Threshold th,
                   Polarity polarity) {
    require(!shots_prep0.empty() && !shots_prep1.empty(), "contrast_at: both shot sets must be non-empty");
    auto high_fraction = [&](std::span<const double> shots) {
        std::size_t h = 0;
        for (double v : shots) {
            h += digitize(v, th, polarity) == Outcome::kH ? 1 : 0;
        }
        return static_cast<double>(h) / static_cast<double>(shots.size());
    };
    return high_fraction(shots_prep0) - high_fraction(shots_prep1);
}

ReadoutErrorModel::ReadoutErrorModel() = default;

double ReadoutErrorModel::p(Outcome m, std::size_t i, std::size_t j) const {
    return p_.at(m == Outcome::kH ? 0 : 1).at(i).at(j);
}

void ReadoutErrorModel::set(Outcome m, std::size_t i, std::size_t j, double value) {
    p_.at(m == Outcome::kH ? 0 : 1).at(i).at(j) = value;
}

double ReadoutErrorModel::transition(std::size_t i, std::size_t j) const {
    return p(Outcome::kH, i, j) + p(Outcome::kL, i, j);
}

double ReadoutErrorModel::outcome_probability(Outcome m, std::size_t i) const {
    return p(m, i, 0) + p(m, i, 1) + p(m, i, 2);
}

ReadoutErrorModel ReadoutErrorModel::ideal() {
    ReadoutErrorModel model;
    model.set(Outcome::kH, 0, 0, 1.0);
    model.set(Outcome::kL, 1, 1, 1.0);
    model.set(Outcome::kL, 2, 2, 1.0);
    return model;
}

void ReadoutErrorModel::validate(double tol) const {
    for (std::size_t i = 0; i < 3; ++i) {
        double total = 0.0;
        for (int m = 0; m < 2; ++m) {
            for (std::size_t j = 0; j < 3; ++j) {
                const double v = p_[m][i][j];
                require(v >= -tol && v <= 1.0 + tol, "readout error probability outside [0,1]");
                total += v;
            }
        }
        require(std::abs(total - 1.0) <= tol, "readout error model row does not sum to 1");
    }
}

ReadoutErrorModel analytic_error_model(const ShotModel& model, const TransitionRates& rates, Threshold th,
                                       Polarity polarity) {
    model.validate();
    rates.validate();
    ReadoutErrorModel out;
    const Window& w = model.window;
    const double t_end = model.t_meas;
    auto add = [&](std::size_t i, std::size_t j, double weight, double mean) {
        const double ph = prob_high(mean, model.sigma, th, polarity);
        out.set(Outcome::kH, i, j, out.p(Outcome::kH, i, j) + weight * ph);
        out.set(Outcome::kL, i, j, out.p(Outcome::kL, i, j) + weight * (1.0 - ph));
    };

    for (std::size_t i = 0; i < 3; ++i) {
        const double escape = rates.escape_rate(i);
        add(i, i, std::exp(-escape * t_end), model.mu[i]);
        for (std::size_t j = 0; j < 3; ++j) {
            const double r = rates.rate(i, j);
            if (r <= 0.0) {
                continue;
            }
            // Jump before the window: the whole window reads level j.
            add(i, j, r / escape * (1.0 - std::exp(-escape * w.start)), model.mu[j]);
            // Jump after the window: the whole window reads level i.
            add(i, j, r / escape * (std::exp(-escape * w.end()) - std::exp(-escape * t_end)), model.mu[i]);
            // Jump inside the window: composite Simpson over the jump time.
            constexpr int kIntervals = 2000;
            const double h = w.length / kIntervals;
            for (int k = 0; k <= kIntervals; ++k) {
                const double t = w.start + k * h;
                const double frac_pre = (t - w.start) / w.length;
                const double mean = frac_pre * model.mu[i] + (1.0 - frac_pre) * model.mu[j];
                const double simpson = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
                add(i, j, simpson * h / 3.0 * r * std::exp(-escape * t), mean);
            }
        }
    }
    return out;
}

void ErrorModelCounter::add(Outcome m, std::size_t pre, std::size_t post) {
    ++n_.at(m == Outcome::kH ? 0 : 1).at(pre).at(post);
}

ErrorModelCounter& ErrorModelCounter::operator+=(const ErrorModelCounter& other) {
    for (int m = 0; m < 2; ++m)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) n_[m][i][j] += other.n_[m][i][j];
    return *this;
}

std::size_t ErrorModelCounter::count(Outcome m, std::size_t pre, std::size_t post) const {
    return n_.at(m == Outcome::kH ? 0 : 1).at(pre).at(post);
}

std::size_t ErrorModelCounter::prepared(std::size_t pre) const {
    std::size_t total = 0;
    for (int m = 0; m < 2; ++m)
        for (int j = 0; j < 3; ++j) total += n_[m].at(pre)[j];
    return total;
}

ReadoutErrorModel ErrorModelCounter::estimate() const {
    ReadoutErrorModel out;
    for (std::size_t i = 0; i < 3; ++i) {
        const std::size_t total = prepared(i);
        if (total == 0) {
            continue;
        }
        for (std::size_t j = 0; j < 3; ++j) {
            out.set(Outcome::kH, i, j, static_cast<double>(n_[0][i][j]) / static_cast<double>(total));
            out.set(Outcome::kL, i, j, static_cast<double>(n_[1][i][j]) / static_cast<double>(total));
        }
    }
    return out;
}

PostselectedShots postselect_ground(std::span<const std::pair<Outcome, double>> pairs) {
    require(!pairs.empty(), "postselect_ground: empty shot list");
    PostselectedShots out;
    for (const auto& [m_a, v_b] : pairs) {
        if (m_a == Outcome::kH) {
            out.kept.push_back(v_b);
        }
    }
    out.kept_fraction = static_cast<double>(out.kept.size()) / static_cast<double>(pairs.size());
    out.empty = out.kept.empty();
    return out;
}

QndCorrelations qnd_correlations(std::span<const std::pair<Outcome, Outcome>> shot_pairs) {
    require(!shot_pairs.empty(), "qnd_correlations: empty shot list");
    std::size_t hh = 0;
    std::size_t ll = 0;
    QndCorrelations out;
    for (const auto& [m_b, m_c] : shot_pairs) {
        if (m_b == Outcome::kH) {
            ++out.n_h;
            hh += m_c == Outcome::kH ? 1 : 0;
        } else {
            ++out.n_l;
            ll += m_c == Outcome::kL ? 1 : 0;
        }
    }
    if (out.n_h > 0) out.p_h_given_h = static_cast<double>(hh) / static_cast<double>(out.n_h);
    if (out.n_l > 0) out.p_l_given_l = static_cast<double>(ll) / static_cast<double>(out.n_l);
    return out;
}

void write_histogram_csv(std::ostream& os, std::span<const double> shots_prep0, std::span<const double> shots_prep1,
                         std::size_t bins) {
    require(bins > 0, "histogram needs at least one bin");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto set : {shots_prep0, shots_prep1}) {
        for (double v : set) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (!(hi > lo)) {
        hi = lo + 1.0;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> c0(bins, 0);
    std::vector<std::size_t> c1(bins, 0);
    auto bin_of = [&](double v) {
        const auto b = static_cast<std::size_t>((v - lo) / width);
        return std::min(b, bins - 1);
    };
    for (double v : shots_prep0) ++c0[bin_of(v)];
    for (double v : shots_prep1) ++c1[bin_of(v)];

    os << "bin_left,bin_right,count_prep0,count_prep1\n";
    for (std::size_t b = 0; b < bins; ++b) {
        csv::row(os, {csv::num(lo + b * width), csv::num(lo + (b + 1) * width), std::to_string(c0[b]),
                      std::to_string(c1[b])});
    }
}

}  // namespace qfb::readout
