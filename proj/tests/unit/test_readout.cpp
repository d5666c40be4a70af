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

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qfb/error.hpp"
#include "qfb/readout.hpp"
#include "qfb/readout_bench.hpp"

using namespace qfb;
using namespace qfb::readout;

namespace {

const TransitionRates kRates = TransitionRates::from_inverse(324.0, 50.0, 111.0, 20.0);

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(H) for a Gaussian of mean m with declared-|0> high.
double high(double m, double sigma, double th) { return 1.0 - phi((th - m) / sigma); }

ShotModel reset_model() {
    ShotModel m;
    m.mu = {1.0, -1.0, -1.0};
    m.sigma = 0.377;
    m.t_meas = 0.4;
    m.window = {0.2, 0.2};
    return m;
}

// Midpoint quadrature over the jump time of a level-1 shot ending in `to`.
double jump_high_probability(const ShotModel& m, double g_to, double g_total, std::size_t to, double th) {
    const int n = 200000;
    const double h = m.t_meas / n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * h;
        const double pre = std::clamp(t - m.window.start, 0.0, m.window.length) / m.window.length;
        const double mean = pre * m.mu[1] + (1.0 - pre) * m.mu[to];
        acc += g_to * std::exp(-g_total * t) * high(mean, m.sigma, th) * h;
    }
    return acc;
}

}  // namespace

TEST_CASE("digitize puts ties on L for both polarities") {
    CHECK(digitize(0.1, {0.0}, Polarity::kZeroHigh) == Outcome::kH);
    CHECK(digitize(0.0, {0.0}, Polarity::kZeroHigh) == Outcome::kL);
    CHECK(digitize(-0.1, {0.0}, Polarity::kZeroLow) == Outcome::kH);
    CHECK(digitize(0.0, {0.0}, Polarity::kZeroLow) == Outcome::kL);
}

TEST_CASE("error model without transitions is two Gaussian tails") {
    ShotModel m = reset_model();
    const TransitionRates none{};
    const auto err = analytic_error_model(m, none, {0.1}, Polarity::kZeroHigh);
    CHECK(err.p(Outcome::kL, 0, 0) == doctest::Approx(phi((0.1 - 1.0) / 0.377)).epsilon(1e-10));
    CHECK(err.p(Outcome::kH, 1, 1) == doctest::Approx(high(-1.0, 0.377, 0.1)).epsilon(1e-10));
    CHECK(err.transition(1, 0) == doctest::Approx(0.0));
    err.validate();
}

TEST_CASE("error model with decay matches a jump-time quadrature") {
    const ShotModel m = reset_model();
    const auto err = analytic_error_model(m, kRates, {0.0}, Polarity::kZeroHigh);
    const double g = kRates.g10 + kRates.g12;
    CHECK(err.p(Outcome::kH, 1, 0) == doctest::Approx(jump_high_probability(m, kRates.g10, g, 0, 0.0)).epsilon(1e-6));
    CHECK(err.p(Outcome::kH, 1, 2) == doctest::Approx(jump_high_probability(m, kRates.g12, g, 2, 0.0)).epsilon(1e-6));
    CHECK(err.p(Outcome::kH, 1, 1) ==
          doctest::Approx(std::exp(-g * m.t_meas) * high(-1.0, m.sigma, 0.0)).epsilon(1e-9));
    CHECK(err.transition(1, 2) == doctest::Approx(kRates.g12 / g * (1.0 - std::exp(-g * m.t_meas))).epsilon(1e-9));
}

TEST_CASE("Monte-Carlo shots reproduce the analytic error model") {
    const ShotModel m = reset_model();
    const auto err = analytic_error_model(m, kRates, {0.0}, Polarity::kZeroHigh);
    ErrorModelCounter counter;
    const std::size_t n = 200000;
    for (std::size_t level = 0; level < 3; ++level) {
        for (std::size_t i = 0; i < n; ++i) {
            CounterRng rng(21, level * n + i, StreamTag::kReadout);
            const auto shot = generate_shot(level, m, kRates, rng);
            counter.add(digitize(shot.voltage, {0.0}, Polarity::kZeroHigh), shot.pre_state, shot.post_state);
        }
    }
    const auto est = counter.estimate();
    for (auto outcome : {Outcome::kH, Outcome::kL}) {
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) {
                const double p = err.p(outcome, i, j);
                CHECK(std::abs(est.p(outcome, i, j) - p) < 5.0 * std::sqrt(p * (1 - p) / n) + 1e-9);
            }
        }
    }
}

TEST_CASE("optimal threshold separates two clean clusters") {
    const std::vector<double> zero{0.9, 1.0, 1.1, 1.2};
    const std::vector<double> one{-1.0, -0.8, -1.2, 0.1};
    const auto c = optimal_threshold(zero, one);
    CHECK(c.contrast == doctest::Approx(1.0));
    CHECK(c.polarity == Polarity::kZeroHigh);
    CHECK(c.threshold.v_th > 0.1);
    CHECK(c.threshold.v_th < 0.9);
    const auto flipped = optimal_threshold(one, zero);
    CHECK(flipped.polarity == Polarity::kZeroLow);
    CHECK(contrast_at(zero, one, {0.0}, Polarity::kZeroHigh) == doctest::Approx(0.75));
}

TEST_CASE("Gaussian clusters reach the erf contrast") {
    std::vector<double> zero;
    std::vector<double> one;
    CounterRng rng(3, 0);
    for (int i = 0; i < 200000; ++i) {
        zero.push_back(rng.normal(1.0, 0.5));
        one.push_back(rng.normal(-1.0, 0.5));
    }
    const auto c = optimal_threshold(zero, one);
    CHECK(c.contrast == doctest::Approx(1.0 - 2.0 * phi(-2.0)).epsilon(0.003));
    CHECK(std::abs(c.threshold.v_th) < 0.05);
}

TEST_CASE("postselection keeps shots after an H result") {
    const std::vector<std::pair<Outcome, double>> pairs{
        {Outcome::kH, 0.5}, {Outcome::kL, 0.7}, {Outcome::kH, -0.2}, {Outcome::kL, 0.1}};
    const auto kept = postselect_ground(pairs);
    CHECK_FALSE(kept.empty);
    CHECK(kept.kept == std::vector<double>{0.5, -0.2});
    CHECK(kept.kept_fraction == doctest::Approx(0.5));
    const std::vector<std::pair<Outcome, double>> none{{Outcome::kL, 0.5}};
    CHECK(postselect_ground(none).empty);
}

TEST_CASE("repeated-measurement correlations count conditional agreement") {
    using O = Outcome;
    const std::vector<std::pair<O, O>> pairs{{O::kH, O::kH}, {O::kH, O::kL}, {O::kL, O::kL}, {O::kH, O::kH}};
    const auto c = qnd_correlations(pairs);
    CHECK(*c.p_h_given_h == doctest::Approx(2.0 / 3.0));
    CHECK(*c.p_l_given_l == doctest::Approx(1.0));
    CHECK(c.n_h == 3);
    CHECK(c.n_l == 1);
    const std::vector<std::pair<O, O>> only_h{{O::kH, O::kL}};
    CHECK_FALSE(qnd_correlations(only_h).p_l_given_l.has_value());
    CHECK_THROWS_AS(qnd_correlations({}), ArgumentError);
}

TEST_CASE("histogram counts every shot once") {
    const std::vector<double> a{0.0, 0.5, 1.0};
    const std::vector<double> b{0.25, 0.75};
    std::ostringstream os;
    write_histogram_csv(os, a, b, 4);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "bin_left,bin_right,count_prep0,count_prep1");
    int rows = 0;
    long c0 = 0;
    long c1 = 0;
    while (std::getline(in, line)) {
        ++rows;
        std::istringstream cells(line);
        std::string l;
        std::string r;
        std::string x;
        std::string y;
        std::getline(cells, l, ',');
        std::getline(cells, r, ',');
        std::getline(cells, x, ',');
        std::getline(cells, y, ',');
        c0 += std::stol(x);
        c1 += std::stol(y);
    }
    CHECK(rows == 4);
    CHECK(c0 == 3);
    CHECK(c1 == 2);
}

TEST_CASE("invalid shot models are rejected") {
    ShotModel m = reset_model();
    m.window = {0.3, 0.2};
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    m = reset_model();
    m.sigma = 0.0;
    CHECK_THROWS_AS(m.validate(), ArgumentError);
    ReadoutErrorModel bad;
    bad.set(Outcome::kH, 0, 0, 0.7);
    bad.set(Outcome::kL, 0, 0, 0.7);
    CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("register benches do not depend on the thread count") {
    const auto cfg = RegisterBenchConfig::reference();
    const auto a = run_contrast_bench(cfg, 9000, 5, 1);
    const auto b = run_contrast_bench(cfg, 9000, 5, 4);
    CHECK(a.vb_prep0 == b.vb_prep0);
    CHECK(a.vb_prep1_kept == b.vb_prep1_kept);
    CHECK(a.unconditioned.contrast == b.unconditioned.contrast);
    const auto qa = run_qnd_bench(cfg, 1.0, 3.14159, 9000, a.unconditioned.threshold, a.unconditioned.polarity, 2, 1);
    const auto qb = run_qnd_bench(cfg, 1.0, 3.14159, 9000, a.unconditioned.threshold, a.unconditioned.polarity, 2, 3);
    CHECK(qa.correlations.n_l == qb.correlations.n_l);
    CHECK(*qa.correlations.p_l_given_l == *qb.correlations.p_l_given_l);
}

TEST_CASE("reference register gives the expected steady excitation") {
    const auto cfg = RegisterBenchConfig::reference();
    for (const auto& r : cfg.rates) {
        const auto ss = dynamics::steady_state(r);
        CHECK(ss.p1 + ss.p2 == doctest::Approx(0.047).epsilon(1e-6));
    }
}
