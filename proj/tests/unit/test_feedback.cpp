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
#include <numbers>
#include <sstream>

#include "qfb/error.hpp"
#include "qfb/feedback.hpp"

using namespace qfb;
using namespace qfb::feedback;
using readout::Outcome;

namespace {

const TransitionRates kRates = TransitionRates::from_inverse(324.0, 50.0, 111.0, 20.0);

ShotModel sharp_model() {
    ShotModel m;
    m.mu = {1.0, -1.0, -1.0};
    m.sigma = 1e-3;
    m.t_meas = 0.4;
    m.window = {0.0, 0.4};
    return m;
}

FeedbackProtocol perfect(Target target, int rounds = 1) {
    FeedbackProtocol p;
    p.target = target;
    p.rounds = rounds;
    p.pi_error = 0.0;
    p.timing = LoopTiming::with_latency(2.4);
    return p;
}

}  // namespace

TEST_CASE("error budget follows the first-order sum") {
    ReadoutErrorModel err;
    err.set(Outcome::kH, 0, 0, 0.99);
    err.set(Outcome::kL, 0, 0, 0.01);
    err.set(Outcome::kH, 1, 1, 0.02);
    err.set(Outcome::kL, 1, 1, 0.90);
    err.set(Outcome::kH, 1, 0, 0.03);
    err.set(Outcome::kL, 1, 0, 0.01);
    err.set(Outcome::kL, 1, 2, 0.04);
    err.set(Outcome::kL, 2, 2, 1.0);
    const auto t = LoopTiming::with_latency(2.4);
    const double tau = 2.4;
    const double p0 = 0.01 + 0.0 + kRates.g01 * tau;
    const double ppi = 0.02 + 0.01 + 0.04 + (kRates.g10 + kRates.g12) * tau;
    CHECK(predict_reset_error(0.0, kRates, err, t, 1) == doctest::Approx(p0).epsilon(1e-12));
    CHECK(predict_reset_error(std::numbers::pi, kRates, err, t, 1) == doctest::Approx(ppi).epsilon(1e-12));
    CHECK(predict_reset_error(std::numbers::pi, kRates, err, t, 2) ==
          doctest::Approx(p0 + 0.04 + kRates.g12 * tau).epsilon(1e-12));
    const double theta = 1.1;
    const double c2 = std::pow(std::cos(theta / 2), 2);
    CHECK(predict_reset_error(theta, kRates, err, t, 1) == doctest::Approx(c2 * p0 + (1 - c2) * ppi).epsilon(1e-12));
}

TEST_CASE("ideal readout and no decay reset perfectly") {
    const TransitionRates none{};
    const RunOptions opts{3, 2, 0};
    for (double theta : {0.0, 1.0, std::numbers::pi}) {
        const auto to0 = run_reset(theta_state(theta), perfect(Target::kGround), sharp_model(), none, 5000, opts);
        CHECK(to0.p_err == 0.0);
        const auto to1 = run_reset(theta_state(theta), perfect(Target::kExcited), sharp_model(), none, 5000, opts);
        CHECK(to1.p_err == 0.0);
        CHECK(to1.p_level[1] == 1.0);
    }
}

TEST_CASE("without a protocol the prepared state is returned") {
    const auto r = run_reset(theta_state(std::numbers::pi / 2), std::nullopt, sharp_model(), kRates, 40000, {1, 1, 0});
    CHECK(r.p_level[1] == doctest::Approx(0.5).epsilon(0.03));
    CHECK(r.p_err == doctest::Approx(r.p_level[1] + r.p_level[2]));
}

TEST_CASE("two rounds clear errors the first round leaves") {
    ShotModel m = sharp_model();
    m.sigma = 0.6;
    auto one = perfect(Target::kGround, 1);
    auto two = perfect(Target::kGround, 2);
    const RunOptions opts{9, 1, 0};
    const auto r1 = run_reset(theta_state(std::numbers::pi), one, m, kRates, 40000, opts);
    const auto r2 = run_reset(theta_state(std::numbers::pi), two, m, kRates, 40000, opts);
    CHECK(r2.p_err < r1.p_err);
    REQUIRE(r2.rounds.size() == 2);
    CHECK(r2.rounds[0].n_high + r2.rounds[0].n_low == 40000);
}

TEST_CASE("reset Monte Carlo is independent of thread count") {
    ShotModel m = sharp_model();
    m.sigma = 0.377;
    m.window = {0.2, 0.2};
    auto p = perfect(Target::kGround, 2);
    p.pi_error = 0.005;
    p.jitter_us = 0.1;
    const auto a = run_reset(theta_state(2.0), p, m, kRates, 20000, {4, 1, 100});
    const auto b = run_reset(theta_state(2.0), p, m, kRates, 20000, {4, 7, 100});
    CHECK(a.p_err == b.p_err);
    CHECK(a.p_level == b.p_level);
    CHECK(a.rounds[1].n_pulses == b.rounds[1].n_pulses);
}

TEST_CASE("repeated initialization limits") {
    const TransitionRates none{};
    const RunOptions opts{1, 2, 0};
    const auto no_fb = run_repeated_init(0.0, Algorithm::kLeaveExcited, std::nullopt, none, sharp_model(), 1600, opts);
    // The algorithm pulse alternates the idle qubit between |1> and |0>.
    CHECK(no_fb.p_err == doctest::Approx(0.5));
    const auto fb = run_repeated_init(0.0, Algorithm::kLeaveExcited, perfect(Target::kGround), none, sharp_model(),
                                      1600, opts);
    CHECK(fb.p_err == 0.0);
    const auto idle = run_repeated_init(0.0, Algorithm::kLeaveGround, std::nullopt, none, sharp_model(), 1600, opts);
    CHECK(idle.p_err == 0.0);
}

TEST_CASE("repeated initialization is independent of thread count") {
    ShotModel m = sharp_model();
    m.sigma = 0.377;
    auto p = perfect(Target::kGround, 3);
    p.recover_12 = true;
    const auto a = run_repeated_init(1.0, Algorithm::kLeaveExcited, p, kRates, m, 3200, {8, 1, 0});
    const auto b = run_repeated_init(1.0, Algorithm::kLeaveExcited, p, kRates, m, 3200, {8, 5, 0});
    CHECK(a.p_err == b.p_err);
    CHECK(a.p_err_stderr == b.p_err_stderr);
}

TEST_CASE("protocol labels and timing") {
    auto p = perfect(Target::kGround, 3);
    p.recover_12 = true;
    CHECK(p.id() == "3xFb0+R12");
    CHECK(perfect(Target::kExcited).id() == "Fb1");
    CHECK(LoopTiming::with_latency(0.11).tau_fb() == doctest::Approx(0.11));
    CHECK(ControllerProfile::by_name("adwin").tau_fb == doctest::Approx(2.4));
    CHECK_THROWS_AS(ControllerProfile::by_name("fpga9000"), ArgumentError);
    p.rounds = 0;
    CHECK_THROWS_AS(p.validate(), ArgumentError);
}

TEST_CASE("initial states are classical mixtures") {
    const auto s = theta_state(std::numbers::pi / 3);
    CHECK(s.p0 == doctest::Approx(0.75));
    CHECK(s.p1 == doctest::Approx(0.25));
}

TEST_CASE("sweep rows carry the protocol and extra columns") {
    std::ostringstream os;
    write_sweep_header(os, "theta_rad", {"p_ground"});
    write_sweep_row(os, 0.5, 0.01, 0.001, "Fb0", {"0.99"});
    CHECK(os.str() == "theta_rad,p_err,p_err_stderr,protocol_id,p_ground\n0.5,0.01,0.001,Fb0,0.99\n");
}
