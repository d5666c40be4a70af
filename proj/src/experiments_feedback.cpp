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

#include <cmath>
#include <numbers>
#include <sstream>

#include "experiments.hpp"
#include "qfb/csv.hpp"
#include "qfb/error.hpp"
#include "qfb/random.hpp"

namespace qfb::app {

using config::Block;
using config::Range;

void reset_sweep(Block& root, Context& ctx) {
    const std::size_t n_shots = read_shots(root, "n_shots", 100000);
    const auto rates = read_rates(root.block("rates"));
    const auto model = read_shot_model(root.block("shot_model"));
    const auto base = read_feedback(root.block("feedback"), model);
    Block sweep = root.block("sweep");
    const auto n_theta = static_cast<std::size_t>(sweep.integer_or("theta_points", 21, 2, 100001));
    const auto ids = sweep.texts_or("protocols", {"none", "Fb0", "Fb1", "2xFb0"});
    sweep.finish();
    root.finish();

    std::vector<std::optional<feedback::FeedbackProtocol>> protocols;
    for (const auto& id : ids) {
        protocols.push_back(parse_protocol(id, base));
    }
    const auto err = readout::analytic_error_model(model, rates, base.threshold, base.polarity);

    std::ostringstream os;
    feedback::write_sweep_header(os, "theta_rad", {"p_ground", "p_excited", "p_second", "p_err_predicted"});
    for (std::size_t p = 0; p < protocols.size(); ++p) {
        const auto& proto = protocols[p];
        for (std::size_t k = 0; k < n_theta; ++k) {
            const double theta = std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_theta - 1);
            const feedback::RunOptions opts{derive_seed(ctx.seed(), p * n_theta + k), ctx.threads(), 0};
            const auto r = feedback::run_reset(feedback::theta_state(theta), proto, model, rates, n_shots, opts);
            std::string predicted;
            if (proto && proto->target == feedback::Target::kGround && !proto->recover_12) {
                predicted = csv::num(feedback::predict_reset_error(theta, rates, err, proto->timing, proto->rounds));
            }
            feedback::write_sweep_row(os, theta, r.p_err, r.p_err_stderr, proto ? proto->id() : "none",
                                      {csv::num(r.p_level[0]), csv::num(r.p_level[1]), csv::num(r.p_level[2]),
                                       predicted});
        }
    }
    ctx.write("reset_sweep.csv", os.str());
}

void repeated_init(Block& root, Context& ctx) {
    const std::size_t n_cycles = read_shots(root, "n_cycles", 200000);
    const auto rates = read_rates(root.block("rates"));
    const auto model = read_shot_model(root.block("shot_model"));
    const auto base = read_feedback(root.block("feedback"), model);
    Block sweep = root.block("sweep");
    const auto taus = sweep.numbers("tau_init_us", Range::non_negative());
    const auto ids = sweep.texts_or("protocols", {"none", "3xFb0+R12"});
    std::vector<std::string> algorithms = sweep.texts_or("algorithms", {"leave_ground", "leave_excited"});
    std::vector<std::string> variants = sweep.texts_or("rate_variants", {"measured"});
    const double algorithm_pi_error = sweep.number_or("algorithm_pi_error", 0.0, Range::probability());
    sweep.finish();
    root.finish();
    if (n_cycles < 100) {
        throw ConfigError("config: n_cycles: must be at least 100");
    }

    std::vector<std::optional<feedback::FeedbackProtocol>> protocols;
    for (const auto& id : ids) {
        protocols.push_back(parse_protocol(id, base));
    }
    for (const auto& a : algorithms) {
        if (a != "leave_ground" && a != "leave_excited") {
            throw ConfigError("config: sweep.algorithms: unknown value '" + a + "'");
        }
    }
    for (const auto& v : variants) {
        if (v != "measured" && v != "zero_excitation") {
            throw ConfigError("config: sweep.rate_variants: unknown value '" + v + "'");
        }
    }
    auto cold = rates;
    cold.g01 = 0.0;
    cold.g12 = 0.0;

    feedback::RepeatedInitSettings settings;
    settings.check_threshold = base.threshold;
    settings.check_polarity = base.polarity;
    settings.algorithm_pi_error = algorithm_pi_error;

    std::ostringstream os;
    feedback::write_sweep_header(os, "tau_init_us", {"algorithm", "rates_variant"});
    std::uint64_t point = 0;
    for (const auto& variant : variants) {
        const auto& r = variant == "measured" ? rates : cold;
        for (const auto& proto : protocols) {
            for (const auto& a : algorithms) {
                const auto alg = a == "leave_ground" ? feedback::Algorithm::kLeaveGround
                                                     : feedback::Algorithm::kLeaveExcited;
                for (double tau : taus) {
                    const feedback::RunOptions opts{derive_seed(ctx.seed(), point++), ctx.threads(), 0};
                    const auto res = feedback::run_repeated_init(tau, alg, proto, r, model, n_cycles, opts, settings);
                    feedback::write_sweep_row(os, tau, res.p_err, res.p_err_stderr, proto ? proto->id() : "none",
                                              {a, variant});
                }
            }
        }
    }
    ctx.write("repeated_init.csv", os.str());
}

}  // namespace qfb::app
