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

#include <algorithm>
#include <numbers>
#include <sstream>

#include "experiments.hpp"
#include "qfb/csv.hpp"
#include "qfb/random.hpp"

namespace qfb::app {

using config::Block;
using config::Range;

namespace {

std::string polarity_name(readout::Polarity p) {
    return p == readout::Polarity::kZeroHigh ? "zero_high" : "zero_low";
}

}  // namespace

void readout_bench(Block& root, Context& ctx) {
    const std::size_t n_shots = read_shots(root, "n_shots", 500000);
    const auto cfg = read_register(root.block("register"));
    Block rabi_b = root.block("rabi");
    const auto n_angles = static_cast<std::size_t>(rabi_b.integer_or("angles", 25, 3, 10000));
    const std::size_t shots_per_angle = read_shots(rabi_b, "shots_per_angle", 20000);
    rabi_b.finish();
    Block hist_b = root.block("histogram");
    const auto bins = static_cast<std::size_t>(hist_b.integer_or("bins", 100, 1, 100000));
    const auto scan_points = static_cast<std::size_t>(hist_b.integer_or("scan_points", 201, 2, 100000));
    hist_b.finish();
    root.finish();

    const std::uint64_t seed = ctx.seed();
    const auto bench = readout::run_contrast_bench(cfg, n_shots, derive_seed(seed, 0), ctx.threads());
    const auto th = bench.unconditioned.threshold;
    const auto pol = bench.unconditioned.polarity;
    const auto rabi =
        readout::run_rabi_bench(cfg, n_angles, shots_per_angle, th, pol, derive_seed(seed, 1), ctx.threads());

    std::ostringstream hist;
    readout::write_histogram_csv(hist, bench.vb_prep0, bench.vb_prep1, bins);
    ctx.write("histogram.csv", hist.str());
    std::ostringstream hist_kept;
    readout::write_histogram_csv(hist_kept, bench.vb_prep0_kept, bench.vb_prep1_kept, bins);
    ctx.write("histogram_postselected.csv", hist_kept.str());

    double lo = std::min(*std::min_element(bench.vb_prep0.begin(), bench.vb_prep0.end()),
                         *std::min_element(bench.vb_prep1.begin(), bench.vb_prep1.end()));
    double hi = std::max(*std::max_element(bench.vb_prep0.begin(), bench.vb_prep0.end()),
                         *std::max_element(bench.vb_prep1.begin(), bench.vb_prep1.end()));
    std::ostringstream scan;
    scan << "v_th,contrast,contrast_postselected\n";
    for (std::size_t k = 0; k < scan_points; ++k) {
        const readout::Threshold t{lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(scan_points - 1)};
        scan << csv::num(t.v_th) << ',' << csv::num(readout::contrast_at(bench.vb_prep0, bench.vb_prep1, t, pol))
             << ',' << csv::num(readout::contrast_at(bench.vb_prep0_kept, bench.vb_prep1_kept, t, pol)) << '\n';
    }
    ctx.write("threshold_scan.csv", scan.str());

    std::ostringstream rabi_csv;
    rabi_csv << "theta_rad,p_high,p_high_postselected\n";
    for (std::size_t k = 0; k < rabi.angles.size(); ++k) {
        rabi_csv << csv::num(rabi.angles[k]) << ',' << csv::num(rabi.p_high[k]) << ','
                 << csv::num(rabi.p_high_postselected[k]) << '\n';
    }
    ctx.write("rabi.csv", rabi_csv.str());

    nlohmann::ordered_json j;
    j["n_shots"] = n_shots;
    j["threshold"] = th.v_th;
    j["polarity"] = polarity_name(pol);
    j["contrast"] = bench.unconditioned.contrast;
    j["contrast_postselected"] = bench.contrast_postselected;
    j["contrast_postselected_optimum"] = bench.postselected_optimum.contrast;
    j["threshold_postselected_optimum"] = bench.postselected_optimum.threshold.v_th;
    j["kept_fraction"] = bench.kept_fraction;
    j["error_prep0"] = bench.error_prep0;
    j["error_prep1"] = bench.error_prep1;
    j["error_prep0_postselected"] = bench.error_prep0_kept;
    j["error_prep1_postselected"] = bench.error_prep1_kept;
    j["rabi_amplitude"] = rabi.amplitude;
    j["rabi_amplitude_postselected"] = rabi.amplitude_postselected;
    ctx.write("summary.json", j.dump(2) + "\n");
}

void qnd_bench(Block& root, Context& ctx) {
    const std::size_t n_shots = read_shots(root, "n_shots", 200000);
    const auto cfg = read_register(root.block("register"));
    Block q = root.block("qnd");
    const auto taus = q.numbers("tau_us", Range::non_negative());
    const auto rotations = q.numbers_or("rotations_rad", {0.0, std::numbers::pi});
    const bool fixed = q.has("threshold");
    readout::Threshold th{q.number_or("threshold", 0.0)};
    auto pol = read_polarity(q, "polarity");
    const std::size_t calibration_shots = read_shots(q, "calibration_shots", 100000);
    q.finish();
    root.finish();

    if (!fixed) {
        const auto bench = readout::run_contrast_bench(cfg, calibration_shots, derive_seed(ctx.seed(), 0), ctx.threads());
        th = bench.unconditioned.threshold;
        pol = bench.unconditioned.polarity;
    }

    std::ostringstream os;
    os << "tau_us,theta_rad,p_h_given_h,p_l_given_l,n_h,n_l,threshold\n";
    std::uint64_t point = 1;
    for (double tau : taus) {
        for (double rot : rotations) {
            const auto r = readout::run_qnd_bench(cfg, tau, rot, n_shots, th, pol, derive_seed(ctx.seed(), point++),
                                                  ctx.threads());
            const auto& c = r.correlations;
            os << csv::num(tau) << ',' << csv::num(rot) << ',' << (c.p_h_given_h ? csv::num(*c.p_h_given_h) : "")
               << ',' << (c.p_l_given_l ? csv::num(*c.p_l_given_l) : "") << ',' << c.n_h << ',' << c.n_l << ','
               << csv::num(th.v_th) << '\n';
        }
    }
    ctx.write("qnd.csv", os.str());
}

}  // namespace qfb::app
