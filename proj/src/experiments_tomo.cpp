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

#include <sstream>

#include "experiments.hpp"
#include "qfb/error.hpp"
#include "qfb/tomography.hpp"

namespace qfb::app {

using config::Block;
using config::Range;

void tomo_demo(Block& root, Context& ctx) {
    Block t = root.block("tomography");
    const std::string set = t.text_or("set", "full", {"full", "minimal"});
    const auto beta_v = t.numbers_or("beta", {0.0, 1.0, 1.0, 1.0}, Range::any(), 4);
    if (beta_v.size() != 4) {
        throw ConfigError("config: tomography.beta: expected 4 entries (identity, A, B, BA)");
    }
    const std::size_t shots = read_shots(t, "shots_per_setting", 10000);
    const double noise_sd = t.number_or("noise_sd", 1.0, Range::positive());
    t.finish();

    Block st = root.block("state");
    const std::string kind = st.text_or("kind", "bell_odd", {"bell_odd", "bell_even", "plus_plus"});
    const double weight = st.number_or("pure_weight", 1.0, Range::probability());
    st.finish();

    tomo::MleOptions mle_opts;
    if (auto m = root.optional_block("mle")) {
        mle_opts.max_iterations = static_cast<int>(m->integer_or("max_iterations", mle_opts.max_iterations, 1, 10000000));
        mle_opts.gradient_tol = m->number_or("gradient_tol", mle_opts.gradient_tol, Range::positive());
        m->finish();
    }
    root.finish();

    const cavity::BetaCoefficients beta{beta_v[0], beta_v[1], beta_v[2], beta_v[3]};
    const auto settings = set == "full" ? tomo::TomographySettings::full(beta, shots, noise_sd)
                                        : tomo::TomographySettings::minimal(beta, shots, noise_sd);
    if (settings.design_rank() < 16) {
        throw ConfigError("config: tomography: beta and rotation set do not determine the state (rank " +
                          std::to_string(settings.design_rank()) + " < 16)");
    }

    entangle::Vector4cd target;
    if (kind == "plus_plus") {
        target.setConstant(0.5);
    } else {
        target = entangle::BellTarget{kind == "bell_odd" ? entangle::BellTarget::Label::kPhiPlusOdd
                                                         : entangle::BellTarget::Label::kPsiPlusEven,
                                      0.0}
                     .state();
    }
    const entangle::Matrix4cd pure = target * target.adjoint();
    const entangle::TwoQubitDensityMatrix truth(weight * pure +
                                                (1.0 - weight) * entangle::Matrix4cd::Identity() / 4.0);

    const auto records = tomo::simulate_records(truth, settings, ctx.seed(), ctx.threads());
    const auto li = tomo::linear_inversion(records, settings);
    const auto li_phys = tomo::project_to_physical(li.rho);
    const auto mle = tomo::mle_reconstruct(records, settings, mle_opts);

    std::ostringstream rec;
    tomo::write_records_csv(rec, records, settings);
    ctx.write("records.csv", rec.str());

    auto write_state = [&](const std::string& name, const entangle::TwoQubitDensityMatrix& rho) {
        std::ostringstream os;
        const auto m = entangle::evaluate(rho, target, 1.0);
        entangle::write_state_json(os, rho, m);
        ctx.write(name, os.str());
        return m;
    };
    const auto m_true = write_state("state_true.json", truth);
    const auto m_li = write_state("state_linear.json", li_phys);
    const auto m_mle = write_state("state_mle.json", mle.rho);

    nlohmann::ordered_json j;
    j["settings"] = settings.settings.size();
    j["design_rank"] = settings.design_rank();
    j["record_stderr"] = settings.record_stderr();
    j["linear_min_eigenvalue"] = li.min_eigenvalue;
    j["linear_negative"] = li.negative;
    j["concurrence_true"] = m_true.concurrence;
    j["concurrence_linear"] = m_li.concurrence;
    j["concurrence_mle"] = m_mle.concurrence;
    j["concurrence_difference"] = std::abs(m_mle.concurrence - m_li.concurrence);
    j["fidelity_linear_to_true"] = tomo::state_fidelity(li_phys.matrix(), truth.matrix());
    j["fidelity_mle_to_true"] = tomo::state_fidelity(mle.rho.matrix(), truth.matrix());
    j["mle_log_likelihood"] = mle.log_likelihood;
    j["mle_iterations"] = mle.iterations;
    j["mle_converged"] = mle.converged;
    j["mle_warning"] = mle.warning;
    ctx.write("summary.json", j.dump(2) + "\n");
    if (mle.warning) {
        ctx.fail_numerically("maximum-likelihood reconstruction hit the iteration limit");
    }
}

}  // namespace qfb::app
