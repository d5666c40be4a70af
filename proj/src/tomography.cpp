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

#include "qfb/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "qfb/csv.hpp"
#include "qfb/error.hpp"
#include "qfb/parallel.hpp"
#include "qfb/random.hpp"

namespace qfb::tomo {

namespace {

using cd = std::complex<double>;
const cd kI(0.0, 1.0);

std::array<Matrix2cd, 4> paulis() {
    Matrix2cd x, y, z;
    x << 0, 1, 1, 0;
    y << 0, -kI, kI, 0;
    z << 1, 0, 0, -1;
    return {Matrix2cd::Identity(), x, y, z};
}

/// P_k = sigma_{k/4} on B (left) times sigma_{k%4} on A (right); P_0 is the identity.
std::array<Matrix4cd, 16> pauli_basis() {
    const auto p = paulis();
    std::array<Matrix4cd, 16> out;
    for (int k = 0; k < 16; ++k) {
        out[static_cast<std::size_t>(k)] =
            entangle::on_b(p[static_cast<std::size_t>(k / 4)]) * entangle::on_a(p[static_cast<std::size_t>(k % 4)]);
    }
    return out;
}

Matrix4cd hermitian_part(const Matrix4cd& m) { return 0.5 * (m + m.adjoint()); }

/// Heisenberg-picture observables U^dag O U, one per setting.
std::vector<Matrix4cd> setting_observables(const TomographySettings& s) {
    const Matrix4cd o = s.observable();
    std::vector<Matrix4cd> out;
    out.reserve(s.settings.size());
    for (const auto& st : s.settings) {
        const Matrix4cd u = st.unitary();
        out.push_back(hermitian_part(u.adjoint() * o * u));
    }
    return out;
}

Eigen::MatrixXd traceless_design(const std::vector<Matrix4cd>& h) {
    const auto basis = pauli_basis();
    Eigen::MatrixXd a(static_cast<Eigen::Index>(h.size()), 15);
    for (std::size_t m = 0; m < h.size(); ++m) {
        for (int k = 1; k < 16; ++k) {
            a(static_cast<Eigen::Index>(m), k - 1) = std::real((h[m] * basis[static_cast<std::size_t>(k)]).trace()) / 4.0;
        }
    }
    return a;
}

std::vector<Setting> all_pairs(const std::vector<PreRotation>& rot) {
    std::vector<Setting> out;
    for (const auto& b : rot) {
        for (const auto& a : rot) {
            out.push_back({a, b});
        }
    }
    return out;
}

void check_records(const std::vector<MeasurementRecord>& records, const TomographySettings& settings) {
    require(!records.empty(), "tomography: no records");
    for (const auto& r : records) {
        require(r.setting_id < settings.settings.size(), "tomography: record refers to an unknown setting");
        require(r.stderr_v > 0.0 && std::isfinite(r.stderr_v), "tomography: standard errors must be positive");
        require(std::isfinite(r.mean_v), "tomography: record mean must be finite");
    }
}

struct Likelihood {
    const std::vector<MeasurementRecord>& records;
    std::vector<Matrix4cd> h;
    std::vector<double> w;
    double total_weight = 0.0;

    Likelihood(const std::vector<MeasurementRecord>& r, const TomographySettings& s) : records(r) {
        const auto all = setting_observables(s);
        for (const auto& rec : r) {
            h.push_back(all[rec.setting_id]);
            w.push_back(1.0 / (rec.stderr_v * rec.stderr_v));
            total_weight += w.back();
        }
    }

    double value(const Matrix4cd& rho) const {
        double acc = 0.0;
        for (std::size_t m = 0; m < h.size(); ++m) {
            const double res = records[m].mean_v - std::real((h[m] * rho).trace());
            acc += w[m] * res * res;
        }
        return -0.5 * acc / total_weight;
    }

    /// Derivative with respect to rho.
    Matrix4cd gradient(const Matrix4cd& rho) const {
        Matrix4cd g = Matrix4cd::Zero();
        for (std::size_t m = 0; m < h.size(); ++m) {
            const double res = records[m].mean_v - std::real((h[m] * rho).trace());
            g += (w[m] * res / total_weight) * h[m];
        }
        return g;
    }
};

Matrix4cd lower_mask(const Matrix4cd& m) { return m.triangularView<Eigen::Lower>(); }

Matrix4cd rho_of(const Matrix4cd& t) {
    const Matrix4cd r = t * t.adjoint();
    return hermitian_part(r / r.trace().real());
}

/// Ascent direction in the lower-triangular factor space.
Matrix4cd factor_gradient(const Likelihood& like, const Matrix4cd& t) {
    const double norm = (t * t.adjoint()).trace().real();
    const Matrix4cd rho = hermitian_part(t * t.adjoint() / norm);
    const Matrix4cd g = like.gradient(rho);
    const Matrix4cd g_tilde = (g - (g * rho).trace().real() * Matrix4cd::Identity()) / norm;
    return lower_mask(2.0 * g_tilde * t);
}


/// Real and imaginary parts of the lower triangle, column by column.
Eigen::VectorXd pack(const Matrix4cd& t) {
    Eigen::VectorXd x(20);
    int k = 0;
    for (int c = 0; c < 4; ++c) {
        for (int r = c; r < 4; ++r) {
            x(k++) = t(r, c).real();
            x(k++) = t(r, c).imag();
        }
    }
    return x;
}

Matrix4cd unpack(const Eigen::VectorXd& x) {
    Matrix4cd t = Matrix4cd::Zero();
    int k = 0;
    for (int c = 0; c < 4; ++c) {
        for (int r = c; r < 4; ++r) {
            t(r, c) = cd(x(k), x(k + 1));
            k += 2;
        }
    }
    return t;
}

}  // namespace

Matrix4cd Setting::unitary() const { return entangle::on_b(b.u) * entangle::on_a(a.u); }

std::vector<PreRotation> standard_rotations() {
    using entangle::rotation;
    return {{"I", Matrix2cd::Identity()},        {"X180", rotation(M_PI, 0.0)},
            {"X90", rotation(0.5 * M_PI, 0.0)},   {"mX90", rotation(-0.5 * M_PI, 0.0)},
            {"Y90", rotation(0.5 * M_PI, 0.5 * M_PI)}, {"mY90", rotation(-0.5 * M_PI, 0.5 * M_PI)}};
}

std::vector<PreRotation> minimal_rotations() {
    using entangle::rotation;
    return {{"I", Matrix2cd::Identity()},
            {"X90", rotation(0.5 * M_PI, 0.0)},
            {"Y90", rotation(0.5 * M_PI, 0.5 * M_PI)},
            {"X180", rotation(M_PI, 0.0)}};
}

TomographySettings TomographySettings::full(cavity::BetaCoefficients beta, std::size_t shots, double noise_sd) {
    return {all_pairs(standard_rotations()), beta, shots, noise_sd};
}

TomographySettings TomographySettings::minimal(cavity::BetaCoefficients beta, std::size_t shots, double noise_sd) {
    return {all_pairs(minimal_rotations()), beta, shots, noise_sd};
}

Matrix4cd TomographySettings::observable() const {
    Matrix4cd o = Matrix4cd::Zero();
    for (std::size_t s = 0; s < cavity::kStates; ++s) {
        o(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)) = beta.value(s);
    }
    return o;
}

double TomographySettings::record_stderr() const {
    return noise_sd / std::sqrt(static_cast<double>(shots_per_setting));
}

int TomographySettings::design_rank() const {
    if (settings.empty()) {
        return 1;
    }
    const Eigen::MatrixXd a = traceless_design(setting_observables(*this));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    return 1 + static_cast<int>(qr.rank());
}

void TomographySettings::validate() const {
    require(!settings.empty(), "tomography: empty rotation set");
    require(shots_per_setting >= 1, "tomography: shots per setting must be at least 1");
    require(noise_sd > 0.0 && std::isfinite(noise_sd), "tomography: noise_sd must be positive");
    require(std::isfinite(beta.b0) && std::isfinite(beta.bA) && std::isfinite(beta.bB) && std::isfinite(beta.bBA),
            "tomography: readout coefficients must be finite");
    require(design_rank() == 16, "tomography: rotation set is not informationally complete (rank-deficient design)");
}

double expected_record(const Matrix4cd& rho, const TomographySettings& settings, std::size_t setting_id) {
    require(setting_id < settings.settings.size(), "expected_record: setting out of range");
    const Matrix4cd u = settings.settings[setting_id].unitary();
    return std::real((settings.observable() * u * rho * u.adjoint()).trace());
}

std::vector<MeasurementRecord> simulate_records(const TwoQubitDensityMatrix& rho, const TomographySettings& settings,
                                                std::uint64_t seed, unsigned threads) {
    settings.validate();
    const double se = settings.record_stderr();
    return parallel_reduce(
        settings.settings.size(), threads, std::vector<MeasurementRecord>{},
        [&](std::size_t begin, std::size_t end) {
            std::vector<MeasurementRecord> local;
            for (std::size_t m = begin; m < end; ++m) {
                CounterRng rng(seed, m, StreamTag::kTomography);
                local.push_back({m, expected_record(rho.matrix(), settings, m) + se * rng.normal(), se});
            }
            return local;
        },
        [](std::vector<MeasurementRecord> a, const std::vector<MeasurementRecord>& b) {
            a.insert(a.end(), b.begin(), b.end());
            return a;
        });
}

LinearEstimate linear_inversion(const std::vector<MeasurementRecord>& records, const TomographySettings& settings) {
    check_records(records, settings);
    const auto all = setting_observables(settings);
    std::vector<Matrix4cd> h;
    for (const auto& r : records) {
        h.push_back(all[r.setting_id]);
    }
    Eigen::MatrixXd a = traceless_design(h);
    Eigen::VectorXd y(static_cast<Eigen::Index>(records.size()));
    for (std::size_t m = 0; m < records.size(); ++m) {
        const auto row = static_cast<Eigen::Index>(m);
        const double scale = 1.0 / records[m].stderr_v;
        y(row) = (records[m].mean_v - settings.beta.b0) * scale;
        a.row(row) *= scale;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    require(qr.rank() == 15, "linear_inversion: rank-deficient settings");
    const Eigen::VectorXd c = qr.solve(y);

    const auto basis = pauli_basis();
    Matrix4cd rho = basis[0] / 4.0;
    for (int k = 1; k < 16; ++k) {
        rho += c(k - 1) * basis[static_cast<std::size_t>(k)] / 4.0;
    }
    LinearEstimate out;
    out.rho = hermitian_part(rho);
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(out.rho, Eigen::EigenvaluesOnly);
    out.min_eigenvalue = es.eigenvalues().minCoeff();
    out.negative = out.min_eigenvalue < 0.0;
    return out;
}

TwoQubitDensityMatrix project_to_physical(const Matrix4cd& rho) {
    const Matrix4cd h = hermitian_part(rho / rho.trace().real());
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(h);
    // Eigen sorts ascending; walk from the smallest eigenvalue upward.
    Eigen::Vector4d mu = es.eigenvalues();
    Eigen::Vector4d lambda = mu;
    double carried = 0.0;
    int i = 0;
    while (i < 4 && mu(i) + carried / static_cast<double>(4 - i) < 0.0) {
        carried += mu(i);
        lambda(i) = 0.0;
        ++i;
    }
    for (int j = i; j < 4; ++j) {
        lambda(j) = mu(j) + carried / static_cast<double>(4 - i);
    }
    Matrix4cd out = es.eigenvectors() * lambda.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
    out = hermitian_part(out);
    out /= out.trace().real();
    return TwoQubitDensityMatrix(out);
}

double log_likelihood(const Matrix4cd& rho, const std::vector<MeasurementRecord>& records,
                      const TomographySettings& settings) {
    check_records(records, settings);
    return Likelihood(records, settings).value(rho);
}

MleResult mle_reconstruct(const std::vector<MeasurementRecord>& records, const TomographySettings& settings,
                          const MleOptions& options) {
    settings.validate();
    check_records(records, settings);
    require(options.max_iterations >= 1 && options.gradient_tol > 0.0, "mle_reconstruct: invalid options");
    const Likelihood like(records, settings);

    const TwoQubitDensityMatrix start_state = project_to_physical(linear_inversion(records, settings).rho);
    const Matrix4cd start = 0.999 * start_state.matrix() + 0.001 * Matrix4cd::Identity() / 4.0;
    Eigen::LLT<Matrix4cd> llt(start);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("mle_reconstruct: initial factorization failed");
    }
    Matrix4cd t = llt.matrixL();
    Eigen::VectorXd x = pack(t);
    double value = like.value(rho_of(t));
    Eigen::VectorXd grad = pack(factor_gradient(like, t));

    // Quasi-Newton ascent (BFGS inverse-Hessian update) with Armijo backtracking.
    MleResult out;
    const auto n = x.size();
    Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(n, n) / std::max(1e-12, grad.norm());
    Eigen::VectorXd best_x = x;
    double best = value;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (grad.norm() < options.gradient_tol) {
            out.converged = true;
            break;
        }
        Eigen::VectorXd dir = inv_h * grad;
        double slope = grad.dot(dir);
        if (!(slope > 0.0)) {
            inv_h = Eigen::MatrixXd::Identity(n, n) / std::max(1e-12, grad.norm());
            dir = inv_h * grad;
            slope = grad.dot(dir);
        }
        double alpha = 1.0;
        Eigen::VectorXd x_next;
        double v_next = value;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            x_next = x + alpha * dir;
            v_next = like.value(rho_of(unpack(x_next)));
            if (v_next >= value + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // No ascent left at double precision.
            out.converged = true;
            break;
        }
        const Eigen::VectorXd g_next = pack(factor_gradient(like, unpack(x_next)));
        const Eigen::VectorXd s = x_next - x;
        const Eigen::VectorXd yv = grad - g_next;
        const double sy = s.dot(yv);
        if (sy > 1e-14 * s.norm() * yv.norm()) {
            const double r = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - r * s * yv.transpose();
            inv_h = left * inv_h * left.transpose() + r * s * s.transpose();
        }
        x = x_next;
        value = v_next;
        grad = g_next;
        if (value > best) {
            best = value;
            best_x = x;
        }
    }
    const Matrix4cd best_t = unpack(best_x);
    out.iterations = it;
    out.warning = !out.converged;

    const double start_value = like.value(start_state.matrix());
    if (start_value > best) {
        out.rho = start_state;
        out.log_likelihood = start_value;
    } else {
        out.rho = TwoQubitDensityMatrix(rho_of(best_t));
        out.log_likelihood = best;
    }
    return out;
}

double state_fidelity(const Matrix4cd& a, const Matrix4cd& b) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> ea(hermitian_part(a));
    const Eigen::Vector4d ra = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix4cd root = ea.eigenvectors() * ra.cast<cd>().asDiagonal() * ea.eigenvectors().adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix4cd> em(hermitian_part(root * b * root), Eigen::EigenvaluesOnly);
    const double tr = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return tr * tr;
}

void write_records_csv(std::ostream& os, const std::vector<MeasurementRecord>& records,
                       const TomographySettings& settings) {
    os << "setting_id,rotation_a,rotation_b,mean_v,stderr_v\n";
    for (const auto& r : records) {
        const Setting& s = settings.settings.at(r.setting_id);
        csv::row(os, {std::to_string(r.setting_id), s.a.name, s.b.name, csv::num(r.mean_v), csv::num(r.stderr_v)});
    }
}

}  // namespace qfb::tomo
