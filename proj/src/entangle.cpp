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

#include "qfb/entangle.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <ostream>

#include "qfb/error.hpp"
#include "qfb/parallel.hpp"

namespace qfb::entangle {

namespace {

constexpr double kHermitianTol = 1e-10;
constexpr double kTraceTol = 1e-10;
constexpr double kPsdTol = 1e-9;

const cd kI(0.0, 1.0);

Matrix2cd pauli_x() { return (Matrix2cd() << 0, 1, 1, 0).finished(); }
Matrix2cd pauli_y() { return (Matrix2cd() << 0, -kI, kI, 0).finished(); }
Matrix2cd pauli_z() { return (Matrix2cd() << 1, 0, 0, -1).finished(); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

bool is_even(std::size_t s) { return s == 0 || s == 3; }

Matrix4cd hermitian_part(const Matrix4cd& m) { return 0.5 * (m + m.adjoint()); }

Matrix4cd kron(const Matrix2cd& left, const Matrix2cd& right) {
    Matrix4cd out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            out.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
        }
    }
    return out;
}

/// Applies a single-qubit Kraus set to one side of the register.
Matrix4cd apply_local_channel(const Matrix4cd& rho, const std::vector<Matrix2cd>& kraus, bool on_qubit_a) {
    Matrix4cd out = Matrix4cd::Zero();
    for (const auto& k : kraus) {
        const Matrix4cd big = on_qubit_a ? on_a(k) : on_b(k);
        out += big * rho * big.adjoint();
    }
    return out;
}

std::vector<Matrix2cd> amplitude_damping(double p) {
    Matrix2cd k0 = Matrix2cd::Zero();
    Matrix2cd k1 = Matrix2cd::Zero();
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - p);
    k1(0, 1) = std::sqrt(p);
    return {k0, k1};
}

std::vector<Matrix2cd> phase_damping(double coherence) {
    return {std::sqrt(0.5 * (1.0 + coherence)) * Matrix2cd::Identity(), std::sqrt(0.5 * (1.0 - coherence)) * pauli_z()};
}

Matrix4cd average_with_pulse(const Matrix4cd& sum_plus, const Matrix4cd& sum_minus, std::size_t n, double phi,
                             const FeedbackSettings& settings) {
    const Matrix4cd u = on_a(feedback_pulse(phi));
    const Matrix4cd flipped = u * sum_plus * u.adjoint();
    const Matrix4cd plus = (1.0 - settings.pulse_error) * flipped + settings.pulse_error * sum_plus;
    return hermitian_part((plus + sum_minus) / static_cast<double>(n));
}

struct ShotSums {
    Matrix4cd plus = Matrix4cd::Zero();
    Matrix4cd minus = Matrix4cd::Zero();
};

ShotSums split_sums(const std::vector<ParityShot>& shots) {
    ShotSums s;
    for (const auto& shot : shots) {
        (shot.m_p == 1 ? s.plus : s.minus) += shot.rho_post.matrix();
    }
    return s;
}

}  // namespace

TwoQubitDensityMatrix::TwoQubitDensityMatrix(const Matrix4cd& m) : m_(m) {
    require(m.allFinite(), "density matrix has non-finite entries");
    require((m - m.adjoint()).cwiseAbs().maxCoeff() <= kHermitianTol, "density matrix is not Hermitian");
    require(std::abs(m.trace() - 1.0) <= kTraceTol, "density matrix trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -kPsdTol, "density matrix has a negative eigenvalue");
}

TwoQubitDensityMatrix TwoQubitDensityMatrix::from_pure(const Vector4cd& psi) {
    const double norm = psi.norm();
    require(norm > 0.0, "from_pure: zero vector");
    const Vector4cd v = psi / norm;
    return TwoQubitDensityMatrix(v * v.adjoint());
}

TwoQubitDensityMatrix TwoQubitDensityMatrix::maximally_mixed() {
    return TwoQubitDensityMatrix(Matrix4cd::Identity() / 4.0);
}

TwoQubitDensityMatrix TwoQubitDensityMatrix::plus_plus() {
    return from_pure(Vector4cd::Constant(cd(0.5, 0.0)));
}

double TwoQubitDensityMatrix::fidelity(const Vector4cd& psi) const {
    return std::real(psi.dot(m_ * psi)) / psi.squaredNorm();
}

Vector4cd BellTarget::state() const {
    Vector4cd v = Vector4cd::Zero();
    const cd tail = std::polar(1.0, -phase);
    if (label == Label::kPhiPlusOdd) {
        v(1) = 1.0;
        v(2) = tail;
    } else {
        v(0) = 1.0;
        v(3) = tail;
    }
    return v / std::sqrt(2.0);
}

Matrix4cd on_a(const Matrix2cd& u) { return kron(Matrix2cd::Identity(), u); }

Matrix4cd on_b(const Matrix2cd& u) { return kron(u, Matrix2cd::Identity()); }

Matrix2cd rotation(double angle, double axis_phase) {
    const Matrix2cd axis = std::cos(axis_phase) * pauli_x() + std::sin(axis_phase) * pauli_y();
    return std::cos(0.5 * angle) * Matrix2cd::Identity() - kI * std::sin(0.5 * angle) * axis;
}

Matrix2cd feedback_pulse(double phi) { return rotation(M_PI, phi - 0.5 * M_PI); }

TwoQubitDensityMatrix transform(const TwoQubitDensityMatrix& rho, const Matrix4cd& u) {
    return TwoQubitDensityMatrix(hermitian_part(u * rho.matrix() * u.adjoint()));
}

TwoQubitDensityMatrix unconditioned_parity_map(const TwoQubitDensityMatrix& rho, const cavity::CoherenceFactors& f) {
    Matrix4cd out = rho.matrix();
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (i != j) {
                out(i, j) *= f.multiplier(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        }
    }
    return TwoQubitDensityMatrix(hermitian_part(out));
}

int parity_outcome(double v_int, double threshold) { return v_int < threshold ? 1 : -1; }

ParityShot conditioned_parity_shot(const TwoQubitDensityMatrix& rho, const cavity::SignalStats& stats,
                                   const cavity::CoherenceFactors& f, double threshold, CounterRng& rng) {
    require(stats.var > 0.0, "conditioned_parity_shot: variance must be positive");
    const Matrix4cd& r = rho.matrix();

    // Draw the basis state that produced the voltage.
    const double u = rng.uniform();
    std::size_t source = 3;
    double acc = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        acc += std::max(0.0, r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)).real());
        if (u < acc) {
            source = s;
            break;
        }
    }
    const double sd = std::sqrt(stats.var);
    const double v = stats.mean[source] + sd * rng.normal();

    // Likelihoods relative to the best-matching state keep the exponentials in range.
    std::array<double, 4> log_l{};
    for (std::size_t s = 0; s < 4; ++s) {
        const double z = v - stats.mean[s];
        log_l[s] = -z * z / (2.0 * stats.var);
    }
    const double top = *std::max_element(log_l.begin(), log_l.end());
    std::array<double, 4> root_l{};
    double norm = 0.0;
    for (std::size_t s = 0; s < 4; ++s) {
        root_l[s] = std::exp(0.5 * (log_l[s] - top));
        norm += r(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)).real() * root_l[s] * root_l[s];
    }
    if (!(norm > 0.0)) {
        throw NumericalError("conditioned_parity_shot: posterior normalization vanished");
    }

    Matrix4cd post;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            cd k = 1.0;
            if (i != j) {
                const double gap = stats.mean[i] - stats.mean[j];
                const double overlap = std::exp(-gap * gap / (8.0 * stats.var));
                const cavity::PairFactor pf = f.at(i, j);
                k = std::polar(std::min(1.0, pf.decay / overlap), pf.phase);
            }
            post(ii, jj) = r(ii, jj) * k * root_l[i] * root_l[j] / norm;
        }
    }
    post = hermitian_part(post);
    post /= post.trace().real();

    ParityShot shot;
    shot.v_int = v;
    shot.m_p = parity_outcome(v, threshold);
    try {
        shot.rho_post = TwoQubitDensityMatrix(post);
    } catch (const ArgumentError& e) {
        throw NumericalError(std::string("conditioned_parity_shot: invalid posterior: ") + e.what());
    }
    return shot;
}

void Decoherence::validate() const {
    require(t1_a >= 0.0 && t2_a >= 0.0 && t1_b >= 0.0 && t2_b >= 0.0, "decoherence times must be non-negative");
    require(t1_a == 0.0 || t2_a == 0.0 || t2_a <= 2.0 * t1_a + 1e-12, "T2 of qubit A exceeds 2 T1");
    require(t1_b == 0.0 || t2_b == 0.0 || t2_b <= 2.0 * t1_b + 1e-12, "T2 of qubit B exceeds 2 T1");
}

TwoQubitDensityMatrix apply_decoherence(const TwoQubitDensityMatrix& rho, const Decoherence& d, double duration_us) {
    d.validate();
    require(duration_us >= 0.0, "decoherence duration must be non-negative");
    Matrix4cd m = rho.matrix();
    const auto one_qubit = [&](double t1, double t2, bool qubit_a) {
        if (t1 > 0.0) {
            m = apply_local_channel(m, amplitude_damping(1.0 - std::exp(-duration_us / t1)), qubit_a);
        }
        if (t2 > 0.0) {
            const double pure_rate = std::max(0.0, 1.0 / t2 - (t1 > 0.0 ? 0.5 / t1 : 0.0));
            m = apply_local_channel(m, phase_damping(std::exp(-pure_rate * duration_us)), qubit_a);
        }
    };
    one_qubit(d.t1_a, d.t2_a, true);
    one_qubit(d.t1_b, d.t2_b, false);
    return TwoQubitDensityMatrix(hermitian_part(m));
}

std::vector<ParityShot> simulate_parity_shots(const TwoQubitDensityMatrix& rho, const cavity::SignalStats& stats,
                                              const cavity::CoherenceFactors& f, double threshold, std::size_t n,
                                              const ShotBatchOptions& options) {
    require(n >= 1, "simulate_parity_shots: n must be at least 1");
    if (options.decoherence) {
        options.decoherence->validate();
    }
    return parallel_reduce(
        n, options.threads, std::vector<ParityShot>{},
        [&](std::size_t begin, std::size_t end) {
            std::vector<ParityShot> local;
            local.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                CounterRng rng(options.seed, i, StreamTag::kParity);
                ParityShot shot = conditioned_parity_shot(rho, stats, f, threshold, rng);
                if (options.decoherence) {
                    shot.rho_post = apply_decoherence(shot.rho_post, *options.decoherence, options.decoherence_time_us);
                }
                local.push_back(std::move(shot));
            }
            return local;
        },
        [](std::vector<ParityShot> a, std::vector<ParityShot> b) {
            a.insert(a.end(), std::make_move_iterator(b.begin()), std::make_move_iterator(b.end()));
            return a;
        });
}

ParityErrors parity_errors(const cavity::SignalStats& stats, double threshold) {
    require(stats.var > 0.0, "parity_errors: variance must be positive");
    const double sd = std::sqrt(stats.var);
    ParityErrors e;
    for (std::size_t s = 0; s < 4; ++s) {
        const double below = normal_cdf((threshold - stats.mean[s]) / sd);
        if (is_even(s)) {
            e.eps_even += 0.5 * (1.0 - below);
        } else {
            e.eps_odd += 0.5 * below;
        }
    }
    return e;
}

double parity_fidelity(const cavity::SignalStats& stats, double threshold) {
    return parity_errors(stats, threshold).fidelity();
}

double optimal_parity_threshold(const cavity::SignalStats& stats) {
    require(stats.var > 0.0, "optimal_parity_threshold: variance must be positive");
    const double sd = std::sqrt(stats.var);
    const auto [lo_it, hi_it] = std::minmax_element(stats.mean.begin(), stats.mean.end());
    double lo = *lo_it - 4.0 * sd;
    double hi = *hi_it + 4.0 * sd;
    constexpr int kGrid = 4000;
    const double step = (hi - lo) / kGrid;
    int best = 0;
    double best_f = -2.0;
    for (int k = 0; k <= kGrid; ++k) {
        const double f = parity_fidelity(stats, lo + step * k);
        if (f > best_f + 1e-15) {
            best_f = f;
            best = k;
        }
    }
    // Golden-section refinement around the best grid point.
    double a = lo + step * std::max(0, best - 1);
    double b = lo + step * std::min(kGrid, best + 1);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (parity_fidelity(stats, c) >= parity_fidelity(stats, d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return 0.5 * (a + b);
}

double postselection_threshold(const cavity::SignalStats& stats, bool keep_odd, double eps) {
    require(eps > 0.0 && eps < 0.5, "postselection_threshold: eps must be in (0, 0.5)");
    const double sd = std::sqrt(stats.var);
    const auto [lo_it, hi_it] = std::minmax_element(stats.mean.begin(), stats.mean.end());
    double lo = *lo_it - 12.0 * sd;
    double hi = *hi_it + 12.0 * sd;
    // Odd shots are kept above the threshold, so the even leak eps_even sets it; eps_even falls with
    // the threshold and eps_odd rises.
    const auto excess = [&](double th) {
        const ParityErrors e = parity_errors(stats, th);
        return keep_odd ? eps - e.eps_even : e.eps_odd - eps;
    };
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Matrix4cd partial_transpose_b(const Matrix4cd& m) {
    Matrix4cd out;
    for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a) {
            for (int bp = 0; bp < 2; ++bp) {
                for (int ap = 0; ap < 2; ++ap) {
                    out(2 * bp + a, 2 * b + ap) = m(2 * b + a, 2 * bp + ap);
                }
            }
        }
    }
    return out;
}

double concurrence(const TwoQubitDensityMatrix& rho) {
    const Matrix4cd& r = rho.matrix();
    const Matrix4cd yy = kron(pauli_y(), pauli_y());
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(hermitian_part(r));
    const Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix4cd root = es.eigenvectors() * w.cast<cd>().asDiagonal() * es.eigenvectors().adjoint();
    // sqrt(rho) rho~ sqrt(rho) = A A^dagger with A = sqrt(rho) YY sqrt(rho)*, so the
    // Wootters lambdas are the singular values of A (no square root of tiny eigenvalues).
    Eigen::JacobiSVD<Matrix4cd> svd(root * yy * root.conjugate());
    Eigen::Vector4d lambda = svd.singularValues();
    std::sort(lambda.data(), lambda.data() + 4, std::greater<>());
    return std::max(0.0, lambda(0) - lambda(1) - lambda(2) - lambda(3));
}

double log_negativity(const TwoQubitDensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(hermitian_part(partial_transpose_b(rho.matrix())),
                                                Eigen::EigenvaluesOnly);
    const double trace_norm = es.eigenvalues().cwiseAbs().sum();
    return std::max(0.0, std::log2(trace_norm));
}

double ebit_efficiency(double p_success, const TwoQubitDensityMatrix& rho) {
    require(p_success >= 0.0 && p_success <= 1.0, "p_success must be in [0, 1]");
    return p_success * log_negativity(rho);
}

Metrics evaluate(const TwoQubitDensityMatrix& rho, const Vector4cd& target, double p_success) {
    Metrics m;
    m.concurrence = concurrence(rho);
    m.log_negativity = log_negativity(rho);
    m.bell_fidelity = rho.fidelity(target);
    m.p_success = p_success;
    m.efficiency = ebit_efficiency(p_success, rho);
    return m;
}

TwoQubitDensityMatrix compensate_odd_phase(const TwoQubitDensityMatrix& rho, double odd_phase) {
    Matrix2cd z = Matrix2cd::Identity();
    z(1, 1) = std::polar(1.0, odd_phase);
    return transform(rho, on_b(z));
}

SelectedState postselect(const std::vector<ParityShot>& shots, const std::function<bool(const ParityShot&)>& keep) {
    Matrix4cd sum = Matrix4cd::Zero();
    std::size_t kept = 0;
    for (const auto& s : shots) {
        if (keep(s)) {
            sum += s.rho_post.matrix();
            ++kept;
        }
    }
    if (kept == 0) {
        throw NumericalError("postselect: no shot passed the selection");
    }
    SelectedState out;
    out.rho = TwoQubitDensityMatrix(hermitian_part(sum / static_cast<double>(kept)));
    out.kept = kept;
    out.p_success = static_cast<double>(kept) / static_cast<double>(shots.size());
    return out;
}

FeedbackOutcome feedback_entangle(const std::vector<ParityShot>& shots, double phi, const FeedbackSettings& settings) {
    require(phi >= 0.0 && phi < 2.0 * M_PI, "feedback_entangle: phi must be in [0, 2pi)");
    require(!shots.empty(), "feedback_entangle: no shots");
    require(settings.pulse_error >= 0.0 && settings.pulse_error <= 1.0, "pulse_error must be in [0, 1]");
    const ShotSums sums = split_sums(shots);
    FeedbackOutcome out;
    out.rho_avg = compensate_odd_phase(
        TwoQubitDensityMatrix(average_with_pulse(sums.plus, sums.minus, shots.size(), phi, settings)),
        settings.odd_frame_phase);
    out.metrics = evaluate(out.rho_avg, BellTarget{}.state(), 1.0);
    return out;
}

std::vector<PhaseSweepPoint> phase_sweep(const std::vector<ParityShot>& shots, std::size_t n_points,
                                         const FeedbackSettings& settings) {
    require(n_points >= 2, "phase_sweep: need at least two points");
    require(!shots.empty(), "phase_sweep: no shots");
    const ShotSums sums = split_sums(shots);
    const Vector4cd target = BellTarget{}.state();
    std::vector<PhaseSweepPoint> out;
    out.reserve(n_points);
    for (std::size_t k = 0; k < n_points; ++k) {
        const double phi = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n_points);
        const auto rho = compensate_odd_phase(
            TwoQubitDensityMatrix(average_with_pulse(sums.plus, sums.minus, shots.size(), phi, settings)),
            settings.odd_frame_phase);
        const Metrics m = evaluate(rho, target, 1.0);
        out.push_back({phi, m.bell_fidelity, m});
    }
    return out;
}

void write_state_json(std::ostream& os, const TwoQubitDensityMatrix& rho, const Metrics& metrics) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < 4; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            entries.push_back({rho(r, c).real(), rho(r, c).imag()});
        }
    }
    j["basis"] = {"00", "01", "10", "11"};
    j["rho"] = entries;
    j["metrics"] = {{"concurrence", metrics.concurrence},
                    {"log_negativity", metrics.log_negativity},
                    {"bell_fidelity", metrics.bell_fidelity},
                    {"p_success", metrics.p_success},
                    {"efficiency", metrics.efficiency}};
    os << j.dump(2) << '\n';
}

}  // namespace qfb::entangle
