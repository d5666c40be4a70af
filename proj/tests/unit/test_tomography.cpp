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

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfb/error.hpp"
#include "qfb/tomography.hpp"

using namespace qfb;
using namespace qfb::tomo;
using entangle::cd;
using entangle::Vector4cd;

namespace {

Matrix4cd random_state(CounterRng& rng, int rank) {
    Eigen::MatrixXcd g(4, rank);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < rank; ++c) {
            g(r, c) = cd(rng.normal(), rng.normal());
        }
    }
    Matrix4cd rho = g * g.adjoint();
    return rho / rho.trace().real();
}

Matrix4cd kron(const Matrix2cd& left, const Matrix2cd& right) {
    Matrix4cd k;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            k.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
        }
    }
    return k;
}

// Readout operator assembled from Pauli products.
Matrix4cd readout_operator(const cavity::BetaCoefficients& b) {
    Matrix2cd z = Matrix2cd::Zero();
    z(0, 0) = 1.0;
    z(1, 1) = -1.0;
    const Matrix2cd id = Matrix2cd::Identity();
    return b.b0 * kron(id, id) + b.bA * kron(id, z) + b.bB * kron(z, id) + b.bBA * kron(z, z);
}

double direct_record(const Matrix4cd& rho, const Setting& s, const cavity::BetaCoefficients& b) {
    const Matrix4cd u = kron(s.b.u, s.a.u);
    return (readout_operator(b) * u * rho * u.adjoint()).trace().real();
}

double min_eigenvalue(const Matrix4cd& m) {
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(m);
    return es.eigenvalues().minCoeff();
}

Vector4cd bell_odd() {
    Vector4cd v = Vector4cd::Zero();
    v(1) = v(2) = 1.0 / std::sqrt(2.0);
    return v;
}

std::vector<MeasurementRecord> exact_records(const Matrix4cd& rho, const TomographySettings& s) {
    std::vector<MeasurementRecord> out;
    for (std::size_t i = 0; i < s.settings.size(); ++i) {
        out.push_back({i, expected_record(rho, s, i), s.record_stderr()});
    }
    return out;
}

}  // namespace

TEST_CASE("rotation sets") {
    CHECK(standard_rotations().size() == 6);
    CHECK(minimal_rotations().size() == 4);
    const cavity::BetaCoefficients b{0.0, 1.0, 1.0, 1.0};
    CHECK(TomographySettings::full(b, 100, 1.0).settings.size() == 36);
    CHECK(TomographySettings::minimal(b, 100, 1.0).settings.size() == 16);
    for (const auto& r : standard_rotations()) {
        CHECK((r.u.adjoint() * r.u - Matrix2cd::Identity()).norm() < 1e-12);
    }
}

TEST_CASE("forward model matches the direct operator product") {
    CounterRng rng(31, 0);
    const cavity::BetaCoefficients b{0.13, 0.9, -0.7, 0.35};
    const auto settings = TomographySettings::full(b, 100, 1.0);
    for (int k = 0; k < 20; ++k) {
        const Matrix4cd rho = random_state(rng, 1 + k % 4);
        for (std::size_t i = 0; i < settings.settings.size(); ++i) {
            CHECK(expected_record(rho, settings, i) ==
                  doctest::Approx(direct_record(rho, settings.settings[i], b)).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(expected_record(Matrix4cd::Identity() / 4.0, settings, 36), ArgumentError);
}

TEST_CASE("design rank") {
    CHECK(TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 10, 1.0).design_rank() == 16);
    CHECK(TomographySettings::minimal({0.0, 1.0, 1.0, 1.0}, 10, 1.0).design_rank() == 16);
    CHECK(TomographySettings::minimal({0.3, 0.8, 0.5, 0.2}, 10, 1.0).design_rank() == 16);
    // No correlator term: two-qubit correlations are invisible.
    const auto blind = TomographySettings::full({0.0, 1.0, 1.0, 0.0}, 10, 1.0);
    CHECK(blind.design_rank() < 16);
    CHECK_THROWS_AS(blind.validate(), ArgumentError);
    CHECK_THROWS_AS(linear_inversion(exact_records(Matrix4cd::Identity() / 4.0, blind), blind), ArgumentError);

    auto one_axis = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 10, 1.0);
    one_axis.settings.resize(1);
    CHECK(one_axis.design_rank() < 16);
}

TEST_CASE("settings validation") {
    auto s = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 10, 1.0);
    s.noise_sd = 0.0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s.noise_sd = 1.0;
    s.shots_per_setting = 0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s.shots_per_setting = 10;
    s.settings.clear();
    CHECK_THROWS_AS(s.validate(), ArgumentError);
}

TEST_CASE("noiseless linear inversion recovers the state") {
    CounterRng rng(5, 0);
    for (const auto& settings : {TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 10, 1.0),
                                 TomographySettings::minimal({0.2, 0.7, 1.1, -0.4}, 10, 1.0)}) {
        for (int k = 0; k < 10; ++k) {
            const Matrix4cd rho = random_state(rng, 1 + k % 4);
            const auto li = linear_inversion(exact_records(rho, settings), settings);
            CHECK((li.rho - rho).norm() < 1e-10);
        }
    }
}

TEST_CASE("noiseless maximum likelihood on a pure Bell state") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 10000, 1.0);
    const auto bell = TwoQubitDensityMatrix::from_pure(bell_odd());
    const auto mle = mle_reconstruct(exact_records(bell.matrix(), settings), settings);
    CHECK(mle.converged);
    CHECK_FALSE(mle.warning);
    CHECK(state_fidelity(mle.rho.matrix(), bell.matrix()) > 0.9999);
}

TEST_CASE("simulated records have the stated noise") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 400, 2.0);
    CHECK(settings.record_stderr() == doctest::Approx(0.1));
    const auto rho = TwoQubitDensityMatrix::plus_plus();
    double sum = 0.0;
    double sum2 = 0.0;
    int n = 0;
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        for (const auto& r : simulate_records(rho, settings, seed)) {
            CHECK(r.stderr_v == doctest::Approx(0.1));
            const double z = (r.mean_v - expected_record(rho.matrix(), settings, r.setting_id)) / r.stderr_v;
            sum += z;
            sum2 += z * z;
            ++n;
        }
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(n));
    CHECK(var == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("simulation is independent of thread count") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 1000, 1.0);
    const auto rho = TwoQubitDensityMatrix::from_pure(bell_odd());
    const auto one = simulate_records(rho, settings, 77, 1);
    const auto many = simulate_records(rho, settings, 77, 5);
    REQUIRE(one.size() == many.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].setting_id == many[i].setting_id);
        CHECK(one[i].mean_v == many[i].mean_v);
    }
    CHECK(simulate_records(rho, settings, 78, 1)[0].mean_v != one[0].mean_v);
}

TEST_CASE("projection onto physical states") {
    Eigen::Vector4d mu(0.6, 0.5, -0.05, -0.05);
    CounterRng rng(12, 0);
    const Matrix4cd basis = Eigen::ComplexEigenSolver<Matrix4cd>(random_state(rng, 4)).eigenvectors();
    Eigen::HouseholderQR<Matrix4cd> qr(basis);
    const Matrix4cd q = qr.householderQ();
    const Matrix4cd raw = q * mu.cast<cd>().asDiagonal() * q.adjoint();
    const Matrix4cd projected = project_to_physical(raw).matrix();
    Eigen::SelfAdjointEigenSolver<Matrix4cd> es(projected);
    Eigen::Vector4d got = es.eigenvalues();
    std::sort(got.data(), got.data() + 4);
    CHECK(got(0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(got(1) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(got(2) == doctest::Approx(0.45));
    CHECK(got(3) == doctest::Approx(0.55));
    // Eigenvectors are kept.
    CHECK(((q.adjoint() * projected * q).diagonal().real() - Eigen::Vector4d(0.55, 0.45, 0.0, 0.0)).norm() < 1e-10);

    const Matrix4cd physical = random_state(rng, 3);
    CHECK((project_to_physical(physical).matrix() - physical).norm() < 1e-10);
}

TEST_CASE("maximum likelihood output is physical and at least as likely as the projection") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 200, 1.0);
    const auto bell = TwoQubitDensityMatrix::from_pure(bell_odd());
    int negatives = 0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto records = simulate_records(bell, settings, seed);
        const auto li = linear_inversion(records, settings);
        negatives += li.negative ? 1 : 0;
        CHECK(li.min_eigenvalue == doctest::Approx(min_eigenvalue(li.rho)).epsilon(1e-9));
        CHECK(std::abs(li.rho.trace().real() - 1.0) < 1e-10);
        const auto mle = mle_reconstruct(records, settings);
        CHECK(std::abs(mle.rho.matrix().trace().real() - 1.0) < 1e-10);
        CHECK(min_eigenvalue(mle.rho.matrix()) > -1e-10);
        const auto projected = project_to_physical(li.rho);
        CHECK(mle.log_likelihood >= log_likelihood(projected.matrix(), records, settings) - 1e-9);
        CHECK(mle.log_likelihood == doctest::Approx(log_likelihood(mle.rho.matrix(), records, settings)));
        CHECK(state_fidelity(mle.rho.matrix(), bell.matrix()) > 0.9);
    }
    // A pure target with this much noise almost always inverts to a non-physical estimate.
    CHECK(negatives >= 6);
}

TEST_CASE("likelihood peaks at the true state for exact records") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 100, 1.0);
    CounterRng rng(3, 0);
    const Matrix4cd rho = random_state(rng, 4);
    const auto records = exact_records(rho, settings);
    CHECK(log_likelihood(rho, records, settings) == doctest::Approx(0.0));
    CHECK(log_likelihood(Matrix4cd::Identity() / 4.0, records, settings) < 0.0);
}

TEST_CASE("iteration limit raises a warning") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 200, 1.0);
    const auto records = simulate_records(TwoQubitDensityMatrix::from_pure(bell_odd()), settings, 9);
    const auto mle = mle_reconstruct(records, settings, {1, 1e-14});
    CHECK(mle.warning);
    CHECK_FALSE(mle.converged);
    CHECK(std::abs(mle.rho.matrix().trace().real() - 1.0) < 1e-10);
}

TEST_CASE("state fidelity") {
    const auto bell = TwoQubitDensityMatrix::from_pure(bell_odd()).matrix();
    CHECK(state_fidelity(bell, bell) == doctest::Approx(1.0));
    CHECK(state_fidelity(bell, Matrix4cd::Identity() / 4.0) == doctest::Approx(0.25));
    CHECK(state_fidelity(Matrix4cd::Identity() / 4.0, bell) == doctest::Approx(0.25));
    const auto pp = TwoQubitDensityMatrix::plus_plus().matrix();
    CHECK(state_fidelity(bell, pp) == doctest::Approx(0.5));
}

TEST_CASE("records CSV") {
    const auto settings = TomographySettings::minimal({0.0, 1.0, 1.0, 1.0}, 100, 1.0);
    const auto records = simulate_records(TwoQubitDensityMatrix::plus_plus(), settings, 1);
    std::ostringstream os;
    write_records_csv(os, records, settings);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "setting_id,rotation_a,rotation_b,mean_v,stderr_v");
    int rows = 0;
    while (std::getline(is, line)) {
        ++rows;
    }
    CHECK(rows == 16);
    CHECK(os.str().find(",X90,Y90,") != std::string::npos);
}

TEST_CASE("likelihood never decreases with more iterations") {
    const auto settings = TomographySettings::full({0.2, 1.0, 1.0, 1.0}, 500, 1.0);
    const auto records = simulate_records(TwoQubitDensityMatrix::from_pure(bell_odd()), settings, 14);
    double previous = -1e300;
    for (int n = 1; n <= 40; ++n) {
        const auto mle = mle_reconstruct(records, settings, {n, 1e-7});
        CHECK(mle.log_likelihood >= previous - 1e-15);
        previous = mle.log_likelihood;
    }
}

TEST_CASE("round trip fidelity bound on random states") {
    const auto settings = TomographySettings::full({0.2, 1.0, 1.0, 1.0}, 10000, 1.0);
    const double bound = 1.0 - 5.0 / std::sqrt(10000.0 * 36.0);
    CounterRng rng(44, 0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const TwoQubitDensityMatrix rho(random_state(rng, 1 + static_cast<int>(seed % 4)));
        const auto mle = mle_reconstruct(simulate_records(rho, settings, seed), settings);
        CHECK_FALSE(mle.warning);
        CHECK(state_fidelity(mle.rho.matrix(), rho.matrix()) >= bound);
    }
}

TEST_CASE("noiseless Bell records invert to unit concurrence") {
    const auto settings = TomographySettings::full({0.0, 1.0, 1.0, 1.0}, 100, 1.0);
    const auto bell = TwoQubitDensityMatrix::from_pure(bell_odd());
    const auto li = linear_inversion(exact_records(bell.matrix(), settings), settings);
    CHECK(entangle::concurrence(project_to_physical(li.rho)) == doctest::Approx(1.0).epsilon(1e-8));
}
