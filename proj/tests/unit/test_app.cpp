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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "qfb/app.hpp"
#include "qfb/config.hpp"

using namespace qfb;
namespace fs = std::filesystem;

namespace {

const std::string kRates = R"(
[rates]
t01_us = 324.0
t10_us = 50.0
t12_us = 111.0
t21_us = 20.0

[shot_model]
mu = [1.0, -1.0, -1.0]
sigma = 0.377
t_meas_us = 0.4
window_start_us = 0.2
window_length_us = 0.2

[feedback]
threshold = 0.0
controller = "adwin"
)";

const std::string kParity = R"(
[cavity]
preset = "parity_reference"

[parity]
tau_p_us = 0.3

[decoherence]
t1_a_us = 23.0
t1_b_us = 27.0
duration_us = 0.65
)";

// Small configurations that finish in well under a second each.
const std::map<std::string, std::string>& small_configs() {
    static const std::map<std::string, std::string> m = {
        {"reset-sweep", "n_shots = 2000\n" + kRates + "\n[sweep]\ntheta_points = 3\nprotocols = [\"none\", \"Fb0\"]\n"},
        {"repeated-init", "n_cycles = 200\n" + kRates +
                              "\n[sweep]\ntau_init_us = [0.0, 5.0]\nprotocols = [\"Fb0\"]\n"
                              "algorithms = [\"leave_ground\"]\nrate_variants = [\"measured\"]\n"},
        {"readout-bench", "n_shots = 3000\n[register]\npreset = \"reference\"\n[rabi]\nangles = 3\n"
                          "shots_per_angle = 500\n[histogram]\nbins = 20\nscan_points = 11\n"},
        {"qnd-bench", "n_shots = 2000\n[register]\npreset = \"reference\"\n[qnd]\ntau_us = [0.0, 1.0]\n"
                      "rotations_rad = [0.0]\ncalibration_shots = 2000\n"},
        {"parity-dephasing", "[cavity]\npreset = \"parity_reference\"\n[sweep]\ntau_p_us = [0.1, 0.3]\n"
                             "trajectory_tau_p_us = 0.3\n"},
        {"parity-fidelity", "[cavity]\npreset = \"parity_reference\"\n[sweep]\ntau_p_us = [0.2]\neta = [0.5, 1.0]\n"},
        {"entangle-postselect", "n_shots = 2000\n" + kParity},
        {"entangle-feedback", "n_shots = 2000\n" + kParity + "\n[feedback]\nphi_points = 8\n"},
        {"tomo-demo", "[tomography]\nset = \"minimal\"\nshots_per_setting = 1000\n[state]\nkind = \"bell_odd\"\n"
                      "pure_weight = 0.8\n"},
    };
    return m;
}

struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("qfb_app_test_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path file(const std::string& name, const std::string& text) const {
        std::ofstream(dir / name) << text;
        return dir / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

app::RunReport run(const std::string& experiment, const fs::path& cfg, const fs::path& out, unsigned threads = 1,
                   std::optional<std::uint64_t> seed = std::nullopt) {
    std::ostringstream log;
    app::RunRequest req{experiment, cfg, seed, threads, out};
    return app::run(req, log);
}

}  // namespace

TEST_CASE("experiment registry") {
    const auto& names = app::experiment_names();
    CHECK(names.size() == 9);
    for (const auto& [name, text] : small_configs()) {
        CHECK(std::find(names.begin(), names.end(), name) != names.end());
    }
}

TEST_CASE("unknown experiment lists the valid names") {
    std::ostringstream log;
    const auto r = app::run({"reset", "x.toml", std::nullopt, 1, std::nullopt}, log);
    CHECK(r.exit_code == app::kExitConfig);
    CHECK(r.message.find("reset-sweep") != std::string::npos);
    CHECK(r.message.find("tomo-demo") != std::string::npos);
    CHECK(log.str().find("error:") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 2") {
    Scratch s("config_errors");
    CHECK(run("tomo-demo", s.dir / "missing.toml", s.dir / "o").exit_code == app::kExitConfig);
    const auto wrong = s.file("wrong.toml", "experiment = \"qnd-bench\"\n");
    const auto r = run("tomo-demo", wrong, s.dir / "o");
    CHECK(r.exit_code == app::kExitConfig);
    CHECK(r.message.find("qnd-bench") != std::string::npos);
    const auto typo = s.file("typo.toml", small_configs().at("tomo-demo") + "\n[extra]\nx = 1\n");
    CHECK(run("tomo-demo", typo, s.dir / "o").exit_code == app::kExitConfig);
    const auto syntax = s.file("syntax.toml", "[tomography\n");
    CHECK(run("tomo-demo", syntax, s.dir / "o").exit_code == app::kExitConfig);
    const auto range = s.file("range.toml", "n_shots = 0\n" + kParity);
    const auto rr = run("entangle-postselect", range, s.dir / "o");
    CHECK(rr.exit_code == app::kExitConfig);
    CHECK(rr.message.find("n_shots") != std::string::npos);
    const auto blind = s.file("blind.toml", "[tomography]\nbeta = [0.0, 1.0, 1.0, 0.0]\n");
    CHECK(run("tomo-demo", blind, s.dir / "o").exit_code == app::kExitConfig);
}

TEST_CASE("every experiment runs and writes a manifest") {
    Scratch s("all");
    for (const auto& [name, text] : small_configs()) {
        CAPTURE(name);
        const auto cfg = s.file(name + ".toml", "experiment = \"" + name + "\"\nseed = 4\n" + text);
        const auto out = s.dir / name;
        const auto r = run(name, cfg, out);
        REQUIRE_MESSAGE(r.exit_code == app::kExitOk, r.message);
        CHECK_FALSE(r.files.empty());
        const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
        CHECK(manifest.at("tool") == "qfb");
        CHECK(manifest.at("version") == app::kVersion);
        CHECK(manifest.at("experiment") == name);
        CHECK(manifest.at("seed") == 4);
        CHECK(manifest.at("status") == "ok");
        CHECK(manifest.at("config_hash") == config::config_hash(config::load_file(cfg)));
        REQUIRE(manifest.at("files").size() == r.files.size());
        for (const auto& f : manifest.at("files")) {
            const std::string bytes = slurp(out / f.at("name").get<std::string>());
            CHECK(f.at("bytes") == bytes.size());
            CHECK(f.at("hash") == "fnv1a64:" + config::hex64(config::fnv1a64(bytes)));
        }
    }
}

TEST_CASE("artifacts do not depend on the thread count") {
    Scratch s("threads");
    for (const auto& [name, text] : small_configs()) {
        CAPTURE(name);
        const auto cfg = s.file(name + ".toml", text);
        const auto one = run(name, cfg, s.dir / (name + "_1"), 1);
        const auto many = run(name, cfg, s.dir / (name + "_4"), 4);
        REQUIRE(one.exit_code == app::kExitOk);
        REQUIRE(many.exit_code == app::kExitOk);
        REQUIRE(one.files == many.files);
        for (const auto& f : one.files) {
            CAPTURE(f);
            CHECK(slurp(s.dir / (name + "_1") / f) == slurp(s.dir / (name + "_4") / f));
        }
    }
}

TEST_CASE("seed override changes stochastic output") {
    Scratch s("seed");
    const auto cfg = s.file("c.toml", "seed = 1\n" + small_configs().at("tomo-demo"));
    REQUIRE(run("tomo-demo", cfg, s.dir / "a").exit_code == 0);
    REQUIRE(run("tomo-demo", cfg, s.dir / "b", 1, 1).exit_code == 0);
    REQUIRE(run("tomo-demo", cfg, s.dir / "c", 1, 2).exit_code == 0);
    CHECK(slurp(s.dir / "a" / "records.csv") == slurp(s.dir / "b" / "records.csv"));
    CHECK(slurp(s.dir / "a" / "records.csv") != slurp(s.dir / "c" / "records.csv"));
    CHECK(nlohmann::json::parse(slurp(s.dir / "c" / "manifest.json")).at("seed") == 2);
}

TEST_CASE("non-converged reconstruction exits with code 3") {
    Scratch s("mle");
    const auto cfg = s.file("c.toml", small_configs().at("tomo-demo") + "\n[mle]\nmax_iterations = 1\n");
    const auto r = run("tomo-demo", cfg, s.dir / "o");
    CHECK(r.exit_code == app::kExitNumerical);
    CHECK_FALSE(r.warnings.empty());
    const auto manifest = nlohmann::json::parse(slurp(s.dir / "o" / "manifest.json"));
    CHECK(manifest.at("status") == "not_converged");
    CHECK(fs::exists(s.dir / "o" / "state_mle.json"));
}

TEST_CASE("output directory defaults from the config") {
    Scratch s("outdir");
    const auto cfg = s.file("c.toml", "output_dir = \"" + (s.dir / "from_cfg").generic_string() + "\"\n" +
                                          small_configs().at("parity-fidelity"));
    std::ostringstream log;
    const auto r = app::run({"parity-fidelity", cfg, std::nullopt, 1, std::nullopt}, log);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(s.dir / "from_cfg" / "manifest.json"));
}
