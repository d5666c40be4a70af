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

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "qfb/app.hpp"
#include "qfb/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Digital feedback and parity-measurement experiments", "qfb"};
    cli.set_version_flag("--version", qfb::app::kVersion);

    std::string experiment;
    std::string names;
    for (const auto& n : qfb::app::experiment_names()) {
        names += "\n  " + n;
    }
    cli.add_option("experiment", experiment, "Experiment to run:" + names)->required();

    std::string config;
    std::uint64_t seed = 0;
    unsigned threads = qfb::default_threads();
    std::string out_dir;
    cli.add_option("--config", config, "TOML or JSON configuration file")->required();
    auto* seed_opt = cli.add_option("--seed", seed, "Override the configured seed");
    cli.add_option("--threads", threads, "Worker threads (default: hardware parallelism)")
        ->check(CLI::PositiveNumber);
    auto* out_opt = cli.add_option("--out-dir", out_dir, "Override the configured output directory");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return qfb::app::kExitConfig;
    }

    qfb::app::RunRequest request;
    request.experiment = experiment;
    request.config_path = config;
    request.threads = threads;
    if (*seed_opt) {
        request.seed = seed;
    }
    if (*out_opt) {
        request.out_dir = out_dir;
    }
    const auto report = qfb::app::run(request, std::cerr);
    if (report.exit_code == qfb::app::kExitOk) {
        std::cout << "wrote " << report.files.size() << " artifacts to " << report.out_dir.string() << '\n';
    }
    return report.exit_code;
}
