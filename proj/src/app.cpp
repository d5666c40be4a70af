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

#include "qfb/app.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

#include "experiments.hpp"
#include "qfb/error.hpp"

namespace qfb::app {

namespace {

struct Entry {
    const char* name;
    ExperimentFn fn;
};

constexpr Entry kExperiments[] = {
    {"reset-sweep", reset_sweep},
    {"repeated-init", repeated_init},
    {"readout-bench", readout_bench},
    {"qnd-bench", qnd_bench},
    {"parity-dephasing", parity_dephasing},
    {"parity-fidelity", parity_fidelity},
    {"entangle-postselect", entangle_postselect},
    {"entangle-feedback", entangle_feedback},
    {"tomo-demo", tomo_demo},
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

Context::Context(std::uint64_t seed, unsigned threads, std::filesystem::path out_dir)
    : seed_(seed), threads_(std::max(1u, threads)), out_dir_(std::move(out_dir)) {}

void Context::write(const std::string& name, const std::string& content) {
    std::filesystem::create_directories(out_dir_);
    const auto path = out_dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::filesystem::filesystem_error("cannot write artifact", path,
                                                std::make_error_code(std::errc::permission_denied));
    }
    out << content;
    out.close();
    if (!out) {
        throw std::filesystem::filesystem_error("write failed", path, std::make_error_code(std::errc::io_error));
    }
    if (std::find(files_.begin(), files_.end(), name) == files_.end()) {
        files_.push_back(name);
    }
}

void Context::fail_numerically(const std::string& message) {
    warnings_.push_back(message);
    numerical_failure_ = true;
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kExperiments) {
            v.emplace_back(e.name);
        }
        return v;
    }();
    return names;
}

RunReport run(const RunRequest& request, std::ostream& log) {
    RunReport report;
    const Entry* entry = nullptr;
    for (const auto& e : kExperiments) {
        if (request.experiment == e.name) {
            entry = &e;
        }
    }
    if (entry == nullptr) {
        std::string list;
        for (const auto& n : experiment_names()) {
            list += "\n  " + n;
        }
        report.exit_code = kExitConfig;
        report.message = "unknown experiment '" + request.experiment + "'; valid experiments:" + list;
        log << "error: " << report.message << '\n';
        return report;
    }

    const std::string started = utc_now();
    try {
        const config::Json cfg = config::load_file(request.config_path);
        config::Block root(cfg, "");
        const std::string named = root.text_or("experiment", request.experiment);
        if (named != request.experiment) {
            throw ConfigError("config: experiment: file is for '" + named + "', not '" + request.experiment + "'");
        }
        const auto seed_cfg = root.integer_or("seed", 1, 0, std::numeric_limits<std::int64_t>::max());
        const std::uint64_t seed = request.seed ? *request.seed : static_cast<std::uint64_t>(seed_cfg);
        const std::string out_cfg = root.text_or("output_dir", "out/" + request.experiment);
        report.out_dir = request.out_dir ? *request.out_dir : std::filesystem::path(out_cfg);

        Context ctx(seed, request.threads, report.out_dir);
        entry->fn(root, ctx);

        config::Json files = config::Json::array();
        for (const auto& name : ctx.files()) {
            const std::string bytes = read_bytes(report.out_dir / name);
            files.push_back({{"name", name},
                             {"bytes", bytes.size()},
                             {"hash", "fnv1a64:" + config::hex64(config::fnv1a64(bytes))}});
        }
        nlohmann::ordered_json manifest;
        manifest["tool"] = kToolName;
        manifest["version"] = kVersion;
        manifest["experiment"] = request.experiment;
        manifest["config_path"] = request.config_path.string();
        manifest["config_hash"] = config::config_hash(cfg);
        manifest["seed"] = seed;
        manifest["threads"] = ctx.threads();
        manifest["started_utc"] = started;
        manifest["finished_utc"] = utc_now();
        manifest["files"] = files;
        manifest["status"] = ctx.numerical_failure() ? "not_converged" : "ok";
        manifest["warnings"] = ctx.warnings();
        ctx.write("manifest.json", manifest.dump(2) + "\n");

        report.files = ctx.files();
        report.files.erase(std::remove(report.files.begin(), report.files.end(), "manifest.json"),
                           report.files.end());
        report.warnings = ctx.warnings();
        for (const auto& w : report.warnings) {
            log << "warning: " << w << '\n';
        }
        if (ctx.numerical_failure()) {
            report.exit_code = kExitNumerical;
            report.message = "numerical routine did not converge";
        }
    } catch (const ConfigError& e) {
        report.exit_code = kExitConfig;
        report.message = e.what();
    } catch (const ArgumentError& e) {
        report.exit_code = kExitConfig;
        report.message = std::string("invalid parameter: ") + e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        report.exit_code = kExitConfig;
        report.message = e.what();
    } catch (const NumericalError& e) {
        report.exit_code = kExitNumerical;
        report.message = std::string("numerical failure: ") + e.what();
    }
    if (report.exit_code != kExitOk) {
        log << "error: " << report.message << '\n';
    }
    return report;
}

}  // namespace qfb::app
