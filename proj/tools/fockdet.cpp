// Copyright 2026 The fockdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// fockdet: run photodetection scenarios from the command line.
//
//   fockdet pipeline <scenario.json>   apply superoperators, compare with closed forms
//   fockdet campaign <scenario.json>   Monte Carlo detection campaign
//   fockdet validate <scenario.json>   check a scenario and print its canonical form

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "fockdet/fockdet.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fockdet::Error(fockdet::ErrorKind::Validation, path + ": cannot open scenario file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw fockdet::Error(fockdet::ErrorKind::Validation, path + ": cannot open output file");
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fock-space photodetection simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string output;
    std::string format;
    std::string records_path;

    app.add_option("--seed", seed, "Override the scenario's RNG seed");
    app.add_option("--threads", threads, "Worker threads for campaigns")->check(CLI::PositiveNumber);
    app.add_option("--output", output, "Output file ('-' for stdout); defaults to the scenario's output.path");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));

    auto* pipeline = app.add_subcommand("pipeline", "Apply the scenario's operations to its initial state");
    auto* campaign = app.add_subcommand("campaign", "Run a Monte Carlo detection campaign");
    auto* validate = app.add_subcommand("validate", "Validate a scenario and print its canonical form");
    for (auto* sub : {pipeline, campaign, validate}) {
        sub->add_option("scenario", scenario_path, "Scenario file (JSON)")->required();
    }
    campaign->add_option("--records", records_path, "Write every trial record as JSON lines to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        fockdet::Scenario scenario = fockdet::parse_scenario(read_file(scenario_path));
        if (seed) scenario.seed = *seed;
        if (!format.empty()) scenario.output.format = fockdet::parse_format(format, "--format");
        const std::string out_path = !output.empty() ? output : scenario.output.path.value_or("");

        if (validate->parsed()) {
            emit(out_path, [&](std::ostream& out) { out << fockdet::serialize(scenario); });
        } else if (pipeline->parsed()) {
            const auto result = fockdet::run_pipeline(scenario);
            emit(out_path, [&](std::ostream& out) { fockdet::write_result(out, result, scenario.output.format); });
        } else {
            std::ofstream records;
            fockdet::RecordSink sink;
            if (!records_path.empty()) {
                records.open(records_path);
                if (!records) {
                    throw fockdet::Error(fockdet::ErrorKind::Validation, records_path + ": cannot open records file");
                }
                sink = [&records](const fockdet::DetectionRecord& rec, std::uint64_t trial) {
                    records << fockdet::to_json_line(rec, trial) << '\n';
                };
            }
            const auto result = fockdet::run_campaign(scenario, threads, sink);
            emit(out_path, [&](std::ostream& out) { fockdet::write_result(out, result, scenario.output.format); });
        }
    } catch (const fockdet::Error& e) {
        std::cerr << "fockdet: " << e.what() << '\n';
        return e.kind() == fockdet::ErrorKind::Validation ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "fockdet: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
