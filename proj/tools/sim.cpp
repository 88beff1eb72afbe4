// SPDX-License-Identifier: Apache-2.0
//
// nomasim: uplink Monte-Carlo simulator for code-domain NOMA in Massive MIMO
// Copyright (C) 2026 The nomasim authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// sim: command-line driver for the three sweeps.
//
//   sim angle-sweep    --config cfg.yaml --output out.csv [--seed S] [--trials T] [--workers W]
//   sim variance-sweep --config cfg.yaml --output out.csv
//   sim cluster-sweep  --config cfg.yaml --output out.csv [--seed S] [--trials T] [--workers W]

#include "nomasim/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace
{
    struct CommandLine
    {
        std::string config;
        std::string output;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> trials;
        std::optional<unsigned> workers;
    };

    void add_common(CLI::App &cmd, CommandLine &cl)
    {
        cmd.add_option("--config", cl.config, "YAML configuration file")->required()->check(CLI::ExistingFile);
        cmd.add_option("--output", cl.output, "CSV output path")->required();
        cmd.add_option("--seed", cl.seed, "base seed (overrides config)");
        cmd.add_option("--trials", cl.trials, "realizations per point (overrides config)")->check(CLI::PositiveNumber);
        cmd.add_option("--workers", cl.workers, "worker threads (overrides config)")->check(CLI::PositiveNumber);
    }
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Uplink Monte-Carlo simulator for code-domain NOMA in Massive MIMO"};
    app.require_subcommand(1);

    CommandLine cl;
    std::optional<nomasim::ExperimentKind> kind;
    for (auto k : {nomasim::ExperimentKind::angle_sweep, nomasim::ExperimentKind::variance_sweep,
                   nomasim::ExperimentKind::cluster_sweep})
    {
        const std::string name(nomasim::to_string(k));
        CLI::App *cmd = app.add_subcommand(name, "run the " + name);
        add_common(*cmd, cl);
        cmd->callback([&kind, k] { kind = k; });
    }

    CLI11_PARSE(app, argc, argv);

    try
    {
        nomasim::ExperimentConfig config = nomasim::load_config(cl.config, *kind);
        if (cl.seed)
            config.seed = *cl.seed;
        if (cl.trials)
            config.trials = *cl.trials;
        if (cl.workers)
            config.workers = *cl.workers;
        config.validate();

        const auto rows = nomasim::run_experiment(config, [](const std::string &msg) { std::cerr << msg << '\n'; });
        nomasim::write_csv(rows, cl.output);
        std::cerr << "wrote " << rows.size() << " rows to " << cl.output << '\n';
        return 0;
    }
    catch (const std::exception &e)
    {
        std::cerr << "sim: error: " << e.what() << '\n';
        return 2;
    }
}
