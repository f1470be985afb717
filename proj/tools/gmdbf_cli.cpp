// SPDX-License-Identifier: Apache-2.0
//
// gmdbf: hybrid beamforming link-level simulation for RIS-assisted mmWave MIMO-OFDM
// Copyright (C) 2026 The gmdbf authors
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

// Command-line front end for the experiment harness.
//
//   gmdbf run          --config exp.cfg --out results.csv [--workers N] [--seed S]
//   gmdbf sweep-ncpe   --config exp.cfg --snr-db 20 --out results.csv [--ncpe-db -20:5:0]
//   gmdbf validate     --config exp.cfg
//   gmdbf dump-channel --config exp.cfg --link bs_to_ris --seed 1 --out h.txt

#include <gmdbf/gmdbf.hpp>

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Overrides {
    std::optional<int> workers;
    std::optional<std::uint64_t> seed;
};

gmdbf::ExperimentSpec load(const std::string& path, const Overrides& o)
{
    gmdbf::ExperimentSpec spec = gmdbf::load_experiment(path);
    if (o.workers)
        spec.workers = *o.workers;
    if (o.seed)
        spec.master_seed = *o.seed;
    spec.validate();
    return spec;
}

void run_and_write(const gmdbf::ExperimentSpec& spec, const std::string& out)
{
    const auto records = gmdbf::run_experiment(spec);
    gmdbf::emit_csv(records, out);
    std::cerr << "wrote " << records.size() << " records to " << out << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid beamforming link-level simulator for RIS-assisted mmWave MIMO-OFDM"};
    app.require_subcommand(1);

    std::string config, out, link = "bs_to_ris", ncpe_grid = "-20:5:0";
    double snr_db = 20.0;
    std::uint64_t channel_seed = 1;
    Overrides ov;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "Experiment config (key = value per line)")->required()->check(CLI::ExistingFile);
        sub->add_option("--workers", ov.workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);
        sub->add_option("--seed", ov.seed, "Master seed (overrides the config)");
    };

    CLI::App* run = app.add_subcommand("run", "Run the configured SNR (and optional NCPE) sweep");
    add_common(run);
    run->add_option("--out", out, "Output CSV path")->required();

    CLI::App* sweep = app.add_subcommand("sweep-ncpe", "Sweep NCPE at a fixed SNR");
    add_common(sweep);
    sweep->add_option("--snr-db", snr_db, "Fixed SNR in dB")->capture_default_str();
    sweep->add_option("--ncpe-db", ncpe_grid, "NCPE grid: 'a,b,c' or 'start:step:stop'")->capture_default_str();
    sweep->add_option("--out", out, "Output CSV path")->required();

    CLI::App* validate = app.add_subcommand("validate", "Parse and check a config without running it");
    validate->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);

    CLI::App* dump = app.add_subcommand("dump-channel", "Write one channel realization as text");
    dump->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
    dump->add_option("--link", link, "bs_to_ris, ris_to_ue or bs_to_ue")
        ->check(CLI::IsMember({"bs_to_ris", "ris_to_ue", "bs_to_ue"}))
        ->capture_default_str();
    dump->add_option("--seed", channel_seed, "Channel seed")->capture_default_str();
    dump->add_option("--out", out, "Output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            run_and_write(load(config, ov), out);
        } else if (*sweep) {
            gmdbf::ExperimentSpec spec = load(config, ov);
            spec.snr_grid_db = {snr_db};
            spec.ncpe_grid_db = gmdbf::detail::parse_grid("--ncpe-db", ncpe_grid);
            spec.validate();
            run_and_write(spec, out);
        } else if (*validate) {
            const gmdbf::ExperimentSpec spec = gmdbf::load_experiment(config);
            std::cout << "ok: " << spec.scheme_label() << ", " << gmdbf::to_string(spec.scenario) << ", "
                      << spec.snr_grid_db.size() << " SNR point(s) x "
                      << (spec.ncpe_grid_db ? spec.ncpe_grid_db->size() : 1) << " NCPE point(s) x " << spec.trials
                      << " trial(s)\n";
        } else if (*dump) {
            const gmdbf::ExperimentSpec spec = gmdbf::load_experiment(config);
            const gmdbf::LinkKind kind = link == "bs_to_ris" ? gmdbf::LinkKind::bs_to_ris
                                         : link == "ris_to_ue" ? gmdbf::LinkKind::ris_to_ue
                                                               : gmdbf::LinkKind::bs_to_ue;
            gmdbf::write_channel_dump(out, gmdbf::draw_channel(spec.cfg, kind, channel_seed));
        }
    } catch (const gmdbf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
