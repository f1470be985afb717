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

#ifndef GMDBF_HARNESS_HPP
#define GMDBF_HARNESS_HPP

#include "link.hpp"
#include "ris.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace gmdbf {

enum class Scenario { ris_assisted, nlos_direct };
enum class RisDesign { los_aligned, full_reflection, random, none };

inline const char* to_string(Scenario s) { return s == Scenario::ris_assisted ? "ris_assisted" : "nlos_direct"; }

inline const char* to_string(RisDesign r)
{
    switch (r) {
    case RisDesign::los_aligned: return "los_aligned";
    case RisDesign::full_reflection: return "full_reflection";
    case RisDesign::random: return "random";
    case RisDesign::none: return "none";
    }
    return "?";
}

// ---- scheme design --------------------------------------------------------

struct DesignedLink {
    BeamformerSet bf;
    Detector det;
};

/// Baseband stage on top of a fixed RF stage. `snr_db` only matters for water-filling.
inline DesignedLink design_baseband(const MatrixList& h_design, const AnalogStage& rf, BasebandScheme kind, int n_s, double snr_db)
{
    DesignedLink out;
    out.bf.f_rf = rf.f_rf;
    out.bf.w_rf = rf.w_rf;
    out.bf.selected_tx_atoms = rf.tx_atoms;
    out.bf.selected_rx_atoms = rf.rx_atoms;
    out.bf.scheme_tag = to_string(kind);
    out.det.kind = kind;
    const MatrixList h_hat = effective_baseband(h_design, rf.w_rf, rf.f_rf);
    if (kind == BasebandScheme::gmd) {
        GmdBaseband g = gmd_baseband(h_hat, rf.f_rf, n_s);
        for (std::size_t k = 0; k < h_hat.size(); ++k)
            out.det.triangular.push_back(g.detector_matrix(k));
        out.bf.f_bb = std::move(g.f_bb);
        out.bf.w_bb = std::move(g.w_bb);
    } else {
        SvdBaseband s = svd_baseband_waterfilling(h_hat, rf.f_rf, n_s, std::pow(10.0, snr_db / 10.0));
        for (std::size_t k = 0; k < h_hat.size(); ++k)
            out.det.amplitude.push_back(s.stream_amplitude(k));
        out.bf.f_bb = std::move(s.f_bb);
        out.bf.w_bb = std::move(s.w_bb);
    }
    return out;
}

// ---- experiment spec ------------------------------------------------------

struct ExperimentSpec {
    SystemConfig cfg;
    Scenario scenario = Scenario::ris_assisted;
    BasebandScheme baseband = BasebandScheme::gmd;
    AnalogScheme analog = AnalogScheme::codebook_somp;
    std::optional<RisDesign> ris_design; // defaults per scenario
    std::vector<double> snr_grid_db{0.0};
    std::optional<std::vector<double>> ncpe_grid_db;
    int trials = 20;
    int frames_per_trial = 100;
    std::uint64_t master_seed = 1;
    int workers = 1;
    std::string label; // empty: derived from the scheme
    bool record_wall_time = false;

    RisDesign effective_ris_design() const
    {
        return ris_design.value_or(scenario == Scenario::nlos_direct ? RisDesign::none : RisDesign::los_aligned);
    }

    std::string scheme_label() const
    {
        if (!label.empty())
            return label;
        std::string s = std::string(to_string(baseband)) + "/";
        s += analog == AnalogScheme::codebook_somp ? "somp_rho" + std::to_string(cfg.rho) : to_string(analog);
        return s + "/" + to_string(effective_ris_design());
    }

    void validate() const
    {
        cfg.validate();
        auto fail = [](const std::string& m) { throw Error(ErrorKind::config, m); };
        if (trials < 1 || frames_per_trial < 1)
            fail("trials and frames_per_trial must be >= 1");
        if (workers < 1)
            fail("workers must be >= 1");
        if (snr_grid_db.empty())
            fail("snr_grid_db must not be empty");
        if (ncpe_grid_db && ncpe_grid_db->empty())
            fail("ncpe_grid_db, when given, must not be empty");
        for (double v : snr_grid_db)
            if (!std::isfinite(v))
                fail("snr_grid_db entries must be finite");
        const RisDesign r = effective_ris_design();
        if (scenario == Scenario::nlos_direct && r != RisDesign::none)
            fail("nlos_direct scenario requires ris_design = none");
        if (scenario == Scenario::ris_assisted && r == RisDesign::none)
            fail("ris_assisted scenario needs a RIS design");
        if (label.find_first_of(",\n\r\"") != std::string::npos)
            fail("label must not contain commas, quotes or newlines");
    }
};

namespace detail {

    inline std::string trim(std::string_view s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string_view::npos)
            return {};
        const auto e = s.find_last_not_of(" \t\r");
        return std::string(s.substr(b, e - b + 1));
    }

    template <typename T>
    T parse_number(const std::string& key, const std::string& v)
    {
        T out{};
        const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
        if (res.ec != std::errc() || res.ptr != v.data() + v.size())
            throw Error(ErrorKind::config, "key '" + key + "': cannot parse '" + v + "' as a number");
        return out;
    }

    /// "a,b,c" or "start:step:stop" (inclusive).
    inline std::vector<double> parse_grid(const std::string& key, const std::string& v)
    {
        std::vector<double> out;
        if (v.find(':') != std::string::npos) {
            std::vector<double> parts;
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ':'))
                parts.push_back(parse_number<double>(key, trim(item)));
            if (parts.size() != 3 || !(parts[1] > 0.0) || parts[2] < parts[0])
                throw Error(ErrorKind::config, "key '" + key + "': range must be start:step:stop with step > 0");
            const auto n = static_cast<long>(std::floor((parts[2] - parts[0]) / parts[1] + 1e-9));
            for (long i = 0; i <= n; ++i)
                out.push_back(parts[0] + static_cast<double>(i) * parts[1]);
            return out;
        }
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(parse_number<double>(key, trim(item)));
        return out;
    }

    inline bool parse_bool(const std::string& key, const std::string& v)
    {
        if (v == "true" || v == "1")
            return true;
        if (v == "false" || v == "0")
            return false;
        throw Error(ErrorKind::config, "key '" + key + "': expected true/false");
    }

} // namespace detail

/// Flat "key = value" document; '#' starts a comment. Unknown keys are rejected.
inline ExperimentSpec parse_experiment(std::istream& is)
{
    using detail::parse_number;
    ExperimentSpec spec;
    SystemConfig& c = spec.cfg;
    std::string raw;
    int line_no = 0;
    std::map<std::string, int> seen;
    while (std::getline(is, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(std::string_view(raw).substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = detail::trim(std::string_view(line).substr(0, eq));
        const std::string v = detail::trim(std::string_view(line).substr(eq + 1));
        if (seen[key]++)
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");

        auto enum_value = [&](std::initializer_list<const char*> names) {
            int i = 0;
            for (const char* n : names) {
                if (v == n)
                    return i;
                ++i;
            }
            throw Error(ErrorKind::config, "key '" + key + "': unknown value '" + v + "'");
        };

        std::map<std::string, int*> ints = {
            {"n_t_y", &c.n_t_y}, {"n_t_z", &c.n_t_z}, {"n_r_y", &c.n_r_y}, {"n_r_z", &c.n_r_z},
            {"n_u_y", &c.n_u_y}, {"n_u_z", &c.n_u_z}, {"m_t", &c.m_t},     {"m_r", &c.m_r},
            {"n_s", &c.n_s},     {"k_sc", &c.k_sc},   {"d_l", &c.d_l},     {"n_c", &c.n_c},
            {"n_p", &c.n_p},     {"rho", &c.rho},     {"trials", &spec.trials},
            {"frames_per_trial", &spec.frames_per_trial}, {"workers", &spec.workers}};
        std::map<std::string, double*> reals = {{"mu", &c.mu},
                                                {"angle_spread", &c.angle_spread},
                                                {"carrier_hz", &c.carrier_hz},
                                                {"spacing_wavelengths", &c.spacing_wavelengths},
                                                {"rolloff", &c.rolloff}};
        if (auto it = ints.find(key); it != ints.end())
            *it->second = parse_number<int>(key, v);
        else if (auto jt = reals.find(key); jt != reals.end())
            *jt->second = parse_number<double>(key, v);
        else if (key == "pulse")
            c.pulse = static_cast<PulseShape>(enum_value({"raised_cosine", "sinc", "rectangular"}));
        else if (key == "scenario")
            spec.scenario = static_cast<Scenario>(enum_value({"ris_assisted", "nlos_direct"}));
        else if (key == "baseband")
            spec.baseband = static_cast<BasebandScheme>(enum_value({"gmd", "svd_waterfilling"}));
        else if (key == "analog")
            spec.analog = static_cast<AnalogScheme>(enum_value({"fully_digital", "ideal_somp", "codebook_somp"}));
        else if (key == "ris_design")
            spec.ris_design = static_cast<RisDesign>(enum_value({"los_aligned", "full_reflection", "random", "none"}));
        else if (key == "snr_grid_db")
            spec.snr_grid_db = detail::parse_grid(key, v);
        else if (key == "ncpe_grid_db")
            spec.ncpe_grid_db = detail::parse_grid(key, v);
        else if (key == "master_seed")
            spec.master_seed = parse_number<std::uint64_t>(key, v);
        else if (key == "label")
            spec.label = v;
        else if (key == "record_wall_time")
            spec.record_wall_time = detail::parse_bool(key, v);
        else
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    spec.validate();
    return spec;
}

inline ExperimentSpec parse_experiment(const std::string& text)
{
    std::istringstream is(text);
    return parse_experiment(is);
}

inline ExperimentSpec load_experiment(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        throw Error(ErrorKind::io, "cannot open config '" + path + "'");
    try {
        return parse_experiment(is);
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.detail());
    }
}

// ---- records --------------------------------------------------------------

struct TrialRecord {
    std::string scheme;
    std::string scenario;
    double snr_db = 0.0;
    double ncpe_db = std::numeric_limits<double>::quiet_NaN(); // NaN: unperturbed
    std::uint64_t seed = 0;
    double ber = 0.0;
    double se = 0.0;
    double wall_ms = 0.0;
    // Not persisted; kept for pooled statistics in-process.
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_total = 0;
};

inline constexpr std::string_view csv_header = "scheme,scenario,snr_db,ncpe_db,seed,ber,se,wall_ms";

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& records)
{
    os << csv_header << '\n';
    for (const auto& r : records)
        os << r.scheme << ',' << r.scenario << ',' << format_double(r.snr_db) << ',' << format_double(r.ncpe_db) << ','
           << r.seed << ',' << format_double(r.ber) << ',' << format_double(r.se) << ',' << format_double(r.wall_ms)
           << '\n';
}

inline void emit_csv(const std::vector<TrialRecord>& records, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorKind::io, "cannot open '" + path + "' for writing");
    write_csv(os, records);
    os.flush();
    if (!os)
        throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

inline std::vector<TrialRecord> read_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line) || line != csv_header)
        throw Error(ErrorKind::io, "CSV header mismatch");
    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ','))
            f.push_back(item);
        if (f.size() != 8)
            throw Error(ErrorKind::io, "CSV row has " + std::to_string(f.size()) + " fields: '" + line + "'");
        auto num = [&](const std::string& s) {
            if (s == "nan")
                return std::numeric_limits<double>::quiet_NaN();
            return detail::parse_number<double>("csv", s);
        };
        TrialRecord r;
        r.scheme = f[0];
        r.scenario = f[1];
        r.snr_db = num(f[2]);
        r.ncpe_db = num(f[3]);
        r.seed = detail::parse_number<std::uint64_t>("csv", f[4]);
        r.ber = num(f[5]);
        r.se = num(f[6]);
        r.wall_ms = num(f[7]);
        out.push_back(r);
    }
    return out;
}

// ---- runner ---------------------------------------------------------------

namespace seed_tag {
    inline constexpr std::uint64_t bs_to_ris = 1, ris_to_ue = 2, ris_random = 3, direct = 4, perturb = 5, frames = 6;
}

/// Child seed of trial `t`; every random quantity of the trial derives from it.
inline std::uint64_t trial_seed(std::uint64_t master, int t) { return derive_seed(master, {static_cast<std::uint64_t>(t)}); }

/// Channels and RIS configuration of one trial; identical across schemes sharing a master seed.
struct TrialChannels {
    std::optional<ChannelRealization> h1, h2, direct;
    RisPhases phi;
    MatrixList h_eff;
};

inline TrialChannels draw_trial_channels(const ExperimentSpec& spec, std::uint64_t seed)
{
    TrialChannels tc;
    const SystemConfig& cfg = spec.cfg;
    if (spec.scenario == Scenario::nlos_direct) {
        tc.direct = draw_channel(cfg, LinkKind::bs_to_ue, derive_seed(seed, {seed_tag::direct}), false);
        tc.h_eff = tc.direct->freq;
        return tc;
    }
    tc.h1 = draw_channel(cfg, LinkKind::bs_to_ris, derive_seed(seed, {seed_tag::bs_to_ris}));
    tc.h2 = draw_channel(cfg, LinkKind::ris_to_ue, derive_seed(seed, {seed_tag::ris_to_ue}));
    const ArrayDims ris{cfg.n_u_y, cfg.n_u_z};
    switch (spec.effective_ris_design()) {
    case RisDesign::los_aligned:
        tc.phi = los_phase_design(los_geometry(*tc.h1, *tc.h2), ris, cfg.spacing_wavelengths);
        break;
    case RisDesign::full_reflection: tc.phi = full_reflection(ris.count()); break;
    case RisDesign::random: tc.phi = random_phases(ris.count(), derive_seed(seed, {seed_tag::ris_random})); break;
    case RisDesign::none: throw Error(ErrorKind::config, "ris_assisted scenario needs a RIS design");
    }
    tc.h_eff = effective_channel(*tc.h1, *tc.h2, tc.phi);
    return tc;
}

/// RF stage for the configured analog scheme, designed on `h_design`.
inline AnalogStage design_analog(const ExperimentSpec& spec, const TrialChannels& tc, const MatrixList& h_design,
                                 const Codebook* tx_codebook, const Codebook* rx_codebook)
{
    const SystemConfig& cfg = spec.cfg;
    switch (spec.analog) {
    case AnalogScheme::fully_digital: return identity_analog(cfg.n_t(), cfg.n_r());
    case AnalogScheme::codebook_somp: return somp_analog(h_design, cfg.n_s, cfg.m_t, cfg.m_r, *tx_codebook, *rx_codebook);
    case AnalogScheme::ideal_somp: {
        const auto& tx_paths = tc.direct ? tc.direct->paths : tc.h1->paths;
        const auto& rx_paths = tc.direct ? tc.direct->paths : tc.h2->paths;
        const Codebook tx = build_steering_dictionary(tx_paths, ArraySide::transmit, cfg.n_t_y, cfg.n_t_z, cfg.spacing_wavelengths);
        const Codebook rx = build_steering_dictionary(rx_paths, ArraySide::receive, cfg.n_r_y, cfg.n_r_z, cfg.spacing_wavelengths);
        return somp_analog(h_design, cfg.n_s, cfg.m_t, cfg.m_r, tx, rx);
    }
    }
    throw Error(ErrorKind::config, "unknown analog scheme");
}

/// Design-side effective channel after perturbing each hop to the requested NCPE.
inline MatrixList perturbed_design_channel(const TrialChannels& tc, double ncpe_db, std::uint64_t seed, std::size_t grid_index)
{
    auto perturb = [&](const ChannelRealization& h, std::uint64_t link) {
        return perturb_channel(h, {sigma_sq_for_ncpe(h, ncpe_db)},
                               derive_seed(seed, {seed_tag::perturb, static_cast<std::uint64_t>(grid_index), link}))
            .channel;
    };
    if (tc.direct)
        return perturb(*tc.direct, seed_tag::direct).freq;
    const auto h1 = perturb(*tc.h1, seed_tag::bs_to_ris);
    const auto h2 = perturb(*tc.h2, seed_tag::ris_to_ue);
    return effective_channel(h1, h2, tc.phi);
}

/// Runs every (NCPE point, SNR point, trial) combination. Output is ordered grid-major
/// (NCPE outer, SNR inner) then by trial, and does not depend on the worker count.
inline std::vector<TrialRecord> run_experiment(const ExperimentSpec& spec)
{
    spec.validate();
    const SystemConfig& cfg = spec.cfg;
    const std::vector<double> ncpe_points = spec.ncpe_grid_db.value_or(std::vector<double>{std::numeric_limits<double>::quiet_NaN()});
    const std::size_t n_snr = spec.snr_grid_db.size();
    const std::size_t n_points = ncpe_points.size() * n_snr;
    const std::string scheme = spec.scheme_label();

    std::optional<Codebook> tx_cb, rx_cb;
    if (spec.analog == AnalogScheme::codebook_somp) {
        tx_cb = build_dft_codebook(cfg.n_t_y, cfg.n_t_z, cfg.rho);
        rx_cb = build_dft_codebook(cfg.n_r_y, cfg.n_r_z, cfg.rho);
    }

    std::vector<TrialRecord> grid(n_points * spec.trials);
    auto run_trial = [&](int t) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = trial_seed(spec.master_seed, t);
        const TrialChannels tc = draw_trial_channels(spec, seed);
        const std::uint64_t frame_seed = derive_seed(seed, {seed_tag::frames});
        for (std::size_t j = 0; j < ncpe_points.size(); ++j) {
            const bool perturbed = spec.ncpe_grid_db.has_value();
            const MatrixList h_design = perturbed ? perturbed_design_channel(tc, ncpe_points[j], seed, j) : tc.h_eff;
            const AnalogStage rf = design_analog(spec, tc, h_design, tx_cb ? &*tx_cb : nullptr, rx_cb ? &*rx_cb : nullptr);
            std::optional<DesignedLink> fixed;
            if (spec.baseband == BasebandScheme::gmd)
                fixed = design_baseband(h_design, rf, spec.baseband, cfg.n_s, 0.0);
            for (std::size_t i = 0; i < n_snr; ++i) {
                const double snr = spec.snr_grid_db[i];
                const DesignedLink link = fixed ? *fixed : design_baseband(h_design, rf, spec.baseband, cfg.n_s, snr);
                const double noise_var = noise_variance(snr, cfg.n_s);
                const LinkResult lr = simulate_frames(link_maps(tc.h_eff, link.bf), link.det, noise_var, spec.frames_per_trial, frame_seed);
                TrialRecord& r = grid[(j * n_snr + i) * spec.trials + t];
                r.scheme = scheme;
                r.scenario = to_string(spec.scenario);
                r.snr_db = snr;
                r.ncpe_db = ncpe_points[j];
                r.seed = seed;
                r.bit_errors = lr.bit_errors;
                r.bits_total = lr.bits_total;
                r.ber = lr.ber();
                r.se = spectral_efficiency(tc.h_eff, link.bf, noise_var).bits_per_hz;
            }
        }
        if (spec.record_wall_time) {
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            for (std::size_t p = 0; p < n_points; ++p)
                grid[p * spec.trials + t].wall_ms = ms;
        }
    };

    const int workers = std::min(spec.workers, spec.trials);
    if (workers <= 1) {
        for (int t = 0; t < spec.trials; ++t)
            run_trial(t);
        return grid;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int t = next++; t < spec.trials; t = next++) {
                try {
                    run_trial(t);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool)
        th.join();
    if (failure)
        std::rethrow_exception(failure);
    return grid;
}

// ---- pooled statistics ------------------------------------------------------

struct PooledPoint {
    double snr_db = 0.0;
    double ncpe_db = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_total = 0;
    double se_mean = 0.0;
    int trials = 0;

    double ber() const { return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total) : 0.0; }
    /// Binomial standard error of the pooled BER.
    double ber_stderr() const
    {
        const double p = ber();
        return bits_total ? std::sqrt(p * (1.0 - p) / static_cast<double>(bits_total)) : 0.0;
    }
};

/// Pools trials per grid point (total errors / total bits, mean SE), in record order.
inline std::vector<PooledPoint> pool_records(const std::vector<TrialRecord>& records)
{
    std::vector<PooledPoint> out;
    for (const auto& r : records) {
        auto same = [&](const PooledPoint& p) {
            return p.snr_db == r.snr_db && (p.ncpe_db == r.ncpe_db || (std::isnan(p.ncpe_db) && std::isnan(r.ncpe_db)));
        };
        auto it = std::find_if(out.begin(), out.end(), same);
        if (it == out.end()) {
            out.push_back({r.snr_db, r.ncpe_db, 0, 0, 0.0, 0});
            it = out.end() - 1;
        }
        it->bit_errors += r.bit_errors;
        it->bits_total += r.bits_total;
        it->se_mean += r.se;
        ++it->trials;
    }
    for (auto& p : out)
        p.se_mean /= p.trials;
    return out;
}

} // namespace gmdbf

#endif // GMDBF_HARNESS_HPP
