// SPDX-License-Identifier: Apache-2.0
//
// beamcap: Hermite-Gaussian beamspace capacity of near-field LOS MIMO links
// Copyright (C) 2026 The beamcap authors
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

#ifndef BEAMCAP_EXPERIMENTS_HPP
#define BEAMCAP_EXPERIMENTS_HPP

#include "beamcap/beamspace.hpp"
#include "beamcap/capacity.hpp"
#include "beamcap/config.hpp"
#include "beamcap/hg_beams.hpp"
#include "beamcap/native_channel.hpp"

#include <boost/version.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <array>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifndef BEAMCAP_VERSION
#define BEAMCAP_VERSION "unknown"
#endif

namespace beamcap
{

// Failure inside a named pipeline stage.
class stage_error : public std::runtime_error
{
public:
    stage_error(std::string stage, const std::string &what)
        : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(std::move(stage))
    {
    }
    const std::string &stage() const { return stage_; }

private:
    std::string stage_;
};

// Output directory or file could not be written.
class output_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Subcommand
{
    link_budget,
    native,
    capture,
    project,
    beamspace,
    capacity,
    all
};

inline const std::vector<std::pair<std::string, Subcommand>> &subcommand_names()
{
    static const std::vector<std::pair<std::string, Subcommand>> names = {
        {"link-budget", Subcommand::link_budget}, {"native", Subcommand::native},       {"capture", Subcommand::capture},
        {"project", Subcommand::project},         {"beamspace", Subcommand::beamspace}, {"capacity", Subcommand::capacity},
        {"all", Subcommand::all}};
    return names;
}

inline Subcommand parse_subcommand(const std::string &s)
{
    for (const auto &[name, cmd] : subcommand_names())
        if (name == s)
            return cmd;
    throw config_error("unknown subcommand '" + s + "'");
}

inline std::string to_string(Subcommand c)
{
    for (const auto &[name, cmd] : subcommand_names())
        if (cmd == c)
            return name;
    return "?";
}

inline std::string sha256_hex(const std::string &data)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256: digest failed");
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

// Shortest round-trip decimal form; identical inputs give identical bytes.
inline std::string format_number(double v)
{
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

class CsvTable
{
public:
    explicit CsvTable(const std::vector<std::string> &columns)
    {
        for (std::size_t c = 0; c < columns.size(); ++c)
            text_ += (c ? "," : "") + columns[c];
        text_ += '\n';
    }

    template <class... T>
    void row(const T &...values)
    {
        bool first = true;
        ((text_ += (first ? "" : ","), text_ += cell(values), first = false), ...);
        text_ += '\n';
    }

    const std::string &text() const { return text_; }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(unsigned long long v) { return std::to_string(v); }
    static std::string cell(const std::string &v) { return v; }
    static std::string cell(const char *v) { return v; }

    std::string text_;
};

struct OutputFile
{
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct StageTiming
{
    std::string stage;
    double seconds = 0.0;
};

struct RunReport
{
    std::filesystem::path directory;
    std::vector<OutputFile> files; // datasets and summary.json; manifest.json is written last
    std::vector<StageTiming> timings;
    double wall_seconds = 0.0;
    nlohmann::json summary;
    nlohmann::json manifest;
};

inline nlohmann::json config_to_json(const ExperimentConfig &cfg)
{
    using nlohmann::json;
    auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
    return json{
        {"link",
         {{"carrier_hz", opt(cfg.link.carrier_hz)},
          {"wavelength_m", opt(cfg.link.wavelength_m)},
          {"bandwidth_hz", cfg.link.bandwidth_hz},
          {"tx_power_dbm", cfg.link.tx_power_dbm},
          {"noise_figure_db", cfg.link.noise_figure_db},
          {"distance_m", cfg.link.distance_m},
          {"speed_of_light", cfg.link.speed_of_light}}},
        {"array", {{"half_index", cfg.array.half_index}, {"spacing_m", cfg.array.spacing_m}}},
        {"beam", {{"waist", cfg.beam.waist_m ? json(*cfg.beam.waist_m) : json("optimal")}}},
        {"algorithm",
         {{"epsilon_relative", cfg.algorithm.epsilon_relative},
          {"epsilon_absolute", opt(cfg.algorithm.epsilon_absolute)},
          {"hard_cap", cfg.algorithm.hard_cap},
          {"estimation", to_string(cfg.algorithm.estimation)},
          {"repetitions", cfg.algorithm.repetitions},
          {"seed", cfg.algorithm.seed},
          {"pattern", to_string(cfg.algorithm.pattern)},
          {"mcs_cap", opt(cfg.algorithm.mcs_cap)},
          {"drop_tol", cfg.algorithm.drop_tol}}},
        {"datasets",
         {{"capture",
           {{"a_over_w_min", cfg.capture.a_over_w_min},
            {"a_over_w_max", cfg.capture.a_over_w_max},
            {"points", cfg.capture.points},
            {"max_order", cfg.capture.max_order}}},
          {"project", {{"l_max", cfg.project.l_max}, {"singular_modes", cfg.project.singular_modes}}},
          {"beamspace", {{"l_max", cfg.beamspace.l_max}, {"repetitions", cfg.beamspace.repetitions}}}}},
        {"output", {{"directory", cfg.output_directory.string()}}}};
}

namespace detail
{

// Consecutive stages partition the run: each stage ends where the next begins.
class Timeline
{
public:
    using clock = std::chrono::steady_clock;

    Timeline() : start_(clock::now()), mark_(start_) {}

    template <class F>
    auto stage(const std::string &name, F &&body)
    {
        struct Close
        {
            Timeline &t;
            const std::string &name;
            ~Close()
            {
                const auto now = clock::now();
                t.timings_.push_back({name, std::chrono::duration<double>(now - t.mark_).count()});
                t.mark_ = now;
            }
        } close{*this, name};
        try
        {
            return body();
        }
        catch (const stage_error &)
        {
            throw;
        }
        catch (const output_error &)
        {
            throw;
        }
        catch (const std::filesystem::filesystem_error &e)
        {
            throw output_error(e.what());
        }
        catch (const std::exception &e)
        {
            throw stage_error(name, e.what());
        }
    }

    double wall() const { return std::chrono::duration<double>(clock::now() - start_).count(); }
    const std::vector<StageTiming> &timings() const { return timings_; }

private:
    clock::time_point start_;
    clock::time_point mark_;
    std::vector<StageTiming> timings_;
};

inline double to_db_amplitude(double s) { return s > 0.0 ? 20.0 * std::log10(s) : -std::numeric_limits<double>::infinity(); }

class Experiment
{
public:
    explicit Experiment(const ExperimentConfig &cfg)
        : cfg_(cfg), link_(cfg.link_budget()), tx_(cfg.tx_array()), rx_(cfg.rx_array()), noise_(noise_power(link_))
    {
    }

    void run(Subcommand cmd)
    {
        const bool all = cmd == Subcommand::all;
        summary_["subcommand"] = to_string(cmd);
        if (all || cmd == Subcommand::link_budget)
            link_budget();
        if (all || cmd == Subcommand::native)
            native_spectrum();
        if (all || cmd == Subcommand::capture)
            capture();
        if (all || cmd == Subcommand::project)
            project();
        if (all || cmd == Subcommand::beamspace)
            beamspace();
        if (all || cmd == Subcommand::capacity)
            capacity();
    }

    RunReport finish()
    {
        RunReport report;
        report.directory = cfg_.output_directory;
        report.summary = summary_;
        files_["summary.json"] = summary_.dump(2) + "\n";
        timeline_.stage("write", [&] {
            std::filesystem::create_directories(report.directory);
            for (const auto &[name, content] : files_)
            {
                std::ofstream out(report.directory / name, std::ios::binary | std::ios::trunc);
                out << content;
                if (!out)
                    throw output_error("cannot write " + (report.directory / name).string());
            }
        });
        timeline_.stage("hash", [&] {
            for (const auto &[name, content] : files_)
                report.files.push_back({name, sha256_hex(content), content.size()});
        });
        report.timings = timeline_.timings();
        report.wall_seconds = timeline_.wall();
        return report;
    }

private:
    const NativeChannel &native()
    {
        if (!native_)
            native_ = timeline_.stage("native.build", [&] { return build_native_channel(tx_, rx_, link_, cfg_.element_pattern()); });
        return *native_;
    }

    const SingularTriple &native_svd()
    {
        native();
        if (!svd_)
            svd_ = timeline_.stage("native.svd", [&] { return decompose(*native_); });
        return *svd_;
    }

    HgBeamspace &space()
    {
        native();
        if (!space_)
            space_ = std::make_unique<HgBeamspace>(*native_, cfg_.beam_parameters(), cfg_.algorithm.drop_tol);
        return *space_;
    }

    CapacityResult native_capacity()
    {
        const auto &s = native_svd().s;
        const auto alloc = water_fill(s, noise_.watts, link_.tx_power_watts());
        return spectral_efficiency(alloc, s, noise_.watts, cfg_.algorithm.mcs_cap, link_.bandwidth());
    }

    void link_budget()
    {
        timeline_.stage("link-budget", [&] {
            const auto tx = build_array(tx_);
            const auto rx = build_array(rx_);
            const auto pattern = cfg_.element_pattern();
            double lo = std::numeric_limits<double>::infinity(), hi = -lo, mean = 0.0;
            for (const auto &r : rx)
                for (const auto &t : tx)
                {
                    const auto g = pair_geometry(t, r);
                    const double gain = element_gain(pattern, g.tx_off_boresight) * element_gain(pattern, g.rx_off_boresight);
                    const double db = 10.0 * std::log10(std::norm(friis_coefficient(link_.wavelength(), g.distance, gain, 1.0)));
                    lo = std::min(lo, db);
                    hi = std::max(hi, db);
                    mean += db;
                }
            mean /= static_cast<double>(tx.size() * rx.size());

            CsvTable csv({"quantity", "value", "unit"});
            csv.row("carrier_frequency", link_.carrier_frequency(), "Hz");
            csv.row("wavelength", link_.wavelength(), "m");
            csv.row("bandwidth", link_.bandwidth(), "Hz");
            csv.row("tx_power", link_.tx_power_dbm(), "dBm");
            csv.row("tx_power", link_.tx_power_watts(), "W");
            csv.row("noise_figure", link_.noise_figure_db(), "dB");
            csv.row("noise_power", noise_.dbm, "dBm");
            csv.row("noise_power", noise_.watts, "W");
            csv.row("distance", link_.distance(), "m");
            csv.row("elements_per_array", static_cast<double>(tx.size()), "count");
            csv.row("pair_gain_min", lo, "dB");
            csv.row("pair_gain_max", hi, "dB");
            csv.row("pair_gain_mean", mean, "dB");
            files_["link_budget.csv"] = csv.text();

            summary_["link_budget"] = {{"noise_power_w", noise_.watts},   {"noise_power_dbm", noise_.dbm},
                                       {"pair_gain_min_db", lo},          {"pair_gain_max_db", hi},
                                       {"pair_gain_mean_db", mean},       {"elements_per_array", tx.size()},
                                       {"wavelength_m", link_.wavelength()}};
        });
    }

    void native_spectrum()
    {
        const auto &svd = native_svd();
        timeline_.stage("native.spectrum", [&] {
            CsvTable csv({"k", "sigma_linear", "sigma_db"});
            for (Eigen::Index k = 0; k < svd.s.size(); ++k)
                csv.row(static_cast<long>(k), svd.s(k), to_db_amplitude(svd.s(k)));
            files_["singular_values.csv"] = csv.text();
            const auto cap = native_capacity();
            const auto alloc = water_fill(svd.s, noise_.watts, link_.tx_power_watts());
            summary_["native"] = {{"elements", native_->H.cols()},
                                  {"largest_singular_value", svd.s(0)},
                                  {"se_bits_per_hz", cap.se},
                                  {"capacity_bps", cap.capacity_bps},
                                  {"effective_rank", effective_rank(alloc)}};
        });
    }

    void capture()
    {
        timeline_.stage("capture", [&] {
            CsvTable csv({"l", "m", "a_over_w", "fraction"});
            const int n = cfg_.capture.points;
            for (int l = 0; l <= cfg_.capture.max_order; ++l)
                for (int m = 0; l + m <= cfg_.capture.max_order; ++m)
                    for (int p = 0; p < n; ++p)
                    {
                        const double t = n == 1 ? 0.0 : static_cast<double>(p) / (n - 1);
                        const double x = cfg_.capture.a_over_w_min + t * (cfg_.capture.a_over_w_max - cfg_.capture.a_over_w_min);
                        csv.row(l, m, x, captured_power({l, m}, x));
                    }
            files_["captured_power.csv"] = csv.text();
            const auto params = cfg_.beam_parameters();
            const double radius = beam_geometry(params, params.z_rx()).radius;
            summary_["capture"] = {{"waist_m", params.waist()},
                                   {"radius_at_array_m", radius},
                                   {"array_half_width_m", rx_.half_width()},
                                   {"operating_a_over_w", rx_.half_width() / radius}};
        });
    }

    void project()
    {
        const auto &svd = native_svd();
        const int L = cfg_.project.l_max;
        timeline_.stage("project", [&] {
            const Eigen::Index modes = std::min<Eigen::Index>(cfg_.project.singular_modes, svd.V.cols());
            CsvTable csv({"k", "l_max", "residual_fraction"});
            std::vector<RVector> err;
            for (int l = 0; l <= L; ++l)
            {
                err.push_back(projection_residuals(svd.V.leftCols(modes), *space().tx_basis(l)));
                for (Eigen::Index k = 0; k < modes; ++k)
                    csv.row(static_cast<long>(k), l, err.back()(k));
            }
            files_["residuals.csv"] = csv.text();

            nlohmann::json ratios = nlohmann::json::array();
            for (int l = 0; l <= L; ++l)
            {
                const auto head = static_cast<Eigen::Index>(ModeOrdering::prefix_length(l));
                const auto next = static_cast<Eigen::Index>(ModeOrdering::prefix_length(l + 1));
                if (next > modes)
                    break;
                const double inside = err[l].head(head).mean();
                const double beyond = err[l].segment(head, next - head).mean();
                ratios.push_back({{"l_max", l}, {"mean_first", inside}, {"mean_next_frontier", beyond},
                                  {"ratio", beyond / inside}});
            }
            summary_["project"] = {{"singular_modes", modes}, {"frontier_ratios", ratios}};
        });
    }

    SoundingParams sounding(int repetitions) const
    {
        return SoundingParams::from_link(link_, repetitions, cfg_.algorithm.seed);
    }

    BeamspaceChannel channel_at(int L)
    {
        if (cfg_.algorithm.estimation == EstimationMode::ls)
            return space().estimated(L, sounding(cfg_.algorithm.repetitions));
        return space().compressed(L);
    }

    void beamspace()
    {
        const auto &svd = native_svd();
        timeline_.stage("beamspace", [&] {
            CsvTable csv({"l_max", "k", "sigma_hg_linear", "sigma_native_linear", "sigma_hg_db", "sigma_native_db"});
            nlohmann::json levels = nlohmann::json::array();
            for (int L : cfg_.beamspace.l_max)
            {
                const auto s = singular_values(channel_at(L).H);
                for (Eigen::Index k = 0; k < s.size(); ++k)
                    csv.row(L, static_cast<long>(k), s(k), svd.s(k), to_db_amplitude(s(k)), to_db_amplitude(svd.s(k)));
                levels.push_back({{"l_max", L}, {"kept_modes", s.size()}, {"largest_singular_value", s.size() ? s(0) : 0.0}});
            }
            files_["beamspace_sv.csv"] = csv.text();
            summary_["beamspace"] = {{"estimation", to_string(cfg_.algorithm.estimation)}, {"levels", levels}};

            if (cfg_.algorithm.estimation != EstimationMode::ls)
                return;
            CsvTable err({"l_max", "repetitions", "mse_w_per_w", "predicted_mse_w_per_w"});
            for (int L : cfg_.beamspace.l_max)
            {
                const auto clean = space().compressed(L).H;
                for (int reps : cfg_.beamspace.repetitions)
                {
                    const auto est = space().estimated(L, sounding(reps)).H;
                    const double mse = (est - clean).squaredNorm() / static_cast<double>(clean.size());
                    err.row(L, reps, mse, noise_.watts / (link_.tx_power_watts() * reps));
                }
            }
            files_["estimation_error.csv"] = err.text();
        });
    }

    void capacity()
    {
        const auto &svd = native_svd();
        const auto native_cap = timeline_.stage("capacity.native", [&] { return native_capacity(); });
        const auto trace = timeline_.stage("capacity.iterate", [&] {
            return iterative_capacity([&](int L) { return channel_at(L); }, noise_.watts, link_.tx_power_watts(),
                                      cfg_.capacity_options());
        });
        timeline_.stage("capacity.report", [&] {
            CsvTable csv({"i", "l_max", "n_modes", "kept_modes", "se_bits_per_hz", "delta_bits_per_hz", "relative_error"});
            for (const auto &r : trace.records)
                csv.row(r.i, r.l_max, static_cast<unsigned long>(r.n_modes), static_cast<unsigned long>(r.kept_modes), r.se,
                        r.delta, std::abs(r.se - native_cap.se) / native_cap.se);
            files_["capacity_trace.csv"] = csv.text();

            CsvTable alloc({"k", "sigma_linear", "power_w", "rate_bits_per_hz"});
            for (Eigen::Index k = 0; k < trace.singular_values.size(); ++k)
                alloc.row(static_cast<long>(k), trace.singular_values(k), trace.allocation.powers(k), trace.result.rates(k));
            files_["allocation.csv"] = alloc.text();

            const auto elements = static_cast<std::size_t>(native_->H.cols());
            nlohmann::json overhead = nlohmann::json::array();
            for (const auto &r : trace.records)
                overhead.push_back({{"l_max", r.l_max},
                                    {"hg_reference_signals", r.n_modes},
                                    {"antenna_reference_signals", elements},
                                    {"overhead_ratio", static_cast<double>(r.n_modes) / elements},
                                    {"overhead_reduction", 1.0 - static_cast<double>(r.n_modes) / elements}});
            const auto n_modes = trace.records.back().n_modes;
            summary_["capacity"] = {
                {"se_bits_per_hz", trace.c_max},
                {"capacity_bps", trace.c_max * link_.bandwidth()},
                {"l_max", trace.l_max},
                {"converged", trace.converged},
                {"epsilon_bits_per_hz", trace.epsilon},
                {"effective_rank", effective_rank(trace.allocation)},
                {"hg_reference_signals", n_modes},
                {"antenna_reference_signals", elements},
                {"overhead_ratio", static_cast<double>(n_modes) / elements},
                {"overhead_reduction", 1.0 - static_cast<double>(n_modes) / elements},
                {"overhead_by_l_max", overhead},
                {"native_se_bits_per_hz", native_cap.se},
                {"relative_error", std::abs(trace.c_max - native_cap.se) / native_cap.se},
                {"estimation", to_string(cfg_.algorithm.estimation)},
                {"rate_cap_applied", trace.result.cap_applied}};
            (void)svd;
        });
    }

    const ExperimentConfig &cfg_;
    LinkBudget link_;
    ArraySpec tx_, rx_;
    NoisePower noise_;
    Timeline timeline_;
    std::optional<NativeChannel> native_;
    std::optional<SingularTriple> svd_;
    std::unique_ptr<HgBeamspace> space_;
    std::map<std::string, std::string> files_;
    nlohmann::json summary_;
};

} // namespace detail

inline nlohmann::json library_versions()
{
    return {{"beamcap", BEAMCAP_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"openssl", OPENSSL_VERSION_TEXT},
            {"compiler", __VERSION__}};
}

// Runs one subcommand and writes its datasets, summary.json and manifest.json
// into the configured output directory. Failures inside a stage surface as
// stage_error.
inline RunReport run_experiment(Subcommand cmd, const ExperimentConfig &cfg)
{
    detail::Experiment exp(cfg);
    exp.run(cmd);
    auto report = exp.finish();

    nlohmann::json files = nlohmann::json::array();
    for (const auto &f : report.files)
        files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    nlohmann::json timings = nlohmann::json::array();
    for (const auto &t : report.timings)
        timings.push_back({{"stage", t.stage}, {"seconds", t.seconds}});
    report.manifest = {{"tool", "beamcap"},
                       {"subcommand", to_string(cmd)},
                       {"versions", library_versions()},
                       {"config", config_to_json(cfg)},
                       {"files", files},
                       {"timings", timings},
                       {"wall_clock_seconds", report.wall_seconds}};
    std::ofstream out(report.directory / "manifest.json", std::ios::binary | std::ios::trunc);
    out << report.manifest.dump(2) << "\n";
    if (!out)
        throw output_error("cannot write " + (report.directory / "manifest.json").string());
    return report;
}

} // namespace beamcap

#endif
