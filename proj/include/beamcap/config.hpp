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

#ifndef BEAMCAP_CONFIG_HPP
#define BEAMCAP_CONFIG_HPP

#include "beamcap/array_geometry.hpp"
#include "beamcap/capacity.hpp"
#include "beamcap/core.hpp"
#include "beamcap/hg_beams.hpp"
#include "beamcap/native_channel.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace beamcap
{

// Invalid configuration file or override. The message carries file:line when
// the problem is tied to a location in the file.
struct config_error : input_error
{
    using input_error::input_error;
};

enum class EstimationMode
{
    noiseless,
    ls
};

struct ExperimentConfig
{
    struct Link
    {
        std::optional<double> carrier_hz;
        std::optional<double> wavelength_m = 0.005;
        double bandwidth_hz = 2e9;
        double tx_power_dbm = -20.0;
        double noise_figure_db = 8.0;
        double distance_m = 15.0;
        double speed_of_light = default_speed_of_light;
    } link;

    struct Array
    {
        int half_index = 13;
        double spacing_m = 0.02;
    } array;

    struct Beam
    {
        std::optional<double> waist_m; // empty: optimal waist for the link distance
    } beam;

    struct Algorithm
    {
        double epsilon_relative = 1e-5;
        std::optional<double> epsilon_absolute;
        int hard_cap = 20;
        EstimationMode estimation = EstimationMode::noiseless;
        int repetitions = 1;
        std::uint64_t seed = 0;
        PatternKind pattern = PatternKind::isotropic;
        std::optional<double> mcs_cap;
        double drop_tol = 1e-8;
    } algorithm;

    struct Capture
    {
        double a_over_w_min = 0.1;
        double a_over_w_max = 4.0;
        int points = 40;
        int max_order = 8; // modes with l + m <= max_order
    } capture;

    struct Project
    {
        int l_max = 8;
        int singular_modes = 64;
    } project;

    struct Beamspace
    {
        std::vector<int> l_max = {2, 4, 6, 8};
        std::vector<int> repetitions = {1, 4, 16}; // LS error sweep, used when estimation is ls
    } beamspace;

    std::filesystem::path output_directory = "out";

    LinkBudget link_budget() const
    {
        if (link.carrier_hz)
            return LinkBudget::from_carrier(*link.carrier_hz, link.bandwidth_hz, link.tx_power_dbm, link.noise_figure_db,
                                            link.distance_m, link.speed_of_light);
        return LinkBudget::from_wavelength(*link.wavelength_m, link.bandwidth_hz, link.tx_power_dbm,
                                           link.noise_figure_db, link.distance_m, link.speed_of_light);
    }

    ArraySpec tx_array() const { return ArraySpec::transmitter(array.half_index, array.spacing_m, -0.5 * link.distance_m); }
    ArraySpec rx_array() const { return ArraySpec::receiver(array.half_index, array.spacing_m, 0.5 * link.distance_m); }

    ElementPattern element_pattern() const
    {
        return algorithm.pattern == PatternKind::directional ? ElementPattern::directional() : ElementPattern::isotropic();
    }

    BeamParameters beam_parameters() const
    {
        const auto lb = link_budget();
        if (beam.waist_m)
            return BeamParameters::symmetric(*beam.waist_m, lb.wavelength(), link.distance_m);
        return optimal_waist(lb.wavelength(), link.distance_m);
    }

    CapacityOptions capacity_options() const
    {
        return {algorithm.epsilon_relative, algorithm.epsilon_absolute, algorithm.hard_cap, algorithm.mcs_cap};
    }
};

inline const char *to_string(EstimationMode m) { return m == EstimationMode::ls ? "ls" : "noiseless"; }
inline const char *to_string(PatternKind p) { return p == PatternKind::directional ? "directional" : "isotropic"; }

inline EstimationMode parse_estimation(const std::string &s)
{
    if (s == "noiseless")
        return EstimationMode::noiseless;
    if (s == "ls")
        return EstimationMode::ls;
    throw config_error("estimation must be 'noiseless' or 'ls', got '" + s + "'");
}

inline PatternKind parse_pattern(const std::string &s)
{
    if (s == "isotropic")
        return PatternKind::isotropic;
    if (s == "directional")
        return PatternKind::directional;
    throw config_error("pattern must be 'isotropic' or 'directional', got '" + s + "'");
}

namespace detail
{

// One mapping in the file. Every key must be claimed by a read before
// finish(), otherwise the first unclaimed key is reported with its line.
class ConfigBlock
{
public:
    ConfigBlock(YAML::Node node, std::string path, std::string source) : node_(std::move(node)), path_(std::move(path)), source_(std::move(source))
    {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            fail(node_, "'" + path_ + "' must be a mapping");
    }

    bool has(const std::string &key) const { return node_ && node_.IsMap() && node_[key]; }

    ConfigBlock child(const std::string &key)
    {
        claimed_.insert(key);
        return ConfigBlock(has(key) ? node_[key] : YAML::Node(), path_.empty() ? key : path_ + "." + key, source_);
    }

    template <class T>
    void read(const std::string &key, T &out, const std::function<bool(const T &)> &ok = {}, const char *rule = "")
    {
        claimed_.insert(key);
        if (!has(key))
            return;
        const YAML::Node v = node_[key];
        T value;
        try
        {
            value = v.as<T>();
        }
        catch (const YAML::Exception &)
        {
            fail(v, "'" + name(key) + "' has the wrong type");
        }
        if (ok && !ok(value))
            fail(v, "'" + name(key) + "' " + rule);
        out = value;
    }

    // Optional number that may also be given as the word 'none'.
    void read_optional(const std::string &key, std::optional<double> &out, const std::function<bool(double)> &ok,
                       const char *rule)
    {
        claimed_.insert(key);
        if (!has(key))
            return;
        const YAML::Node v = node_[key];
        if (v.IsNull() || (v.IsScalar() && v.Scalar() == "none"))
        {
            out.reset();
            return;
        }
        double value = 0.0;
        read<double>(key, value);
        if (!ok(value))
            fail(v, "'" + name(key) + "' " + rule);
        out = value;
    }

    template <class T>
    T parse_word(const std::string &key, T current, T (*parse)(const std::string &))
    {
        std::string word;
        read<std::string>(key, word);
        if (word.empty())
            return current;
        try
        {
            return parse(word);
        }
        catch (const config_error &e)
        {
            fail(node_[key], e.what());
        }
    }

    [[noreturn]] void fail(const YAML::Node &at, const std::string &message) const
    {
        throw config_error(source_ + ":" + std::to_string(at.Mark().line + 1) + ": " + message);
    }

    void finish() const
    {
        if (!node_ || !node_.IsMap())
            return;
        for (const auto &kv : node_)
        {
            const auto key = kv.first.as<std::string>();
            if (!claimed_.contains(key))
                fail(kv.first, "unknown key '" + name(key) + "'");
        }
    }

private:
    std::string name(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node node_;
    std::string path_;
    std::string source_;
    std::set<std::string> claimed_;
};

inline bool positive(const double &v) { return v > 0.0 && std::isfinite(v); }
inline bool finite(const double &v) { return std::isfinite(v); }

} // namespace detail

// Reads a YAML document over the built-in defaults. Missing keys keep their
// default; unknown keys and invalid values throw config_error with a line.
inline ExperimentConfig parse_config(const std::string &text, const std::string &source = "<config>")
{
    using detail::ConfigBlock;
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::ParserException &e)
    {
        throw config_error(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }

    ExperimentConfig cfg;
    ConfigBlock top(root, "", source);

    auto link = top.child("link");
    double value = 0.0;
    if (link.has("carrier_hz") && link.has("wavelength_m"))
        link.fail(root["link"]["wavelength_m"], "give either 'link.carrier_hz' or 'link.wavelength_m', not both");
    if (link.has("carrier_hz"))
    {
        link.read<double>("carrier_hz", value, detail::positive, "must be positive");
        cfg.link.carrier_hz = value;
        cfg.link.wavelength_m.reset();
    }
    if (link.has("wavelength_m"))
    {
        link.read<double>("wavelength_m", value, detail::positive, "must be positive");
        cfg.link.wavelength_m = value;
    }
    link.read<double>("bandwidth_hz", cfg.link.bandwidth_hz, detail::positive, "must be positive");
    link.read<double>("tx_power_dbm", cfg.link.tx_power_dbm, detail::finite, "must be finite");
    link.read<double>("noise_figure_db", cfg.link.noise_figure_db, detail::finite, "must be finite");
    link.read<double>("distance_m", cfg.link.distance_m, detail::positive, "must be positive");
    link.read<double>("speed_of_light", cfg.link.speed_of_light, detail::positive, "must be positive");
    link.finish();

    auto array = top.child("array");
    array.read<int>("half_index", cfg.array.half_index, [](const int &n) { return n >= 0; }, "must be >= 0");
    array.read<double>("spacing_m", cfg.array.spacing_m, detail::positive, "must be positive");
    array.finish();

    auto beam = top.child("beam");
    if (beam.has("waist"))
    {
        const auto node = root["beam"]["waist"];
        if (node.IsScalar() && node.Scalar() == "optimal")
        {
            std::string ignored;
            beam.read<std::string>("waist", ignored);
            cfg.beam.waist_m.reset();
        }
        else
        {
            beam.read<double>("waist", value, detail::positive, "must be 'optimal' or a positive waist in metres");
            cfg.beam.waist_m = value;
        }
    }
    beam.finish();

    auto alg = top.child("algorithm");
    alg.read<double>("epsilon_relative", cfg.algorithm.epsilon_relative, detail::positive, "must be positive");
    alg.read_optional("epsilon_absolute", cfg.algorithm.epsilon_absolute, detail::positive, "must be positive or 'none'");
    alg.read<int>("hard_cap", cfg.algorithm.hard_cap, [](const int &n) { return n >= 1; }, "must be >= 1");
    cfg.algorithm.estimation = alg.parse_word("estimation", cfg.algorithm.estimation, parse_estimation);
    alg.read<int>("repetitions", cfg.algorithm.repetitions, [](const int &n) { return n >= 1; }, "must be >= 1");
    alg.read<std::uint64_t>("seed", cfg.algorithm.seed);
    cfg.algorithm.pattern = alg.parse_word("pattern", cfg.algorithm.pattern, parse_pattern);
    alg.read_optional("mcs_cap", cfg.algorithm.mcs_cap, detail::positive, "must be positive or 'none'");
    alg.read<double>("drop_tol", cfg.algorithm.drop_tol, [](const double &t) { return t >= 0.0 && t < 1.0; },
                     "must be in [0, 1)");
    alg.finish();

    auto datasets = top.child("datasets");
    auto capture = datasets.child("capture");
    capture.read<double>("a_over_w_min", cfg.capture.a_over_w_min, [](const double &v) { return v >= 0.0; }, "must be >= 0");
    capture.read<double>("a_over_w_max", cfg.capture.a_over_w_max, detail::positive, "must be positive");
    capture.read<int>("points", cfg.capture.points, [](const int &n) { return n >= 1; }, "must be >= 1");
    capture.read<int>("max_order", cfg.capture.max_order, [](const int &n) { return n >= 0; }, "must be >= 0");
    capture.finish();
    if (cfg.capture.a_over_w_max < cfg.capture.a_over_w_min)
    {
        const auto block = root["datasets"]["capture"];
        capture.fail(block["a_over_w_max"] ? block["a_over_w_max"] : block["a_over_w_min"],
                     "'datasets.capture.a_over_w_max' is below a_over_w_min");
    }

    auto project = datasets.child("project");
    project.read<int>("l_max", cfg.project.l_max, [](const int &n) { return n >= 0; }, "must be >= 0");
    project.read<int>("singular_modes", cfg.project.singular_modes, [](const int &n) { return n >= 1; }, "must be >= 1");
    project.finish();

    auto bs = datasets.child("beamspace");
    const auto non_negative = [](const std::vector<int> &v) {
        return !v.empty() && std::all_of(v.begin(), v.end(), [](int x) { return x >= 0; });
    };
    const auto at_least_one = [](const std::vector<int> &v) {
        return !v.empty() && std::all_of(v.begin(), v.end(), [](int x) { return x >= 1; });
    };
    bs.read<std::vector<int>>("l_max", cfg.beamspace.l_max, non_negative, "must be a non-empty list of integers >= 0");
    bs.read<std::vector<int>>("repetitions", cfg.beamspace.repetitions, at_least_one,
                              "must be a non-empty list of integers >= 1");
    bs.finish();
    datasets.finish();

    auto output = top.child("output");
    std::string dir;
    output.read<std::string>("directory", dir, [](const std::string &s) { return !s.empty(); }, "must not be empty");
    if (!dir.empty())
        cfg.output_directory = dir;
    output.finish();

    top.finish();
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error(path.string() + ": cannot open config file");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.string());
}

// Command-line values that replace individual config keys.
struct ConfigOverrides
{
    std::optional<std::filesystem::path> output_directory;
    std::optional<std::uint64_t> seed;
    std::optional<double> epsilon;
    std::optional<int> lmax_cap;
    std::optional<std::string> estimation;
    std::optional<std::string> pattern;
    std::optional<std::string> mcs_cap; // number or 'none'
};

inline void apply_overrides(ExperimentConfig &cfg, const ConfigOverrides &o)
{
    if (o.output_directory)
        cfg.output_directory = *o.output_directory;
    if (o.seed)
        cfg.algorithm.seed = *o.seed;
    if (o.epsilon)
    {
        if (!detail::positive(*o.epsilon))
            throw config_error("--epsilon must be positive");
        cfg.algorithm.epsilon_relative = *o.epsilon;
        cfg.algorithm.epsilon_absolute.reset();
    }
    if (o.lmax_cap)
    {
        if (*o.lmax_cap < 1)
            throw config_error("--lmax-cap must be >= 1");
        cfg.algorithm.hard_cap = *o.lmax_cap;
    }
    if (o.estimation)
        cfg.algorithm.estimation = parse_estimation(*o.estimation);
    if (o.pattern)
        cfg.algorithm.pattern = parse_pattern(*o.pattern);
    if (o.mcs_cap)
    {
        if (*o.mcs_cap == "none")
            cfg.algorithm.mcs_cap.reset();
        else
        {
            double v = 0.0;
            try
            {
                std::size_t used = 0;
                v = std::stod(*o.mcs_cap, &used);
                if (used != o.mcs_cap->size())
                    throw std::invalid_argument("trailing");
            }
            catch (const std::exception &)
            {
                throw config_error("--mcs-cap must be a number or 'none'");
            }
            if (!detail::positive(v))
                throw config_error("--mcs-cap must be positive");
            cfg.algorithm.mcs_cap = v;
        }
    }
}

} // namespace beamcap

#endif
