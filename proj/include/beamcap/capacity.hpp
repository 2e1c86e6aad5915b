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

#ifndef BEAMCAP_CAPACITY_HPP
#define BEAMCAP_CAPACITY_HPP

#include "beamcap/beamspace.hpp"
#include "beamcap/core.hpp"
#include "beamcap/native_channel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace beamcap
{

// 64-QAM at the highest NR code rate, in bits/s/Hz.
inline constexpr double qam64_rate_cap = 5.5547;

struct PowerAllocation
{
    double water_level = 0.0;
    RVector powers;          // one per singular value, zero when inactive
    std::size_t active = 0;  // active modes form a prefix of the spectrum
    double total_power = 0.0;
    double noise = 0.0;
};

// Exact water-filling over a descending spectrum. With K active modes the
// level is mu = (P + sum_{k<K} noise / s_k^2) / K, where K is the largest
// prefix that keeps every p_k = mu - noise / s_k^2 strictly positive.
inline PowerAllocation water_fill(const RVector &singular_values, double noise, double total_power)
{
    if (!(total_power > 0.0) || !(noise > 0.0) || !std::isfinite(total_power) || !std::isfinite(noise))
        throw input_error("water_fill: power and noise must be positive and finite.");
    for (Eigen::Index k = 0; k < singular_values.size(); ++k)
    {
        if (!(singular_values(k) >= 0.0) || !std::isfinite(singular_values(k)))
            throw input_error("water_fill: singular values must be finite and non-negative.");
        if (k > 0 && singular_values(k) > singular_values(k - 1))
            throw input_error("water_fill: singular values must be sorted in descending order.");
    }
    Eigen::Index usable = 0;
    while (usable < singular_values.size() && singular_values(usable) > 0.0)
        ++usable;
    if (usable == 0)
        throw no_capacity_error("water_fill: all singular values are zero.");

    RVector floors(usable);
    for (Eigen::Index k = 0; k < usable; ++k)
        floors(k) = noise / (singular_values(k) * singular_values(k));

    // Mode k joins when P exceeds the power needed to lift modes 0..k-1 up to
    // its floor. Differences of floors keep every term at the power scale.
    Eigen::Index active = 1;
    for (Eigen::Index k = 1; k < usable; ++k)
    {
        double lift = 0.0;
        for (Eigen::Index j = 0; j < k; ++j)
            lift += floors(k) - floors(j);
        if (!(total_power > lift))
            break;
        active = k + 1;
    }

    const double top = floors(active - 1);
    double lift = 0.0;
    for (Eigen::Index j = 0; j < active; ++j)
        lift += top - floors(j);
    const double share = (total_power - lift) / static_cast<double>(active);

    PowerAllocation out;
    out.water_level = top + share;
    out.powers = RVector::Zero(singular_values.size());
    for (Eigen::Index k = 0; k < active; ++k)
        out.powers(k) = share + (top - floors(k));
    out.active = static_cast<std::size_t>(active);
    out.total_power = total_power;
    out.noise = noise;
    return out;
}

inline std::size_t effective_rank(const PowerAllocation &alloc)
{
    return static_cast<std::size_t>((alloc.powers.array() > 0.0).count());
}

struct CapacityResult
{
    double se = 0.0;           // bits/s/Hz
    double capacity_bps = 0.0; // se * bandwidth
    RVector snr;
    RVector rates;             // bits/s/Hz per mode
    bool cap_applied = false;
};

// Sum of log2(1 + p_k s_k^2 / noise). An optional per-mode rate cap is applied
// after allocation, which is not the jointly optimal capped allocation.
inline CapacityResult spectral_efficiency(const PowerAllocation &alloc, const RVector &singular_values, double noise,
                                          std::optional<double> rate_cap = std::nullopt, double bandwidth_hz = 1.0)
{
    if (alloc.powers.size() != singular_values.size())
        throw input_error("spectral_efficiency: allocation and spectrum differ in length.");
    CapacityResult out;
    out.snr = alloc.powers.array() * singular_values.array().square() / noise;
    out.rates = (1.0 + out.snr.array()).log() / std::log(2.0);
    if (rate_cap)
    {
        for (Eigen::Index k = 0; k < out.rates.size(); ++k)
        {
            if (out.rates(k) > *rate_cap)
            {
                out.rates(k) = *rate_cap;
                out.cap_applied = true;
            }
        }
    }
    out.se = out.rates.sum();
    out.capacity_bps = out.se * bandwidth_hz;
    return out;
}

inline RVector singular_values(const CMatrix &m)
{
    if (!m.allFinite())
        throw input_error("singular_values: matrix has non-finite entries.");
    if (m.size() == 0)
        return RVector();
    return Eigen::BDCSVD<CMatrix>(m).singularValues();
}

struct CapacityOptions
{
    // Stopping tolerance is epsilon_absolute when set, otherwise
    // epsilon_relative times the current spectral efficiency.
    double epsilon_relative = 1e-5;
    std::optional<double> epsilon_absolute;
    int hard_cap = 20;
    std::optional<double> rate_cap;
};

struct TraceRecord
{
    int i = 0;
    int l_max = 0;
    std::size_t n_modes = 0;   // sounded modes, (L+1)^2
    std::size_t kept_modes = 0; // TX modes left after dropping degenerate ones
    double se = 0.0;
    double delta = 0.0;        // |C_i - C_{i-1}|, with C_{-1} = 0
};

struct CapacityTrace
{
    std::vector<TraceRecord> records;
    bool converged = false;
    double epsilon = 0.0; // tolerance in force at the last check
    int l_max = 0;
    double c_max = 0.0;
    RVector singular_values; // of the final beamspace channel
    PowerAllocation allocation;
    CapacityResult result;
};

using ChannelSource = std::function<BeamspaceChannel(int)>;

// Grows the beamspace one frontier at a time until the water-filling
// capacity stops changing by more than epsilon or hard_cap is reached.
// Starts from frontiers 0 and 1, i.e. modes (0,0), (0,1), (1,0), (1,1).
inline CapacityTrace iterative_capacity(const ChannelSource &source, double noise, double total_power,
                                        const CapacityOptions &options = {})
{
    if (options.hard_cap < 1)
        throw input_error("iterative_capacity: hard_cap must be at least 1.");
    if (options.epsilon_absolute ? !(*options.epsilon_absolute > 0.0) : !(options.epsilon_relative > 0.0))
        throw input_error("iterative_capacity: epsilon must be positive.");

    CapacityTrace trace;
    double previous = 0.0;
    auto step = [&](int i) {
        const auto channel = source(i);
        RVector s = singular_values(channel.H);
        auto alloc = water_fill(s, noise, total_power);
        auto result = spectral_efficiency(alloc, s, noise, options.rate_cap);
        TraceRecord rec;
        rec.i = i;
        rec.l_max = i;
        rec.n_modes = ModeOrdering::prefix_length(i);
        rec.kept_modes = static_cast<std::size_t>(channel.H.cols());
        rec.se = result.se;
        rec.delta = std::abs(result.se - previous);
        previous = result.se;
        trace.records.push_back(rec);
        trace.l_max = i;
        trace.c_max = result.se;
        trace.singular_values = std::move(s);
        trace.allocation = std::move(alloc);
        trace.result = std::move(result);
    };

    step(0);
    step(1);
    int i = 1;
    while (true)
    {
        trace.epsilon = options.epsilon_absolute.value_or(options.epsilon_relative * trace.c_max);
        if (trace.records.back().delta <= trace.epsilon)
        {
            trace.converged = true;
            break;
        }
        if (i >= options.hard_cap)
            break;
        step(++i);
    }
    return trace;
}

inline CapacityTrace iterative_capacity(const ChannelSource &source, const LinkBudget &link,
                                        const CapacityOptions &options = {})
{
    return iterative_capacity(source, noise_power(link).watts, link.tx_power_watts(), options);
}

} // namespace beamcap

#endif
