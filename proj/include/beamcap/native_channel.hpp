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

#ifndef BEAMCAP_NATIVE_CHANNEL_HPP
#define BEAMCAP_NATIVE_CHANNEL_HPP

#include "beamcap/array_geometry.hpp"
#include "beamcap/core.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace beamcap
{

// Carrier, bandwidth, power and noise parameters of a single link.
// The wavelength is either derived from the carrier (lambda = c / f) or set
// directly, in which case the carrier is derived from it.
class LinkBudget
{
public:
    static LinkBudget from_carrier(double carrier_hz, double bandwidth_hz, double tx_power_dbm,
                                   double noise_figure_db, double distance_m,
                                   double speed_of_light = default_speed_of_light)
    {
        check_positive(carrier_hz, "carrier_frequency");
        check_positive(speed_of_light, "speed_of_light");
        return LinkBudget(carrier_hz, speed_of_light / carrier_hz, bandwidth_hz, tx_power_dbm,
                          noise_figure_db, distance_m, speed_of_light);
    }

    static LinkBudget from_wavelength(double wavelength_m, double bandwidth_hz, double tx_power_dbm,
                                      double noise_figure_db, double distance_m,
                                      double speed_of_light = default_speed_of_light)
    {
        check_positive(wavelength_m, "wavelength");
        check_positive(speed_of_light, "speed_of_light");
        return LinkBudget(speed_of_light / wavelength_m, wavelength_m, bandwidth_hz, tx_power_dbm,
                          noise_figure_db, distance_m, speed_of_light);
    }

    // 60 GHz class link, 2 GHz bandwidth, 15 m, -20 dBm, 8 dB NF. The wavelength
    // is pinned to exactly 5 mm so the link distance is an integer number of
    // wavelengths.
    static LinkBudget reference_link() { return from_wavelength(0.005, 2e9, -20.0, 8.0, 15.0); }

    double carrier_frequency() const { return carrier_; }
    double wavelength() const { return wavelength_; }
    double wavenumber() const { return 2.0 * pi / wavelength_; }
    double bandwidth() const { return bandwidth_; }
    double tx_power_dbm() const { return tx_power_dbm_; }
    double tx_power_watts() const { return dbm_to_watts(tx_power_dbm_); }
    double noise_figure_db() const { return noise_figure_db_; }
    double distance() const { return distance_; }
    double speed_of_light() const { return c_; }

private:
    LinkBudget(double f, double lambda, double bw, double p_dbm, double nf_db, double d, double c)
        : carrier_(f), wavelength_(lambda), bandwidth_(bw), tx_power_dbm_(p_dbm), noise_figure_db_(nf_db),
          distance_(d), c_(c)
    {
        check_positive(bw, "bandwidth");
        check_positive(d, "distance");
        if (!std::isfinite(p_dbm) || !std::isfinite(nf_db))
            throw input_error("LinkBudget: power and noise figure must be finite.");
    }

    static void check_positive(double v, const char *name)
    {
        if (!(v > 0.0) || !std::isfinite(v))
            throw input_error(std::string("LinkBudget: ") + name + " must be positive and finite.");
    }

    double carrier_;
    double wavelength_;
    double bandwidth_;
    double tx_power_dbm_;
    double noise_figure_db_;
    double distance_;
    double c_;
};

struct NoisePower
{
    double watts;
    double dbm;
};

// Thermal noise k_B T0 B F at T0 = 290 K.
inline NoisePower noise_power(const LinkBudget &link)
{
    const double w = boltzmann * reference_temperature * link.bandwidth() * db_to_linear(link.noise_figure_db());
    return {w, watts_to_dbm(w)};
}

// Free-space amplitude between two antennas:
//   h = lambda / (4 pi d) * sqrt(g_tx g_rx) * exp(-j 2 pi d / lambda)
// The phase is reduced to a fraction of a cycle before the trig call.
inline cdouble friis_coefficient(double wavelength, double distance, double g_tx = 1.0, double g_rx = 1.0)
{
    if (!(wavelength > 0.0))
        throw input_error("friis_coefficient: wavelength must be positive.");
    if (!(distance > 0.0))
        throw singularity_error("friis_coefficient: zero TX-RX distance.");
    const double cycles = distance / wavelength;
    const double frac = cycles - std::floor(cycles);
    const double amplitude = wavelength / (4.0 * pi * distance) * std::sqrt(g_tx * g_rx);
    return std::polar(amplitude, -2.0 * pi * frac);
}

struct NativeChannel
{
    CMatrix H; // rx elements x tx elements
    ArraySpec tx;
    ArraySpec rx;
};

inline NativeChannel build_native_channel(const ArraySpec &tx, const ArraySpec &rx, const LinkBudget &link,
                                          const ElementPattern &pattern = ElementPattern::isotropic())
{
    const auto tx_pos = build_array(tx);
    const auto rx_pos = build_array(rx);
    CMatrix H(rx_pos.size(), tx_pos.size());
    for (Eigen::Index t = 0; t < H.cols(); ++t)
    {
        for (Eigen::Index r = 0; r < H.rows(); ++r)
        {
            if ((rx_pos[r] - tx_pos[t]).norm() == 0.0)
                throw singularity_error("build_native_channel: TX and RX elements overlap.");
            const auto g = pair_geometry(tx_pos[t], rx_pos[r], tx.boresight(), rx.boresight());
            H(r, t) = friis_coefficient(link.wavelength(), g.distance, element_gain(pattern, g.tx_off_boresight),
                                        element_gain(pattern, g.rx_off_boresight));
        }
    }
    return {std::move(H), tx, rx};
}

// Thin SVD H = U diag(s) V^H with s descending.
struct SingularTriple
{
    CMatrix U;
    RVector s;
    CMatrix V;
};

// Dense SVD. Each column of V is rotated so its largest-magnitude entry is
// real and positive (first such entry on ties); U gets the same rotation so
// the product is unchanged.
inline SingularTriple decompose(const CMatrix &H)
{
    if (!H.allFinite())
        throw input_error("decompose: matrix has non-finite entries.");
    Eigen::BDCSVD<CMatrix> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SingularTriple out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    for (Eigen::Index k = 0; k < out.V.cols(); ++k)
    {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index e = 0; e < out.V.rows(); ++e)
        {
            const double mag = std::abs(out.V(e, k));
            if (mag > best * (1.0 + 1e-12))
            {
                best = mag;
                arg = e;
            }
        }
        if (best <= 0.0)
            continue;
        const cdouble rot = std::conj(out.V(arg, k)) / best;
        out.V.col(k) *= rot;
        out.U.col(k) *= rot;
        out.V(arg, k) = cdouble(best, 0.0);
    }
    return out;
}

inline SingularTriple decompose(const NativeChannel &channel) { return decompose(channel.H); }

} // namespace beamcap

#endif
