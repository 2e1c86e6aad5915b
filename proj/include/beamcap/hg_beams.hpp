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

#ifndef BEAMCAP_HG_BEAMS_HPP
#define BEAMCAP_HG_BEAMS_HPP

#include "beamcap/core.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace beamcap
{

// Hermite-Gaussian mode number (l along x, m along y).
struct ModeIndex
{
    int l = 0;
    int m = 0;

    friend bool operator==(const ModeIndex &, const ModeIndex &) = default;
};

struct HermiteValue
{
    double polynomial; // physicists' H_n(xi)
    double function;   // H_n(xi) exp(-xi^2/2) / sqrt(2^n n! sqrt(pi))
};

// Physicists' Hermite polynomial by the three-term recurrence, plus the
// normalized Hermite function by its own recurrence
//   phi_{k+1} = sqrt(2/(k+1)) xi phi_k - sqrt(k/(k+1)) phi_{k-1}
// which never forms 2^n n!. The raw polynomial overflows for large n; only the
// normalized value is used by the beam code.
inline HermiteValue hermite_1d(int n, double xi)
{
    if (n < 0)
        throw input_error("hermite_1d: order must be non-negative.");
    double h_prev = 1.0, h = 1.0;
    double f_prev = std::exp(-0.5 * xi * xi) / std::sqrt(std::sqrt(pi));
    double f = f_prev;
    if (n >= 1)
    {
        h = 2.0 * xi;
        f = std::sqrt(2.0) * xi * f_prev;
    }
    for (int k = 1; k < n; ++k)
    {
        const double h_next = 2.0 * xi * h - 2.0 * k * h_prev;
        const double f_next = std::sqrt(2.0 / (k + 1)) * xi * f - std::sqrt(static_cast<double>(k) / (k + 1)) * f_prev;
        h_prev = h;
        h = h_next;
        f_prev = f;
        f = f_next;
    }
    return {h, f};
}

// phi_0(xi) .. phi_{max_order}(xi) in one pass.
inline std::vector<double> hermite_functions(int max_order, double xi)
{
    std::vector<double> out(static_cast<std::size_t>(std::max(max_order, 0)) + 1);
    out[0] = std::exp(-0.5 * xi * xi) / std::sqrt(std::sqrt(pi));
    if (max_order >= 1)
        out[1] = std::sqrt(2.0) * xi * out[0];
    for (int k = 1; k < max_order; ++k)
        out[k + 1] = std::sqrt(2.0 / (k + 1)) * xi * out[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
    return out;
}

// Gaussian beam with focal plane at z = 0. The TX aperture sits at z_tx < 0
// and the RX aperture at z_rx > 0.
class BeamParameters
{
public:
    BeamParameters(double waist, double wavelength, double z_tx, double z_rx)
        : waist_(waist), wavelength_(wavelength), z_tx_(z_tx), z_rx_(z_rx),
          rayleigh_(pi * waist * waist / wavelength)
    {
        if (!(waist > 0.0) || !(wavelength > 0.0))
            throw input_error("BeamParameters: waist and wavelength must be positive.");
    }

    // Arrays placed symmetrically about the focal plane, -z_tx = z_rx = D/2.
    static BeamParameters symmetric(double waist, double wavelength, double distance)
    {
        return {waist, wavelength, -0.5 * distance, 0.5 * distance};
    }

    double waist() const { return waist_; }
    double wavelength() const { return wavelength_; }
    double wavenumber() const { return 2.0 * pi / wavelength_; }
    double z_tx() const { return z_tx_; }
    double z_rx() const { return z_rx_; }
    double rayleigh_distance() const { return rayleigh_; }

private:
    double waist_;
    double wavelength_;
    double z_tx_;
    double z_rx_;
    double rayleigh_;
};

struct BeamGeometry
{
    double radius;             // w(z)
    double inverse_curvature;  // 1/R(z), zero on the focal plane
    double gouy_base;          // arctan(z / Z_R); mode (l, m) picks up (1 + l + m) times this
};

inline BeamGeometry beam_geometry(const BeamParameters &params, double z)
{
    const double zr = params.rayleigh_distance();
    return {params.waist() * std::sqrt(1.0 + (z * z) / (zr * zr)), z / (z * z + zr * zr), std::atan(z / zr)};
}

// Beam radius on the plane z for a given waist; the quantity minimized by
// optimal_waist.
inline double radius_at(double waist, double wavelength, double z)
{
    const double zr = pi * waist * waist / wavelength;
    return waist * std::sqrt(1.0 + (z * z) / (zr * zr));
}

// Waist that minimizes the beam radius on both array planes for a symmetric
// placement: w0 = sqrt(lambda D / (2 pi)), which puts the arrays exactly one
// Rayleigh distance from the focal plane.
inline BeamParameters optimal_waist(double wavelength, double distance)
{
    if (!(wavelength > 0.0) || !(distance > 0.0))
        throw input_error("optimal_waist: wavelength and distance must be positive.");
    const double z_rx = 0.5 * distance;
    return BeamParameters::symmetric(std::sqrt(wavelength * z_rx / pi), wavelength, distance);
}

// Carrier phase -k z, reduced to within half a cycle before scaling so the
// trig argument stays small at large z.
inline double carrier_phase(double z, double wavelength)
{
    const double cycles = z / wavelength;
    return -2.0 * pi * (cycles - std::nearbyint(cycles));
}

// Complex field of HG_{l,m}. Unit power over the infinite transverse plane.
//   HG = sqrt(2)/w phi_l(sqrt2 x / w) phi_m(sqrt2 y / w)
//        * exp(-j k r^2 / (2R)) * exp(+j (1+l+m) gouy) * exp(-j k z)
// which is the textbook sqrt(1/(2^{l+m-1} pi l! m!)) / w H_l H_m exp(-r^2/w^2)
// written with normalized Hermite functions.
inline cdouble hg_field(const ModeIndex &mode, double x, double y, double z, const BeamParameters &params)
{
    const auto g = beam_geometry(params, z);
    const double scale = std::sqrt(2.0) / g.radius;
    const double amp = scale * hermite_1d(mode.l, scale * x).function * hermite_1d(mode.m, scale * y).function;
    const double k = params.wavenumber();
    const double phase = -0.5 * k * (x * x + y * y) * g.inverse_curvature +
                         ((1 + mode.l + mode.m) * g.gouy_base + carrier_phase(z, params.wavelength()));
    return std::polar(amp, phase);
}

namespace detail
{
// Integral of phi_n(u)^2 over [-limit, limit].
inline double hermite_power_fraction(int n, double limit)
{
    // phi_n is negligible beyond the classical turning point plus a margin
    const double support = std::sqrt(2.0 * n + 1.0) + 12.0;
    const double upper = std::min(limit, support);
    if (upper <= 0.0)
        return 0.0;
    auto integrand = [n](double u) {
        const double f = hermite_1d(n, u).function;
        return f * f;
    };
    double err = 0.0;
    const double half = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, upper, 15,
                                                                                     1e-13, &err);
    return std::min(1.0, 2.0 * half);
}
} // namespace detail

// Fraction of the unit power of HG_{l,m} that falls inside the square
// |x|, |y| <= a, given a / w(z). Separable: the product of two 1-D integrals
// over |u| <= sqrt(2) a / w.
inline double captured_power(const ModeIndex &mode, double half_width_over_radius)
{
    if (!(half_width_over_radius >= 0.0))
        throw input_error("captured_power: a/w must be non-negative.");
    const double limit = std::sqrt(2.0) * half_width_over_radius;
    return detail::hermite_power_fraction(mode.l, limit) * detail::hermite_power_fraction(mode.m, limit);
}

} // namespace beamcap

#endif
