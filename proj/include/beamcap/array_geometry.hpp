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

#ifndef BEAMCAP_ARRAY_GEOMETRY_HPP
#define BEAMCAP_ARRAY_GEOMETRY_HPP

#include "beamcap/core.hpp"

#include <cmath>
#include <vector>

namespace beamcap
{

enum class Boresight
{
    plus_z,
    minus_z
};

inline Vec3 boresight_vector(Boresight b)
{
    return b == Boresight::plus_z ? Vec3(0.0, 0.0, 1.0) : Vec3(0.0, 0.0, -1.0);
}

// Square uniform planar array in the plane z = z_position. Elements are indexed
// i, j in [-N, N] along x and y, so the aperture half-width is N * spacing.
class ArraySpec
{
public:
    ArraySpec(int half_index, double spacing, double z_position, Boresight boresight)
        : half_index_(half_index), spacing_(spacing), z_(z_position), boresight_(boresight)
    {
        if (half_index < 0)
            throw input_error("ArraySpec: half_index must be non-negative.");
        if (!(spacing > 0.0) || !std::isfinite(spacing))
            throw input_error("ArraySpec: spacing must be positive and finite.");
        if (!std::isfinite(z_position))
            throw input_error("ArraySpec: z_position must be finite.");
    }

    // TX faces +z, RX faces -z.
    static ArraySpec transmitter(int half_index, double spacing, double z_position)
    {
        return {half_index, spacing, z_position, Boresight::plus_z};
    }
    static ArraySpec receiver(int half_index, double spacing, double z_position)
    {
        return {half_index, spacing, z_position, Boresight::minus_z};
    }

    int half_index() const { return half_index_; }
    double spacing() const { return spacing_; }
    double z_position() const { return z_; }
    Boresight boresight() const { return boresight_; }

    int per_axis() const { return 2 * half_index_ + 1; }
    std::size_t element_count() const { return static_cast<std::size_t>(per_axis()) * per_axis(); }
    double half_width() const { return half_index_ * spacing_; }

    // Canonical index of element (i, j): i outer, j inner.
    std::size_t element_index(int i, int j) const
    {
        return static_cast<std::size_t>(i + half_index_) * per_axis() + static_cast<std::size_t>(j + half_index_);
    }

private:
    int half_index_;
    double spacing_;
    double z_;
    Boresight boresight_;
};

// Element positions in canonical row-major order (i outer, j inner):
// position(i, j) = (i * spacing, j * spacing, z).
inline std::vector<Vec3> build_array(const ArraySpec &spec)
{
    std::vector<Vec3> pos;
    pos.reserve(spec.element_count());
    const int n = spec.half_index();
    for (int i = -n; i <= n; ++i)
        for (int j = -n; j <= n; ++j)
            pos.emplace_back(i * spec.spacing(), j * spec.spacing(), spec.z_position());
    return pos;
}

enum class PatternKind
{
    isotropic,
    directional
};

// Per-element gain pattern. The directional kind uses the parametric rolloff
//   G_dB(theta) = max_gain - min(12 (theta / rolloff)^2, attenuation_floor)
struct ElementPattern
{
    PatternKind kind = PatternKind::isotropic;
    double max_gain_dbi = 8.0;
    double rolloff_deg = 65.0;
    double attenuation_floor_db = 30.0;

    static ElementPattern isotropic() { return {}; }
    static ElementPattern directional(double max_gain_dbi = 8.0, double rolloff_deg = 65.0, double floor_db = 30.0)
    {
        return {PatternKind::directional, max_gain_dbi, rolloff_deg, floor_db};
    }
};

// Linear power gain at the given off-boresight angle (radians, in [0, pi]).
inline double element_gain(const ElementPattern &pattern, double off_boresight)
{
    if (!(off_boresight >= 0.0 && off_boresight <= pi))
        throw input_error("element_gain: off-boresight angle must lie in [0, pi].");
    if (pattern.kind == PatternKind::isotropic)
        return 1.0;
    const double ratio = off_boresight / (pattern.rolloff_deg * pi / 180.0);
    const double attenuation = std::min(12.0 * ratio * ratio, pattern.attenuation_floor_db);
    return db_to_linear(pattern.max_gain_dbi - attenuation);
}

struct PairGeometry
{
    double distance;
    double tx_off_boresight;
    double rx_off_boresight;
};

namespace detail
{
inline double angle_between(const Vec3 &a, const Vec3 &unit_b)
{
    // atan2 form stays accurate near 0 where acos loses digits
    return std::atan2(a.cross(unit_b).norm(), a.dot(unit_b));
}
} // namespace detail

inline PairGeometry pair_geometry(const Vec3 &tx_pos, const Vec3 &rx_pos,
                                  Boresight tx_boresight = Boresight::plus_z,
                                  Boresight rx_boresight = Boresight::minus_z)
{
    const Vec3 ray = rx_pos - tx_pos;
    const double d = ray.norm();
    if (!(d > 0.0))
        throw input_error("pair_geometry: TX and RX positions coincide.");
    return {d,
            detail::angle_between(ray, boresight_vector(tx_boresight)),
            detail::angle_between(-ray, boresight_vector(rx_boresight))};
}

} // namespace beamcap

#endif
