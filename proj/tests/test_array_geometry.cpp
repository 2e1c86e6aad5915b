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

#include <catch_amalgamated.hpp>

#include "beamcap/array_geometry.hpp"

#include <cmath>
#include <random>

using namespace beamcap;
using Catch::Approx;

TEST_CASE("build_array - 27x27 grid at 2 cm")
{
    const auto spec = ArraySpec::transmitter(13, 0.02, -7.5);
    const auto pos = build_array(spec);
    REQUIRE(pos.size() == 729);
    CHECK(pos.front().x() == Approx(-0.26).margin(1e-15));
    CHECK(pos.front().y() == Approx(-0.26).margin(1e-15));
    CHECK(pos.back().x() == Approx(0.26).margin(1e-15));
    CHECK(pos.back().y() == Approx(0.26).margin(1e-15));
    for (const auto &p : pos)
        CHECK(p.z() == -7.5);

    // i outer, j inner
    CHECK(pos[1].x() == pos[0].x());
    CHECK(pos[1].y() == Approx(-0.24));
    CHECK(pos[27].x() == Approx(-0.24));
    CHECK(spec.element_index(-13, -12) == 1);
    CHECK(spec.element_index(0, 0) == 364);
}

TEST_CASE("build_array - degenerate and unit arrays")
{
    const auto single = build_array(ArraySpec::receiver(0, 0.37, 2.0));
    REQUIRE(single.size() == 1);
    CHECK(single[0] == Vec3(0.0, 0.0, 2.0));

    const auto nine = build_array(ArraySpec::transmitter(1, 1.0, 0.0));
    REQUIRE(nine.size() == 9);
    for (const auto &p : nine)
    {
        CHECK((p.x() == -1.0 || p.x() == 0.0 || p.x() == 1.0));
        CHECK((p.y() == -1.0 || p.y() == 0.0 || p.y() == 1.0));
    }
}

TEST_CASE("build_array - point symmetry of the grid")
{
    const auto spec = ArraySpec::transmitter(4, 0.03, 1.0);
    const auto pos = build_array(spec);
    for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
        {
            const auto &a = pos[spec.element_index(i, j)];
            const auto &b = pos[spec.element_index(-i, -j)];
            CHECK(a.x() == -b.x());
            CHECK(a.y() == -b.y());
        }
}

TEST_CASE("ArraySpec - invalid construction")
{
    CHECK_THROWS_AS(ArraySpec(-1, 0.02, 0.0, Boresight::plus_z), input_error);
    CHECK_THROWS_AS(ArraySpec(3, 0.0, 0.0, Boresight::plus_z), input_error);
    CHECK_THROWS_AS(ArraySpec(3, -0.01, 0.0, Boresight::plus_z), input_error);
    CHECK(ArraySpec::transmitter(1, 1, 0).boresight() == Boresight::plus_z);
    CHECK(ArraySpec::receiver(1, 1, 0).boresight() == Boresight::minus_z);
}

TEST_CASE("element_gain - isotropic and parametric")
{
    const auto iso = ElementPattern::isotropic();
    for (double a : {0.0, 0.3, 1.5, pi})
        CHECK(element_gain(iso, a) == 1.0);

    const auto dir = ElementPattern::directional(8.0, 65.0, 30.0);
    CHECK(element_gain(dir, 0.0) == Approx(std::pow(10.0, 0.8)).epsilon(1e-14));
    CHECK(element_gain(dir, 0.0) == Approx(6.3096).epsilon(1e-4));

    // 12 dB below the peak at the rolloff angle
    const double at_rolloff = element_gain(dir, 65.0 * pi / 180.0);
    CHECK(linear_to_db(at_rolloff) == Approx(8.0 - 12.0).margin(1e-12));

    // floor: 8 - 30 dBi far off boresight
    CHECK(linear_to_db(element_gain(dir, pi)) == Approx(-22.0).margin(1e-12));

    CHECK_THROWS_AS(element_gain(dir, -0.1), input_error);
    CHECK_THROWS_AS(element_gain(dir, 3.2), input_error);
    CHECK_THROWS_AS(element_gain(dir, std::nan("")), input_error);
}

TEST_CASE("element_gain - non-increasing on [0, pi/2]")
{
    const auto dir = ElementPattern::directional();
    double prev = element_gain(dir, 0.0);
    for (int k = 1; k <= 1000; ++k)
    {
        const double g = element_gain(dir, k * (pi / 2) / 1000);
        CHECK(g <= prev);
        prev = g;
    }
}

TEST_CASE("pair_geometry - on-axis and 3-4-5")
{
    const auto g = pair_geometry({0, 0, -7.5}, {0, 0, 7.5});
    CHECK(g.distance == 15.0);
    CHECK(g.tx_off_boresight == 0.0);
    CHECK(g.rx_off_boresight == 0.0);

    const auto h = pair_geometry({0, 0, 0}, {3, 0, 4}, Boresight::plus_z, Boresight::minus_z);
    CHECK(h.distance == Approx(5.0).epsilon(1e-15));
    CHECK(h.tx_off_boresight == Approx(std::atan(3.0 / 4.0)).epsilon(1e-14));
    CHECK(h.rx_off_boresight == Approx(std::atan(3.0 / 4.0)).epsilon(1e-14));

    CHECK_THROWS_AS(pair_geometry({1, 2, 3}, {1, 2, 3}), input_error);
}

TEST_CASE("pair_geometry - swap symmetry and triangle inequality")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 200; ++trial)
    {
        const Vec3 a(u(rng), u(rng), u(rng) - 5.0);
        const Vec3 b(u(rng), u(rng), u(rng) + 5.0);
        const Vec3 mid(u(rng), u(rng), u(rng));
        const auto ab = pair_geometry(a, b, Boresight::plus_z, Boresight::minus_z);
        const auto ba = pair_geometry(b, a, Boresight::minus_z, Boresight::plus_z);
        CHECK(ab.distance == ba.distance);
        CHECK(ab.tx_off_boresight == Approx(ba.rx_off_boresight).margin(1e-14));
        CHECK(ab.rx_off_boresight == Approx(ba.tx_off_boresight).margin(1e-14));
        const double via = pair_geometry(a, mid).distance + pair_geometry(mid, b).distance;
        CHECK(ab.distance <= via * (1 + 1e-15));
    }
}
