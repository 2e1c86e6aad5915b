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

#ifndef BEAMCAP_CORE_HPP
#define BEAMCAP_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace beamcap
{

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;
inline constexpr double boltzmann = 1.380649e-23;   // J/K
inline constexpr double reference_temperature = 290.0; // K
inline constexpr double default_speed_of_light = 299792458.0;

// Malformed or out-of-range input to a library operation.
class input_error : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Coincident TX/RX positions (zero distance) in the free-space model.
class singularity_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

// Water-filling over a spectrum with no usable (non-zero) singular value.
class no_capacity_error : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watts_to_dbm(double w) { return linear_to_db(w * 1e3); }

} // namespace beamcap

#endif
