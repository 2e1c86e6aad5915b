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

#ifndef BEAMCAP_BEAMSPACE_HPP
#define BEAMCAP_BEAMSPACE_HPP

#include "beamcap/array_geometry.hpp"
#include "beamcap/core.hpp"
#include "beamcap/hg_beams.hpp"
#include "beamcap/native_channel.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <vector>

namespace beamcap
{

// HG modes grouped in frontiers i = max(l, m). Frontier i lists
// (0,i), (1,i), ..., (i,i), (i,i-1), ..., (i,0): 2i+1 modes, so the first
// (L+1)^2 entries are exactly the modes with max(l, m) <= L.
struct ModeOrdering
{
    std::vector<ModeIndex> modes;
    std::vector<std::size_t> frontier_offsets; // start of frontier i
    int l_max = 0;

    std::size_t size() const { return modes.size(); }
    std::size_t frontier_begin(int i) const { return frontier_offsets.at(i); }
    std::size_t frontier_end(int i) const { return i == l_max ? modes.size() : frontier_offsets.at(i + 1); }
    static std::size_t prefix_length(int l) { return static_cast<std::size_t>(l + 1) * (l + 1); }
};

inline ModeOrdering canonical_mode_order(int l_max)
{
    if (l_max < 0)
        throw input_error("canonical_mode_order: L_max must be non-negative.");
    ModeOrdering out;
    out.l_max = l_max;
    out.modes.reserve(ModeOrdering::prefix_length(l_max));
    for (int i = 0; i <= l_max; ++i)
    {
        out.frontier_offsets.push_back(out.modes.size());
        for (int l = 0; l <= i; ++l)
            out.modes.push_back({l, i});
        for (int m = i - 1; m >= 0; --m)
            out.modes.push_back({i, m});
    }
    return out;
}

// Column c of the result is HG_{modes[c]} sampled at the array elements on
// the array's own plane, rows in canonical element order.
inline CMatrix sample_modes(std::span<const ModeIndex> modes, const ArraySpec &array, const BeamParameters &params)
{
    int max_order = 0;
    for (const auto &md : modes)
        max_order = std::max({max_order, md.l, md.m});

    const double z = array.z_position();
    const auto g = beam_geometry(params, z);
    const double scale = std::sqrt(2.0) / g.radius;
    const double k = params.wavenumber();
    const int n = array.half_index();
    const int per_axis = array.per_axis();

    // 1-D Hermite functions per axis coordinate; the grid is the same along x and y
    std::vector<std::vector<double>> phi(per_axis);
    for (int i = -n; i <= n; ++i)
        phi[i + n] = hermite_functions(max_order, scale * i * array.spacing());

    CMatrix A(array.element_count(), static_cast<Eigen::Index>(modes.size()));
    for (std::size_t c = 0; c < modes.size(); ++c)
    {
        const auto &md = modes[c];
        const double mode_phase = (1 + md.l + md.m) * g.gouy_base + carrier_phase(z, params.wavelength());
        for (int i = -n; i <= n; ++i)
        {
            const double x = i * array.spacing();
            for (int j = -n; j <= n; ++j)
            {
                const double y = j * array.spacing();
                const double amp = scale * phi[i + n][md.l] * phi[j + n][md.m];
                const double phase = -0.5 * k * (x * x + y * y) * g.inverse_curvature + mode_phase;
                A(static_cast<Eigen::Index>(array.element_index(i, j)), static_cast<Eigen::Index>(c)) =
                    std::polar(amp, phase);
            }
        }
    }
    return A;
}

inline CMatrix sample_modes(const ModeOrdering &ordering, const ArraySpec &array, const BeamParameters &params)
{
    return sample_modes(std::span<const ModeIndex>(ordering.modes), array, params);
}

// Orthonormalized aperture basis, grown one batch of raw columns at a time.
//
// raw holds every column ever offered. Q holds the kept ones after modified
// Gram-Schmidt with one re-orthogonalization pass; R (kept x kept, upper
// triangular) satisfies raw.col(kept[c]) = Q * R.col(c). A column is dropped
// when its norm after projection falls below drop_tol times its original
// norm. Extending never touches existing columns of Q.
struct BeamBasis
{
    CMatrix raw;
    CMatrix Q;
    CMatrix R;
    std::vector<Eigen::Index> kept;    // raw column indices
    std::vector<Eigen::Index> dropped; // raw column indices
    std::vector<ModeIndex> labels;     // per raw column, empty for non-HG bases
    double drop_tol = 1e-8;
    int l_max = -1; // highest complete HG frontier, -1 if not an HG basis

    static BeamBasis empty(Eigen::Index elements, double drop_tol = 1e-8)
    {
        BeamBasis b;
        b.raw.resize(elements, 0);
        b.Q.resize(elements, 0);
        b.R.resize(0, 0);
        b.drop_tol = drop_tol;
        return b;
    }

    Eigen::Index element_count() const { return raw.rows(); }
    Eigen::Index raw_count() const { return raw.cols(); }
    Eigen::Index kept_count() const { return Q.cols(); }

    // The basis as it stood after the first raw_columns columns were offered.
    BeamBasis prefix(Eigen::Index raw_columns) const
    {
        if (raw_columns < 0 || raw_columns > raw_count())
            throw input_error("BeamBasis::prefix: column count out of range.");
        BeamBasis b;
        b.drop_tol = drop_tol;
        b.raw = raw.leftCols(raw_columns);
        for (auto c : kept)
            if (c < raw_columns)
                b.kept.push_back(c);
        for (auto c : dropped)
            if (c < raw_columns)
                b.dropped.push_back(c);
        const auto n = static_cast<Eigen::Index>(b.kept.size());
        b.Q = Q.leftCols(n);
        b.R = R.topLeftCorner(n, n);
        if (!labels.empty())
            b.labels.assign(labels.begin(), labels.begin() + raw_columns);
        return b;
    }
};

inline BeamBasis extend_orthonormal_basis(BeamBasis basis, const CMatrix &columns,
                                          std::span<const ModeIndex> labels = {})
{
    if (columns.rows() != basis.element_count())
        throw input_error("extend_orthonormal_basis: new columns sampled on a different aperture.");
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != columns.cols())
        throw input_error("extend_orthonormal_basis: label count does not match column count.");

    const Eigen::Index first_raw = basis.raw_count();
    basis.raw.conservativeResize(Eigen::NoChange, first_raw + columns.cols());
    basis.raw.rightCols(columns.cols()) = columns;
    basis.labels.insert(basis.labels.end(), labels.begin(), labels.end());

    for (Eigen::Index c = 0; c < columns.cols(); ++c)
    {
        CVector v = columns.col(c);
        const double original = v.norm();
        const Eigen::Index n = basis.kept_count();
        CVector coef = CVector::Zero(n);
        for (int pass = 0; pass < 2; ++pass)
        {
            for (Eigen::Index q = 0; q < n; ++q)
            {
                const cdouble p = basis.Q.col(q).dot(v);
                v -= p * basis.Q.col(q);
                coef(q) += p;
            }
        }
        const double residual = v.norm();
        if (!(original > 0.0) || !(residual > 0.0) || residual < basis.drop_tol * original)
        {
            basis.dropped.push_back(first_raw + c);
            continue;
        }
        basis.Q.conservativeResize(Eigen::NoChange, n + 1);
        basis.Q.col(n) = v / residual;
        basis.R.conservativeResize(n + 1, n + 1);
        basis.R.row(n).setZero();
        basis.R.col(n).head(n) = coef;
        basis.R(n, n) = residual;
        basis.kept.push_back(first_raw + c);
    }
    return basis;
}

// HG basis on one aperture built frontier by frontier, so the basis for any
// smaller L is a prefix of this one.
inline BeamBasis hg_basis(int l_max, const ArraySpec &array, const BeamParameters &params, double drop_tol = 1e-8)
{
    const auto ordering = canonical_mode_order(l_max);
    auto basis = BeamBasis::empty(static_cast<Eigen::Index>(array.element_count()), drop_tol);
    for (int i = 0; i <= l_max; ++i)
    {
        const std::span<const ModeIndex> frontier(ordering.modes.data() + ordering.frontier_begin(i),
                                                  ordering.frontier_end(i) - ordering.frontier_begin(i));
        basis = extend_orthonormal_basis(std::move(basis), sample_modes(frontier, array, params), frontier);
        basis.l_max = i;
    }
    return basis;
}

// Least-squares projection of one aperture field onto span(Q).
struct ProjectionResult
{
    CVector coefficients; // raw-mode frame, one per kept column
    double residual;      // |f - Q Q^H f|^2 / |f|^2
};

inline ProjectionResult project_field(const CVector &field, const BeamBasis &basis)
{
    if (field.size() != basis.element_count())
        throw input_error("project_field: field length does not match the aperture.");
    const double energy = field.squaredNorm();
    if (!(energy > 0.0))
        throw input_error("project_field: zero field has no relative residual.");
    const CVector q_coef = basis.Q.adjoint() * field;
    const CVector rest = field - basis.Q * q_coef;
    ProjectionResult out;
    out.coefficients = basis.R.triangularView<Eigen::Upper>().solve(q_coef);
    out.residual = rest.squaredNorm() / energy;
    return out;
}

// Residuals for every column of fields at once.
inline RVector projection_residuals(const CMatrix &fields, const BeamBasis &basis)
{
    if (fields.rows() != basis.element_count())
        throw input_error("projection_residuals: field length does not match the aperture.");
    const CMatrix rest = fields - basis.Q * (basis.Q.adjoint() * fields);
    RVector out(fields.cols());
    for (Eigen::Index k = 0; k < fields.cols(); ++k)
    {
        const double energy = fields.col(k).squaredNorm();
        if (!(energy > 0.0))
            throw input_error("projection_residuals: zero field has no relative residual.");
        out(k) = rest.col(k).squaredNorm() / energy;
    }
    return out;
}

// Channel between TX and RX beam filters: rows are RX basis columns, columns
// are TX basis columns.
struct BeamspaceChannel
{
    CMatrix H;
    std::shared_ptr<const BeamBasis> tx;
    std::shared_ptr<const BeamBasis> rx;
    int l_max = -1;
};

namespace detail
{
inline void check_bases(const NativeChannel &native, const BeamBasis &tx, const BeamBasis &rx, const char *who)
{
    if (tx.element_count() != native.H.cols() || rx.element_count() != native.H.rows())
        throw input_error(std::string(who) + ": basis apertures do not match the channel dimensions.");
}
} // namespace detail

// Noiseless beamspace channel Q_rx^H H Q_tx.
inline BeamspaceChannel compress_channel(const NativeChannel &native, std::shared_ptr<const BeamBasis> tx,
                                         std::shared_ptr<const BeamBasis> rx)
{
    detail::check_bases(native, *tx, *rx, "compress_channel");
    BeamspaceChannel out;
    out.H = rx->Q.adjoint() * (native.H * tx->Q);
    out.l_max = std::min(tx->l_max, rx->l_max);
    out.tx = std::move(tx);
    out.rx = std::move(rx);
    return out;
}

inline BeamspaceChannel compress_channel(const NativeChannel &native, const BeamBasis &tx, const BeamBasis &rx)
{
    return compress_channel(native, std::make_shared<const BeamBasis>(tx), std::make_shared<const BeamBasis>(rx));
}

struct SoundingParams
{
    double tx_power_w = 1.0;
    double noise_w = 0.0; // per RX element
    int repetitions = 1;
    std::uint64_t seed = 0;

    static SoundingParams from_link(const LinkBudget &link, int repetitions, std::uint64_t seed)
    {
        return {link.tx_power_watts(), noise_power(link).watts, repetitions, seed};
    }
};

// Circular complex Gaussian noise vector for one (seed, TX mode, repetition)
// triple. Each triple owns an independent generator, so the draws do not
// depend on the order in which modes are sounded.
inline CVector sounding_noise(std::uint64_t seed, std::uint64_t mode, std::uint64_t repetition, Eigen::Index length,
                              double variance)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(mode >> 32),
                      static_cast<std::uint32_t>(repetition), static_cast<std::uint32_t>(repetition >> 32)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
    CVector n(length);
    for (Eigen::Index e = 0; e < length; ++e)
    {
        const double re = normal(gen);
        const double im = normal(gen);
        n(e) = {re, im};
    }
    return n;
}

// LS estimate of the beamspace channel by sounding one TX mode at a time with
// the full transmit power and combining with every RX mode:
//   y = H sqrt(P) q_t + n,   H_hat[:, t] = Q_rx^H y / sqrt(P)
// averaged over the repetitions.
inline BeamspaceChannel ls_estimate(const NativeChannel &native, std::shared_ptr<const BeamBasis> tx,
                                    std::shared_ptr<const BeamBasis> rx, const SoundingParams &sounding)
{
    detail::check_bases(native, *tx, *rx, "ls_estimate");
    if (sounding.repetitions < 1)
        throw input_error("ls_estimate: repetitions must be at least 1.");
    if (!(sounding.tx_power_w > 0.0) || !(sounding.noise_w >= 0.0))
        throw input_error("ls_estimate: power must be positive and noise non-negative.");

    const double amp = std::sqrt(sounding.tx_power_w);
    BeamspaceChannel out;
    out.H.resize(rx->kept_count(), tx->kept_count());
    for (Eigen::Index t = 0; t < tx->kept_count(); ++t)
    {
        const CVector clean = native.H * (amp * tx->Q.col(t));
        const auto mode = static_cast<std::uint64_t>(tx->kept[static_cast<std::size_t>(t)]);
        if (sounding.noise_w == 0.0)
        {
            out.H.col(t) = rx->Q.adjoint() * clean / amp;
            continue;
        }
        CVector acc = CVector::Zero(rx->kept_count());
        for (int rep = 0; rep < sounding.repetitions; ++rep)
        {
            const CVector y =
                clean + sounding_noise(sounding.seed, mode, static_cast<std::uint64_t>(rep), clean.size(), sounding.noise_w);
            acc += rx->Q.adjoint() * y;
        }
        out.H.col(t) = acc / (amp * sounding.repetitions);
    }
    out.l_max = std::min(tx->l_max, rx->l_max);
    out.tx = std::move(tx);
    out.rx = std::move(rx);
    return out;
}

inline BeamspaceChannel ls_estimate(const NativeChannel &native, std::shared_ptr<const BeamBasis> tx,
                                    std::shared_ptr<const BeamBasis> rx, const LinkBudget &link, int repetitions,
                                    std::uint64_t seed)
{
    return ls_estimate(native, std::move(tx), std::move(rx), SoundingParams::from_link(link, repetitions, seed));
}

struct AntennaFilters
{
    CMatrix tx; // elements x modes, column k is Q_tx v_k
    CMatrix rx; // elements x modes, column k is Q_rx u_k
};

// Maps beamspace singular vectors back onto the element apertures.
inline AntennaFilters antenna_filters(const SingularTriple &beamspace_svd, const BeamBasis &tx, const BeamBasis &rx)
{
    if (beamspace_svd.V.rows() != tx.kept_count() || beamspace_svd.U.rows() != rx.kept_count())
        throw input_error("antenna_filters: singular vectors do not match the basis dimensions.");
    return {tx.Q * beamspace_svd.V, rx.Q * beamspace_svd.U};
}

// TX and RX HG bases over a native channel, grown on demand. Serves the
// beamspace channel for any L either noiselessly or through LS sounding.
// Keeps a reference to the native channel, which must outlive it.
class HgBeamspace
{
public:
    HgBeamspace(const NativeChannel &native, const BeamParameters &params, double drop_tol = 1e-8)
        : native_(native), params_(params), tx_(BeamBasis::empty(native.H.cols(), drop_tol)),
          rx_(BeamBasis::empty(native.H.rows(), drop_tol))
    {
    }

    void ensure(int l_max)
    {
        for (int i = tx_.l_max + 1; i <= l_max; ++i)
        {
            const auto ordering = canonical_mode_order(i);
            const std::span<const ModeIndex> frontier(ordering.modes.data() + ordering.frontier_begin(i),
                                                      ordering.frontier_end(i) - ordering.frontier_begin(i));
            tx_ = extend_orthonormal_basis(std::move(tx_), sample_modes(frontier, native_.tx, params_), frontier);
            rx_ = extend_orthonormal_basis(std::move(rx_), sample_modes(frontier, native_.rx, params_), frontier);
            tx_.l_max = i;
            rx_.l_max = i;
        }
    }

    std::shared_ptr<const BeamBasis> tx_basis(int l_max)
    {
        ensure(l_max);
        auto b = tx_.prefix(static_cast<Eigen::Index>(ModeOrdering::prefix_length(l_max)));
        b.l_max = l_max;
        return std::make_shared<const BeamBasis>(std::move(b));
    }

    std::shared_ptr<const BeamBasis> rx_basis(int l_max)
    {
        ensure(l_max);
        auto b = rx_.prefix(static_cast<Eigen::Index>(ModeOrdering::prefix_length(l_max)));
        b.l_max = l_max;
        return std::make_shared<const BeamBasis>(std::move(b));
    }

    BeamspaceChannel compressed(int l_max) { return compress_channel(native_, tx_basis(l_max), rx_basis(l_max)); }

    BeamspaceChannel estimated(int l_max, const SoundingParams &sounding)
    {
        return ls_estimate(native_, tx_basis(l_max), rx_basis(l_max), sounding);
    }

    const NativeChannel &native() const { return native_; }
    const BeamParameters &params() const { return params_; }

private:
    const NativeChannel &native_;
    BeamParameters params_;
    BeamBasis tx_;
    BeamBasis rx_;
};

} // namespace beamcap

#endif
