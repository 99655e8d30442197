// SPDX-License-Identifier: Apache-2.0
//
// aoa-lab: single-snapshot angle-of-arrival estimation laboratory
// Copyright (C) 2026 The aoa-lab Authors
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

#ifndef AOA_ARRAY_MODEL_HPP
#define AOA_ARRAY_MODEL_HPP

#include "aoa/numerics.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aoa
{
    // Linear array. Positions are measured from the array center in the same
    // length unit as the wavelength (wavelength 1.0 means positions in wavelengths).
    struct ArrayGeometry
    {
        std::vector<double> positions;
        double wavelength = 1.0;

        Eigen::Index element_count() const { return static_cast<Eigen::Index>(positions.size()); }

        // N elements at `spacing` (in wavelengths), symmetric about zero.
        static ArrayGeometry uniform_linear(int element_count = 16, double spacing = 0.5, double wavelength = 1.0);

        // Geometry made of the first `count` elements (subarray of a ULA).
        ArrayGeometry leading(Eigen::Index count) const;

        bool is_uniform(double tol = 1e-12) const;

        void validate() const;
    };

    struct SourceScene
    {
        std::vector<double> angles_deg;
        std::vector<cdouble> gains;

        int count() const { return static_cast<int>(angles_deg.size()); }

        void validate(double fov_min_deg, double fov_max_deg) const;
    };

    struct Snapshot
    {
        CVector y;
        SourceScene scene;
        std::optional<double> snr_db; // empty: noise disabled
        std::uint64_t seed = 0;
        std::optional<std::string> impairment_id;
    };

    struct ImpairmentParams
    {
        double phase_sigma_deg = 0.0;
        std::optional<double> crosstalk_gamma_db; // empty: no cross-talk

        void validate() const;
    };

    struct ImpairmentSpec
    {
        ImpairmentParams params;
        std::uint64_t seed = 0;
        CMatrix H;

        std::string id() const;
    };

    struct SceneDistribution
    {
        std::pair<double, double> fov_deg{-25.0, 25.0};
        int min_sources = 1; // source count uniform over [min_sources, max_sources]
        int max_sources = 4;
        std::pair<double, double> amplitude_range{0.5, 1.5};
        std::pair<double, double> phase_range{0.0, 2.0 * pi};
        std::pair<double, double> snr_range_db{-10.0, 30.0};
        double min_separation_deg = 0.0;
        bool noise_enabled = true;

        static constexpr int max_supported_sources = 4;

        double fov_center() const { return 0.5 * (fov_deg.first + fov_deg.second); }
        double fov_half_width() const { return 0.5 * (fov_deg.second - fov_deg.first); }

        void validate() const;
    };

    // a(theta)_n = exp(j 2 pi x_n sin(theta) / lambda). Throws a domain error for |theta| >= 90.
    CVector steering_vector(const ArrayGeometry &geometry, double theta_deg);

    // Columns are steering vectors for each angle.
    CMatrix steering_matrix(const ArrayGeometry &geometry, const std::vector<double> &angles_deg);

    // Derivative of the steering vector with respect to the angle in radians.
    CVector steering_derivative(const ArrayGeometry &geometry, double theta_deg);

    // Per-element noise variance for a given SNR in dB (unit-amplitude reference source).
    inline double noise_variance(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

    // y = sum_m a(theta_m) s_m + v, v ~ CN(0, 10^(-snr/10) I). snr_db empty disables noise.
    Snapshot synthesize_snapshot(const ArrayGeometry &geometry, const SourceScene &scene,
                                 std::optional<double> snr_db, Rng &rng);

    ImpairmentSpec realize_impairment(const ImpairmentParams &params, Eigen::Index element_count, Rng &rng);

    // Observation replaced by H y; ground truth untouched.
    Snapshot apply_impairment(const ImpairmentSpec &impairment, const Snapshot &snapshot);

    SourceScene sample_scene(const SceneDistribution &dist, Rng &rng);

    // Scene, SNR and noise drawn from `dist` with a generator seeded by `seed`.
    Snapshot draw_snapshot(const ArrayGeometry &geometry, const SceneDistribution &dist, std::uint64_t seed);

    // Real network input: [Re y_0 .. Re y_{N-1}, Im y_0 .. Im y_{N-1}].
    RVector to_real_features(const CVector &y);
}

#endif
