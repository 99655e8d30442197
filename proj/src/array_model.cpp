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

#include "aoa/array_model.hpp"
#include "aoa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace aoa
{
    ArrayGeometry ArrayGeometry::uniform_linear(int element_count, double spacing, double wavelength)
    {
        if (element_count < 1)
            fail(ErrorKind::config, "uniform_linear: element count must be positive");
        if (!(spacing > 0.0))
            fail(ErrorKind::config, "uniform_linear: spacing must be positive");
        ArrayGeometry g;
        g.wavelength = wavelength;
        g.positions.resize(static_cast<std::size_t>(element_count));
        const double center = 0.5 * (element_count - 1);
        for (int n = 0; n < element_count; ++n)
            g.positions[static_cast<std::size_t>(n)] = (n - center) * spacing * wavelength;
        g.validate();
        return g;
    }

    ArrayGeometry ArrayGeometry::leading(Eigen::Index count) const
    {
        if (count < 1 || count > element_count())
            fail(ErrorKind::domain, "leading: subarray size out of range");
        ArrayGeometry g;
        g.wavelength = wavelength;
        g.positions.assign(positions.begin(), positions.begin() + count);
        return g;
    }

    bool ArrayGeometry::is_uniform(double tol) const
    {
        if (positions.size() < 3)
            return true;
        const double d = positions[1] - positions[0];
        for (std::size_t n = 2; n < positions.size(); ++n)
            if (std::abs((positions[n] - positions[n - 1]) - d) > tol * std::max(1.0, std::abs(d)))
                return false;
        return true;
    }

    void ArrayGeometry::validate() const
    {
        if (positions.empty())
            fail(ErrorKind::config, "geometry: no elements");
        if (!(wavelength > 0.0) || !std::isfinite(wavelength))
            fail(ErrorKind::config, "geometry: wavelength must be positive");
        for (std::size_t n = 0; n < positions.size(); ++n)
        {
            if (!std::isfinite(positions[n]))
                fail(ErrorKind::config, "geometry: non-finite element position");
            if (n > 0 && !(positions[n] > positions[n - 1]))
                fail(ErrorKind::config, "geometry: positions must be strictly increasing");
        }
    }

    void SourceScene::validate(double fov_min_deg, double fov_max_deg) const
    {
        if (angles_deg.size() != gains.size())
            fail(ErrorKind::structural, "scene: angle and gain counts differ");
        if (angles_deg.empty() || angles_deg.size() > static_cast<std::size_t>(SceneDistribution::max_supported_sources))
            fail(ErrorKind::config, "scene: source count must be in 1..4");
        for (std::size_t m = 0; m < angles_deg.size(); ++m)
        {
            if (!(angles_deg[m] >= fov_min_deg && angles_deg[m] <= fov_max_deg))
                fail(ErrorKind::domain, "scene: angle " + std::to_string(angles_deg[m]) + " outside the field of view");
            if (gains[m] == cdouble(0.0, 0.0))
                fail(ErrorKind::config, "scene: zero gain");
        }
    }

    void ImpairmentParams::validate() const
    {
        if (!(phase_sigma_deg >= 0.0) || !std::isfinite(phase_sigma_deg))
            fail(ErrorKind::config, "impairment: phase sigma must be >= 0");
        if (crosstalk_gamma_db && (!(*crosstalk_gamma_db > 0.0) || !std::isfinite(*crosstalk_gamma_db)))
            fail(ErrorKind::config, "impairment: cross-talk attenuation must be > 0 dB");
    }

    std::string ImpairmentSpec::id() const
    {
        char buf[128];
        if (params.crosstalk_gamma_db)
            std::snprintf(buf, sizeof buf, "sigma%.6g_gamma%.6g_seed%llu", params.phase_sigma_deg,
                          *params.crosstalk_gamma_db, static_cast<unsigned long long>(seed));
        else
            std::snprintf(buf, sizeof buf, "sigma%.6g_gammainf_seed%llu", params.phase_sigma_deg,
                          static_cast<unsigned long long>(seed));
        return buf;
    }

    void SceneDistribution::validate() const
    {
        if (!(fov_deg.first < fov_deg.second))
            fail(ErrorKind::config, "scene_distribution: fov min must be below fov max");
        if (!(fov_deg.first > -90.0 && fov_deg.second < 90.0))
            fail(ErrorKind::config, "scene_distribution: fov must lie inside (-90, 90) degrees");
        if (min_sources < 1 || max_sources > max_supported_sources || min_sources > max_sources)
            fail(ErrorKind::config, "scene_distribution: source counts must satisfy 1 <= min <= max <= 4");
        if (!(amplitude_range.first > 0.0) || amplitude_range.first > amplitude_range.second)
            fail(ErrorKind::config, "scene_distribution: amplitude range must be positive and ordered");
        if (phase_range.first > phase_range.second)
            fail(ErrorKind::config, "scene_distribution: phase range must be ordered");
        if (snr_range_db.first > snr_range_db.second || !std::isfinite(snr_range_db.first) || !std::isfinite(snr_range_db.second))
            fail(ErrorKind::config, "scene_distribution: snr range must be finite and ordered");
        if (!(min_separation_deg >= 0.0))
            fail(ErrorKind::config, "scene_distribution: min separation must be >= 0");
    }

    CVector steering_vector(const ArrayGeometry &geometry, double theta_deg)
    {
        if (!(std::abs(theta_deg) < 90.0))
            fail(ErrorKind::domain, "steering_vector: angle " + std::to_string(theta_deg) + " deg is outside (-90, 90)");
        const double k = 2.0 * pi * std::sin(deg2rad(theta_deg)) / geometry.wavelength;
        CVector a(geometry.element_count());
        for (Eigen::Index n = 0; n < a.size(); ++n)
            a(n) = std::polar(1.0, k * geometry.positions[static_cast<std::size_t>(n)]);
        return a;
    }

    CMatrix steering_matrix(const ArrayGeometry &geometry, const std::vector<double> &angles_deg)
    {
        CMatrix A(geometry.element_count(), static_cast<Eigen::Index>(angles_deg.size()));
        for (std::size_t m = 0; m < angles_deg.size(); ++m)
            A.col(static_cast<Eigen::Index>(m)) = steering_vector(geometry, angles_deg[m]);
        return A;
    }

    CVector steering_derivative(const ArrayGeometry &geometry, double theta_deg)
    {
        const CVector a = steering_vector(geometry, theta_deg);
        const double dk = 2.0 * pi * std::cos(deg2rad(theta_deg)) / geometry.wavelength;
        CVector d(a.size());
        for (Eigen::Index n = 0; n < a.size(); ++n)
            d(n) = cdouble(0.0, dk * geometry.positions[static_cast<std::size_t>(n)]) * a(n);
        return d;
    }

    Snapshot synthesize_snapshot(const ArrayGeometry &geometry, const SourceScene &scene,
                                 std::optional<double> snr_db, Rng &rng)
    {
        if (scene.angles_deg.size() != scene.gains.size())
            fail(ErrorKind::structural, "synthesize_snapshot: angle and gain counts differ");
        Snapshot snap;
        snap.scene = scene;
        snap.snr_db = snr_db;
        snap.seed = rng.seed();
        snap.y = CVector::Zero(geometry.element_count());
        for (std::size_t m = 0; m < scene.angles_deg.size(); ++m)
            snap.y += steering_vector(geometry, scene.angles_deg[m]) * scene.gains[m];
        if (snr_db)
        {
            if (!std::isfinite(*snr_db))
                fail(ErrorKind::domain, "synthesize_snapshot: SNR must be finite (disable noise instead)");
            snap.y += sample_complex_gaussian(geometry.element_count(), noise_variance(*snr_db), rng);
        }
        return snap;
    }

    ImpairmentSpec realize_impairment(const ImpairmentParams &params, Eigen::Index element_count, Rng &rng)
    {
        params.validate();
        ImpairmentSpec spec;
        spec.params = params;
        spec.seed = rng.seed();
        spec.H = CMatrix::Zero(element_count, element_count);
        const double sigma = deg2rad(params.phase_sigma_deg);
        for (Eigen::Index n = 0; n < element_count; ++n)
            spec.H(n, n) = std::polar(1.0, sigma > 0.0 ? rng.normal(0.0, sigma) : 0.0);
        if (params.crosstalk_gamma_db)
        {
            const double variance = std::pow(10.0, -*params.crosstalk_gamma_db / 10.0);
            const double sd = std::sqrt(0.5 * variance);
            for (Eigen::Index c = 0; c < element_count; ++c)
                for (Eigen::Index r = 0; r < element_count; ++r)
                    if (r != c)
                    {
                        const double re = rng.normal(0.0, sd);
                        const double im = rng.normal(0.0, sd);
                        spec.H(r, c) = cdouble(re, im);
                    }
        }
        return spec;
    }

    Snapshot apply_impairment(const ImpairmentSpec &impairment, const Snapshot &snapshot)
    {
        if (impairment.H.rows() != snapshot.y.size() || impairment.H.cols() != snapshot.y.size())
            fail(ErrorKind::structural, "apply_impairment: H is " + std::to_string(impairment.H.rows()) + "x" +
                                            std::to_string(impairment.H.cols()) + " but the snapshot has " +
                                            std::to_string(snapshot.y.size()) + " elements");
        Snapshot out = snapshot;
        out.y = impairment.H * snapshot.y;
        out.impairment_id = impairment.id();
        return out;
    }

    SourceScene sample_scene(const SceneDistribution &dist, Rng &rng)
    {
        const int M = dist.min_sources == dist.max_sources ? dist.min_sources
                                                           : rng.uniform_int(dist.min_sources, dist.max_sources);
        constexpr int max_attempts = 10000;
        std::vector<double> angles(static_cast<std::size_t>(M));
        int attempt = 0;
        for (;; ++attempt)
        {
            if (attempt >= max_attempts)
                fail(ErrorKind::config, "sample_scene: could not place " + std::to_string(M) + " sources with separation " +
                                            std::to_string(dist.min_separation_deg) + " deg after " +
                                            std::to_string(max_attempts) + " attempts");
            for (auto &a : angles)
                a = rng.uniform(dist.fov_deg.first, dist.fov_deg.second);
            if (dist.min_separation_deg <= 0.0)
                break;
            bool ok = true;
            for (std::size_t i = 0; i < angles.size() && ok; ++i)
                for (std::size_t j = i + 1; j < angles.size() && ok; ++j)
                    ok = std::abs(angles[i] - angles[j]) >= dist.min_separation_deg;
            if (ok)
                break;
        }
        std::sort(angles.begin(), angles.end());

        SourceScene scene;
        scene.angles_deg = angles;
        scene.gains.resize(angles.size());
        for (auto &g : scene.gains)
        {
            const double amp = dist.amplitude_range.first == dist.amplitude_range.second
                                   ? dist.amplitude_range.first
                                   : rng.uniform(dist.amplitude_range.first, dist.amplitude_range.second);
            const double phase = dist.phase_range.first == dist.phase_range.second
                                     ? dist.phase_range.first
                                     : rng.uniform(dist.phase_range.first, dist.phase_range.second);
            g = std::polar(amp, phase);
        }
        return scene;
    }

    Snapshot draw_snapshot(const ArrayGeometry &geometry, const SceneDistribution &dist, std::uint64_t seed)
    {
        Rng rng(seed);
        SourceScene scene = sample_scene(dist, rng);
        std::optional<double> snr;
        if (dist.noise_enabled)
            snr = dist.snr_range_db.first == dist.snr_range_db.second
                      ? dist.snr_range_db.first
                      : rng.uniform(dist.snr_range_db.first, dist.snr_range_db.second);
        Snapshot snap = synthesize_snapshot(geometry, scene, snr, rng);
        snap.seed = seed;
        return snap;
    }

    RVector to_real_features(const CVector &y)
    {
        const Eigen::Index n = y.size();
        RVector x(2 * n);
        x.head(n) = y.real();
        x.tail(n) = y.imag();
        return x;
    }
}
