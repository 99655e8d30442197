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

#ifndef AOA_CLASSICAL_HPP
#define AOA_CLASSICAL_HPP

#include "aoa/array_model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace aoa
{
    struct GridSpec
    {
        std::pair<double, double> fov_deg{-25.0, 25.0};
        double step_deg = 0.1;

        // Points min, min+step, ..., up to max (inclusive when max lands on the grid).
        std::size_t point_count() const;
        double angle(std::size_t index) const { return fov_deg.first + static_cast<double>(index) * step_deg; }
        std::vector<double> angles() const;

        // Nearest grid index to an angle (clamped to the grid).
        std::size_t nearest_index(double angle_deg) const;

        void validate() const;
    };

    struct EstimateResult
    {
        std::string method;
        int order = 0;
        std::vector<double> angles_deg; // ascending
        double objective = 0.0;
        int iterations = 0;
        double runtime_seconds = 0.0;
        std::vector<double> trace; // AP: objective after every angle update; OMP: residual norms
    };

    // Steering vectors for every grid point, computed once and shared by the
    // grid-search estimators. Optionally carries the full Gram matrix A^H A.
    class SteeringDictionary
    {
    public:
        SteeringDictionary(const ArrayGeometry &geometry, const GridSpec &grid, bool with_gram = false);

        const ArrayGeometry &geometry() const { return geometry_; }
        const GridSpec &grid() const { return grid_; }
        const CMatrix &atoms() const { return atoms_; } // N x P
        const RVector &atom_norms2() const { return norms2_; }
        bool has_gram() const { return gram_.size() > 0; }
        const CMatrix &gram() const { return gram_; }

        std::size_t size() const { return static_cast<std::size_t>(atoms_.cols()); }
        cdouble inner(std::size_t p, std::size_t q) const; // a_p^H a_q

    private:
        ArrayGeometry geometry_;
        GridSpec grid_;
        CMatrix atoms_;
        RVector norms2_;
        CMatrix gram_;
    };

    struct SmoothedCovariance
    {
        CMatrix matrix;        // Q x Q
        int subarray_size = 0; // Q
        int subarray_count = 0; // L
    };

    // Indices of the `count` largest strict local maxima (boundaries eligible),
    // padded with the largest remaining points when there are fewer peaks.
    std::vector<std::size_t> pick_peaks(const RVector &values, int count);

    // B(theta_p) = |a(theta_p)^H y|^2 / N.
    RVector bartlett_spectrum(const CVector &y, const SteeringDictionary &dict);
    RVector bartlett_spectrum(const Snapshot &snapshot, const ArrayGeometry &geometry, const GridSpec &grid);

    // Largest M Bartlett peaks.
    EstimateResult bartlett_estimate(const CVector &y, int M, const SteeringDictionary &dict);

    // J = ||P_A y||^2 for the given grid indices.
    double ml_objective(const CVector &y, const SteeringDictionary &dict, const std::vector<std::size_t> &indices);

    struct MlOptions
    {
        int max_sources = 3;
        double operation_budget = 1e11; // evaluated with (N^2 + M^3) P^M
        unsigned workers = 1;
    };

    // Exhaustive deterministic ML over unordered grid combinations.
    EstimateResult ml_estimate(const CVector &y, int M, const SteeringDictionary &dict, const MlOptions &options = {});

    // Alternating projections on the same objective, K full passes at most.
    EstimateResult ap_estimate(const CVector &y, int M, const SteeringDictionary &dict, int max_iterations = 10);

    // Orthogonal matching pursuit over the steering dictionary.
    EstimateResult omp_estimate(const CVector &y, int M, const SteeringDictionary &dict);

    // Forward spatial smoothing with L = N - Q + 1 windows of length Q.
    SmoothedCovariance spatial_smooth(const CVector &y, int subarray_size);

    // MUSIC on a smoothed covariance. `dict` must be built on the Q-element subarray.
    EstimateResult music_estimate(const SmoothedCovariance &R, int M, const SteeringDictionary &dict);
    EstimateResult music_estimate(const SmoothedCovariance &R, int M, const ArrayGeometry &geometry, const GridSpec &grid);

    RVector music_pseudospectrum(const SmoothedCovariance &R, int M, const SteeringDictionary &dict);
}

#endif
