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

#include "aoa/classical.hpp"
#include "aoa/errors.hpp"
#include "aoa/parallel.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace aoa
{
    namespace
    {
        using clock_type = std::chrono::steady_clock;

        double seconds_since(clock_type::time_point start)
        {
            return std::chrono::duration<double>(clock_type::now() - start).count();
        }

        std::vector<double> sorted_angles(const GridSpec &grid, const std::vector<std::size_t> &indices)
        {
            std::vector<double> out;
            out.reserve(indices.size());
            for (auto i : indices)
                out.push_back(grid.angle(i));
            std::sort(out.begin(), out.end());
            return out;
        }

        void check_order(int M, Eigen::Index N, const char *who)
        {
            if (M < 1)
                fail(ErrorKind::domain, std::string(who) + ": number of sources must be at least 1");
            if (M > N)
                fail(ErrorKind::domain, std::string(who) + ": number of sources exceeds the element count");
        }

        void check_snapshot(const CVector &y, const SteeringDictionary &dict, const char *who)
        {
            if (y.size() != dict.atoms().rows())
                fail(ErrorKind::structural, std::string(who) + ": snapshot length " + std::to_string(y.size()) +
                                                " does not match the array (" + std::to_string(dict.atoms().rows()) + ")");
        }

        struct Candidate
        {
            double value = -std::numeric_limits<double>::infinity();
            std::array<std::size_t, 3> tuple{};
        };

        // Larger objective wins; equal objectives go to the lexicographically smaller tuple.
        bool better(const Candidate &a, const Candidate &b)
        {
            if (a.value != b.value)
                return a.value > b.value;
            return a.tuple < b.tuple;
        }
    }

    std::size_t GridSpec::point_count() const
    {
        const double span = (fov_deg.second - fov_deg.first) / step_deg;
        return static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
    }

    std::vector<double> GridSpec::angles() const
    {
        std::vector<double> out(point_count());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = angle(i);
        return out;
    }

    std::size_t GridSpec::nearest_index(double angle_deg) const
    {
        const double r = std::round((angle_deg - fov_deg.first) / step_deg);
        if (r <= 0.0)
            return 0;
        return std::min(point_count() - 1, static_cast<std::size_t>(r));
    }

    void GridSpec::validate() const
    {
        if (!(step_deg > 0.0) || !std::isfinite(step_deg))
            fail(ErrorKind::config, "grid: step must be positive");
        if (!(fov_deg.first < fov_deg.second))
            fail(ErrorKind::config, "grid: fov min must be below fov max");
        if (!(fov_deg.first > -90.0 && fov_deg.second < 90.0))
            fail(ErrorKind::config, "grid: fov must lie inside (-90, 90) degrees");
        if (point_count() < 2)
            fail(ErrorKind::config, "grid: at least two grid points are required");
    }

    SteeringDictionary::SteeringDictionary(const ArrayGeometry &geometry, const GridSpec &grid, bool with_gram)
        : geometry_(geometry), grid_(grid)
    {
        geometry.validate();
        grid.validate();
        atoms_ = steering_matrix(geometry, grid.angles());
        norms2_ = atoms_.colwise().squaredNorm().transpose();
        if (with_gram)
            gram_ = atoms_.adjoint() * atoms_;
    }

    cdouble SteeringDictionary::inner(std::size_t p, std::size_t q) const
    {
        if (has_gram())
            return gram_(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
        return atoms_.col(static_cast<Eigen::Index>(p)).dot(atoms_.col(static_cast<Eigen::Index>(q)));
    }

    std::vector<std::size_t> pick_peaks(const RVector &values, int count)
    {
        const auto P = static_cast<std::size_t>(values.size());
        if (count < 0 || static_cast<std::size_t>(count) > P)
            fail(ErrorKind::estimation, "pick_peaks: requested " + std::to_string(count) + " peaks from " +
                                            std::to_string(P) + " grid points");
        auto by_value = [&](std::size_t a, std::size_t b)
        {
            if (values(static_cast<Eigen::Index>(a)) != values(static_cast<Eigen::Index>(b)))
                return values(static_cast<Eigen::Index>(a)) > values(static_cast<Eigen::Index>(b));
            return a < b;
        };

        std::vector<std::size_t> peaks;
        for (std::size_t i = 0; i < P; ++i)
        {
            const double v = values(static_cast<Eigen::Index>(i));
            const bool left = i == 0 || v > values(static_cast<Eigen::Index>(i - 1));
            const bool right = i + 1 == P || v > values(static_cast<Eigen::Index>(i + 1));
            if (left && right)
                peaks.push_back(i);
        }
        std::sort(peaks.begin(), peaks.end(), by_value);
        if (peaks.size() >= static_cast<std::size_t>(count))
        {
            peaks.resize(static_cast<std::size_t>(count));
            return peaks;
        }

        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < P; ++i)
            if (std::find(peaks.begin(), peaks.end(), i) == peaks.end())
                rest.push_back(i);
        std::sort(rest.begin(), rest.end(), by_value);
        for (std::size_t i = 0; peaks.size() < static_cast<std::size_t>(count); ++i)
            peaks.push_back(rest[i]);
        return peaks;
    }

    RVector bartlett_spectrum(const CVector &y, const SteeringDictionary &dict)
    {
        check_snapshot(y, dict, "bartlett_spectrum");
        const double N = static_cast<double>(y.size());
        return (dict.atoms().adjoint() * y).cwiseAbs2() / N;
    }

    RVector bartlett_spectrum(const Snapshot &snapshot, const ArrayGeometry &geometry, const GridSpec &grid)
    {
        return bartlett_spectrum(snapshot.y, SteeringDictionary(geometry, grid));
    }

    EstimateResult bartlett_estimate(const CVector &y, int M, const SteeringDictionary &dict)
    {
        const auto start = clock_type::now();
        check_order(M, y.size(), "bartlett_estimate");
        const RVector spectrum = bartlett_spectrum(y, dict);
        const auto peaks = pick_peaks(spectrum, M);

        EstimateResult r;
        r.method = "bartlett";
        r.order = M;
        r.angles_deg = sorted_angles(dict.grid(), peaks);
        r.objective = spectrum(static_cast<Eigen::Index>(peaks.front()));
        r.iterations = 1;
        r.runtime_seconds = seconds_since(start);
        return r;
    }

    double ml_objective(const CVector &y, const SteeringDictionary &dict, const std::vector<std::size_t> &indices)
    {
        check_snapshot(y, dict, "ml_objective");
        const auto M = static_cast<Eigen::Index>(indices.size());
        if (M == 0)
            return 0.0;
        CMatrix G(M, M);
        CVector b(M);
        for (Eigen::Index i = 0; i < M; ++i)
        {
            const auto p = indices[static_cast<std::size_t>(i)];
            b(i) = dict.atoms().col(static_cast<Eigen::Index>(p)).dot(y);
            for (Eigen::Index j = 0; j < M; ++j)
                G(i, j) = dict.inner(p, indices[static_cast<std::size_t>(j)]);
        }
        Eigen::LDLT<CMatrix> ldlt(G);
        if (ldlt.info() != Eigen::Success)
            throw ConditioningError("ml_objective: singular steering Gram matrix", std::numeric_limits<double>::infinity());
        return b.dot(ldlt.solve(b)).real();
    }

    EstimateResult ml_estimate(const CVector &y, int M, const SteeringDictionary &dict, const MlOptions &options)
    {
        const auto start = clock_type::now();
        check_snapshot(y, dict, "ml_estimate");
        check_order(M, y.size(), "ml_estimate");

        const std::size_t P = dict.size();
        const double N = static_cast<double>(y.size());
        const double operations = (N * N + std::pow(M, 3)) * std::pow(static_cast<double>(P), M);
        if (M > options.max_sources || operations > options.operation_budget)
        {
            char buf[256];
            std::snprintf(buf, sizeof buf,
                          "ml_estimate: refusing M=%d over P=%zu grid points: (N^2+M^3)*P^M = %.3g operations "
                          "(limit M<=%d, budget %.3g)",
                          M, P, operations, options.max_sources, options.operation_budget);
            fail(ErrorKind::budget, buf);
        }
        if (static_cast<std::size_t>(M) > P)
            fail(ErrorKind::estimation, "ml_estimate: more sources than grid points");

        const CVector b = dict.atoms().adjoint() * y;
        const RVector b2 = b.cwiseAbs2();
        const RVector &n2 = dict.atom_norms2();

        // Partition the outer index across workers; each keeps its best candidate.
        const unsigned workers = std::max(1u, options.workers);
        std::vector<Candidate> best(workers);
        const std::size_t outer = P;
        const std::size_t chunk = (outer + workers - 1) / workers;
        parallel_for(workers, workers, [&](std::size_t w)
                     {
            Candidate local;
            const std::size_t begin = std::min(outer, w * chunk);
            const std::size_t end = std::min(outer, begin + chunk);
            for (std::size_t p = begin; p < end; ++p)
            {
                const auto ip = static_cast<Eigen::Index>(p);
                if (M == 1)
                {
                    Candidate c{b2(ip) / n2(ip), {p, 0, 0}};
                    if (better(c, local))
                        local = c;
                    continue;
                }
                for (std::size_t q = p + 1; q < P; ++q)
                {
                    const auto iq = static_cast<Eigen::Index>(q);
                    if (M == 2)
                    {
                        const cdouble g = dict.inner(p, q);
                        const double det = n2(ip) * n2(iq) - std::norm(g);
                        if (!(det > 1e-12 * n2(ip) * n2(iq)))
                            continue;
                        const double num = n2(iq) * b2(ip) + n2(ip) * b2(iq) - 2.0 * (std::conj(b(ip)) * g * b(iq)).real();
                        Candidate c{num / det, {p, q, 0}};
                        if (better(c, local))
                            local = c;
                        continue;
                    }
                    for (std::size_t s = q + 1; s < P; ++s)
                    {
                        const auto is = static_cast<Eigen::Index>(s);
                        Eigen::Matrix3cd G;
                        G(0, 0) = n2(ip);
                        G(1, 1) = n2(iq);
                        G(2, 2) = n2(is);
                        G(0, 1) = dict.inner(p, q);
                        G(0, 2) = dict.inner(p, s);
                        G(1, 2) = dict.inner(q, s);
                        G(1, 0) = std::conj(G(0, 1));
                        G(2, 0) = std::conj(G(0, 2));
                        G(2, 1) = std::conj(G(1, 2));
                        Eigen::Vector3cd bb(b(ip), b(iq), b(is));
                        Eigen::LLT<Eigen::Matrix3cd> llt(G);
                        if (llt.info() != Eigen::Success)
                            continue;
                        const Eigen::Matrix3cd L = llt.matrixL();
                        if (std::abs(L(2, 2)) < 1e-6 || std::abs(L(1, 1)) < 1e-6)
                            continue;
                        Candidate c{bb.dot(llt.solve(bb)).real(), {p, q, s}};
                        if (better(c, local))
                            local = c;
                    }
                }
            }
            best[w] = local; });

        Candidate winner;
        for (const auto &c : best)
            if (better(c, winner))
                winner = c;
        if (!std::isfinite(winner.value))
            fail(ErrorKind::estimation, "ml_estimate: no admissible angle combination");

        std::vector<std::size_t> indices(winner.tuple.begin(), winner.tuple.begin() + M);
        EstimateResult r;
        r.method = "ml";
        r.order = M;
        r.angles_deg = sorted_angles(dict.grid(), indices);
        r.objective = ml_objective(y, dict, indices);
        r.iterations = 1;
        r.runtime_seconds = seconds_since(start);
        return r;
    }

    namespace
    {
        // Best grid index to add to `fixed` for the projection objective.
        // Returns the objective reached; `keep` (if valid) wins ties.
        std::pair<std::size_t, double> best_addition(const CVector &y, const SteeringDictionary &dict,
                                                     const std::vector<std::size_t> &fixed,
                                                     std::optional<std::size_t> keep)
        {
            const CMatrix &A = dict.atoms();
            const RVector &n2 = dict.atom_norms2();
            const auto P = static_cast<Eigen::Index>(dict.size());

            CVector residual = y;
            double base = 0.0;
            RVector den = n2;
            if (!fixed.empty())
            {
                CMatrix Af(A.rows(), static_cast<Eigen::Index>(fixed.size()));
                for (std::size_t i = 0; i < fixed.size(); ++i)
                    Af.col(static_cast<Eigen::Index>(i)) = A.col(static_cast<Eigen::Index>(fixed[i]));
                Eigen::HouseholderQR<CMatrix> qr(Af);
                const CMatrix Qf = qr.householderQ() * CMatrix::Identity(A.rows(), Af.cols());
                const CVector coeff = Qf.adjoint() * y;
                base = coeff.squaredNorm();
                residual = y - Qf * coeff;
                // ||(I - Q Q^H) a||^2 formed directly; ||a||^2 - ||Q^H a||^2 cancels badly near the span
                den = (A - Qf * (Qf.adjoint() * A)).colwise().squaredNorm().transpose();
            }
            const RVector num = (A.adjoint() * residual).cwiseAbs2();

            auto is_fixed = [&](Eigen::Index p)
            { return std::find(fixed.begin(), fixed.end(), static_cast<std::size_t>(p)) != fixed.end(); };

            std::size_t arg = std::numeric_limits<std::size_t>::max();
            double value = -std::numeric_limits<double>::infinity();
            if (keep)
            {
                const auto k = static_cast<Eigen::Index>(*keep);
                arg = *keep;
                value = base + num(k) / den(k);
            }
            for (Eigen::Index p = 0; p < P; ++p)
            {
                if (is_fixed(p) || !(den(p) > 1e-10 * n2(p)))
                    continue;
                const double v = base + num(p) / den(p);
                if (v > value)
                {
                    value = v;
                    arg = static_cast<std::size_t>(p);
                }
            }
            if (arg == std::numeric_limits<std::size_t>::max())
                fail(ErrorKind::estimation, "ap_estimate: no admissible grid point");
            return {arg, value};
        }
    }

    EstimateResult ap_estimate(const CVector &y, int M, const SteeringDictionary &dict, int max_iterations)
    {
        const auto start = clock_type::now();
        check_snapshot(y, dict, "ap_estimate");
        check_order(M, y.size(), "ap_estimate");
        if (max_iterations < 1)
            fail(ErrorKind::domain, "ap_estimate: at least one iteration is required");
        if (static_cast<std::size_t>(M) > dict.size())
            fail(ErrorKind::estimation, "ap_estimate: more sources than grid points");

        EstimateResult r;
        r.method = "ap";
        r.order = M;

        // Sequential initialization: add one source at a time.
        std::vector<std::size_t> indices;
        for (int i = 0; i < M; ++i)
        {
            indices.push_back(best_addition(y, dict, indices, std::nullopt).first);
            r.trace.push_back(ml_objective(y, dict, indices));
        }

        // Cyclic refinement: re-optimize each angle with the others held fixed.
        int passes = 0;
        while (passes < max_iterations)
        {
            ++passes;
            bool changed = false;
            for (int i = 0; i < M; ++i)
            {
                std::vector<std::size_t> others;
                for (int j = 0; j < M; ++j)
                    if (j != i)
                        others.push_back(indices[static_cast<std::size_t>(j)]);
                const auto current = indices[static_cast<std::size_t>(i)];
                const std::size_t p = best_addition(y, dict, others, current).first;
                // the scan uses the rank-one update formula; confirm the move on the exact objective
                // so that round-off can never make the recorded objective decrease
                if (p != current)
                {
                    auto moved = indices;
                    moved[static_cast<std::size_t>(i)] = p;
                    const double value = ml_objective(y, dict, moved);
                    if (value > r.trace.back())
                    {
                        indices = std::move(moved);
                        changed = true;
                        r.trace.push_back(value);
                        continue;
                    }
                }
                r.trace.push_back(r.trace.back()); // unchanged set, unchanged objective
            }
            if (!changed)
                break;
        }

        r.angles_deg = sorted_angles(dict.grid(), indices);
        r.objective = ml_objective(y, dict, indices);
        r.iterations = passes;
        r.runtime_seconds = seconds_since(start);
        return r;
    }

    EstimateResult omp_estimate(const CVector &y, int M, const SteeringDictionary &dict)
    {
        const auto start = clock_type::now();
        check_snapshot(y, dict, "omp_estimate");
        check_order(M, y.size(), "omp_estimate");

        const CMatrix &A = dict.atoms();
        EstimateResult r;
        r.method = "omp";
        r.order = M;

        std::vector<std::size_t> selected;
        CVector residual = y;
        r.trace.push_back(residual.norm());
        for (int t = 0; t < M; ++t)
        {
            const RVector corr = (A.adjoint() * residual).cwiseAbs();
            std::vector<std::size_t> order(dict.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
                             { return corr(static_cast<Eigen::Index>(a)) > corr(static_cast<Eigen::Index>(b)); });

            bool placed = false;
            for (auto p : order)
            {
                if (std::find(selected.begin(), selected.end(), p) != selected.end())
                    continue;
                std::vector<std::size_t> trial = selected;
                trial.push_back(p);
                CMatrix As(A.rows(), static_cast<Eigen::Index>(trial.size()));
                for (std::size_t i = 0; i < trial.size(); ++i)
                    As.col(static_cast<Eigen::Index>(i)) = A.col(static_cast<Eigen::Index>(trial[i]));
                try
                {
                    const CVector s = least_squares(As, y);
                    residual = y - As * s;
                }
                catch (const ConditioningError &)
                {
                    continue;
                }
                selected = std::move(trial);
                placed = true;
                break;
            }
            if (!placed)
                fail(ErrorKind::estimation, "omp_estimate: grid exhausted after " + std::to_string(t) + " atoms");
            r.trace.push_back(residual.norm());
        }

        r.angles_deg = sorted_angles(dict.grid(), selected);
        r.objective = ml_objective(y, dict, selected);
        r.iterations = M;
        r.runtime_seconds = seconds_since(start);
        return r;
    }

    SmoothedCovariance spatial_smooth(const CVector &y, int subarray_size)
    {
        const auto N = static_cast<int>(y.size());
        if (subarray_size < 1 || subarray_size > N)
            fail(ErrorKind::domain, "spatial_smooth: subarray size " + std::to_string(subarray_size) +
                                        " outside 1.." + std::to_string(N));
        const int L = N - subarray_size + 1;
        SmoothedCovariance out;
        out.subarray_size = subarray_size;
        out.subarray_count = L;
        out.matrix = CMatrix::Zero(subarray_size, subarray_size);
        for (int l = 0; l < L; ++l)
        {
            const CVector w = y.segment(l, subarray_size);
            out.matrix += w * w.adjoint();
        }
        out.matrix /= static_cast<double>(L);
        // Exact Hermitian symmetry for downstream eigen-solvers.
        out.matrix = 0.5 * (out.matrix + out.matrix.adjoint()).eval();
        return out;
    }

    RVector music_pseudospectrum(const SmoothedCovariance &R, int M, const SteeringDictionary &dict)
    {
        const int Q = R.subarray_size;
        if (M < 1 || M >= Q)
            fail(ErrorKind::domain, "music_estimate: need 1 <= M < Q (M=" + std::to_string(M) + ", Q=" + std::to_string(Q) + ")");
        if (dict.atoms().rows() != Q)
            fail(ErrorKind::structural, "music_estimate: dictionary is not built on the Q-element subarray");
        const auto eig = hermitian_eig(R.matrix);
        const CMatrix En = eig.eigenvectors.rightCols(Q - M);
        const RVector d = (En.adjoint() * dict.atoms()).colwise().squaredNorm().transpose();
        RVector S(d.size());
        for (Eigen::Index p = 0; p < d.size(); ++p)
            S(p) = 1.0 / std::max(d(p), 1e-300);
        return S;
    }

    EstimateResult music_estimate(const SmoothedCovariance &R, int M, const SteeringDictionary &dict)
    {
        const auto start = clock_type::now();
        const RVector S = music_pseudospectrum(R, M, dict);
        const auto peaks = pick_peaks(S, M);

        EstimateResult r;
        r.method = "music";
        r.order = M;
        r.angles_deg = sorted_angles(dict.grid(), peaks);
        r.objective = 0.0;
        for (auto p : peaks)
            r.objective += S(static_cast<Eigen::Index>(p));
        r.iterations = 1;
        r.runtime_seconds = seconds_since(start);
        return r;
    }

    EstimateResult music_estimate(const SmoothedCovariance &R, int M, const ArrayGeometry &geometry, const GridSpec &grid)
    {
        return music_estimate(R, M, SteeringDictionary(geometry.leading(R.subarray_size), grid));
    }
}
