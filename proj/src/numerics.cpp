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

#include "aoa/numerics.hpp"
#include "aoa/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace aoa
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9E3779B97F4A7C15ULL;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
            return x ^ (x >> 31);
        }

        double off_diagonal_norm2(const CMatrix &A)
        {
            double s = 0.0;
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                for (Eigen::Index i = 0; i < A.rows(); ++i)
                    if (i != j)
                        s += std::norm(A(i, j));
            return s;
        }
    }

    std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path)
    {
        std::uint64_t h = splitmix64(base);
        for (auto p : path)
            h = splitmix64(h ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
        return h;
    }

    bool is_hermitian(const CMatrix &A, double tol)
    {
        if (A.rows() != A.cols())
            return false;
        const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
        return (A - A.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
    }

    EigenDecomposition hermitian_eig(const CMatrix &A_in, int max_sweeps)
    {
        if (A_in.rows() != A_in.cols())
            fail(ErrorKind::structural, "hermitian_eig: matrix is " + std::to_string(A_in.rows()) + "x" +
                                            std::to_string(A_in.cols()) + ", expected square");
        if (!is_hermitian(A_in, 1e-10))
            fail(ErrorKind::structural, "hermitian_eig: matrix is not Hermitian");

        const Eigen::Index n = A_in.rows();
        CMatrix A = 0.5 * (A_in + A_in.adjoint());
        CMatrix V = CMatrix::Identity(n, n);

        // Converged once the off-diagonal mass is at rounding level. A stalled sweep
        // below the looser bound also counts: rounding noise cannot be rotated away.
        const double total = std::max(A.squaredNorm(), 1e-300);
        const double tight = 1e-28 * total;
        const double loose = 1e-24 * total;
        int sweep = 0;
        double previous = std::numeric_limits<double>::infinity();
        for (double off = off_diagonal_norm2(A); off > tight; off = off_diagonal_norm2(A))
        {
            if (off <= loose && off > 0.25 * previous)
                break;
            previous = off;
            if (sweep >= max_sweeps)
                throw ConvergenceError("hermitian_eig: no convergence after " + std::to_string(sweep) + " sweeps", sweep);
            ++sweep;
            for (Eigen::Index p = 0; p < n - 1; ++p)
            {
                for (Eigen::Index q = p + 1; q < n; ++q)
                {
                    const cdouble apq = A(p, q);
                    const double mag = std::abs(apq);
                    if (mag == 0.0)
                        continue;

                    // Phase-rotate q so the (p,q) block becomes real symmetric, then apply a
                    // real Jacobi rotation. Combined unitary G acts on columns p and q.
                    const cdouble phase = apq / mag; // e^{i phi}
                    const double app = A(p, p).real();
                    const double aqq = A(q, q).real();
                    const double theta = (aqq - app) / (2.0 * mag);
                    const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    const double c = 1.0 / std::sqrt(t * t + 1.0);
                    const double s = t * c;

                    const cdouble gpp = c;
                    const cdouble gpq = s;
                    const cdouble gqp = -s * std::conj(phase);
                    const cdouble gqq = c * std::conj(phase);

                    // A <- A G
                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const cdouble akp = A(k, p);
                        const cdouble akq = A(k, q);
                        A(k, p) = akp * gpp + akq * gqp;
                        A(k, q) = akp * gpq + akq * gqq;
                    }
                    // A <- G^H A
                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const cdouble apk = A(p, k);
                        const cdouble aqk = A(q, k);
                        A(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
                        A(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
                    }
                    A(p, q) = 0.0;
                    A(q, p) = 0.0;
                    A(p, p) = A(p, p).real();
                    A(q, q) = A(q, q).real();

                    for (Eigen::Index k = 0; k < n; ++k)
                    {
                        const cdouble vkp = V(k, p);
                        const cdouble vkq = V(k, q);
                        V(k, p) = vkp * gpp + vkq * gqp;
                        V(k, q) = vkp * gpq + vkq * gqq;
                    }
                }
            }
        }

        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return A(a, a).real() > A(b, b).real(); });

        EigenDecomposition out;
        out.eigenvalues.resize(n);
        out.eigenvectors.resize(n, n);
        out.sweeps = sweep;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            out.eigenvalues(i) = A(order[i], order[i]).real();
            out.eigenvectors.col(i) = V.col(order[i]);
        }
        return out;
    }

    double condition_number(const CMatrix &A)
    {
        if (A.cols() == 0 || A.rows() < A.cols())
            return std::numeric_limits<double>::infinity();
        Eigen::JacobiSVD<CMatrix> svd(A);
        const auto &sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        if (smin <= 0.0)
            return std::numeric_limits<double>::infinity();
        return sv(0) / smin;
    }

    CMatrix projector(const CMatrix &columns, double max_condition)
    {
        if (columns.cols() == 0 || columns.rows() < columns.cols())
            throw ConditioningError("projector: " + std::to_string(columns.cols()) + " columns in dimension " +
                                        std::to_string(columns.rows()) + " cannot be independent",
                                    std::numeric_limits<double>::infinity());
        Eigen::JacobiSVD<CMatrix> svd(columns, Eigen::ComputeThinU);
        const auto &sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
        if (!(cond <= max_condition))
            throw ConditioningError("projector: columns are rank deficient (condition number " + std::to_string(cond) + ")", cond);
        const CMatrix &U = svd.matrixU();
        return U * U.adjoint();
    }

    CVector least_squares(const CMatrix &A, const CVector &y, double max_condition)
    {
        if (A.rows() != y.size())
            fail(ErrorKind::structural, "least_squares: A has " + std::to_string(A.rows()) + " rows but y has " +
                                            std::to_string(y.size()) + " entries");
        if (A.cols() == 0 || A.rows() < A.cols())
            throw ConditioningError("least_squares: system has fewer rows than unknowns", std::numeric_limits<double>::infinity());
        Eigen::JacobiSVD<CMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto &sv = svd.singularValues();
        const double smin = sv(sv.size() - 1);
        const double cond = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
        if (!(cond <= max_condition))
            throw ConditioningError("least_squares: matrix is rank deficient (condition number " + std::to_string(cond) + ")", cond);
        return svd.solve(y);
    }

    CVector sample_complex_gaussian(Eigen::Index n, double variance, Rng &rng)
    {
        if (!(variance > 0.0) || !std::isfinite(variance))
            fail(ErrorKind::domain, "sample_complex_gaussian: variance must be positive and finite");
        if (n < 0)
            fail(ErrorKind::domain, "sample_complex_gaussian: negative count");
        std::normal_distribution<double> dist(0.0, std::sqrt(0.5 * variance));
        CVector v(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double re = dist(rng.engine());
            const double im = dist(rng.engine());
            v(i) = cdouble(re, im);
        }
        return v;
    }
}
