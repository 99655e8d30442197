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

#ifndef AOA_NUMERICS_HPP
#define AOA_NUMERICS_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace aoa
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    constexpr double pi = 3.14159265358979323846;

    inline double deg2rad(double deg) { return deg * (pi / 180.0); }
    inline double rad2deg(double rad) { return rad * (180.0 / pi); }

    // Mixes a base seed with a path of stream identifiers (SplitMix64 finalizer).
    // Used to give every worker, iteration and trial its own independent stream.
    std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

    // Seeded generator. Not thread safe: each worker owns one, seeded via derive_seed.
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

        std::uint64_t seed() const { return seed_; }

        double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
        double normal(double mean = 0.0, double stddev = 1.0) { return std::normal_distribution<double>(mean, stddev)(engine_); }
        int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

        std::mt19937_64 &engine() { return engine_; }

    private:
        std::mt19937_64 engine_;
        std::uint64_t seed_;
    };

    // Eigen-decomposition of a Hermitian matrix.
    // eigenvalues are sorted descending; column i of eigenvectors belongs to eigenvalues(i).
    struct EigenDecomposition
    {
        RVector eigenvalues;
        CMatrix eigenvectors;
        int sweeps = 0;
    };

    bool is_hermitian(const CMatrix &A, double tol = 1e-10);

    // Cyclic Jacobi eigensolver. Throws structural errors for non-square or
    // non-Hermitian input and ConvergenceError if the sweep limit is reached.
    EigenDecomposition hermitian_eig(const CMatrix &A, int max_sweeps = 100);

    // 2-norm condition number of a tall matrix (ratio of extreme singular values).
    double condition_number(const CMatrix &A);

    // Orthogonal projector onto the column span: P = A (A^H A)^-1 A^H.
    // Throws ConditioningError if cond(A) exceeds max_condition.
    CMatrix projector(const CMatrix &columns, double max_condition = 1e10);

    // argmin_s ||y - A s||^2 for full column rank A.
    CVector least_squares(const CMatrix &A, const CVector &y, double max_condition = 1e10);

    // Circularly symmetric complex Gaussian samples, E|z|^2 = variance.
    CVector sample_complex_gaussian(Eigen::Index n, double variance, Rng &rng);
}

#endif
