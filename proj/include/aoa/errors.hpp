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

#ifndef AOA_ERRORS_HPP
#define AOA_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aoa
{
    // Error categories. The CLI maps these onto process exit codes.
    enum class ErrorKind
    {
        structural,   // malformed input shape (non-square, dimension mismatch)
        numerical,    // non-convergence or non-finite values
        conditioning, // rank deficiency / ill-conditioned system
        domain,       // argument outside the valid mathematical domain
        config,       // invalid configuration or parameters
        estimation,   // an estimator could not produce a result
        degeneracy,   // singular Fisher information, all-zero spectra
        budget,       // refused because the operation count is too large
        io,           // file system failure
        corrupt,      // truncated or damaged file
        version,      // unsupported format version
        mismatch,     // artifact does not match the requested configuration
        missing       // required artifact not present
    };

    const char *to_string(ErrorKind kind);

    class Error : public std::runtime_error
    {
    public:
        Error(ErrorKind kind, const std::string &message)
            : std::runtime_error(message), kind_(kind) {}

        ErrorKind kind() const noexcept { return kind_; }

    private:
        ErrorKind kind_;
    };

    // Thrown by iterative solvers; carries the number of iterations performed.
    class ConvergenceError : public Error
    {
    public:
        ConvergenceError(const std::string &message, std::int64_t iterations)
            : Error(ErrorKind::numerical, message), iterations_(iterations) {}

        std::int64_t iterations() const noexcept { return iterations_; }

    private:
        std::int64_t iterations_;
    };

    // Thrown by the conditioning checks; carries the offending condition number.
    class ConditioningError : public Error
    {
    public:
        ConditioningError(const std::string &message, double condition_number)
            : Error(ErrorKind::conditioning, message), condition_number_(condition_number) {}

        double condition_number() const noexcept { return condition_number_; }

    private:
        double condition_number_;
    };

    [[noreturn]] inline void fail(ErrorKind kind, const std::string &message)
    {
        throw Error(kind, message);
    }
}

#endif
