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

#ifndef AOA_DATASET_HPP
#define AOA_DATASET_HPP

#include "aoa/array_model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace aoa
{
    // Binary snapshot container, all fields little-endian:
    //
    //   "AOA1"            magic
    //   u32               format version (1)
    //   geometry block    u32 N, f64 wavelength, f64 x N positions
    //   distribution      f64 fov_min, f64 fov_max, u8 min_sources, u8 max_sources,
    //                     f64 amp_min, f64 amp_max, f64 phase_min, f64 phase_max,
    //                     f64 snr_min, f64 snr_max, f64 min_separation, u8 noise_enabled
    //   u64               record count
    //   records           u8 M, f64 x M angles (deg), f64 x 2M gains (re, im),
    //                     f64 snr_db (NaN when noise is disabled), f64 x 2N y (re, im)
    struct Dataset
    {
        ArrayGeometry geometry;
        SceneDistribution distribution;
        std::vector<Snapshot> records;
    };

    inline constexpr std::uint32_t dataset_format_version = 1;

    std::vector<std::uint8_t> encode_dataset(const Dataset &dataset);
    Dataset decode_dataset(const std::vector<std::uint8_t> &bytes);

    void write_dataset(const std::string &path, const Dataset &dataset);
    Dataset read_dataset(const std::string &path);

    // count snapshots, record i drawn from derive_seed(seed, {i}).
    Dataset generate_dataset(const ArrayGeometry &geometry, const SceneDistribution &dist,
                             std::size_t count, std::uint64_t seed, unsigned workers = 1);
}

#endif
