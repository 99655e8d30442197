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

#include "aoa/binary_io.hpp"
#include "aoa/dataset.hpp"
#include "aoa/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>

using namespace aoa;

namespace
{
    ErrorKind kind_of(const std::function<void()> &fn)
    {
        try
        {
            fn();
        }
        catch (const Error &e)
        {
            return e.kind();
        }
        FAIL("expected an error");
        return ErrorKind::structural;
    }
}

TEST_CASE("dataset: fixed-M generation and round trip")
{
    const auto g = ArrayGeometry::uniform_linear();
    SceneDistribution d;
    d.min_sources = d.max_sources = 2;
    const Dataset ds = generate_dataset(g, d, 100, 17);
    REQUIRE(ds.records.size() == 100);
    for (const auto &r : ds.records)
        CHECK(r.scene.count() == 2);

    const auto bytes = encode_dataset(ds);
    CHECK(std::memcmp(bytes.data(), "AOA1", 4) == 0);
    // header: magic, version, N, wavelength, positions, distribution block, count
    const std::size_t header = 4 + 4 + 4 + 8 + 16 * 8 + (8 * 2 + 2 + 8 * 7 + 1) + 8;
    const std::size_t record = 1 + 2 * 8 + 4 * 8 + 8 + 32 * 8;
    CHECK(bytes.size() == header + 100 * record);

    const Dataset back = decode_dataset(bytes);
    REQUIRE(back.records.size() == 100);
    CHECK(back.geometry.positions == g.positions);
    CHECK(back.distribution.min_sources == 2);
    for (std::size_t i = 0; i < 100; ++i)
    {
        CHECK(back.records[i].y == ds.records[i].y);
        CHECK(back.records[i].scene.angles_deg == ds.records[i].scene.angles_deg);
        CHECK(back.records[i].scene.gains == ds.records[i].scene.gains);
        CHECK(back.records[i].snr_db == ds.records[i].snr_db);
    }
    CHECK(encode_dataset(back) == bytes);
}

TEST_CASE("dataset: byte-identical for equal seeds and any worker count")
{
    const auto g = ArrayGeometry::uniform_linear();
    SceneDistribution d;
    const auto a = encode_dataset(generate_dataset(g, d, 64, 5, 1));
    const auto b = encode_dataset(generate_dataset(g, d, 64, 5, 3));
    const auto c = encode_dataset(generate_dataset(g, d, 64, 6, 1));
    CHECK(a == b);
    CHECK(a != c);

    const auto dir = aoa_test::scratch_dir("dataset");
    const std::string p1 = dir + "/a.aoa", p2 = dir + "/b.aoa";
    write_dataset(p1, generate_dataset(g, d, 20, 9));
    write_dataset(p2, generate_dataset(g, d, 20, 9));
    CHECK(read_file_bytes(p1) == read_file_bytes(p2));
    CHECK(read_dataset(p1).records.size() == 20);
}

TEST_CASE("dataset: noise-disabled records store NaN SNR")
{
    SceneDistribution d;
    d.noise_enabled = false;
    const Dataset ds = generate_dataset(ArrayGeometry::uniform_linear(), d, 3, 1);
    for (const auto &r : ds.records)
        CHECK_FALSE(r.snr_db.has_value());
    const Dataset back = decode_dataset(encode_dataset(ds));
    CHECK_FALSE(back.distribution.noise_enabled);
    for (const auto &r : back.records)
        CHECK_FALSE(r.snr_db.has_value());
}

TEST_CASE("dataset: malformed input")
{
    const Dataset ds = generate_dataset(ArrayGeometry::uniform_linear(), SceneDistribution{}, 4, 1);
    auto bytes = encode_dataset(ds);

    auto truncated = bytes;
    truncated.resize(bytes.size() - 5);
    CHECK(kind_of([&]
                  { decode_dataset(truncated); }) == ErrorKind::corrupt);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK(kind_of([&]
                  { decode_dataset(trailing); }) == ErrorKind::corrupt);

    auto magic = bytes;
    magic[0] = 'X';
    CHECK(kind_of([&]
                  { decode_dataset(magic); }) == ErrorKind::corrupt);

    auto version = bytes;
    version[4] = 9;
    CHECK(kind_of([&]
                  { decode_dataset(version); }) == ErrorKind::version);

    CHECK(kind_of([&]
                  { read_dataset("/nonexistent/dir/file.aoa"); }) == ErrorKind::missing);
}
