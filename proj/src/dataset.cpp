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

#include "aoa/dataset.hpp"
#include "aoa/binary_io.hpp"
#include "aoa/errors.hpp"
#include "aoa/parallel.hpp"

#include <cmath>
#include <limits>

namespace aoa
{
    std::vector<std::uint8_t> encode_dataset(const Dataset &dataset)
    {
        const auto &g = dataset.geometry;
        const auto &d = dataset.distribution;
        ByteWriter w;
        w.raw("AOA1");
        w.u32(dataset_format_version);
        w.u32(static_cast<std::uint32_t>(g.positions.size()));
        w.f64(g.wavelength);
        for (double x : g.positions)
            w.f64(x);
        w.f64(d.fov_deg.first);
        w.f64(d.fov_deg.second);
        w.u8(static_cast<std::uint8_t>(d.min_sources));
        w.u8(static_cast<std::uint8_t>(d.max_sources));
        w.f64(d.amplitude_range.first);
        w.f64(d.amplitude_range.second);
        w.f64(d.phase_range.first);
        w.f64(d.phase_range.second);
        w.f64(d.snr_range_db.first);
        w.f64(d.snr_range_db.second);
        w.f64(d.min_separation_deg);
        w.u8(d.noise_enabled ? 1 : 0);
        w.u64(dataset.records.size());
        for (const auto &r : dataset.records)
        {
            if (r.y.size() != g.element_count())
                fail(ErrorKind::structural, "encode_dataset: record length does not match the geometry");
            w.u8(static_cast<std::uint8_t>(r.scene.count()));
            for (double a : r.scene.angles_deg)
                w.f64(a);
            for (const auto &s : r.scene.gains)
            {
                w.f64(s.real());
                w.f64(s.imag());
            }
            w.f64(r.snr_db ? *r.snr_db : std::numeric_limits<double>::quiet_NaN());
            for (Eigen::Index n = 0; n < r.y.size(); ++n)
            {
                w.f64(r.y(n).real());
                w.f64(r.y(n).imag());
            }
        }
        return w.bytes();
    }

    Dataset decode_dataset(const std::vector<std::uint8_t> &bytes)
    {
        ByteReader r(bytes, "dataset");
        if (r.raw(4) != "AOA1")
            fail(ErrorKind::corrupt, "dataset: bad magic bytes");
        const auto version = r.u32();
        if (version != dataset_format_version)
            fail(ErrorKind::version, "dataset: unsupported format version " + std::to_string(version));

        Dataset ds;
        const auto n = r.u32();
        if (n == 0 || n > 65536)
            fail(ErrorKind::corrupt, "dataset: implausible element count");
        ds.geometry.wavelength = r.f64();
        ds.geometry.positions.resize(n);
        for (auto &x : ds.geometry.positions)
            x = r.f64();

        auto &d = ds.distribution;
        d.fov_deg.first = r.f64();
        d.fov_deg.second = r.f64();
        d.min_sources = r.u8();
        d.max_sources = r.u8();
        d.amplitude_range.first = r.f64();
        d.amplitude_range.second = r.f64();
        d.phase_range.first = r.f64();
        d.phase_range.second = r.f64();
        d.snr_range_db.first = r.f64();
        d.snr_range_db.second = r.f64();
        d.min_separation_deg = r.f64();
        d.noise_enabled = r.u8() != 0;

        const auto count = r.u64();
        // Smallest record: M=1.
        const std::size_t min_record = 1 + 8 * 3 + 8 + 16 * static_cast<std::size_t>(n);
        if (count > r.remaining() / min_record)
            fail(ErrorKind::corrupt, "dataset: record count exceeds file size");
        ds.records.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i)
        {
            Snapshot s;
            const int M = r.u8();
            if (M < 1 || M > SceneDistribution::max_supported_sources)
                fail(ErrorKind::corrupt, "dataset: invalid source count in record " + std::to_string(i));
            s.scene.angles_deg.resize(static_cast<std::size_t>(M));
            s.scene.gains.resize(static_cast<std::size_t>(M));
            for (auto &a : s.scene.angles_deg)
                a = r.f64();
            for (auto &g : s.scene.gains)
            {
                const double re = r.f64();
                const double im = r.f64();
                g = cdouble(re, im);
            }
            const double snr = r.f64();
            if (!std::isnan(snr))
                s.snr_db = snr;
            s.y.resize(n);
            for (Eigen::Index k = 0; k < s.y.size(); ++k)
            {
                const double re = r.f64();
                const double im = r.f64();
                s.y(k) = cdouble(re, im);
            }
            ds.records.push_back(std::move(s));
        }
        if (r.remaining() != 0)
            fail(ErrorKind::corrupt, "dataset: trailing bytes after the last record");
        return ds;
    }

    void write_dataset(const std::string &path, const Dataset &dataset)
    {
        write_file_bytes(path, encode_dataset(dataset));
    }

    Dataset read_dataset(const std::string &path)
    {
        return decode_dataset(read_file_bytes(path));
    }

    Dataset generate_dataset(const ArrayGeometry &geometry, const SceneDistribution &dist,
                             std::size_t count, std::uint64_t seed, unsigned workers)
    {
        geometry.validate();
        dist.validate();
        Dataset ds;
        ds.geometry = geometry;
        ds.distribution = dist;
        ds.records.resize(count);
        parallel_for(count, workers, [&](std::size_t i)
                     { ds.records[i] = draw_snapshot(geometry, dist, derive_seed(seed, {i})); });
        return ds;
    }
}
