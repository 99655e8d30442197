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

#include "aoa/checkpoint.hpp"
#include "aoa/binary_io.hpp"
#include "aoa/errors.hpp"

#include <cstdio>
#include <filesystem>

namespace aoa
{
    namespace fs = std::filesystem;

    nlohmann::json spec_to_json(const NetworkSpec &spec)
    {
        return {
            {"input_dim", spec.input_dim},
            {"hidden_widths", spec.hidden_widths},
            {"dense_connectivity", spec.dense_connectivity},
            {"head_classes", spec.head_classes},
            {"head_regression_sizes", spec.head_regression_sizes},
            {"angle_center_deg", spec.angle_center_deg},
            {"angle_half_width_deg", spec.angle_half_width_deg},
        };
    }

    NetworkSpec spec_from_json(const nlohmann::json &j)
    {
        NetworkSpec s;
        s.input_dim = j.at("input_dim").get<int>();
        s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
        s.dense_connectivity = j.at("dense_connectivity").get<bool>();
        s.head_classes = j.at("head_classes").get<int>();
        s.head_regression_sizes = j.at("head_regression_sizes").get<std::vector<int>>();
        s.angle_center_deg = j.at("angle_center_deg").get<double>();
        s.angle_half_width_deg = j.at("angle_half_width_deg").get<double>();
        s.validate();
        return s;
    }

    namespace
    {
        std::string hex64(std::uint64_t v)
        {
            char buf[17];
            std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
            return buf;
        }

        void append_tensors(const std::string &prefix, const NetworkParameters &p, ByteWriter &w, nlohmann::json &table)
        {
            visit_tensors(p, [&](const std::string &name, const double *data, Eigen::Index size, bool)
                          {
                table.push_back({{"name", prefix + name}, {"offset", w.bytes().size()}, {"count", size}});
                for (Eigen::Index i = 0; i < size; ++i)
                    w.f64(data[i]); });
        }

        void read_tensors(const std::string &prefix, NetworkParameters &p, const std::vector<std::uint8_t> &blob,
                          const nlohmann::json &table, std::size_t &cursor)
        {
            visit_tensors(p, [&](const std::string &name, double *data, Eigen::Index size, bool)
                          {
                if (cursor >= table.size())
                    fail(ErrorKind::corrupt, "checkpoint: tensor table is missing " + prefix + name);
                const auto &entry = table[cursor++];
                if (entry.at("name").get<std::string>() != prefix + name || entry.at("count").get<Eigen::Index>() != size)
                    fail(ErrorKind::corrupt, "checkpoint: tensor table entry does not match " + prefix + name);
                const auto offset = entry.at("offset").get<std::size_t>();
                if (offset + 8 * static_cast<std::size_t>(size) > blob.size())
                    fail(ErrorKind::corrupt, "checkpoint: tensor " + prefix + name + " extends past the blob");
                std::vector<std::uint8_t> slice(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                                                blob.begin() + static_cast<std::ptrdiff_t>(offset + 8 * static_cast<std::size_t>(size)));
                ByteReader r(slice, "checkpoint");
                for (Eigen::Index i = 0; i < size; ++i)
                    data[i] = r.f64(); });
        }
    }

    void save_checkpoint(const std::string &path, const Checkpoint &checkpoint)
    {
        ByteWriter w;
        nlohmann::json table = nlohmann::json::array();
        append_tensors("", checkpoint.params, w, table);
        if (checkpoint.velocity)
        {
            if (checkpoint.velocity->spec != checkpoint.params.spec)
                fail(ErrorKind::mismatch, "save_checkpoint: velocity shape differs from the parameters");
            append_tensors("velocity/", *checkpoint.velocity, w, table);
        }

        const std::string blob_path = path + ".bin";
        nlohmann::json manifest = {
            {"format", "aoa-lab-checkpoint"},
            {"version", checkpoint_format_version},
            {"spec", spec_to_json(checkpoint.params.spec)},
            {"has_velocity", checkpoint.velocity.has_value()},
            {"metadata", checkpoint.metadata},
            {"blob", {{"file", fs::path(blob_path).filename().string()}, {"bytes", w.bytes().size()}, {"fnv1a64", hex64(fnv1a64(w.bytes()))}}},
            {"tensors", table},
        };
        // Blob first: a manifest on disk always refers to a complete blob.
        write_file_bytes(blob_path, w.bytes());
        write_text_file(path, manifest.dump(2) + "\n");
    }

    Checkpoint load_checkpoint(const std::string &path, const NetworkSpec *expected)
    {
        if (!fs::exists(path))
            fail(ErrorKind::missing, "checkpoint not found: " + path);
        nlohmann::json manifest;
        try
        {
            manifest = nlohmann::json::parse(read_text_file(path));
        }
        catch (const nlohmann::json::exception &e)
        {
            fail(ErrorKind::corrupt, "checkpoint manifest " + path + " is not valid JSON: " + e.what());
        }

        try
        {
            if (manifest.at("format").get<std::string>() != "aoa-lab-checkpoint")
                fail(ErrorKind::corrupt, "checkpoint: " + path + " is not an aoa-lab checkpoint");
            const int version = manifest.at("version").get<int>();
            if (version != checkpoint_format_version)
                fail(ErrorKind::version, "checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                                             std::to_string(checkpoint_format_version) + ")");

            const NetworkSpec spec = spec_from_json(manifest.at("spec"));
            if (expected && *expected != spec)
                fail(ErrorKind::mismatch, "checkpoint: recorded network spec differs from the requested one");

            const auto blob_path = (fs::path(path).parent_path() / manifest.at("blob").at("file").get<std::string>()).string();
            if (!fs::exists(blob_path))
                fail(ErrorKind::corrupt, "checkpoint: tensor blob " + blob_path + " is missing");
            const auto blob = read_file_bytes(blob_path);
            if (blob.size() != manifest.at("blob").at("bytes").get<std::size_t>())
                fail(ErrorKind::corrupt, "checkpoint: tensor blob has " + std::to_string(blob.size()) + " bytes, expected " +
                                             std::to_string(manifest.at("blob").at("bytes").get<std::size_t>()));
            if (hex64(fnv1a64(blob)) != manifest.at("blob").at("fnv1a64").get<std::string>())
                fail(ErrorKind::corrupt, "checkpoint: tensor blob checksum mismatch");

            Checkpoint out;
            out.params = NetworkParameters::zeros(spec);
            out.metadata = manifest.value("metadata", nlohmann::json::object());
            const auto &table = manifest.at("tensors");
            std::size_t cursor = 0;
            read_tensors("", out.params, blob, table, cursor);
            if (manifest.at("has_velocity").get<bool>())
            {
                out.velocity = NetworkParameters::zeros(spec);
                read_tensors("velocity/", *out.velocity, blob, table, cursor);
            }
            if (cursor != table.size())
                fail(ErrorKind::corrupt, "checkpoint: unexpected extra tensors");
            return out;
        }
        catch (const nlohmann::json::exception &e)
        {
            fail(ErrorKind::corrupt, "checkpoint manifest " + path + " is malformed: " + e.what());
        }
    }

    void save_network(const std::string &path, const NetworkParameters &params, const nlohmann::json &metadata)
    {
        Checkpoint c;
        c.params = params;
        c.metadata = metadata;
        save_checkpoint(path, c);
    }

    NetworkParameters load_network(const std::string &path, const NetworkSpec *expected)
    {
        return load_checkpoint(path, expected).params;
    }
}
