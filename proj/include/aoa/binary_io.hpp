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

#ifndef AOA_BINARY_IO_HPP
#define AOA_BINARY_IO_HPP

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace aoa
{
    // Little-endian byte buffer writer.
    class ByteWriter
    {
    public:
        void u8(std::uint8_t v) { bytes_.push_back(v); }
        void u32(std::uint32_t v) { put(v, 4); }
        void u64(std::uint64_t v) { put(v, 8); }
        void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
        void raw(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }

        const std::vector<std::uint8_t> &bytes() const { return bytes_; }

    private:
        void put(std::uint64_t v, int n)
        {
            for (int i = 0; i < n; ++i)
                bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        }
        std::vector<std::uint8_t> bytes_;
    };

    // Little-endian reader over a byte span; throws a corrupt-file error on overrun.
    class ByteReader
    {
    public:
        ByteReader(const std::vector<std::uint8_t> &bytes, std::string context)
            : bytes_(bytes), context_(std::move(context)) {}

        std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
        std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
        std::uint64_t u64() { return get(8); }
        double f64() { return std::bit_cast<double>(get(8)); }
        std::string raw(std::size_t n);

        std::size_t remaining() const { return bytes_.size() - pos_; }
        std::size_t position() const { return pos_; }

    private:
        std::uint64_t get(int n);
        const std::vector<std::uint8_t> &bytes_;
        std::string context_;
        std::size_t pos_ = 0;
    };

    std::vector<std::uint8_t> read_file_bytes(const std::string &path);
    void write_file_bytes(const std::string &path, const std::vector<std::uint8_t> &bytes);
    std::string read_text_file(const std::string &path);
    void write_text_file(const std::string &path, const std::string &text);

    std::uint64_t fnv1a64(const std::vector<std::uint8_t> &bytes);
}

#endif
