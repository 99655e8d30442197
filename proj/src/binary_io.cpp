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
#include "aoa/errors.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

namespace aoa
{
    std::string ByteReader::raw(std::size_t n)
    {
        if (remaining() < n)
            fail(ErrorKind::corrupt, context_ + ": unexpected end of data");
        std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return s;
    }

    std::uint64_t ByteReader::get(int n)
    {
        if (remaining() < static_cast<std::size_t>(n))
            fail(ErrorKind::corrupt, context_ + ": unexpected end of data");
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::vector<std::uint8_t> read_file_bytes(const std::string &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            fail(ErrorKind::missing, "cannot open " + path);
        return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    void write_file_bytes(const std::string &path, const std::vector<std::uint8_t> &bytes)
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorKind::io, "cannot write " + path);
        out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!out)
            fail(ErrorKind::io, "write failed for " + path);
    }

    std::string read_text_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            fail(ErrorKind::missing, "cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_text_file(const std::string &path, const std::string &text)
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
            fail(ErrorKind::io, "cannot write " + path);
        out << text;
        if (!out)
            fail(ErrorKind::io, "write failed for " + path);
    }

    std::uint64_t fnv1a64(const std::vector<std::uint8_t> &bytes)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto b : bytes)
        {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
}
