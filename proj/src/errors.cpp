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

#include "aoa/errors.hpp"

namespace aoa
{
    const char *to_string(ErrorKind kind)
    {
        switch (kind)
        {
        case ErrorKind::structural: return "structural";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::conditioning: return "conditioning";
        case ErrorKind::domain: return "domain";
        case ErrorKind::config: return "config";
        case ErrorKind::estimation: return "estimation";
        case ErrorKind::degeneracy: return "degeneracy";
        case ErrorKind::budget: return "budget";
        case ErrorKind::io: return "io";
        case ErrorKind::corrupt: return "corrupt";
        case ErrorKind::version: return "version";
        case ErrorKind::mismatch: return "mismatch";
        case ErrorKind::missing: return "missing";
        }
        return "unknown";
    }
}
