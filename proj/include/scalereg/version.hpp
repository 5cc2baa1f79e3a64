// Copyright (C) 2026 scalereg developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace scalereg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace scalereg
