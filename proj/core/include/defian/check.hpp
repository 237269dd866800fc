// Copyright 2026 The DeFiAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace defian {

// Contract violations (bad shapes, bad arguments) throw std::invalid_argument,
// everything environmental (I/O, parse) throws std::runtime_error.
inline void require(bool cond, const std::string& msg) {
    if (!cond) {
        throw std::invalid_argument(msg);
    }
}

} // namespace defian
