// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Every command reads an optional JSON run config
// (--config), applies flag overrides on top, validates, and writes its
// outputs under --out (default: $POSEGAN_RUN_DIR/<command>, or
// runs/<command>).

#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "posegan/networks.hpp"

namespace posegan {

inline constexpr int kRunConfigSchemaVersion = 1;

/// Default run config tree for a preset ("full" or "toy").
nlohmann::json default_run_config(const std::string& preset);

/// Exit codes: 0 success, 1 runtime or config error (one "error: ..." line on
/// err), 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace posegan
