// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "posegan/tensor.hpp"

namespace posegan {

/// 8-bit RGB PNG to a 3-channel map in [-1, 1] (x / 127.5 - 1).
FeatureMap<float> read_png(const std::filesystem::path& path);
/// Values are encoded with round(127.5 * (x + 1)) clamped to [0, 255].
void write_png(const std::filesystem::path& path, const FeatureMap<float>& image);

/// Images laid out left to right, top to bottom, `columns` per row.
FeatureMap<float> tile_images(const std::vector<FeatureMap<float>>& images, int columns);

}  // namespace posegan
