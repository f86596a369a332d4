// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

// Named float32 blobs in one file: "PGCK", u32 version, u64 count, then per
// blob u32 name length, name bytes, u64 value count, values.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "posegan/params.hpp"

namespace posegan {

using BlobMap = std::map<std::string, std::vector<float>>;

void write_blobs(const std::filesystem::path& path, const BlobMap& blobs);
BlobMap read_blobs(const std::filesystem::path& path);

template <class S>
void put_params(BlobMap& blobs, const std::string& prefix, const ParamSet<S>& p) {
  for (int i = 0; i < p.size(); ++i) {
    std::vector<float>& v = blobs[prefix + p.name(i)];
    v.resize(static_cast<std::size_t>(p[i].size()));
    for (Eigen::Index k = 0; k < p[i].size(); ++k) v[static_cast<std::size_t>(k)] = static_cast<float>(value_of(p[i][k]));
  }
}

/// Fills every parameter of p from blobs[prefix + name]; throws on a missing
/// or mis-sized blob.
template <class S>
void get_params(const BlobMap& blobs, const std::string& prefix, ParamSet<S>& p) {
  for (int i = 0; i < p.size(); ++i) {
    auto it = blobs.find(prefix + p.name(i));
    if (it == blobs.end()) throw std::runtime_error("checkpoint: missing blob " + prefix + p.name(i));
    if (static_cast<Eigen::Index>(it->second.size()) != p[i].size()) {
      throw std::runtime_error("checkpoint: size mismatch for " + prefix + p.name(i));
    }
    for (Eigen::Index k = 0; k < p[i].size(); ++k) p[i][k] = S(it->second[static_cast<std::size_t>(k)]);
  }
}

}  // namespace posegan
