// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace posegan {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated blob file");
  return v;
}

}  // namespace

void write_blobs(const std::filesystem::path& path, const BlobMap& blobs) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path.string());
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(blobs.size()));
  for (const auto& [name, values] : blobs) {
    put(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put(out, static_cast<std::uint64_t>(values.size()));
    out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

BlobMap read_blobs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != std::string(kMagic, 4)) throw std::runtime_error("checkpoint: bad magic in " + path.string());
  if (get<std::uint32_t>(in) != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const auto count = get<std::uint64_t>(in);
  BlobMap blobs;
  for (std::uint64_t b = 0; b < count; ++b) {
    std::string name(get<std::uint32_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    std::vector<float> values(get<std::uint64_t>(in));
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated blob " + name);
    blobs.emplace(std::move(name), std::move(values));
  }
  return blobs;
}

}  // namespace posegan
