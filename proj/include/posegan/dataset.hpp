// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "posegan/pose.hpp"
#include "posegan/tensor.hpp"

namespace posegan {

struct Example {
  FeatureMap<float> image;  // 3 x R x R in [-1, 1]
  Pose pose;
};

class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual std::size_t size() const = 0;
  virtual Example get(std::size_t i) const = 0;
  virtual int resolution() const = 0;
};

class InMemoryDataset : public Dataset {
 public:
  InMemoryDataset() = default;
  explicit InMemoryDataset(std::vector<Example> examples);

  std::size_t size() const override { return examples_.size(); }
  Example get(std::size_t i) const override { return examples_.at(i); }
  int resolution() const override { return examples_.empty() ? 0 : examples_.front().image.height; }
  void add(Example e);

 private:
  std::vector<Example> examples_;
};

/// A directory holding index.jsonl ({"image": "<png>", "pose": {...}} per
/// line) and the referenced square PNGs. Images are decoded on access.
class ImageDirectoryDataset : public Dataset {
 public:
  explicit ImageDirectoryDataset(const std::filesystem::path& dir);

  std::size_t size() const override { return entries_.size(); }
  Example get(std::size_t i) const override;
  int resolution() const override { return resolution_; }

 private:
  struct Entry {
    std::filesystem::path image;
    Pose pose;
  };
  std::vector<Entry> entries_;
  int resolution_ = 0;
};

/// Writes examples as PNGs plus index.jsonl.
void write_image_directory(const std::filesystem::path& dir, const Dataset& data);

}  // namespace posegan
