// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "posegan/image_io.hpp"

namespace posegan {

InMemoryDataset::InMemoryDataset(std::vector<Example> examples) {
  for (auto& e : examples) add(std::move(e));
}

void InMemoryDataset::add(Example e) {
  if (e.image.channels() != 3 || e.image.height != e.image.width) {
    throw std::invalid_argument("dataset: images must be 3 x R x R");
  }
  if (!examples_.empty() && e.image.height != resolution()) {
    throw std::invalid_argument("dataset: mixed image resolutions");
  }
  examples_.push_back(std::move(e));
}

ImageDirectoryDataset::ImageDirectoryDataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "index.jsonl");
  if (!in) throw std::runtime_error("dataset: cannot open " + (dir / "index.jsonl").string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    entries_.push_back({dir / j.at("image").get<std::string>(), pose_from_json(j.at("pose"))});
  }
  if (entries_.empty()) throw std::runtime_error("dataset: " + dir.string() + " is empty");
  resolution_ = read_png(entries_.front().image).height;
}

Example ImageDirectoryDataset::get(std::size_t i) const {
  const Entry& e = entries_.at(i);
  Example ex{read_png(e.image), e.pose};
  if (ex.image.height != resolution_ || ex.image.width != resolution_) {
    throw std::runtime_error("dataset: " + e.image.string() + " has the wrong size");
  }
  return ex;
}

void write_image_directory(const std::filesystem::path& dir, const Dataset& data) {
  std::filesystem::create_directories(dir);
  std::ofstream index(dir / "index.jsonl");
  for (std::size_t i = 0; i < data.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.png", i);
    const Example e = data.get(i);
    write_png(dir / name, e.image);
    index << nlohmann::json{{"image", name}, {"pose", pose_to_json(e.pose)}}.dump() << "\n";
  }
}

}  // namespace posegan
