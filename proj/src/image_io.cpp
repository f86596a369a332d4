// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/image_io.hpp"

#include <png.h>

#include <cstring>
#include <stdexcept>
#include <vector>

#include "posegan/networks.hpp"

namespace posegan {

FeatureMap<float> read_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw std::runtime_error("read_png: " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr) == 0) {
    png_image_free(&image);
    throw std::runtime_error("read_png: " + path.string() + ": " + image.message);
  }
  const int h = static_cast<int>(image.height), w = static_cast<int>(image.width);
  FeatureMap<float> out(3, h, w);
  for (int p = 0; p < h * w; ++p) {
    for (int c = 0; c < 3; ++c) out.data(p, c) = static_cast<float>(buf[static_cast<std::size_t>(3 * p + c)] / 127.5 - 1.0);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const FeatureMap<float>& img) {
  if (img.channels() != 3) throw std::invalid_argument("write_png: expected 3 channels");
  std::vector<png_byte> buf(static_cast<std::size_t>(img.pixels()) * 3);
  for (int p = 0; p < img.pixels(); ++p) {
    for (int c = 0; c < 3; ++c) buf[static_cast<std::size_t>(3 * p + c)] = to_byte(img.data(p, c));
  }
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr) == 0) {
    throw std::runtime_error("write_png: " + path.string() + ": " + image.message);
  }
}

FeatureMap<float> tile_images(const std::vector<FeatureMap<float>>& images, int columns) {
  if (images.empty() || columns <= 0) throw std::invalid_argument("tile_images: nothing to tile");
  const int h = images[0].height, w = images[0].width;
  const int rows = (static_cast<int>(images.size()) + columns - 1) / columns;
  FeatureMap<float> out(3, rows * h, columns * w);
  out.data.setConstant(-1.0f);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int oy = static_cast<int>(i) / columns * h, ox = static_cast<int>(i) % columns * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < 3; ++c) out.at(c, oy + y, ox + x) = images[i].at(c, y, x);
      }
    }
  }
  return out;
}

}  // namespace posegan
