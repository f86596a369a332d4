// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include "posegan/networks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace posegan {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int schedule(int res, int base, int max, int mult) { return std::max(1, std::min(base * mult / res, max * mult)); }

void check(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument(field + ": " + what);
}

HeatmapPlacement placement_from_string(const std::string& s) {
  if (s == "block_input") return HeatmapPlacement::kBlockInput;
  if (s == "every_conv") return HeatmapPlacement::kEveryConv;
  throw std::invalid_argument("heatmap_placement: unknown value " + s);
}

std::string placement_to_string(HeatmapPlacement p) {
  return p == HeatmapPlacement::kBlockInput ? "block_input" : "every_conv";
}

}  // namespace

int GeneratorConfig::channels_at(int res) const {
  return schedule(res, channel_base, channel_max, channel_multiplier);
}

std::vector<int> GeneratorConfig::scales() const {
  std::vector<int> s;
  for (int r = 4; r <= resolution; r *= 2) s.push_back(r);
  return s;
}

MappingConfig GeneratorConfig::mapping() const {
  MappingConfig m;
  m.z_dim = z_dim;
  m.embed_dim = uses_pose_latent(conditioning) ? embed_dim : 0;
  m.hidden_dim = w_dim;
  m.out_dim = w_dim;
  m.num_layers = mapping_layers;
  m.lr_multiplier = mapping_lr_multiplier;
  return m;
}

void GeneratorConfig::validate() const {
  check(is_power_of_two(resolution) && resolution >= 16 && resolution <= 128, "generator.resolution",
        "must be a power of two in [16, 128]");
  check(channel_base > 0, "generator.channel_base", "must be positive");
  check(channel_max > 0, "generator.channel_max", "must be positive");
  check(channel_multiplier >= 1, "generator.channel_multiplier", "must be >= 1");
  check(z_dim > 0, "generator.z_dim", "must be positive");
  check(w_dim > 0, "generator.w_dim", "must be positive");
  check(embed_dim > 0, "generator.embed_dim", "must be positive");
  check(mapping_layers >= 1, "generator.mapping_layers", "must be >= 1");
  check(mapping_lr_multiplier > 0, "generator.mapping_lr_multiplier", "must be positive");
  check(!use_spatial_noise, "generator.use_spatial_noise", "spatial noise inputs are not supported");
}

int DiscriminatorConfig::channels_at(int res) const {
  return schedule(res, channel_base, channel_max, channel_multiplier);
}

MappingConfig DiscriminatorConfig::mapping() const {
  MappingConfig m;
  m.z_dim = 0;
  m.embed_dim = embed_dim;
  m.hidden_dim = mapping_hidden;
  m.out_dim = projection_dim();
  m.num_layers = mapping_layers;
  m.lr_multiplier = mapping_lr_multiplier;
  return m;
}

void DiscriminatorConfig::validate() const {
  check(is_power_of_two(resolution) && resolution >= 16 && resolution <= 128, "discriminator.resolution",
        "must be a power of two in [16, 128]");
  check(channel_base > 0, "discriminator.channel_base", "must be positive");
  check(channel_max > 0, "discriminator.channel_max", "must be positive");
  check(channel_multiplier >= 1, "discriminator.channel_multiplier", "must be >= 1");
  check(embed_dim > 0, "discriminator.embed_dim", "must be positive");
  check(mapping_layers >= 1, "discriminator.mapping_layers", "must be >= 1");
  check(mapping_hidden > 0, "discriminator.mapping_hidden", "must be positive");
  check(mapping_lr_multiplier > 0, "discriminator.mapping_lr_multiplier", "must be positive");
}

DiscriminatorConfig DiscriminatorConfig::matching(const GeneratorConfig& g) {
  DiscriminatorConfig d;
  d.resolution = g.resolution;
  d.channel_base = g.channel_base;
  d.channel_max = g.channel_max;
  d.channel_multiplier = g.channel_multiplier;
  d.embed_dim = g.embed_dim;
  d.mapping_layers = g.mapping_layers;
  d.mapping_hidden = g.w_dim;
  d.mapping_lr_multiplier = g.mapping_lr_multiplier;
  d.conditioning = g.conditioning;
  return d;
}

nlohmann::json to_json(const GeneratorConfig& c) {
  return {{"resolution", c.resolution},
          {"channel_base", c.channel_base},
          {"channel_max", c.channel_max},
          {"channel_multiplier", c.channel_multiplier},
          {"z_dim", c.z_dim},
          {"w_dim", c.w_dim},
          {"embed_dim", c.embed_dim},
          {"mapping_layers", c.mapping_layers},
          {"mapping_lr_multiplier", c.mapping_lr_multiplier},
          {"conditioning", to_string(c.conditioning)},
          {"heatmap_placement", placement_to_string(c.heatmap_placement)},
          {"use_spatial_noise", c.use_spatial_noise}};
}

nlohmann::json to_json(const DiscriminatorConfig& c) {
  return {{"resolution", c.resolution},
          {"channel_base", c.channel_base},
          {"channel_max", c.channel_max},
          {"channel_multiplier", c.channel_multiplier},
          {"embed_dim", c.embed_dim},
          {"mapping_layers", c.mapping_layers},
          {"mapping_hidden", c.mapping_hidden},
          {"mapping_lr_multiplier", c.mapping_lr_multiplier},
          {"conditioning", to_string(c.conditioning)}};
}

GeneratorConfig generator_config_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  c.resolution = j.value("resolution", c.resolution);
  c.channel_base = j.value("channel_base", c.channel_base);
  c.channel_max = j.value("channel_max", c.channel_max);
  c.channel_multiplier = j.value("channel_multiplier", c.channel_multiplier);
  c.z_dim = j.value("z_dim", c.z_dim);
  c.w_dim = j.value("w_dim", c.w_dim);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.mapping_layers = j.value("mapping_layers", c.mapping_layers);
  c.mapping_lr_multiplier = j.value("mapping_lr_multiplier", c.mapping_lr_multiplier);
  c.conditioning = conditioning_from_string(j.value("conditioning", to_string(c.conditioning)));
  c.heatmap_placement = placement_from_string(j.value("heatmap_placement", placement_to_string(c.heatmap_placement)));
  c.use_spatial_noise = j.value("use_spatial_noise", c.use_spatial_noise);
  c.validate();
  return c;
}

DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j) {
  DiscriminatorConfig c;
  c.resolution = j.value("resolution", c.resolution);
  c.channel_base = j.value("channel_base", c.channel_base);
  c.channel_max = j.value("channel_max", c.channel_max);
  c.channel_multiplier = j.value("channel_multiplier", c.channel_multiplier);
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.mapping_layers = j.value("mapping_layers", c.mapping_layers);
  c.mapping_hidden = j.value("mapping_hidden", c.mapping_hidden);
  c.mapping_lr_multiplier = j.value("mapping_lr_multiplier", c.mapping_lr_multiplier);
  c.conditioning = conditioning_from_string(j.value("conditioning", to_string(c.conditioning)));
  c.validate();
  return c;
}

std::uint8_t to_byte(double x) {
  const double v = std::round(127.5 * (x + 1.0));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

// ---------------------------------------------------------------------------
// Generator

template <class S>
Generator<S>::Generator(GeneratorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  mapping_ = MappingNetwork(cfg_.mapping(), params_, "mapping");
  const int k = uses_heatmaps(cfg_.conditioning) ? kNumKeypoints : 0;
  const bool every = cfg_.heatmap_placement == HeatmapPlacement::kEveryConv;
  const int c4 = cfg_.channels_at(4);
  const_ = params_.add("synthesis.const", {c4, 4, 4});
  int prev = c4;
  const auto scales = cfg_.scales();
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const int c = cfg_.channels_at(scales[s]);
    const std::string name = "synthesis.b" + std::to_string(scales[s]);
    if (s > 0) {
      conv0_.push_back(ModConvLayer::add(params_, name + ".conv0", cfg_.w_dim, prev + k, c, 3, true, true));
    } else {
      conv0_.emplace_back();
    }
    const int conv1_in = s == 0 ? prev + k : (every ? c + k : c);
    conv1_.push_back(ModConvLayer::add(params_, name + ".conv1", cfg_.w_dim, conv1_in, c, 3, true, true));
    torgb_.push_back(ModConvLayer::add(params_, name + ".torgb", cfg_.w_dim, c, 3, 1, false, false));
    prev = c;
  }
}

template <class S>
Generator<S> Generator<S>::initialized(const GeneratorConfig& cfg, Rng& rng) {
  Generator g(cfg);
  g.mapping_.init(g.params_, rng);
  for (Eigen::Index i = 0; i < g.params_[g.const_].size(); ++i) g.params_[g.const_][i] = S(rng.normal());
  for (std::size_t s = 0; s < g.conv1_.size(); ++s) {
    if (s > 0) g.conv0_[s].init(g.params_, rng);
    g.conv1_[s].init(g.params_, rng);
    g.torgb_[s].init(g.params_, rng);
  }
  return g;
}

template <class S>
std::vector<HeatmapStack> Generator<S>::pyramid(const Pose& pose) const {
  if (!uses_heatmaps(cfg_.conditioning)) return {};
  const auto scales = cfg_.scales();
  return render_pyramid(pose, scales);
}

template <class S>
std::vector<HeatmapStack> Generator<S>::zero_pyramid() const {
  std::vector<HeatmapStack> out;
  if (!uses_heatmaps(cfg_.conditioning)) return out;
  for (int r : cfg_.scales()) out.push_back(HeatmapStack::zeros(r));
  return out;
}

template <class S>
FeatureMap<S> Generator<S>::synthesize(std::span<const Vec<S>> ws, std::span<const HeatmapStack> pyramid,
                                       const SynthesisOptions& options, SynthesisTape<S>* tape) const {
  const auto scales = cfg_.scales();
  const std::size_t n = scales.size();
  if (ws.size() != n) throw std::invalid_argument("generate: expected one latent per synthesis scale");
  for (const auto& w : ws) {
    if (w.size() != cfg_.w_dim) throw std::invalid_argument("generate: latent dimension mismatch");
  }
  const bool heat = uses_heatmaps(cfg_.conditioning);
  const bool every = cfg_.heatmap_placement == HeatmapPlacement::kEveryConv;
  if (heat) {
    if (pyramid.size() != n) throw std::invalid_argument("generate: heatmap pyramid does not match synthesis scales");
    for (std::size_t s = 0; s < n; ++s) {
      if (pyramid[s].resolution != scales[s]) {
        throw std::invalid_argument("generate: heatmap resolution does not match synthesis scale");
      }
    }
  }
  if (tape != nullptr) {
    tape->ws.assign(ws.begin(), ws.end());
    tape->conv0.assign(n, {});
    tape->conv1.assign(n, {});
    tape->torgb.assign(n, {});
    tape->options = options;
  }

  const int c4 = cfg_.channels_at(4);
  FeatureMap<S> x(c4, 4, 4);
  if (!options.zero_const) x.data = params_.view(const_).transpose();
  FeatureMap<S> image;
  for (std::size_t s = 0; s < n; ++s) {
    if (s > 0) x = upsample2x(x);
    FeatureMap<S> heatmaps;
    if (heat) {
      heatmaps = pyramid[s].template as_feature_map<S>();
      x = concat_channels(x, heatmaps);
    }
    if (s > 0) {
      x = conv0_[s].forward(params_, x, ws[s], tape ? &tape->conv0[s] : nullptr);
      if (heat && every) x = concat_channels(x, heatmaps);
    }
    x = conv1_[s].forward(params_, x, ws[s], tape ? &tape->conv1[s] : nullptr);
    FeatureMap<S> rgb = torgb_[s].forward(params_, x, ws[s], tape ? &tape->torgb[s] : nullptr);
    if (s == 0) {
      image = std::move(rgb);
    } else {
      image = upsample2x(image);
      image.data += rgb.data;
    }
  }
  return image;
}

template <class S>
std::vector<Vec<S>> Generator<S>::synthesize_backward(const SynthesisTape<S>& tape, const FeatureMap<S>& grad_image,
                                                      ParamSet<S>* grads) const {
  const auto scales = cfg_.scales();
  const std::size_t n = scales.size();
  const bool heat = uses_heatmaps(cfg_.conditioning);
  const bool every = cfg_.heatmap_placement == HeatmapPlacement::kEveryConv;
  std::vector<Vec<S>> grad_ws(n, Vec<S>::Zero(cfg_.w_dim));
  FeatureMap<S> g_image = grad_image;
  FeatureMap<S> g_from_next;
  for (std::size_t s = n; s-- > 0;) {
    FeatureMap<S> g = torgb_[s].backward(params_, tape.torgb[s], g_image, grads, grad_ws[s]);
    if (s + 1 < n) g.data += g_from_next.data;
    g = conv1_[s].backward(params_, tape.conv1[s], g, grads, grad_ws[s]);
    if (s > 0) {
      if (heat && every) g.data = Mat<S>(g.data.leftCols(g.channels() - kNumKeypoints));
      g = conv0_[s].backward(params_, tape.conv0[s], g, grads, grad_ws[s]);
    }
    if (heat) g.data = Mat<S>(g.data.leftCols(g.channels() - kNumKeypoints));
    if (s > 0) {
      g_from_next = upsample2x_backward(g);
      g_image = upsample2x_backward(g_image);
    } else if (grads != nullptr && !tape.options.zero_const) {
      grads->accumulate_matrix(const_, g.data.transpose());
    }
  }
  return grad_ws;
}

// ---------------------------------------------------------------------------
// Discriminator

template <class S>
Discriminator<S>::Discriminator(DiscriminatorConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (uses_pose_latent(cfg_.conditioning)) mapping_ = MappingNetwork(cfg_.mapping(), params_, "mapping");
  const int top = cfg_.resolution;
  fromrgb_ = ConvLayer::add(params_, "b" + std::to_string(top) + ".fromrgb", cfg_.input_channels(),
                            cfg_.channels_at(top), 1);
  for (int r = top; r > 4; r /= 2) {
    const int cin = cfg_.channels_at(r), cout = cfg_.channels_at(r / 2);
    const std::string name = "b" + std::to_string(r);
    conv0_.push_back(ConvLayer::add(params_, name + ".conv0", cin, cin, 3));
    conv1_.push_back(ConvLayer::add(params_, name + ".conv1", cin, cout, 3));
    skip_.push_back(ConvLayer::add(params_, name + ".skip", cin, cout, 1, false));
  }
  const int c4 = cfg_.channels_at(4);
  epi_conv_ = ConvLayer::add(params_, "b4.conv", c4, c4, 3);
  epi_fc_ = DenseLayer::add(params_, "b4.fc", c4 * 16, c4);
  out_ = DenseLayer::add(params_, "b4.out", c4, 1);
}

template <class S>
Discriminator<S> Discriminator<S>::initialized(const DiscriminatorConfig& cfg, Rng& rng) {
  Discriminator d(cfg);
  if (uses_pose_latent(cfg.conditioning)) d.mapping_.init(d.params_, rng);
  d.fromrgb_.init(d.params_, rng);
  for (std::size_t b = 0; b < d.conv0_.size(); ++b) {
    d.conv0_[b].init(d.params_, rng);
    d.conv1_[b].init(d.params_, rng);
    d.skip_[b].init(d.params_, rng);
  }
  d.epi_conv_.init(d.params_, rng);
  d.epi_fc_.init(d.params_, rng);
  d.out_.init(d.params_, rng);
  return d;
}

template <class S>
S Discriminator<S>::forward(const FeatureMap<S>& image, const HeatmapStack& heatmaps, const Pose& pose,
                            DiscriminatorTape<S>* tape) const {
  using std::sqrt;
  if (image.channels() != 3 || image.height != cfg_.resolution || image.width != cfg_.resolution) {
    throw std::invalid_argument("discriminate: image must be 3 x R x R at the discriminator resolution");
  }
  FeatureMap<S> x = image;
  if (uses_heatmaps(cfg_.conditioning)) {
    if (heatmaps.resolution != image.height) {
      throw std::invalid_argument("discriminate: heatmap resolution does not match image resolution");
    }
    x = concat_channels(x, heatmaps.template as_feature_map<S>());
  }
  const S half_sqrt(std::sqrt(0.5));
  if (tape != nullptr) {
    tape->input = x;
    tape->block_in.clear();
    tape->conv0_pre.clear();
    tape->conv1_in.clear();
    tape->conv1_pre.clear();
    tape->skip_in.clear();
  }
  FeatureMap<S> pre = fromrgb_.forward(params_, x);
  if (tape != nullptr) tape->fromrgb_pre = pre.data;
  x.data = lrelu(pre.data);
  x = FeatureMap<S>(pre.height, pre.width, x.data);
  for (std::size_t b = 0; b < conv0_.size(); ++b) {
    FeatureMap<S> p0 = conv0_[b].forward(params_, x);
    FeatureMap<S> y(p0.height, p0.width, lrelu(p0.data));
    y = downsample2x(y);
    FeatureMap<S> p1 = conv1_[b].forward(params_, y);
    FeatureMap<S> skip_in = downsample2x(x);
    FeatureMap<S> skip = skip_[b].forward(params_, skip_in);
    if (tape != nullptr) {
      tape->block_in.push_back(x);
      tape->conv0_pre.push_back(p0);
      tape->conv1_in.push_back(y);
      tape->conv1_pre.push_back(p1);
      tape->skip_in.push_back(std::move(skip_in));
    }
    x = FeatureMap<S>(p1.height, p1.width, (lrelu(p1.data) + skip.data) * half_sqrt);
  }
  FeatureMap<S> pe = epi_conv_.forward(params_, x);
  const Mat<S> act = lrelu(pe.data);
  const Vec<S> flat = Eigen::Map<const Vec<S>>(act.data(), act.size());
  const Vec<S> fc_pre = epi_fc_.forward(params_, flat);
  const Vec<S> phi = lrelu(fc_pre);
  S logit = out_.forward(params_, phi)[0];
  Vec<S> cmap;
  if (uses_pose_latent(cfg_.conditioning)) {
    cmap = mapping_.forward(params_, Vec<S>(0), pose, tape ? &tape->mapping : nullptr);
    logit += phi.dot(cmap) / S(std::sqrt(static_cast<double>(cfg_.projection_dim())));
  }
  if (tape != nullptr) {
    tape->epi_in = x;
    tape->epi_pre = pe.data;
    tape->flat = flat;
    tape->fc_pre = fc_pre;
    tape->phi = phi;
    tape->cmap = cmap;
  }
  return logit;
}

template <class S>
FeatureMap<S> Discriminator<S>::backward(const DiscriminatorTape<S>& t, const Pose& pose, const S& grad_logit,
                                         ParamSet<S>* grads, bool need_input_grad) const {
  const S half_sqrt(std::sqrt(0.5));
  Vec<S> g_phi = out_.backward(params_, t.phi, Vec<S>(Vec<S>::Constant(1, grad_logit)), grads);
  if (uses_pose_latent(cfg_.conditioning)) {
    const S scale = grad_logit / S(std::sqrt(static_cast<double>(cfg_.projection_dim())));
    g_phi += t.cmap * scale;
    mapping_.backward(params_, pose, t.mapping, Vec<S>(t.phi * scale), grads);
  }
  const Vec<S> g_fc = lrelu_backward(g_phi, t.fc_pre);
  const Vec<S> g_flat = epi_fc_.backward(params_, t.flat, g_fc, grads);
  const int c4 = cfg_.channels_at(4);
  FeatureMap<S> g(4, 4, lrelu_backward(Eigen::Map<const Mat<S>>(g_flat.data(), 16, c4), t.epi_pre));
  g = epi_conv_.backward(params_, t.epi_in, g, grads);
  for (std::size_t b = conv0_.size(); b-- > 0;) {
    const Mat<S> g_half = g.data * half_sqrt;
    FeatureMap<S> g_skip_in = skip_[b].backward(params_, t.skip_in[b], FeatureMap<S>(g.height, g.width, g_half), grads);
    FeatureMap<S> g_in = downsample2x_backward(g_skip_in);
    FeatureMap<S> g1(g.height, g.width, lrelu_backward(g_half, t.conv1_pre[b].data));
    FeatureMap<S> g_y = downsample2x_backward(conv1_[b].backward(params_, t.conv1_in[b], g1, grads));
    FeatureMap<S> g0(g_y.height, g_y.width, lrelu_backward(g_y.data, t.conv0_pre[b].data));
    g_in.data += conv0_[b].backward(params_, t.block_in[b], g0, grads).data;
    g = std::move(g_in);
  }
  FeatureMap<S> g_pre(g.height, g.width, lrelu_backward(g.data, t.fromrgb_pre));
  FeatureMap<S> g_input = fromrgb_.backward(params_, t.input, g_pre, grads, need_input_grad);
  if (!need_input_grad) return {};
  return FeatureMap<S>(g_input.height, g_input.width, Mat<S>(g_input.data.leftCols(3)));
}

template <class S>
std::vector<S> Discriminator<S>::forward_batch(std::span<const FeatureMap<S>> images,
                                               std::span<const HeatmapStack> heatmaps,
                                               std::span<const Pose> poses) const {
  if (images.size() != poses.size() || (uses_heatmaps(cfg_.conditioning) && heatmaps.size() != images.size())) {
    throw std::invalid_argument("discriminate: batch size mismatch");
  }
  std::vector<S> out;
  out.reserve(images.size());
  const HeatmapStack none;
  for (std::size_t i = 0; i < images.size(); ++i) {
    out.push_back(forward(images[i], heatmaps.empty() ? none : heatmaps[i], poses[i]));
  }
  return out;
}

template class Generator<float>;
template class Generator<double>;
template class Generator<Dual<float>>;
template class Generator<Dual<double>>;
template class Discriminator<float>;
template class Discriminator<double>;
template class Discriminator<Dual<float>>;
template class Discriminator<Dual<double>>;

}  // namespace posegan
