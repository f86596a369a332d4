// Copyright 2026 The posegan Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "posegan/checkpoint.hpp"
#include "posegan/training.hpp"
#include "test_util.hpp"

using namespace posegan;
using posegan::testing::file_bytes;
using posegan::testing::temp_dir;
using posegan::testing::central_difference;
using posegan::testing::random_pose;
using posegan::testing::rel_err;
using posegan::testing::tiny_generator;

namespace {

const double kLn2 = std::log(2.0);

template <class U>
struct LinearTape {
  FeatureMap<U> x;
};

/// Critic linear in the image: D(x) = <u, x>.
template <class S>
class LinearCritic {
 public:
  using Scalar = S;
  template <class U>
  using Tape = LinearTape<U>;

  LinearCritic() = default;
  explicit LinearCritic(int resolution) { params_.add("u", {resolution * resolution * 3}); }

  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }

  template <class T>
  LinearCritic<T> cast() const {
    LinearCritic<T> c;
    c.params() = params_.template cast<T>();
    return c;
  }

  S forward(const FeatureMap<S>& x, const HeatmapStack&, const Pose&, Tape<S>* tape) const {
    if (tape != nullptr) tape->x = x;
    return params_[0].dot(flat(x));
  }

  FeatureMap<S> backward(const Tape<S>& tape, const Pose&, const S& grad_logit, ParamSet<S>* grads, bool) const {
    if (grads != nullptr) (*grads)[0] += flat(tape.x) * grad_logit;
    const Mat<S> g = Eigen::Map<const Mat<S>>(params_[0].data(), tape.x.data.rows(), 3) * grad_logit;
    return FeatureMap<S>(tape.x.height, tape.x.width, g);
  }

 private:
  static Vec<S> flat(const FeatureMap<S>& x) { return Eigen::Map<const Vec<S>>(x.data.data(), x.data.size()); }

  ParamSet<S> params_;
};

FeatureMap<double> random_image(Rng& rng, int res) {
  FeatureMap<double> x(3, res, res);
  for (Eigen::Index i = 0; i < x.data.size(); ++i) x.data.data()[i] = rng.uniform(-1.0, 1.0);
  return x;
}

struct TinyModels {
  Generator<double> G;
  Discriminator<double> D;

  explicit TinyModels(int res = 16, std::uint64_t seed = 1) {
    Rng rng(seed);
    GeneratorConfig g = tiny_generator(PoseConditioning::kDual, res);
    g.channel_max = 6;
    G = Generator<double>::initialized(g, rng);
    D = Discriminator<double>::initialized(DiscriminatorConfig::matching(g), rng);
    // Nonzero biases keep zero-padded regions off the activation kink.
    for (auto* p : {&G.params(), &D.params()}) {
      for (int i = 0; i < p->size(); ++i) {
        if (p->name(i).ends_with("bias")) (*p)[i] += rng.normal_vector<double>(static_cast<int>((*p)[i].size())) * 0.1;
      }
    }
  }
};

/// Checks FD against the analytic gradient on a spread of coordinates.
void check_gradient(ParamSet<double>& params, const ParamSet<double>& grads, const std::function<double()>& f,
                    int per_tensor = 2) {
  int checked = 0;
  for (int i = 0; i < params.size(); ++i) {
    const Eigen::Index n = params[i].size();
    for (int t = 0; t < per_tensor && t < n; ++t) {
      const Eigen::Index k = (t * 7919) % n;
      const double fd = central_difference(f, params[i][k]);
      const double ad = grads[i][k];
      if (std::abs(fd) < 1e-9 && std::abs(ad) < 1e-9) continue;
      INFO(params.name(i) << "[" << k << "] fd=" << fd << " ad=" << ad);
      CHECK(rel_err(fd, ad) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

std::vector<Example> synthetic_examples(int n, int res, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    FeatureMap<float> img(3, res, res);
    for (Eigen::Index k = 0; k < img.data.size(); ++k) img.data.data()[k] = static_cast<float>(rng.uniform(-1, 1));
    out.push_back({img, random_pose(rng, res)});
  }
  return out;
}

TrainConfig smoke_config(long steps) {
  TrainConfig t;
  t.batch_size = 4;
  t.total_steps = steps;
  t.d_reg_interval = 4;
  t.g_reg_interval = 2;
  t.ema_warmup_steps = 5;
  t.seed = 11;
  return t;
}

}  // namespace

TEST_CASE("train config validation and json") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  const TrainConfig r = train_config_from_json(to_json(c));
  CHECK(r.ema_beta == c.ema_beta);
  CHECK(r.d_reg_interval == 16);
  CHECK(r.g_reg_interval == 8);
  c.ema_beta = 1.0;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("train.ema_beta"), std::invalid_argument);
  c = TrainConfig{};
  c.r1_gamma = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("loss algebra with a zero discriminator") {
  TinyModels m;
  m.D.params().set_zero();
  Rng rng(3);
  std::vector<FeatureMap<double>> images{random_image(rng, 16), random_image(rng, 16), random_image(rng, 16)};
  std::vector<Pose> poses{random_pose(rng, 16), random_pose(rng, 16), random_pose(rng, 16)};
  const AugmentConfig aug;
  const DLossTerms with = d_loss<double>(m.G, m.D, images, poses, true, aug, rng, nullptr);
  CHECK(std::abs(with.loss - 3 * kLn2) < 1e-6);
  const DLossTerms without = d_loss<double>(m.G, m.D, images, poses, false, aug, rng, nullptr);
  CHECK(std::abs(without.loss - 2 * kLn2) < 1e-6);
  CHECK(std::abs(g_loss<double>(m.G, m.D, poses, aug, rng, nullptr) - kLn2) < 1e-6);

  CHECK_THROWS_AS(d_loss<double>(m.G, m.D, std::span(images).first(1), std::span(poses).first(1), true, aug, rng,
                                 nullptr),
                  std::invalid_argument);
}

TEST_CASE("d_loss and g_loss gradients match finite differences") {
  TinyModels m;
  CHECK(m.G.parameter_count() + m.D.parameter_count() < 10000);
  Rng rng(4);
  std::vector<FeatureMap<double>> images{random_image(rng, 16), random_image(rng, 16)};
  std::vector<Pose> poses{random_pose(rng, 16), random_pose(rng, 16)};
  const AugmentConfig aug;
  const Rng start(21);

  ParamSet<double> d_grads = m.D.params().zeros_like();
  Rng r = start;
  d_loss<double>(m.G, m.D, images, poses, true, aug, r, &d_grads);
  check_gradient(m.D.params(), d_grads, [&] {
    Rng rr = start;
    return d_loss<double>(m.G, m.D, images, poses, true, aug, rr, nullptr).loss;
  });

  ParamSet<double> g_grads = m.G.params().zeros_like();
  r = start;
  g_loss<double>(m.G, m.D, poses, aug, r, &g_grads);
  CHECK(g_grads.squared_norm() > 0.0);
  check_gradient(m.G.params(), g_grads, [&] {
    Rng rr = start;
    return g_loss<double>(m.G, m.D, poses, aug, rr, nullptr);
  });
}

TEST_CASE("R1 on a linear critic") {
  const int res = 16;
  LinearCritic<double> critic(res);
  Rng rng(5);
  for (Eigen::Index k = 0; k < critic.params()[0].size(); ++k) critic.params()[0][k] = rng.normal();
  const Vec<double> u = critic.params()[0];
  std::vector<DiscriminatorInput<double>> inputs;
  for (int i = 0; i < 4; ++i) inputs.push_back({random_image(rng, res), HeatmapStack::zeros(res), random_pose(rng, res)});

  const double gamma = 0.05;
  ParamSet<double> grads = critic.params().zeros_like();
  const double r1 = r1_penalty(critic, std::span<const DiscriminatorInput<double>>(inputs), gamma, &grads);
  CHECK(std::abs(r1 - 0.5 * gamma * u.squaredNorm()) < 1e-6);
  CHECK((grads[0] - gamma * u).cwiseAbs().maxCoeff() < 1e-12);

  // Lazy scaling multiplies the gradient contribution by the interval.
  ParamSet<double> lazy = critic.params().zeros_like();
  r1_penalty(critic, std::span<const DiscriminatorInput<double>>(inputs), gamma, &lazy, 16.0);
  CHECK((lazy[0] - 16.0 * gamma * u).cwiseAbs().maxCoeff() < 1e-12);

  ParamSet<double> none = critic.params().zeros_like();
  CHECK(r1_penalty(critic, std::span<const DiscriminatorInput<double>>(inputs), 0.0, &none) == 0.0);
  CHECK(none.squared_norm() == 0.0);
}

TEST_CASE("R1 gradient matches finite differences on a tiny discriminator") {
  TinyModels m;
  Rng rng(6);
  std::vector<DiscriminatorInput<double>> inputs;
  for (int i = 0; i < 2; ++i) {
    const Pose p = random_pose(rng, 16);
    inputs.push_back({random_image(rng, 16), render_heatmaps(p, 16), p});
  }
  const std::span<const DiscriminatorInput<double>> batch(inputs);
  ParamSet<double> grads = m.D.params().zeros_like();
  r1_penalty(m.D, batch, 1.0, &grads);
  check_gradient(m.D.params(), grads, [&] { return r1_penalty(m.D, batch, 1.0); });
}

TEST_CASE("path length penalty") {
  TinyModels m;
  Rng rng(7);
  std::vector<Vec<double>> zs;
  std::vector<Pose> poses;
  std::vector<FeatureMap<double>> noise;
  for (int i = 0; i < 3; ++i) {
    zs.push_back(rng.normal_vector<double>(8));
    poses.push_back(random_pose(rng, 16));
    noise.push_back(path_length_noise<double>(16, rng));
  }

  SUBCASE("first call is the mean squared length") {
    double a = 0.0;
    const PathLengthStats s = path_length_penalty<double>(m.G, zs, poses, noise, a, 0.01);
    double sq = 0.0, mean = 0.0;
    for (double l : s.lengths) {
      sq += l * l;
      mean += l;
    }
    CHECK(std::abs(s.penalty - sq / 3.0) < 1e-12);
    CHECK(std::abs(a - 0.01 * mean / 3.0) < 1e-12);
    CHECK(s.mean_before == 0.0);
  }

  SUBCASE("gradient matches finite differences") {
    double a0 = 0.0;
    path_length_penalty<double>(m.G, zs, poses, noise, a0, 1.0);
    const double target = 0.5 * a0;
    double a = target;
    ParamSet<double> grads = m.G.params().zeros_like();
    path_length_penalty<double>(m.G, zs, poses, noise, a, 0.01, &grads);
    check_gradient(m.G.params(), grads, [&] {
      double t = target;
      return path_length_penalty<double>(m.G, zs, poses, noise, t, 0.01).penalty;
    });
  }

  SUBCASE("penalty is non-negative") {
    for (int t = 0; t < 200; ++t) {
      std::vector<double> lengths;
      for (int i = 0; i < 4; ++i) lengths.push_back(std::abs(rng.normal()));
      double a = rng.uniform(-1, 3);
      CHECK(path_length_update(lengths, a, 0.01).penalty >= 0.0);
    }
  }
}

TEST_CASE("path length target converges on a linear generator") {
  // Linear G with orthonormal Jacobian columns on disjoint pixel groups: the
  // length is the norm of an 8-dim Gaussian, so the penalty settles at its
  // variance, about 1 / (2 H W).
  const int res = 128, dims = 8, batch = 4;
  const int entries = 3 * res * res, group = entries / dims;
  Rng rng(8);
  double a = 0.0, penalty = 0.0;
  const int updates = 3000;
  for (int u = 0; u < updates; ++u) {
    std::vector<double> lengths;
    for (int i = 0; i < batch; ++i) {
      const FeatureMap<double> y = path_length_noise<double>(res, rng);
      Eigen::VectorXd g(dims);
      for (int d = 0; d < dims; ++d) g[d] = y.data.reshaped().segment(d * group, group).sum() / std::sqrt(group);
      lengths.push_back(g.norm());
    }
    const PathLengthStats s = path_length_update(lengths, a, 0.01);
    if (u >= updates - 500) penalty += s.penalty / 500.0;
  }
  const double expected = std::sqrt(2.0) * std::tgamma((dims + 1) / 2.0) / std::tgamma(dims / 2.0) / res;
  CHECK(std::abs(a - expected) < 0.02 * expected);
  CHECK(penalty < 1e-4);
}

TEST_CASE("ema schedule and update") {
  CHECK(ema_beta_at(0, 0.995, 150000) == 0.0);
  CHECK(ema_beta_at(150000, 0.995, 150000) == 0.995);
  CHECK(ema_beta_at(10'000'000, 0.995, 150000) == 0.995);
  CHECK(ema_beta_at(3, 0.995, 0) == 0.995);
  double prev = -1;
  for (long s = 0; s < 200000; s += 997) {
    const double b = ema_beta_at(s, 0.995, 150000);
    CHECK(b >= prev);
    CHECK(b <= 0.995);
    prev = b;
  }

  TinyModels m(16, 1), other(16, 2);
  ParamSet<double> ema = other.G.params();
  ema_update(ema, m.G.params(), ema_beta_at(0, 0.995, 150000));
  for (int i = 0; i < ema.size(); ++i) CHECK((ema[i].array() == m.G.params()[i].array()).all());
  for (int s = 1; s < 20; ++s) {
    ema_update(ema, m.G.params(), ema_beta_at(s, 0.995, 10));
    for (int i = 0; i < ema.size(); ++i) CHECK((ema[i].array() == m.G.params()[i].array()).all());
  }
  ParamSet<double> moving = other.G.params();
  ema_update(moving, m.G.params(), 0.9);
  const int i = m.G.params().index("synthesis.const");
  CHECK((moving[i] - (0.9 * other.G.params()[i] + 0.1 * m.G.params()[i])).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("training smoke run writes a loadable checkpoint") {
  const GeneratorConfig g = tiny_generator(PoseConditioning::kDual, 16);
  const DiscriminatorConfig d = DiscriminatorConfig::matching(g);
  const InMemoryDataset data(synthetic_examples(8, 16, 1));
  Trainer trainer(g, d, smoke_config(10), data);
  const auto dir = temp_dir("smoke");
  std::ostringstream log;
  int r1_steps = 0, pl_steps = 0;
  train(trainer, dir, &log, [&](const StepMetrics& s) {
    r1_steps += std::isfinite(s.r1);
    pl_steps += std::isfinite(s.pl);
  });
  CHECK(trainer.state().step == 10);
  CHECK(r1_steps == 3);
  CHECK(pl_steps == 5);

  std::istringstream lines(log.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* key : {"step", "d_loss", "g_loss", "r1", "pl", "ema_beta"}) CHECK(j.contains(key));
    ++count;
  }
  CHECK(count == 10);

  GeneratorConfig lg;
  TrainConfig lt;
  const TrainState s = load_train_state(dir / "latest", &lg, nullptr, &lt);
  CHECK(s.step == 10);
  CHECK(lg.resolution == 16);
  CHECK(lt.total_steps == 10);
  for (int i = 0; i < s.G.params().size(); ++i) {
    CHECK((s.G.params()[i].array() == trainer.state().G.params()[i].array()).all());
    CHECK((s.G_ema.params()[i].array() == trainer.state().G_ema.params()[i].array()).all());
  }
  const Generator<float> ema = load_generator(dir / "latest");
  Rng rng(1);
  const Pose p = random_pose(rng, 16);
  const Vec<float> z = rng.normal_vector<float>(8);
  const auto a = ema.generate(ema.map(z, p), ema.pyramid(p));
  const auto b = trainer.state().G_ema.generate(trainer.state().G_ema.map(z, p), trainer.state().G_ema.pyramid(p));
  CHECK((a.data.array() == b.data.array()).all());
  CHECK(load_discriminator(dir / "latest").parameter_count() == trainer.state().D.parameter_count());
  std::filesystem::remove_all(dir);
}

TEST_CASE("training is deterministic and resumable") {
  const GeneratorConfig g = tiny_generator(PoseConditioning::kDual, 16);
  const DiscriminatorConfig d = DiscriminatorConfig::matching(g);
  const InMemoryDataset data(synthetic_examples(8, 16, 2));
  const auto a = temp_dir("det_a"), b = temp_dir("det_b"), c = temp_dir("det_c");
  {
    Trainer t(g, d, smoke_config(10), data);
    train(t, a, nullptr);
  }
  {
    Trainer t(g, d, smoke_config(10), data);
    train(t, b, nullptr);
  }
  CHECK(file_bytes(a / "latest" / "params.bin") == file_bytes(b / "latest" / "params.bin"));
  CHECK(file_bytes(a / "latest" / "config.json") == file_bytes(b / "latest" / "config.json"));

  {
    TrainConfig half = smoke_config(10);
    half.checkpoint_every = 5;
    Trainer t(g, d, half, data);
    for (int i = 0; i < 5; ++i) t.step();
    save_checkpoint(c / "mid", t);
  }
  GeneratorConfig lg;
  DiscriminatorConfig ld;
  TrainConfig lt;
  TrainState state = load_train_state(c / "mid", &lg, &ld, &lt);
  lt.checkpoint_every = 0;
  Trainer resumed(std::move(state), lg, ld, lt, data);
  train(resumed, c, nullptr);
  CHECK(file_bytes(a / "latest" / "params.bin") == file_bytes(c / "latest" / "params.bin"));
  for (const auto& dir : {a, b, c}) std::filesystem::remove_all(dir);
}

TEST_CASE("training errors") {
  const GeneratorConfig g = tiny_generator(PoseConditioning::kDual, 16);
  const DiscriminatorConfig d = DiscriminatorConfig::matching(g);
  const InMemoryDataset empty;
  CHECK_THROWS_AS(Trainer(g, d, smoke_config(1), empty), std::invalid_argument);
  const InMemoryDataset wrong(synthetic_examples(4, 32, 3));
  CHECK_THROWS_AS(Trainer(g, d, smoke_config(1), wrong), std::invalid_argument);

  const InMemoryDataset data(synthetic_examples(4, 16, 3));
  Trainer t(g, d, smoke_config(5), data);
  t.state().G.params()["synthesis.const"][0] = std::nanf("");
  CHECK_THROWS_AS(t.step(), TrainingError);
}

TEST_CASE("blob files round-trip") {
  BlobMap blobs{{"a", {1.0f, 2.5f}}, {"b", {}}};
  const auto dir = temp_dir("blobs");
  std::filesystem::create_directories(dir);
  write_blobs(dir / "x.bin", blobs);
  CHECK(read_blobs(dir / "x.bin") == blobs);
  std::ofstream(dir / "bad.bin") << "junk";
  CHECK_THROWS(read_blobs(dir / "bad.bin"));
  std::filesystem::remove_all(dir);
}
