/* Copyright 2026 The nodulegan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "nodulegan/gan/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "nodulegan/gan/losses.hpp"
#include "nodulegan/nn/checkpoint.hpp"

namespace nodulegan::gan {

using dataset::ClassMode;
using dataset::ImagePatch;
using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t preset_iterations(ClassMode mode) {
  switch (mode) {
    case ClassMode::kBenign: return 114000;
    case ClassMode::kMalignant: return 110000;
    case ClassMode::kMixed: return 99000;
  }
  return 0;
}

std::uint64_t TrainConfig::resolved_max_iterations() const {
  return max_iterations.value_or(preset_iterations(class_mode));
}

void TrainConfig::validate() const {
  if (batch_size == 0) throw GanError("train: batch_size must be positive");
  if (!(lr_d > 0.0) || !(lr_g > 0.0)) throw GanError("train: learning rates must be positive");
  if (checkpoint_every == 0 || log_every == 0) {
    throw GanError("train: checkpoint_every and log_every must be positive");
  }
  generator.validate();
  discriminator.validate();
  if (generator.output_size != discriminator.input_size) {
    throw GanError("train: generator output " + std::to_string(generator.output_size) +
                   " does not match discriminator input " + std::to_string(discriminator.input_size));
  }
}

TrainingAborted::TrainingAborted(std::uint64_t iteration, fs::path last_checkpoint, const std::string& why)
    : GanError("training aborted at iteration " + std::to_string(iteration) + ": " + why +
               "; last good checkpoint " + last_checkpoint.string()),
      iteration_(iteration),
      last_checkpoint_(std::move(last_checkpoint)) {}

std::string metrics_header() {
  return "iteration\tloss_d\tloss_g\tvalue_v\td_real_mean\td_fake_mean\treal_pixel_mean\tfake_pixel_mean";
}

std::string format_metrics(const TrainingMetrics& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%llu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g",
                static_cast<unsigned long long>(m.iteration), m.loss_d, m.loss_g, m.value_v, m.d_real_mean,
                m.d_fake_mean, m.real_pixel_mean, m.fake_pixel_mean);
  return buf;
}

std::vector<TrainingMetrics> read_metrics_log(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw GanError("cannot open metrics log " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != metrics_header()) {
    throw GanError("metrics log " + path.string() + " has an unexpected header");
  }
  std::vector<TrainingMetrics> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    TrainingMetrics m;
    row >> m.iteration >> m.loss_d >> m.loss_g >> m.value_v >> m.d_real_mean >> m.d_fake_mean >>
        m.real_pixel_mean >> m.fake_pixel_mean;
    if (!row) throw GanError("malformed metrics row: " + line);
    out.push_back(m);
  }
  return out;
}

fs::path checkpoint_path(const fs::path& model_dir, std::uint64_t iteration) {
  char name[64];
  std::snprintf(name, sizeof name, "iter_%08llu.nfck", static_cast<unsigned long long>(iteration));
  return model_dir / "checkpoints" / name;
}

void write_model_description(const fs::path& model_dir, const TrainConfig& c) {
  const auto& g = c.generator;
  const auto& d = c.discriminator;
  json j = {
      {"class_mode", dataset::to_string(c.class_mode)},
      {"generator",
       {{"z_dim", g.z_dim},
        {"base_size", g.base_size},
        {"channels", g.channels},
        {"kernel", g.kernel},
        {"stride", g.stride},
        {"padding", g.padding},
        {"output_size", g.output_size}}},
      {"discriminator",
       {{"input_size", d.input_size},
        {"channels", d.channels},
        {"kernel", d.kernel},
        {"stride", d.stride},
        {"padding", d.padding},
        {"leaky_slope", d.leaky_slope},
        {"head_input", d.head_input}}},
      {"training",
       {{"batch_size", c.batch_size},
        {"lr_d", c.lr_d},
        {"lr_g", c.lr_g},
        {"max_iterations", c.resolved_max_iterations()},
        {"seed", c.seed},
        {"checkpoint_every", c.checkpoint_every},
        {"log_every", c.log_every}}},
  };
  fs::create_directories(model_dir);
  std::ofstream out(model_dir / "model.json", std::ios::trunc);
  out << j.dump(2) << '\n';
  if (!out) throw GanError("cannot write " + (model_dir / "model.json").string());
}

ModelDescription read_model_description(const fs::path& model_dir) {
  std::ifstream in(model_dir / "model.json");
  if (!in) throw GanError("cannot open " + (model_dir / "model.json").string());
  try {
    const json j = json::parse(in);
    ModelDescription m;
    m.class_mode = dataset::parse_class_mode(j.at("class_mode").get<std::string>());
    const auto& g = j.at("generator");
    g.at("z_dim").get_to(m.generator.z_dim);
    g.at("base_size").get_to(m.generator.base_size);
    g.at("channels").get_to(m.generator.channels);
    g.at("kernel").get_to(m.generator.kernel);
    g.at("stride").get_to(m.generator.stride);
    g.at("padding").get_to(m.generator.padding);
    g.at("output_size").get_to(m.generator.output_size);
    const auto& d = j.at("discriminator");
    d.at("input_size").get_to(m.discriminator.input_size);
    d.at("channels").get_to(m.discriminator.channels);
    d.at("kernel").get_to(m.discriminator.kernel);
    d.at("stride").get_to(m.discriminator.stride);
    d.at("padding").get_to(m.discriminator.padding);
    d.at("leaky_slope").get_to(m.discriminator.leaky_slope);
    d.at("head_input").get_to(m.discriminator.head_input);
    return m;
  } catch (const json::exception& e) {
    throw GanError("malformed " + (model_dir / "model.json").string() + ": " + e.what());
  }
}

namespace {

std::vector<nn::NamedParameter> checkpoint_contents(const Generator& g, const Discriminator& d) {
  auto all = g.state();
  for (auto& p : d.state()) all.push_back(std::move(p));
  return all;
}

void zero_grads(const std::vector<nn::NamedParameter>& params) {
  for (const auto& p : params) p.tensor->zero_grad();
}

double tensor_mean(const nn::Tensor& t) {
  double s = 0.0;
  for (double v : t.data()) s += v;
  return s / static_cast<double>(t.numel());
}

// Cycles through the pool in seeded shuffled order, reshuffling on wrap.
class MinibatchSource {
 public:
  MinibatchSource(std::vector<const ImagePatch*> pool, std::mt19937_64& rng)
      : pool_(std::move(pool)), order_(pool_.size()), rng_(rng) {
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    cursor_ = order_.size();
  }

  nn::TensorPtr next(std::size_t batch) {
    constexpr std::size_t kPixels = ImagePatch::kSide * ImagePatch::kSide;
    auto x = nn::make_tensor({batch, 1, ImagePatch::kSide, ImagePatch::kSide});
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
      }
      const auto& px = pool_[order_[cursor_++]]->pixels();
      std::copy(px.begin(), px.end(), x->data().begin() + static_cast<std::ptrdiff_t>(b * kPixels));
    }
    return x;
  }

 private:
  std::vector<const ImagePatch*> pool_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
  std::mt19937_64& rng_;
};

nn::TensorPtr draw_latent(std::size_t batch, std::size_t z_dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  auto z = nn::make_tensor({batch, z_dim});
  for (double& v : z->data()) v = normal(rng);
  return z;
}

}  // namespace

TrainResult train(std::span<const ImagePatch> patches, const TrainConfig& config, const fs::path& model_dir,
                  const MetricsCallback& on_log) {
  config.validate();
  const auto wanted = dataset::class_of(config.class_mode);
  std::vector<const ImagePatch*> pool;
  std::size_t benign = 0, malignant = 0;
  for (const auto& p : patches) {
    if (p.label()) (*p.label() == dataset::NoduleClass::kBenign ? benign : malignant)++;
    if (!wanted || p.label() == wanted) pool.push_back(&p);
  }
  if (pool.empty()) {
    throw GanError("train: no patches for class mode '" + std::string(dataset::to_string(config.class_mode)) +
                   "' (dataset has " + std::to_string(benign) + " benign, " + std::to_string(malignant) +
                   " malignant, " + std::to_string(patches.size() - benign - malignant) + " unlabeled)");
  }

  std::mt19937_64 rng(config.seed);
  Generator g(config.generator);
  Discriminator d(config.discriminator);
  g.init(rng);
  d.init(rng);
  const auto g_params = g.parameters();
  const auto d_params = d.parameters();
  const auto saved = checkpoint_contents(g, d);
  nn::AdamState g_opt(nn::AdamOptions{config.lr_g});
  nn::AdamState d_opt(nn::AdamOptions{config.lr_d});

  fs::create_directories(model_dir / "checkpoints");
  write_model_description(model_dir, config);
  std::ofstream log(model_dir / "metrics.tsv", std::ios::trunc);
  if (!log) throw GanError("cannot write " + (model_dir / "metrics.tsv").string());
  log << metrics_header() << '\n' << std::flush;

  TrainResult result;
  fs::path last_checkpoint = checkpoint_path(model_dir, 0);
  nn::write_checkpoint(last_checkpoint, saved);
  result.checkpoints.push_back(last_checkpoint);

  MinibatchSource source(std::move(pool), rng);
  const std::uint64_t total = config.resolved_max_iterations();
  const std::size_t batch = config.batch_size;
  const auto abort = [&](std::uint64_t it, const std::string& why) {
    throw TrainingAborted(it, last_checkpoint, why);
  };

  for (std::uint64_t it = 1; it <= total; ++it) {
    TrainingMetrics m;
    m.iteration = it;

    // Discriminator step: real minibatch against a detached fake minibatch.
    {
      nn::Tape tape;
      auto real = source.next(batch);
      auto z = draw_latent(batch, config.generator.z_dim, rng);
      nn::TensorPtr fake;
      {
        nn::NoRecordGuard detach(tape);
        fake = g.forward(tape, z, true);
      }
      auto d_real = d.forward(tape, real);
      auto d_fake = d.forward(tape, fake);
      auto loss = discriminator_loss(tape, d_real, d_fake);
      m.loss_d = (*loss)[0];
      m.value_v = value_function_estimate(*d_real, *d_fake);
      m.d_real_mean = tensor_mean(*d_real);
      m.d_fake_mean = tensor_mean(*d_fake);
      m.real_pixel_mean = tensor_mean(*real);
      m.fake_pixel_mean = tensor_mean(*fake);
      if (!std::isfinite(m.loss_d)) abort(it, "discriminator loss is not finite");
      zero_grads(d_params);
      tape.backward(*loss);
      try {
        nn::adam_step(d_params, d_opt);
      } catch (const nn::NnError& e) {
        abort(it, e.what());
      }
      ++result.d_steps;
    }

    // Generator step with a fresh latent batch; D gradients are discarded.
    {
      nn::Tape tape;
      auto z = draw_latent(batch, config.generator.z_dim, rng);
      auto fake = g.forward(tape, z, true);
      auto loss = generator_loss(tape, d.forward(tape, fake));
      m.loss_g = (*loss)[0];
      if (!std::isfinite(m.loss_g)) abort(it, "generator loss is not finite");
      zero_grads(g_params);
      tape.backward(*loss);
      try {
        nn::adam_step(g_params, g_opt);
      } catch (const nn::NnError& e) {
        abort(it, e.what());
      }
      zero_grads(d_params);
      ++result.g_steps;
    }

    result.iterations = it;
    if (it % config.log_every == 0 || it == total) {
      log << format_metrics(m) << '\n' << std::flush;
      result.metrics.push_back(m);
      if (on_log) on_log(m);
    }
    if (it % config.checkpoint_every == 0 || it == total) {
      last_checkpoint = checkpoint_path(model_dir, it);
      nn::write_checkpoint(last_checkpoint, saved);
      result.checkpoints.push_back(last_checkpoint);
    }
  }
  return result;
}

}  // namespace nodulegan::gan
