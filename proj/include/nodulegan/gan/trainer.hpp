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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nodulegan/dataset/image_patch.hpp"
#include "nodulegan/gan/networks.hpp"

namespace nodulegan::gan {

struct TrainConfig {
  std::size_t batch_size = 64;
  double lr_d = 1e-4;
  double lr_g = 2e-4;
  /// Falls back to the class-mode preset when unset.
  std::optional<std::uint64_t> max_iterations;
  dataset::ClassMode class_mode = dataset::ClassMode::kMixed;
  std::uint64_t seed = 0;
  std::uint64_t checkpoint_every = 1000;
  std::uint64_t log_every = 100;
  GeneratorConfig generator{};
  DiscriminatorConfig discriminator{};

  std::uint64_t resolved_max_iterations() const;
  void validate() const;
};

/// Iteration ceilings: benign 114000, malignant 110000, mixed 99000.
std::uint64_t preset_iterations(dataset::ClassMode mode);

/// One logged iteration. Losses and D outputs come from that iteration's
/// minibatches; the pixel means are over the real and generated minibatches
/// of the discriminator step.
struct TrainingMetrics {
  std::uint64_t iteration = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double value_v = 0.0;
  double d_real_mean = 0.0;
  double d_fake_mean = 0.0;
  double real_pixel_mean = 0.0;
  double fake_pixel_mean = 0.0;
};

/// Thrown when a loss turns non-finite. The last checkpoint written before
/// the failing iteration stays on disk.
class TrainingAborted : public GanError {
 public:
  TrainingAborted(std::uint64_t iteration, std::filesystem::path last_checkpoint, const std::string& why);
  std::uint64_t iteration() const { return iteration_; }
  const std::filesystem::path& last_checkpoint() const { return last_checkpoint_; }

 private:
  std::uint64_t iteration_;
  std::filesystem::path last_checkpoint_;
};

struct TrainResult {
  std::uint64_t iterations = 0;
  std::uint64_t d_steps = 0;
  std::uint64_t g_steps = 0;
  std::vector<TrainingMetrics> metrics;
  std::vector<std::filesystem::path> checkpoints;
};

using MetricsCallback = std::function<void(const TrainingMetrics&)>;

/// Model directory layout:
///   model.json                 class mode, network configs, training config
///   metrics.tsv                header line, then one tab-separated row per log
///   checkpoints/iter_NNNNNNNN.nfck
///
/// Patches are filtered by the configured class mode first. The initial
/// networks are checkpointed as iteration 0; later checkpoints are written
/// every `checkpoint_every` iterations and after the last one.
TrainResult train(std::span<const dataset::ImagePatch> patches, const TrainConfig& config,
                  const std::filesystem::path& model_dir, const MetricsCallback& on_log = {});

std::string metrics_header();
std::string format_metrics(const TrainingMetrics& m);
std::vector<TrainingMetrics> read_metrics_log(const std::filesystem::path& path);

/// Contents of model.json needed to rebuild the networks.
struct ModelDescription {
  dataset::ClassMode class_mode = dataset::ClassMode::kMixed;
  GeneratorConfig generator{};
  DiscriminatorConfig discriminator{};
};

void write_model_description(const std::filesystem::path& model_dir, const TrainConfig& config);
ModelDescription read_model_description(const std::filesystem::path& model_dir);

std::filesystem::path checkpoint_path(const std::filesystem::path& model_dir, std::uint64_t iteration);

}  // namespace nodulegan::gan
