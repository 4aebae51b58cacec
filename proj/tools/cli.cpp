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

#include "cli.hpp"

#include <pthread.h>
#include <signal.h>

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodulegan/dataset/consensus.hpp"
#include "nodulegan/dataset/manifest.hpp"
#include "nodulegan/dataset/pool.hpp"
#include "nodulegan/gan/composed_gradcheck.hpp"
#include "nodulegan/gan/sampler.hpp"
#include "nodulegan/gan/trainer.hpp"
#include "nodulegan/imgproc/diffusion.hpp"
#include "nodulegan/imgproc/image_io.hpp"
#include "nodulegan/nn/gradcheck.hpp"
#include "nodulegan/service/server.hpp"
#include "nodulegan/service/study_store.hpp"
#include "nodulegan/study/compose.hpp"

namespace nodulegan::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Bad input caught before any work starts; exits 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::uint64_t seed = 0;

  // prepare / diffuse
  fs::path manifest, out, in;
  std::size_t diffusion_iters = 5;
  double kappa = 30.0;
  double lambda = 0.25;
  std::string conductance = "exponential";

  // train
  fs::path pool;
  std::string class_mode = "mixed";
  std::uint64_t iters = 0;
  std::size_t batch = 64;
  double lr_d = 1e-4;
  double lr_g = 2e-4;
  std::uint64_t checkpoint_every = 1000;
  std::uint64_t log_every = 100;

  // sample
  fs::path model, checkpoint;
  std::size_t count = 36;

  // compose-study
  fs::path real, benign, malignant, mixed, curation;

  // serve / score
  fs::path store;
  std::string study_id;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string owner_token;
  fs::path ui;
  bool force = false;
};

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

void require_dir(const fs::path& p, const char* flag) {
  if (!fs::is_directory(p)) throw UsageError(std::string(flag) + ": no such directory " + p.string());
}

void require_file(const fs::path& p, const char* flag) {
  if (!fs::is_regular_file(p)) throw UsageError(std::string(flag) + ": no such file " + p.string());
}

dataset::ClassMode class_mode_of(const std::string& text) {
  try {
    return dataset::parse_class_mode(text);
  } catch (const std::exception& e) {
    throw UsageError(std::string("--class: ") + e.what());
  }
}

imgproc::DiffusionConfig diffusion_of(const Options& o) {
  imgproc::DiffusionConfig cfg;
  cfg.iterations = o.diffusion_iters;
  cfg.kappa = o.kappa;
  cfg.lambda = o.lambda;
  cfg.conductance = o.conductance == "rational" ? imgproc::Conductance::kRational : imgproc::Conductance::kExponential;
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw UsageError(std::string("diffusion: ") + e.what());
  }
  return cfg;
}

json diffusion_json(const Options& o) {
  return {{"diffusion_iters", o.diffusion_iters}, {"kappa", o.kappa}, {"lambda", o.lambda},
          {"conductance", o.conductance}};
}

std::string random_token() {
  std::random_device rd;
  std::ostringstream ss;
  for (int i = 0; i < 4; ++i) ss << std::hex << rd();
  return ss.str();
}

void print_config(std::ostream& out, const std::string& command, json config, const Options& o) {
  config["command"] = command;
  config["seed"] = o.seed;
  out << "config " << config.dump() << std::endl;
}

int cmd_prepare(const Options& o, std::ostream& out, std::ostream& err) {
  require_file(o.manifest, "--manifest");
  dataset::LoaderOptions loader;
  if (o.diffusion_iters > 0) loader.diffusion = diffusion_of(o);
  json cfg = diffusion_json(o);
  cfg["manifest"] = o.manifest.string();
  cfg["out"] = o.out.string();
  print_config(out, "prepare", cfg, o);

  const auto parsed = dataset::parse_annotations(o.manifest);
  for (const auto& e : parsed.errors) {
    err << "warning: " << o.manifest.string() << ":" << e.line << ": " << e.field << ": " << one_line(e.message) << "\n";
  }
  if (parsed.annotations.empty()) throw std::runtime_error("manifest " + o.manifest.string() + " has no usable rows");
  const auto result = dataset::consensus_filter(parsed.annotations, dataset::file_patch_loader(loader));
  dataset::write_pool(o.out, result);
  std::size_t benign = 0;
  for (const auto& n : result.kept) benign += n.label == dataset::NoduleClass::kBenign;
  out << "kept " << result.kept.size() << " (" << benign << " benign, " << result.kept.size() - benign
      << " malignant), excluded " << result.excluded.size() << ", skipped rows " << parsed.errors.size() << "\n";
  return 0;
}

int cmd_train(const Options& o, bool iters_given, std::ostream& out) {
  require_dir(o.pool, "--pool");
  gan::TrainConfig config;
  config.batch_size = o.batch;
  config.lr_d = o.lr_d;
  config.lr_g = o.lr_g;
  config.class_mode = class_mode_of(o.class_mode);
  if (iters_given) config.max_iterations = o.iters;
  config.seed = o.seed;
  config.checkpoint_every = o.checkpoint_every;
  config.log_every = o.log_every;
  try {
    config.validate();
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
  print_config(out, "train",
               {{"pool", o.pool.string()}, {"out", o.out.string()}, {"class", o.class_mode},
                {"iters", config.resolved_max_iterations()}, {"iters_from_preset", !iters_given},
                {"batch", o.batch}, {"lr_d", o.lr_d}, {"lr_g", o.lr_g},
                {"checkpoint_every", o.checkpoint_every}, {"log_every", o.log_every}},
               o);

  std::vector<dataset::ImagePatch> patches;
  for (const auto& n : dataset::read_pool(o.pool)) patches.push_back(n.patch);
  out << gan::metrics_header() << "\n";
  const auto result = gan::train(patches, config, o.out, [&out](const gan::TrainingMetrics& m) {
    out << gan::format_metrics(m) << std::endl;
  });
  out << "trained " << result.iterations << " iterations, " << result.checkpoints.size() << " checkpoints in "
      << o.out.string() << "\n";
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out) {
  require_dir(o.model, "--model");
  if (!o.checkpoint.empty()) require_file(o.checkpoint, "--checkpoint");
  if (o.count == 0) throw UsageError("--count must be positive");
  print_config(out, "sample",
               {{"model", o.model.string()}, {"checkpoint", o.checkpoint.string()}, {"count", o.count},
                {"out", o.out.string()}},
               o);
  const auto loaded = gan::load_generator(
      o.model, o.checkpoint.empty() ? std::nullopt : std::optional<fs::path>(o.checkpoint));
  const auto patches = gan::sample(loaded.generator, o.count, o.seed, dataset::class_of(loaded.class_mode));
  dataset::write_patch_set(o.out, patches);
  out << "wrote " << patches.size() << " " << dataset::to_string(loaded.class_mode) << " samples from "
      << loaded.checkpoint.filename().string() << " to " << o.out.string() << "\n";
  return 0;
}

int cmd_diffuse(const Options& o, std::ostream& out) {
  require_file(o.in, "--in");
  const auto cfg = diffusion_of(o);
  json c = diffusion_json(o);
  c["in"] = o.in.string();
  c["out"] = o.out.string();
  print_config(out, "diffuse", c, o);
  const auto filtered = imgproc::perona_malik(imgproc::to_real(imgproc::read_image(o.in)), cfg);
  imgproc::write_image(o.out, imgproc::to_gray8(filtered));
  out << "wrote " << o.out.string() << "\n";
  return 0;
}

int cmd_compose(const Options& o, std::ostream& out) {
  require_dir(o.real, "--real");
  require_dir(o.benign, "--benign");
  require_dir(o.malignant, "--malignant");
  require_dir(o.mixed, "--mixed");
  if (!o.curation.empty()) require_file(o.curation, "--curation");
  if (o.study_id.empty()) throw UsageError("--study is required");
  print_config(out, "compose-study",
               {{"real", o.real.string()}, {"benign", o.benign.string()}, {"malignant", o.malignant.string()},
                {"mixed", o.mixed.string()}, {"curation", o.curation.string()}, {"store", o.store.string()},
                {"study", o.study_id}},
               o);
  study::StudyPools pools;
  for (const auto& n : dataset::read_pool(o.real)) pools.real.push_back(n.patch);
  pools.generated.emplace(dataset::ClassMode::kBenign, dataset::read_patch_set(o.benign));
  pools.generated.emplace(dataset::ClassMode::kMalignant, dataset::read_patch_set(o.malignant));
  pools.generated.emplace(dataset::ClassMode::kMixed, dataset::read_patch_set(o.mixed));
  if (!o.curation.empty()) study::apply_curation(pools, study::read_curation(o.curation));
  const auto composed = study::compose_study(pools, o.seed, o.study_id);
  service::StudyStore::install_study(o.store, composed);
  out << "study " << o.study_id << ": " << composed.plan.experiments.size() << " experiments, "
      << composed.images.size() << " images, " << composed.plan.reused_cells() << " reused cells, stored in "
      << (o.store / "studies" / o.study_id).string() << "\n";
  return 0;
}

int cmd_serve(const Options& o, std::ostream& out) {
  if (o.port < 0 || o.port > 65535) throw UsageError("--port must be in 0..65535");
  if (!o.ui.empty()) require_dir(o.ui, "--ui");
  const std::string token = o.owner_token.empty() ? random_token() : o.owner_token;
  print_config(out, "serve",
               {{"store", o.store.string()}, {"host", o.host}, {"port", o.port}, {"ui", o.ui.string()},
                {"owner_token", token}},
               o);

  // Block the stop signals in every thread; one waiter turns them into a clean stop.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  service::StudyStore store(o.store, token);
  service::ServerOptions options{o.host, o.port, std::nullopt};
  if (!o.ui.empty()) options.static_dir = o.ui;
  service::Server server(store, options);
  const int port = server.bind();
  out << "serving " << store.study_ids().size() << " studies on http://" << o.host << ":" << port << std::endl;

  std::thread waiter([&server, stop_signals] {
    int sig = 0;
    sigwait(&stop_signals, &sig);
    server.stop();
  });
  try {
    server.run();
  } catch (...) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    throw;
  }
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  out << "stopped" << std::endl;
  return 0;
}

int cmd_score(const Options& o, std::ostream& out) {
  require_dir(o.store, "--store");
  if (o.study_id.empty()) throw UsageError("--study is required");
  print_config(out, "score", {{"store", o.store.string()}, {"study", o.study_id}, {"force", o.force}}, o);
  const std::string token = random_token();
  service::StudyStore store(o.store, token);
  out << store.score(o.study_id, token, o.force);
  return 0;
}

int cmd_gradcheck(const Options& o, std::ostream& out) {
  print_config(out, "gradcheck", {{"layer_tolerance", 1e-5}, {"composed_tolerance", 1e-4}}, o);
  auto results = nn::run_layer_gradchecks(o.seed, 1e-5);
  const auto composed = gan::run_composed_gradcheck(o.seed, 1e-4);
  results.insert(results.end(), composed.begin(), composed.end());
  std::size_t failed = 0;
  for (const auto& r : results) {
    char line[256];
    std::snprintf(line, sizeof line, "%-4s %-48s rel_err %.3e tol %.0e", r.passed() ? "ok" : "FAIL", r.name.c_str(),
                  r.relative_error, r.tolerance);
    out << line << "\n";
    failed += !r.passed();
  }
  out << results.size() - failed << "/" << results.size() << " gradient checks passed\n";
  if (failed) throw std::runtime_error(std::to_string(failed) + " gradient checks failed");
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"DC-GAN lung nodule pipeline and visual Turing study service", "nodulegan"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config; keys mirror the flags, per-command keys go under [command]. Flags win");
  app.add_option("--seed", o.seed, "Seed for every random choice")->capture_default_str();

  auto fallthrough = [](CLI::App* sub) { sub->fallthrough(); };

  auto add_diffusion = [&o](CLI::App* sub) {
    sub->add_option("--diffusion-iters", o.diffusion_iters, "Perona-Malik iterations (0 disables)")
        ->capture_default_str();
    sub->add_option("--kappa", o.kappa, "Edge threshold on the 0-255 scale")->capture_default_str();
    sub->add_option("--lambda", o.lambda, "Step size, at most 0.25")->capture_default_str();
    sub->add_option("--conductance", o.conductance, "exponential or rational")
        ->check(CLI::IsMember({"exponential", "rational"}))
        ->capture_default_str();
  };

  auto* prepare = app.add_subcommand("prepare", "Filter an annotation manifest into a labelled training pool");
  prepare->add_option("--manifest", o.manifest, "CSV nodule_id,patch_path,diameter_mm,ratings")->required();
  prepare->add_option("--out", o.out, "Pool directory to write")->required();
  add_diffusion(prepare);

  auto* train = app.add_subcommand("train", "Train a DC-GAN on one class subset of a pool");
  train->add_option("--pool", o.pool, "Pool directory from prepare")->required();
  train->add_option("--out", o.out, "Model directory to write")->required();
  train->add_option("--class", o.class_mode, "benign, malignant or mixed")
      ->check(CLI::IsMember({"benign", "malignant", "mixed"}))
      ->capture_default_str();
  auto* iters_opt =
      train->add_option("--iters", o.iters, "Iterations; defaults to the class preset (benign 114000, "
                                            "malignant 110000, mixed 99000)");
  train->add_option("--batch", o.batch, "Minibatch size")->capture_default_str();
  train->add_option("--lr-d", o.lr_d, "Discriminator Adam learning rate")->capture_default_str();
  train->add_option("--lr-g", o.lr_g, "Generator Adam learning rate")->capture_default_str();
  train->add_option("--checkpoint-every", o.checkpoint_every, "Checkpoint interval")->capture_default_str();
  train->add_option("--log-every", o.log_every, "Metrics row interval")->capture_default_str();
  train->footer(
      "Presets: batch 64, lr-d 1e-4, lr-g 2e-4, beta1 0.5. Iteration ceilings: benign 114000, "
      "malignant 110000, mixed 99000.");

  auto* sample = app.add_subcommand("sample", "Draw generated patches from a trained model");
  sample->add_option("--model", o.model, "Model directory from train")->required();
  sample->add_option("--checkpoint", o.checkpoint, "Checkpoint file (default: latest)");
  sample->add_option("--count", o.count, "Number of patches")->capture_default_str();
  sample->add_option("--out", o.out, "Patch set directory to write")->required();

  auto* diffuse = app.add_subcommand("diffuse", "Apply Perona-Malik diffusion to one image");
  diffuse->add_option("--in", o.in, "PNG or PGM input")->required();
  diffuse->add_option("--out", o.out, "PNG or PGM output")->required();
  add_diffusion(diffuse);

  auto* compose = app.add_subcommand("compose-study", "Compose the 18-experiment study into a store");
  compose->add_option("--real", o.real, "Real pool directory from prepare")->required();
  compose->add_option("--benign", o.benign, "Samples of the benign model")->required();
  compose->add_option("--malignant", o.malignant, "Samples of the malignant model")->required();
  compose->add_option("--mixed", o.mixed, "Samples of the mixed model")->required();
  compose->add_option("--curation", o.curation, "CSV pool,source_id of generated patches to keep");
  compose->add_option("--store", o.store, "Study store root")->required();
  compose->add_option("--study", o.study_id, "New study id")->required();

  auto* serve = app.add_subcommand("serve", "Run the rating service until SIGINT or SIGTERM");
  serve->add_option("--store", o.store, "Study store root")->required();
  serve->add_option("--host", o.host, "Listen address")->capture_default_str();
  serve->add_option("--port", o.port, "Listen port, 0 picks one")->capture_default_str();
  serve->add_option("--owner-token", o.owner_token, "Token for POST /studies/{id}/score (default: random)");
  serve->add_option("--ui", o.ui, "Built rater UI to serve at /");

  auto* score = app.add_subcommand("score", "Score a study from its event log");
  score->add_option("--store", o.store, "Study store root")->capture_default_str()->required();
  score->add_option("--study", o.study_id, "Study id")->required();
  score->add_flag("--force", o.force, "Lock open sessions and score their completed grids");

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of every layer and of D(G(z))");

  for (auto* sub : {prepare, train, sample, diffuse, compose, serve, score, gradcheck}) fallthrough(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    if (chosen == prepare) return cmd_prepare(o, out, err);
    if (chosen == train) return cmd_train(o, iters_opt->count() > 0, out);
    if (chosen == sample) return cmd_sample(o, out);
    if (chosen == diffuse) return cmd_diffuse(o, out);
    if (chosen == compose) return cmd_compose(o, out);
    if (chosen == serve) return cmd_serve(o, out);
    if (chosen == score) return cmd_score(o, out);
    return cmd_gradcheck(o, out);
  } catch (const UsageError& e) {
    err << "error: " << one_line(e.what()) << "\n" << chosen->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
}

}  // namespace nodulegan::cli
