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

#include <functional>
#include <vector>

#include "nodulegan/nn/tensor.hpp"

namespace nodulegan::nn {

/// Records the backward closures of forward ops in execution order.
///
/// Ops only record when recording is enabled and at least one input requires
/// a gradient. `backward` seeds the scalar output with 1, replays the closures
/// in reverse and clears the tape. There is no support for differentiating
/// the backward pass itself.
class Tape {
 public:
  using BackwardFn = std::function<void()>;

  void record(BackwardFn fn);
  void backward(Tensor& output_scalar);
  void reset() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

 private:
  std::vector<BackwardFn> entries_;
  bool recording_ = true;
};

/// Disables recording for the lifetime of the guard.
class NoRecordGuard {
 public:
  explicit NoRecordGuard(Tape& tape) : tape_(tape), previous_(tape.recording()) {
    tape_.set_recording(false);
  }
  ~NoRecordGuard() { tape_.set_recording(previous_); }
  NoRecordGuard(const NoRecordGuard&) = delete;
  NoRecordGuard& operator=(const NoRecordGuard&) = delete;

 private:
  Tape& tape_;
  bool previous_;
};

}  // namespace nodulegan::nn
