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

#include "nodulegan/nn/tape.hpp"

namespace nodulegan::nn {

void Tape::record(BackwardFn fn) {
  if (recording_) entries_.push_back(std::move(fn));
}

void Tape::backward(Tensor& output_scalar) {
  if (output_scalar.numel() != 1) {
    throw NnError("backward requires a scalar output, got " +
                  shape_to_string(output_scalar.shape()));
  }
  output_scalar.ensure_grad()[0] = 1.0;
  // Move out first so the tape is cleared even if a closure throws.
  std::vector<BackwardFn> entries;
  entries.swap(entries_);
  for (auto it = entries.rbegin(); it != entries.rend(); ++it) (*it)();
}

}  // namespace nodulegan::nn
