// Copyright 2026 The vidaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VIDAUDIT_CLASSIFIERS_INTERNAL_H_
#define VIDAUDIT_CLASSIFIERS_INTERNAL_H_

#include <span>

#include "absl/status/status.h"
#include "vidaudit/features.h"

namespace vidaudit::internal {

// Shared precondition of every fit: equal lengths, n >= 2, 0/1 labels with
// both classes, finite features.
absl::Status ValidateTrainingData(std::span<const FeatureRow> x,
                                  std::span<const int> y);

}  // namespace vidaudit::internal

#endif  // VIDAUDIT_CLASSIFIERS_INTERNAL_H_
