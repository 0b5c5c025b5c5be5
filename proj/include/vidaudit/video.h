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

#ifndef VIDAUDIT_VIDEO_H_
#define VIDAUDIT_VIDEO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "vidaudit/features.h"

namespace vidaudit {

// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<size_t>(w) * h, fill) {}

  uint8_t at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * width + x];
  }
  uint8_t& at(int x, int y) {
    return pixels[static_cast<size_t>(y) * width + x];
  }
};

struct FrameSequence {
  std::vector<GrayImage> frames;
  double fps = 0.0;
  std::string source;
};

// round(0.299 R + 0.587 G + 0.114 B), computed in integer arithmetic.
uint8_t LumaFromRgb(uint8_t r, uint8_t g, uint8_t b);

// Binary PGM (P5) or PPM (P6) with maxval <= 255. Color input is converted
// to luma.
absl::StatusOr<GrayImage> ReadNetpbm(const std::filesystem::path& path);
absl::Status WritePgm(const std::filesystem::path& path, const GrayImage& img);

// Loads frame_*.pgm / frame_*.ppm from `dir` in lexicographic order and the
// frame rate from dir/meta.json ({"fps": <positive real>}). Requires at least
// two frames of identical size.
absl::StatusOr<FrameSequence> LoadFrames(const std::filesystem::path& dir);

struct BlockMotion {
  int x = 0;  // top-left corner of the block in the first frame
  int y = 0;
  int dx = 0;
  int dy = 0;
};

struct FlowField {
  int block_size = 0;
  int search_radius = 0;
  int frame_pair_index = 0;
  std::vector<BlockMotion> blocks;

  double MeanMagnitude() const;
};

// Exhaustive block matching. For every block-grid cell whose full search
// window stays inside the frame, finds the integer displacement in
// [-search_radius, search_radius]^2 that minimises the sum of absolute
// differences between the block in `prev` and the displaced block in `next`.
// Ties go to the smaller |d|^2, then to the lexicographically smaller
// (dy, dx). Cells whose window would leave the frame are skipped.
absl::StatusOr<FlowField> EstimateFlow(const GrayImage& prev,
                                       const GrayImage& next, int block_size,
                                       int search_radius,
                                       int frame_pair_index = 0);

struct FlowParams {
  int block_size = 16;
  int search_radius = 7;
  int max_dim = 256;
};

absl::Status ValidateFlowParams(const FlowParams& params);

// Nearest-neighbour subsampling keeping every `factor`-th pixel.
GrayImage DownscaleNearest(const GrayImage& img, int factor);

// Smallest integer factor k with max(width, height) / k <= max_dim.
int DownscaleFactor(int width, int height, int max_dim);

// Mean block displacement magnitude over all blocks of all consecutive frame
// pairs, in original-resolution pixels per frame.
absl::StatusOr<double> MeanFlowMagnitude(const FrameSequence& seq,
                                         const FlowParams& params = {});

// frame_count / fps.
double DurationSeconds(const FrameSequence& seq);

// JSON {"mean_flow_magnitude": x, "duration_seconds": y}.
absl::StatusOr<DifficultyDescriptors> LoadPrecomputedDescriptors(
    const std::filesystem::path& path);

// Resolves a video reference to descriptors, computing flow for frame
// directories.
absl::StatusOr<DifficultyDescriptors> ComputeDescriptors(
    const VideoRef& video, const FlowParams& params = {});

// Duration only; avoids the flow computation when only length matters.
absl::StatusOr<double> ResolveDurationSeconds(const VideoRef& video);

}  // namespace vidaudit

#endif  // VIDAUDIT_VIDEO_H_
