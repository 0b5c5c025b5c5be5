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

#include "vidaudit/video.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <regex>
#include <tuple>

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "vidaudit/status_macros.h"

namespace vidaudit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Reads the next header integer, skipping whitespace and '#' comments.
bool ReadHeaderInt(const std::string& data, size_t& pos, int& value) {
  for (;;) {
    while (pos < data.size() &&
           std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    }
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  if (pos >= data.size() ||
      !std::isdigit(static_cast<unsigned char>(data[pos]))) {
    return false;
  }
  long v = 0;
  while (pos < data.size() &&
         std::isdigit(static_cast<unsigned char>(data[pos]))) {
    v = v * 10 + (data[pos] - '0');
    if (v > std::numeric_limits<int>::max()) return false;
    ++pos;
  }
  value = static_cast<int>(v);
  return true;
}

absl::StatusOr<json> ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), " is not valid JSON"));
  }
  return j;
}

absl::StatusOr<double> ReadFps(const fs::path& dir) {
  ASSIGN_OR_RETURN(json meta, ReadJsonFile(dir / "meta.json"));
  if (!meta.is_object() || !meta.contains("fps") ||
      !meta["fps"].is_number()) {
    return absl::InvalidArgumentError(
        absl::StrCat((dir / "meta.json").string(), " has no numeric fps"));
  }
  double fps = meta["fps"].get<double>();
  if (!std::isfinite(fps) || fps <= 0.0) {
    return absl::InvalidArgumentError(
        absl::StrCat("fps must be positive, got ", fps));
  }
  return fps;
}

absl::StatusOr<std::vector<fs::path>> ListFrameFiles(const fs::path& dir) {
  static const std::regex kFrameName(R"(^frame_.*\.(pgm|ppm)$)");
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    return absl::NotFoundError(
        absl::StrCat("frame directory ", dir.string(), " does not exist"));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (std::regex_match(entry.path().filename().string(), kFrameName)) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string();
            });
  if (files.size() < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat(dir.string(), " holds ", files.size(),
                     " frames; at least 2 are required"));
  }
  return files;
}

int64_t BlockSad(const GrayImage& a, int ax, int ay, const GrayImage& b,
                 int bx, int by, int size, int64_t bound) {
  int64_t sad = 0;
  for (int y = 0; y < size; ++y) {
    const uint8_t* pa = &a.pixels[static_cast<size_t>(ay + y) * a.width + ax];
    const uint8_t* pb = &b.pixels[static_cast<size_t>(by + y) * b.width + bx];
    for (int x = 0; x < size; ++x) {
      sad += std::abs(static_cast<int>(pa[x]) - static_cast<int>(pb[x]));
    }
    // Rows only add; once past the best so far this candidate cannot win.
    if (sad > bound) return sad;
  }
  return sad;
}

}  // namespace

uint8_t LumaFromRgb(uint8_t r, uint8_t g, uint8_t b) {
  const int weighted = 299 * r + 587 * g + 114 * b;
  return static_cast<uint8_t>((weighted + 500) / 1000);
}

absl::StatusOr<GrayImage> ReadNetpbm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    return absl::NotFoundError(absl::StrCat("cannot open ", path.string()));
  }
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6')) {
    return absl::InvalidArgumentError(absl::StrCat(
        path.string(), ": unsupported format (binary P5/P6 expected)"));
  }
  const bool color = data[1] == '6';
  size_t pos = 2;
  int w = 0, h = 0, maxval = 0;
  if (!ReadHeaderInt(data, pos, w) || !ReadHeaderInt(data, pos, h) ||
      !ReadHeaderInt(data, pos, maxval)) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": malformed header"));
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    return absl::InvalidArgumentError(absl::StrCat(
        path.string(), ": unsupported dimensions or maxval ", maxval));
  }
  ++pos;  // single whitespace byte after maxval
  const size_t channels = color ? 3 : 1;
  const size_t need = static_cast<size_t>(w) * h * channels;
  if (data.size() < pos + need) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": truncated pixel data"));
  }
  GrayImage img(w, h);
  const auto* px = reinterpret_cast<const uint8_t*>(data.data() + pos);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] =
        color ? LumaFromRgb(px[3 * i], px[3 * i + 1], px[3 * i + 2]) : px[i];
  }
  return img;
}

absl::Status WritePgm(const fs::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    return absl::PermissionDeniedError(
        absl::StrCat("cannot write ", path.string()));
  }
  out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
  if (!out) return absl::DataLossError("short write to " + path.string());
  return absl::OkStatus();
}

absl::StatusOr<FrameSequence> LoadFrames(const fs::path& dir) {
  ASSIGN_OR_RETURN(std::vector<fs::path> files, ListFrameFiles(dir));
  FrameSequence seq;
  seq.source = dir.string();
  ASSIGN_OR_RETURN(seq.fps, ReadFps(dir));
  seq.frames.reserve(files.size());
  for (const fs::path& f : files) {
    ASSIGN_OR_RETURN(GrayImage img, ReadNetpbm(f));
    if (!seq.frames.empty() && (img.width != seq.frames[0].width ||
                                img.height != seq.frames[0].height)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "frame ", f.filename().string(), " is ", img.width, "x", img.height,
          " but ", files[0].filename().string(), " is ", seq.frames[0].width,
          "x", seq.frames[0].height));
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

double FlowField::MeanMagnitude() const {
  if (blocks.empty()) return 0.0;
  double sum = 0.0;
  for (const BlockMotion& b : blocks) sum += std::hypot(b.dx, b.dy);
  return sum / static_cast<double>(blocks.size());
}

absl::StatusOr<FlowField> EstimateFlow(const GrayImage& prev,
                                       const GrayImage& next, int block_size,
                                       int search_radius,
                                       int frame_pair_index) {
  if (prev.width != next.width || prev.height != next.height) {
    return absl::InvalidArgumentError("flow frames differ in size");
  }
  if (block_size < 4 || search_radius < 1) {
    return absl::InvalidArgumentError(
        "block_size must be >= 4 and search_radius >= 1");
  }
  FlowField field;
  field.block_size = block_size;
  field.search_radius = search_radius;
  field.frame_pair_index = frame_pair_index;
  const int r = search_radius;
  for (int y = 0; y + block_size <= prev.height; y += block_size) {
    if (y - r < 0 || y + block_size + r > prev.height) continue;
    for (int x = 0; x + block_size <= prev.width; x += block_size) {
      if (x - r < 0 || x + block_size + r > prev.width) continue;
      // (sad, |d|^2, dy, dx): lexicographic minimum implements the tie rule.
      std::tuple<int64_t, int, int, int> best{
          std::numeric_limits<int64_t>::max(), 0, 0, 0};
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int64_t sad = BlockSad(prev, x, y, next, x + dx, y + dy,
                                       block_size, std::get<0>(best));
          std::tuple<int64_t, int, int, int> cand{sad, dx * dx + dy * dy, dy,
                                                  dx};
          if (cand < best) best = cand;
        }
      }
      field.blocks.push_back(
          BlockMotion{x, y, std::get<3>(best), std::get<2>(best)});
    }
  }
  if (field.blocks.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "frame ", prev.width, "x", prev.height,
        " is too small for one ", block_size, "px block with a ", r,
        "px search window"));
  }
  return field;
}

absl::Status ValidateFlowParams(const FlowParams& params) {
  if (params.block_size < 4) {
    return absl::InvalidArgumentError("flow block_size must be >= 4");
  }
  if (params.search_radius < 1) {
    return absl::InvalidArgumentError("flow search_radius must be >= 1");
  }
  if (params.max_dim < params.block_size + 2 * params.search_radius) {
    return absl::InvalidArgumentError(
        "flow max_dim must fit one block plus its search window");
  }
  return absl::OkStatus();
}

GrayImage DownscaleNearest(const GrayImage& img, int factor) {
  if (factor <= 1) return img;
  GrayImage out(img.width / factor, img.height / factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      out.at(x, y) = img.at(x * factor, y * factor);
    }
  }
  return out;
}

int DownscaleFactor(int width, int height, int max_dim) {
  const int longest = std::max(width, height);
  if (max_dim <= 0 || longest <= max_dim) return 1;
  return (longest + max_dim - 1) / max_dim;
}

absl::StatusOr<double> MeanFlowMagnitude(const FrameSequence& seq,
                                         const FlowParams& params) {
  RETURN_IF_ERROR(ValidateFlowParams(params));
  if (seq.frames.size() < 2) {
    return absl::InvalidArgumentError("flow needs at least two frames");
  }
  const int factor = DownscaleFactor(seq.frames[0].width,
                                     seq.frames[0].height, params.max_dim);
  GrayImage prev = DownscaleNearest(seq.frames[0], factor);
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 1; i < seq.frames.size(); ++i) {
    GrayImage next = DownscaleNearest(seq.frames[i], factor);
    ASSIGN_OR_RETURN(FlowField field,
                     EstimateFlow(prev, next, params.block_size,
                                  params.search_radius, static_cast<int>(i - 1)));
    for (const BlockMotion& b : field.blocks) sum += std::hypot(b.dx, b.dy);
    count += field.blocks.size();
    prev = std::move(next);
  }
  return factor * (sum / static_cast<double>(count));
}

double DurationSeconds(const FrameSequence& seq) {
  return static_cast<double>(seq.frames.size()) / seq.fps;
}

absl::StatusOr<DifficultyDescriptors> LoadPrecomputedDescriptors(
    const fs::path& path) {
  ASSIGN_OR_RETURN(json j, ReadJsonFile(path));
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": expected a JSON object"));
  }
  DifficultyDescriptors desc;
  for (const char* field : {"mean_flow_magnitude", "duration_seconds"}) {
    if (!j.contains(field) || !j[field].is_number()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path.string(), ": missing numeric ", field));
    }
  }
  desc.mean_flow_magnitude = j["mean_flow_magnitude"].get<double>();
  desc.duration_seconds = j["duration_seconds"].get<double>();
  absl::Status valid = ValidateDescriptors(desc);
  if (!valid.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat(path.string(), ": ", valid.message()));
  }
  return desc;
}

absl::StatusOr<DifficultyDescriptors> ComputeDescriptors(
    const VideoRef& video, const FlowParams& params) {
  if (video.kind == VideoRef::Kind::kDescriptorFile) {
    return LoadPrecomputedDescriptors(video.path);
  }
  ASSIGN_OR_RETURN(FrameSequence seq, LoadFrames(video.path));
  DifficultyDescriptors desc;
  ASSIGN_OR_RETURN(desc.mean_flow_magnitude, MeanFlowMagnitude(seq, params));
  desc.duration_seconds = DurationSeconds(seq);
  return desc;
}

absl::StatusOr<double> ResolveDurationSeconds(const VideoRef& video) {
  if (video.kind == VideoRef::Kind::kDescriptorFile) {
    ASSIGN_OR_RETURN(DifficultyDescriptors desc,
                     LoadPrecomputedDescriptors(video.path));
    return desc.duration_seconds;
  }
  ASSIGN_OR_RETURN(std::vector<fs::path> files, ListFrameFiles(video.path));
  ASSIGN_OR_RETURN(double fps, ReadFps(video.path));
  return static_cast<double>(files.size()) / fps;
}

}  // namespace vidaudit
