#pragma once

// Frame datasets on disk (PGM frames plus manifest and ground truth), the
// flat key=value run configuration, and CSV formatting helpers.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ocular/eyestate.hpp"
#include "ocular/imgcore.hpp"

namespace ocular::data {

struct Manifest {
  double fps = 30.0;
  int frames = 0;
  std::optional<std::string> truth;  // relative to the dataset directory
};

struct TruthRow {
  int frame = 0;
  std::optional<Rect> face;
  std::optional<Rect> eye;
  eyestate::EyeState state = eyestate::EyeState::unknown;
  std::optional<PointF> iris;
};

std::string frame_name(int index);  // frame_%06d.pgm

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

std::vector<TruthRow> read_truth(const std::filesystem::path& path, int frame_count);
void write_truth(const std::filesystem::path& path, const std::vector<TruthRow>& rows);

class FrameDataset {
 public:
  static FrameDataset open(const std::filesystem::path& dir);

  const Manifest& manifest() const { return manifest_; }
  const std::vector<TruthRow>& truth() const { return truth_; }
  std::optional<TruthRow> truth_for(int frame) const;
  std::filesystem::path frame_path(int index) const;
  GrayImage frame(int index) const;
  int size() const { return manifest_.frames; }

 private:
  std::filesystem::path dir_;
  Manifest manifest_;
  std::vector<TruthRow> truth_;
};

/// Writes frames, manifest and truth in one go.
void write_dataset(const std::filesystem::path& dir, const std::vector<GrayImage>& frames, double fps,
                   const std::vector<TruthRow>& truth);

/// Flat "key = value" lines; '#' starts a comment. Duplicate keys keep the last value.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

/// printf("%.6f")
std::string fixed6(double v);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv(const std::string& line);

}  // namespace ocular::data
