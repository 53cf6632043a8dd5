#pragma once

// Whole synthetic datasets written to disk in the frame-dataset layout.

#include <cstdint>
#include <filesystem>

namespace ocular::synth {

struct FaceCorpusSpec {
  int count = 400;
  int width = 160;
  int height = 120;
  int face_min = 56;
  int face_max = 100;
  double empty = 0.25;          // fraction of face-free scenes
  double closed_fraction = 0.4;
};

/// Scenes with one face proxy each (truth: face, left eye, state, iris) plus
/// face-free scenes.
void write_face_corpus(const std::filesystem::path& out, const FaceCorpusSpec& spec, std::uint64_t seed);

struct StreamSpec {
  int frames = 1800;
  int closed = 360;  // closed-eye frames, laid out as blinks of 4..12 frames
  double fps = 30.0;
  int width = 160;
  int height = 120;
  int face = 80;
};

/// Fixed-camera stream of one slowly drifting face.
void write_blink_stream(const std::filesystem::path& out, const StreamSpec& spec, std::uint64_t seed);

/// Eye clip with two sigmoid saccades (out and back, steepness k = 150/s) and
/// an eog.csv recording of the same gaze path at 256 Hz.
void write_saccade_clip(const std::filesystem::path& out, int frames, double fps, std::uint64_t seed);

inline constexpr double kClipSteepness = 150.0;

/// b x b upper-face crops; even indices wear spectacles. labels.csv lists them.
void write_spectacle_set(const std::filesystem::path& out, int count, int breadth, std::uint64_t seed);

}  // namespace ocular::synth
