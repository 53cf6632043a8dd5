// Generates the synthetic datasets used for training, demos and tests.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "ocular/corpus.hpp"

using namespace ocular;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic dataset generator"};
  app.require_subcommand(1);
  std::string out;
  std::uint64_t seed = 1;
  synth::FaceCorpusSpec faces;
  synth::StreamSpec stream;
  int clip_frames = 420, set_count = 20, breadth = 120;
  double clip_fps = 420.0;

  app.option_defaults()->always_capture_default();
  auto* f = app.add_subcommand("faces", "scenes with one face proxy each, plus face-free scenes");
  f->add_option("--count", faces.count);
  f->add_option("--width", faces.width);
  f->add_option("--height", faces.height);
  f->add_option("--face-min", faces.face_min);
  f->add_option("--face-max", faces.face_max);
  f->add_option("--empty", faces.empty, "fraction of face-free scenes");
  auto* s = app.add_subcommand("stream", "fixed-camera stream with blinks for PERCLOS");
  s->add_option("--frames", stream.frames);
  s->add_option("--closed", stream.closed, "total closed-eye frames");
  s->add_option("--fps", stream.fps);
  s->add_option("--width", stream.width);
  s->add_option("--height", stream.height);
  s->add_option("--face", stream.face, "face side in pixels");
  auto* c = app.add_subcommand("saccade", "high-rate eye clip with two saccades and a matching EOG file");
  c->add_option("--frames", clip_frames);
  c->add_option("--fps", clip_fps);
  auto* g = app.add_subcommand("spectacles", "face crops, every other one with spectacles");
  g->add_option("--count", set_count);
  g->add_option("--breadth", breadth);
  for (auto* sub : {f, s, c, g}) {
    sub->add_option("--out", out)->required();
    sub->add_option("--seed", seed);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    if (f->parsed()) synth::write_face_corpus(out, faces, seed);
    if (s->parsed()) synth::write_blink_stream(out, stream, seed);
    if (c->parsed()) synth::write_saccade_clip(out, clip_frames, clip_fps, seed);
    if (g->parsed()) synth::write_spectacle_set(out, set_count, breadth, seed);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
