#include "ocular/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ocular/dataset.hpp"
#include "ocular/eog.hpp"
#include "ocular/synth.hpp"

namespace ocular::synth {

namespace fs = std::filesystem;

namespace {

data::TruthRow truth_row(int frame, const FaceTruth& t, bool closed) {
  data::TruthRow r;
  r.frame = frame;
  r.face = t.face;
  r.eye = t.left_eye;
  r.state = closed ? eyestate::EyeState::closed : eyestate::EyeState::open;
  if (!closed) r.iris = t.left_iris;
  return r;
}

}  // namespace

void write_face_corpus(const fs::path& out, const FaceCorpusSpec& spec, std::uint64_t seed) {
  const int count = spec.count, w = spec.width, h = spec.height, fmin = spec.face_min, fmax = spec.face_max;
  Rng rng(seed);
  std::vector<GrayImage> frames;
  std::vector<data::TruthRow> truth;
  for (int i = 0; i < count; ++i) {
    if (uniform(rng, 0.0, 1.0) < spec.empty) {
      frames.push_back(background(w, h, rng));
      truth.push_back(data::TruthRow{i, std::nullopt, std::nullopt, eyestate::EyeState::unknown, std::nullopt});
      continue;
    }
    auto style = random_style(rng);
    style.eyes_closed = uniform(rng, 0.0, 1.0) < spec.closed_fraction;
    const int side = fmin + static_cast<int>(rng() % static_cast<std::uint64_t>(fmax - fmin + 1));
    auto scene = face_scene(w, h, side, style, rng);
    frames.push_back(std::move(scene.image));
    truth.push_back(truth_row(i, scene.truth, style.eyes_closed));
  }
  data::write_dataset(out, frames, 30.0, truth);
}

void write_blink_stream(const fs::path& out, const StreamSpec& spec, std::uint64_t seed) {
  const int n = spec.frames, closed = spec.closed, w = spec.width, h = spec.height, side = spec.face;
  const double fps = spec.fps;
  Rng rng(seed);
  // Closed frames come in blinks of 4..12 frames spread over equal slots.
  std::vector<bool> shut(static_cast<std::size_t>(n), false);
  std::vector<int> runs;
  for (int left = closed; left > 0;) {
    const int len = std::min(left, 4 + static_cast<int>(rng() % 9));
    runs.push_back(len);
    left -= len;
  }
  if (!runs.empty()) {
    const int slot = n / static_cast<int>(runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const int room = std::max(1, slot - runs[i]);
      const int start = static_cast<int>(i) * slot + static_cast<int>(rng() % static_cast<std::uint64_t>(room));
      for (int k = 0; k < runs[i] && start + k < n; ++k) shut[static_cast<std::size_t>(start + k)] = true;
    }
  }
  const GrayImage bg = background(w, h, rng);
  auto style = random_style(rng);
  const int x0 = (w - side) / 2, y0 = (h - side) / 2;
  std::vector<GrayImage> frames;
  std::vector<data::TruthRow> truth;
  for (int k = 0; k < n; ++k) {
    GrayImage img = bg;
    style.eyes_closed = shut[static_cast<std::size_t>(k)];
    const int dx = static_cast<int>(std::lround(3.0 * std::sin(k / 90.0)));
    const int dy = static_cast<int>(std::lround(2.0 * std::cos(k / 130.0)));
    const auto t = draw_face(img, Rect{x0 + dx, y0 + dy, side, side}, style, rng);
    add_noise(img, 3.0, rng);
    frames.push_back(std::move(img));
    truth.push_back(truth_row(k, t, style.eyes_closed));
  }
  data::write_dataset(out, frames, fps, truth);
}

void write_saccade_clip(const fs::path& out, int n, double fps, std::uint64_t seed) {
  Rng rng(seed);
  IrisClipStyle style;
  const double cy = style.height / 2.0;
  const double base = 0.35 * style.width, amp = 0.3 * style.width, k = kClipSteepness;
  const double duration = n / fps;
  const auto up = sigmoid_trajectory(static_cast<std::size_t>(n), fps, 0.3 * duration, 1.0, k);
  const auto down = sigmoid_trajectory(static_cast<std::size_t>(n), fps, 0.7 * duration, 1.0, k);
  std::vector<GrayImage> frames;
  std::vector<data::TruthRow> truth;
  for (int i = 0; i < n; ++i) {
    const PointF c{base + amp * (up[static_cast<std::size_t>(i)] - down[static_cast<std::size_t>(i)]), cy};
    frames.push_back(iris_eye(style, c, rng));
    data::TruthRow r;
    r.frame = i;
    r.state = eyestate::EyeState::open;
    r.iris = c;
    truth.push_back(r);
  }
  data::write_dataset(out, frames, fps, truth);

  // EOG recording of the same gaze path at 256 Hz: gain, slow drift, noise.
  eog::Series s;
  s.rate = 256.0;
  const auto m = static_cast<std::size_t>(std::floor(duration * s.rate));
  const auto eu = sigmoid_trajectory(m, s.rate, 0.3 * duration, 1.0, k);
  const auto ed = sigmoid_trajectory(m, s.rate, 0.7 * duration, 1.0, k);
  for (std::size_t i = 0; i < m; ++i)
    s.samples.push_back(250.0 * (eu[i] - ed[i]) + 40.0 + 5.0 * static_cast<double>(i) / s.rate +
                        gaussian(rng, 2.0));
  std::ofstream e(out / "eog.csv");
  eog::write_csv(e, s);
}

void write_spectacle_set(const fs::path& out, int count, int b, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<GrayImage> frames;
  std::ofstream labels((fs::create_directories(out), out / "labels.csv"));
  labels << "frame,glasses\n";
  for (int i = 0; i < count; ++i) {
    const bool glasses = i % 2 == 0;
    frames.push_back(spectacle_face(b, glasses, rng));
    labels << i << ',' << (glasses ? 1 : 0) << '\n';
  }
  data::write_dataset(out, frames, 30.0, {});
}

}  // namespace ocular::synth
