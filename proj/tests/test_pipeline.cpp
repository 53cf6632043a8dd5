#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ocular/corpus.hpp"
#include "ocular/dataset.hpp"
#include "ocular/pipeline.hpp"
#include "ocular/synth.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::pipeline;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_rows(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(data::split_csv(line));
  return rows;
}

track::TrackPoint point(int k, double x, bool valid = true) {
  track::TrackPoint p;
  p.frame = k;
  p.valid = valid;
  p.x = track::Vec4(x, 10.0, 0.0, 0.0);
  return p;
}

}  // namespace

TEST(Options, KeysValuesAndFiles) {
  RunConfig c;
  set_option(c, "sf", "1.25");
  set_option(c, "kernel", "linear");
  set_option(c, "kf_q", "1,2,3,4");
  EXPECT_EQ(c.sf, 1.25);
  EXPECT_EQ(c.kernel, "linear");
  EXPECT_EQ(c.kf_q, track::Vec4(1, 2, 3, 4));
  EXPECT_EQ(error_code_of([&] { set_option(c, "no_such_key", "1"); }), ErrorCode::parameter);
  EXPECT_EQ(error_code_of([&] { set_option(c, "sf", "0.5"); }), ErrorCode::parameter);
  EXPECT_EQ(error_code_of([&] { set_option(c, "sf", "fast"); }), ErrorCode::parameter);
  EXPECT_EQ(error_code_of([&] { set_option(c, "kernel", "rbf"); }), ErrorCode::parameter);
  EXPECT_EQ(error_code_of([&] { set_option(c, "seed", "-3"); }), ErrorCode::parameter);

  const fs::path dir = scratch_dir("pipeline_options");
  {
    std::ofstream f(dir / "run.cfg");
    f << "# window in seconds\nwindow_s = 60\n\n  degree=2   # quadratic\nmetric = cityblock\n";
  }
  const RunConfig loaded = load_config(dir / "run.cfg");
  EXPECT_EQ(loaded.window_s, 60.0);
  EXPECT_EQ(loaded.degree, 2);
  EXPECT_EQ(loaded.metric, "cityblock");
  {
    std::ofstream f(dir / "bad.cfg");
    f << "gamma = 0.5\nbogus = 1\n";
  }
  EXPECT_EQ(error_code_of([&] { load_config(dir / "bad.cfg"); }), ErrorCode::parameter);
}

TEST(Dataset, RoundTripAndErrors) {
  const fs::path dir = scratch_dir("pipeline_dataset");
  Rng rng(81);
  std::vector<GrayImage> frames;
  for (int i = 0; i < 4; ++i) frames.push_back(random_image(rng, 24, 16));
  std::vector<data::TruthRow> truth(4);
  for (int i = 0; i < 4; ++i) truth[static_cast<std::size_t>(i)].frame = i;
  truth[1].face = Rect{2, 3, 10, 9};
  truth[1].state = eyestate::EyeState::closed;
  truth[2].iris = PointF{4.5, 6.25};
  data::write_dataset(dir / "ds", frames, 25.0, truth);

  const auto ds = data::FrameDataset::open(dir / "ds");
  EXPECT_EQ(ds.size(), 4);
  EXPECT_EQ(ds.manifest().fps, 25.0);
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(std::ranges::equal(ds.frame(i).pixels(), frames[static_cast<std::size_t>(i)].pixels()));
  ASSERT_TRUE(ds.truth_for(1));
  EXPECT_EQ(ds.truth_for(1)->face->w, 10);
  EXPECT_EQ(ds.truth_for(1)->state, eyestate::EyeState::closed);
  EXPECT_DOUBLE_EQ(ds.truth_for(2)->iris->y, 6.25);
  EXPECT_EQ(error_code_of([&] { ds.frame(4); }), ErrorCode::bounds);

  EXPECT_EQ(error_code_of([&] { data::FrameDataset::open(dir / "missing"); }), ErrorCode::io);
  fs::create_directories(dir / "bad");
  {
    std::ofstream f(dir / "bad" / "manifest.txt");
    f << "fps=30\n";
  }
  EXPECT_EQ(error_code_of([&] { data::FrameDataset::open(dir / "bad"); }), ErrorCode::format);
  {
    std::ofstream f(dir / "ds" / "truth.csv");
    f << "frame,state\n0,open\n";
  }
  EXPECT_EQ(error_code_of([&] { data::FrameDataset::open(dir / "ds"); }), ErrorCode::format);
}

TEST(Roc, HandExampleWithTies) {
  // Scores 0.9(+) 0.8(-) 0.8(+) 0.3(-) 0.1(+); P = 3, N = 2.
  const std::vector<double> s{0.9, 0.8, 0.8, 0.3, 0.1};
  const std::vector<int> l{1, 0, 1, 0, 1};
  const auto pts = roc_curve(s, l);
  ASSERT_EQ(pts.size(), 5u);
  EXPECT_EQ(pts[0].tp, 0u);
  EXPECT_EQ(pts[1].tp, 1u);
  EXPECT_EQ(pts[2].tp, 2u);
  EXPECT_EQ(pts[2].fp, 1u);
  EXPECT_EQ(pts[4].tp, 3u);
  EXPECT_EQ(pts[4].fp, 2u);
  EXPECT_DOUBLE_EQ(pts[2].tpr, 2.0 / 3.0);
  // Trapezoids in count units: (1)(1+2) + (1)(2+2) + 0 = 7 over 2 P N = 12.
  const Auc a = roc_auc(s, l);
  EXPECT_EQ(a.twice_area, 7u);
  EXPECT_EQ(a.denominator, 12u);
  EXPECT_DOUBLE_EQ(a.value, 7.0 / 12.0);

  EXPECT_EQ(error_code_of([] { roc_auc({0.1, 0.2}, {1}); }), ErrorCode::size);
  EXPECT_EQ(error_code_of([] { roc_auc({0.1, 0.2}, {1, 1}); }), ErrorCode::input);
  EXPECT_EQ(error_code_of([] { roc_auc({0.1, 0.2}, {1, 2}); }), ErrorCode::input);
  EXPECT_EQ(error_code_of([] { roc_auc({0.1, std::nan("")}, {1, 0}); }), ErrorCode::input);
}

TEST(Roc, AucIsTheRankStatistic) {
  // Mann-Whitney oracle: pairs ranked correctly, ties counting one half.
  Rng rng(82);
  for (int n = 0; n < 20; ++n) {
    std::vector<double> s;
    std::vector<int> l;
    const int count = rand_int(rng, 2, 60);
    for (int i = 0; i < count; ++i) {
      s.push_back(rand_int(rng, 0, 9));
      l.push_back(i < 2 ? i : rand_int(rng, 0, 1));
    }
    std::uint64_t twice = 0, pairs = 0;
    for (int i = 0; i < count; ++i)
      for (int j = 0; j < count; ++j)
        if (l[static_cast<std::size_t>(i)] == 1 && l[static_cast<std::size_t>(j)] == 0) {
          ++pairs;
          const double a = s[static_cast<std::size_t>(i)], b = s[static_cast<std::size_t>(j)];
          twice += a > b ? 2 : a == b ? 1 : 0;
        }
    const Auc auc = roc_auc(s, l);
    EXPECT_EQ(auc.twice_area * pairs, twice * auc.denominator / 2);
  }
}

TEST(Roc, RunWritesCurveAndArea) {
  const fs::path dir = scratch_dir("pipeline_roc");
  {
    std::ofstream f(dir / "scores.csv");
    f << "score,label\n0.9,1\n0.8,0\n0.8,1\n0.3,0\n0.1,1\n";
  }
  std::ostringstream log;
  run_roc(dir / "scores.csv", dir / "out", log);
  const auto roc = read_rows(dir / "out" / "roc.csv");
  ASSERT_EQ(roc.size(), 6u);
  EXPECT_EQ(roc[0], (std::vector<std::string>{"threshold", "tp", "fp", "tpr", "fpr"}));
  const auto auc = read_rows(dir / "out" / "auc.csv");
  ASSERT_EQ(auc.size(), 2u);
  EXPECT_EQ(auc[0], (std::vector<std::string>{"auc", "twice_area", "denominator"}));
  EXPECT_EQ(auc[1][1], "7");
  EXPECT_EQ(auc[1][2], "12");

  {
    std::ofstream f(dir / "bad.csv");
    f << "label,score\n1,0.5\n";
  }
  EXPECT_EQ(error_code_of([&] { run_roc(dir / "bad.csv", dir / "out2", log); }), ErrorCode::format);
  EXPECT_EQ(error_code_of([&] { run_roc(dir / "absent.csv", dir / "out3", log); }), ErrorCode::io);
}

TEST(SaccadeRows, SegmentsSplitAtGaps) {
  // Two ramps of 10 px over 5 frames in a 100 px eye, separated by an invalid frame.
  std::vector<track::TrackPoint> pts;
  for (int k = 0; k < 40; ++k) {
    double x = 20.0;
    if (k >= 5 && k < 20) x = 20.0 + 2.0 * std::min(k - 5, 5);
    if (k >= 20) x = 30.0 - 2.0 * std::clamp(k - 25, 0, 5);
    pts.push_back(point(k, x, k != 20));
  }
  const auto rows = saccades_from_track(pts, 10.0, 100.0, 30.0, 0.0);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].segment, 0);
  EXPECT_EQ(rows[1].segment, 1);
  EXPECT_EQ(rows[0].record.onset, 5);
  EXPECT_EQ(rows[0].record.offset, 10);
  EXPECT_NEAR(rows[0].record.amplitude, 0.1, 1e-12);
  EXPECT_EQ(rows[1].record.onset, 25);
  EXPECT_NEAR(rows[1].record.amplitude, -0.1, 1e-12);
  EXPECT_NEAR(rows[1].record.peak_velocity, 0.6, 1e-9);

  std::vector<track::TrackPoint> still;
  for (int k = 0; k < 30; ++k) still.push_back(point(k, 50.0));
  EXPECT_TRUE(saccades_from_track(still, 0.0, 100.0, 30.0, 0.0).empty());
  EXPECT_EQ(error_code_of([&] { saccades_from_track(still, 0.0, 0.0, 30.0, 0.0); }), ErrorCode::parameter);
}

TEST(EndToEnd, SaccadeClipWithEog) {
  const fs::path dir = scratch_dir("pipeline_saccade");
  synth::write_saccade_clip(dir / "clip", 420, 420.0, 83);
  RunConfig cfg;
  cfg.eog = (dir / "clip" / "eog.csv").string();
  std::ostringstream log;
  run_saccade(dir / "clip", cfg, dir / "out", log);

  const auto ds = data::FrameDataset::open(dir / "clip");
  const auto track = read_rows(dir / "out" / "track.csv");
  ASSERT_EQ(track.size(), 421u);
  double worst = 0.0;
  for (int k = 20; k < ds.size(); ++k) {
    const auto& row = track[static_cast<std::size_t>(k) + 1];
    ASSERT_FALSE(row[1].empty());
    worst = std::max(worst, std::abs(std::stod(row[1]) - ds.truth_for(k)->iris->x));
  }
  EXPECT_LT(worst, 3.0);

  // Truth-derived onsets through the same segmentation.
  std::vector<track::TrackPoint> truth_pts;
  for (int k = 0; k < ds.size(); ++k) truth_pts.push_back(point(k, ds.truth_for(k)->iris->x));
  const auto expected = saccades_from_track(truth_pts, 0.0, 100.0, 420.0, 0.0);
  ASSERT_EQ(expected.size(), 2u);

  const auto sac = read_rows(dir / "out" / "saccades.csv");
  ASSERT_EQ(sac.size(), 3u);
  EXPECT_GT(std::stod(sac[1][3]), 0.0);
  EXPECT_LT(std::stod(sac[2][3]), 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(std::stoi(sac[i + 1][1]), expected[i].record.onset, 4);
    EXPECT_NEAR(std::stod(sac[i + 1][5]), expected[i].record.duration, 5.0 / 420.0);
  }
  const auto summary = read_rows(dir / "out" / "correlation_summary.csv");
  ASSERT_EQ(summary.size(), 3u);
  EXPECT_EQ(summary[1][0], "amplitude");
  EXPECT_EQ(summary[1][1], "2");
  EXPECT_EQ(summary[2][0], "peak_velocity");
}

TEST(EndToEnd, TrainedModelsOnAShortStream) {
  const fs::path dir = scratch_dir("pipeline_perclos");
  synth::write_face_corpus(dir / "faces", {}, 84);
  RunConfig cfg;
  std::ostringstream log;
  run_train(dir / "faces", cfg, dir / "models", log);
  for (const char* f : {kFaceModel, kEyeModel, kStateFeatures, kStateClassifier})
    EXPECT_TRUE(fs::exists(dir / "models" / f)) << f;

  cfg.models = (dir / "models").string();
  cfg.window_s = 4.0;
  cfg.stride_s = 2.0;
  synth::write_blink_stream(dir / "stream", {300, 60, 30.0, 160, 120, 80}, 85);
  run_perclos(dir / "stream", cfg, dir / "out", log);
  const auto ds = data::FrameDataset::open(dir / "stream");
  const auto det = read_rows(dir / "out" / "detections.csv");
  ASSERT_EQ(det.size(), 301u);
  int known = 0, right = 0;
  for (int k = 0; k < 300; ++k) {
    const std::string& s = det[static_cast<std::size_t>(k) + 1][12];
    if (s == "unknown") continue;
    ++known;
    right += s == eyestate::to_string(ds.truth_for(k)->state);
  }
  EXPECT_GE(known, 285);
  EXPECT_GE(right, known * 9 / 10);
  const auto pc = read_rows(dir / "out" / "perclos.csv");
  EXPECT_EQ(pc[0], (std::vector<std::string>{"minute", "start_frame", "end_frame", "closed", "known", "perclos",
                                             "warmup"}));
  EXPECT_GT(pc.size(), 2u);

  // No face anywhere: every frame unknown and PERCLOS undefined.
  data::write_dataset(dir / "blank", std::vector<GrayImage>(90, GrayImage(160, 120, 128)), 30.0, {});
  run_perclos(dir / "blank", cfg, dir / "blank_out", log);
  const auto blank = read_rows(dir / "blank_out" / "detections.csv");
  for (std::size_t i = 1; i < blank.size(); ++i) EXPECT_EQ(blank[i][12], "unknown");
  for (const auto& row : read_rows(dir / "blank_out" / "perclos.csv"))
    if (row[0] != "minute") EXPECT_EQ(row[5], "undefined");

  RunConfig none;
  EXPECT_EQ(error_code_of([&] { run_perclos(dir / "stream", none, dir / "x", log); }), ErrorCode::parameter);
}
