#include "ocular/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "ocular/dataset.hpp"
#include "ocular/enhance.hpp"
#include "ocular/eog.hpp"
#include "ocular/error.hpp"

namespace ocular::pipeline {

namespace fs = std::filesystem;
using data::fixed6;

// ---------------------------------------------------------------------------
// Configuration

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::parameter, "option " + key + ": '" + v + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw Error(ErrorCode::parameter, "option " + key + " must be an integer");
  return static_cast<int>(d);
}

track::Vec4 to_vec4(const std::string& key, const std::string& v) {
  const auto parts = data::split_csv(v);
  if (parts.size() != 4) throw Error(ErrorCode::parameter, "option " + key + " needs four comma-separated values");
  track::Vec4 out;
  for (int i = 0; i < 4; ++i) {
    out[i] = to_double(key, parts[static_cast<std::size_t>(i)]);
    if (out[i] < 0.0) throw Error(ErrorCode::parameter, "option " + key + " must be non-negative");
  }
  return out;
}

void require(bool ok, const std::string& key, const char* what) {
  if (!ok) throw Error(ErrorCode::parameter, "option " + key + " " + what);
}

void one_of(const std::string& key, const std::string& v, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return;
  throw Error(ErrorCode::parameter, "option " + key + ": unsupported value '" + v + "'");
}

}  // namespace

void set_option(RunConfig& c, const std::string& key, const std::string& v) {
  // clang-format off
  const std::map<std::string, std::function<void()>> setters = {
    {"sf", [&] { c.sf = to_double(key, v); require(c.sf >= 1.0, key, "must be >= 1"); }},
    {"eye_refine_step", [&] { c.eye_refine_step = to_int(key, v); require(c.eye_refine_step >= 0, key, "must be >= 0"); }},
    {"alpha", [&] { c.alpha = to_double(key, v); require(c.alpha >= 0.0 && c.alpha <= 1.0, key, "must lie in [0, 1]"); }},
    {"canny_low", [&] { c.canny_low = to_double(key, v); require(c.canny_low >= 0.0, key, "must be >= 0"); }},
    {"canny_high", [&] { c.canny_high = to_double(key, v); require(c.canny_high > 0.0, key, "must be > 0"); }},
    {"rmin", [&] { c.rmin = to_int(key, v); require(c.rmin == 0 || c.rmin >= 3, key, "must be 0 or >= 3"); }},
    {"rmax", [&] { c.rmax = to_int(key, v); require(c.rmax >= 0, key, "must be >= 0"); }},
    {"gamma", [&] { c.gamma = to_double(key, v); require(c.gamma >= 0.1 && c.gamma <= 10.0, key, "must lie in [0.1, 10]"); }},
    {"glint_radius", [&] { c.glint_radius = to_int(key, v); require(c.glint_radius >= 0, key, "must be >= 0"); }},
    {"min_support", [&] { c.min_support = to_double(key, v); require(c.min_support >= 0.0 && c.min_support <= 1.0, key, "must lie in [0, 1]"); }},
    {"kf_q", [&] { c.kf_q = to_vec4(key, v); }},
    {"kf_r", [&] { c.kf_r = to_vec4(key, v); }},
    {"search_radius", [&] { c.search_radius = to_int(key, v); require(c.search_radius >= 1, key, "must be >= 1"); }},
    {"reverify", [&] { c.reverify = to_int(key, v); require(c.reverify >= 1, key, "must be >= 1"); }},
    {"max_misses", [&] { c.max_misses = to_int(key, v); require(c.max_misses >= 1, key, "must be >= 1"); }},
    {"corner_margin", [&] { c.corner_margin = to_double(key, v); require(c.corner_margin >= 0.0, key, "must be >= 0"); }},
    {"saccade_threshold", [&] { c.saccade_threshold = to_double(key, v); require(c.saccade_threshold >= 0.0, key, "must be >= 0"); }},
    {"window_s", [&] { c.window_s = to_double(key, v); require(c.window_s > 0.0, key, "must be > 0"); }},
    {"stride_s", [&] { c.stride_s = to_double(key, v); require(c.stride_s > 0.0, key, "must be > 0"); }},
    {"kernel", [&] { one_of(key, v, {"poly", "linear"}); c.kernel = v; }},
    {"degree", [&] { c.degree = to_int(key, v); require(c.degree >= 1 && c.degree <= 10, key, "must lie in [1, 10]"); }},
    {"svm_c", [&] { c.svm_c = to_double(key, v); require(c.svm_c > 0.0, key, "must be > 0"); }},
    {"pca_k", [&] { c.pca_k = to_int(key, v); require(c.pca_k >= 1, key, "must be >= 1"); }},
    {"lbp_k", [&] { c.lbp_k = to_int(key, v); require(c.lbp_k >= 1, key, "must be >= 1"); }},
    {"cascade_stages", [&] { c.cascade_stages = to_int(key, v); require(c.cascade_stages >= 1, key, "must be >= 1"); }},
    {"cascade_rounds", [&] { c.cascade_rounds = to_int(key, v); require(c.cascade_rounds >= 1, key, "must be >= 1"); }},
    {"feature_pool", [&] { c.feature_pool = to_int(key, v); require(c.feature_pool >= 1, key, "must be >= 1"); }},
    {"cascade_target_fpr", [&] { c.cascade_target_fpr = to_double(key, v); require(c.cascade_target_fpr > 0 && c.cascade_target_fpr < 1, key, "must be in (0, 1)"); }},
    {"negatives_per_stage", [&] { c.negatives_per_stage = to_int(key, v); require(c.negatives_per_stage >= 1, key, "must be >= 1"); }},
    {"train_mode", [&] { one_of(key, v, {"all", "cascade", "subspace", "lbp", "svm"}); c.train_mode = v; }},
    {"edge_mask", [&] { one_of(key, v, {"dog", "laplacian"}); c.edge_mask = v; }},
    {"spectacle_length", [&] { one_of(key, v, {"skeleton", "pixels"}); c.spectacle_length = v; }},
    {"min_component", [&] { c.min_component = to_int(key, v); require(c.min_component >= 1, key, "must be >= 1"); }},
    {"metric", [&] { one_of(key, v, {"chessboard", "cityblock", "euclidean", "quasi-euclidean"}); c.metric = v; }},
    {"eog", [&] { c.eog = v; }},
    {"f_lo", [&] { c.f_lo = to_double(key, v); require(c.f_lo > 0.0, key, "must be > 0"); }},
    {"f_hi", [&] { c.f_hi = to_double(key, v); require(c.f_hi > 0.0, key, "must be > 0"); }},
    {"truncate", [&] { c.truncate = to_double(key, v); require(c.truncate > 0.0 && c.truncate < 1.0, key, "must lie in (0, 1)"); }},
    {"models", [&] { c.models = v; }},
    {"seed", [&] { const double d = to_double(key, v); require(d >= 0.0 && d == std::floor(d) && d < 1.8e19, key, "must be a non-negative integer"); c.seed = std::stoull(v); }},
  };
  // clang-format on
  const auto it = setters.find(key);
  if (it == setters.end()) throw Error(ErrorCode::parameter, "unknown option '" + key + "'");
  it->second();
}

void apply_options(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  for (const auto& [k, v] : kv) set_option(cfg, k, v);
}

RunConfig load_config(const fs::path& path) {
  RunConfig cfg;
  apply_options(cfg, data::read_key_values(path));
  return cfg;
}

Models load_models(const fs::path& dir) {
  Models m;
  m.face = cascade::load_model((dir / kFaceModel).string());
  m.eye = subspace::load_model((dir / kEyeModel).string());
  m.state_features = subspace::load_model((dir / kStateFeatures).string());
  m.state = eyestate::load_classifier((dir / kStateClassifier).string());
  return m;
}

// ---------------------------------------------------------------------------
// ROC

namespace {

void check_labels(const std::vector<double>& scores, const std::vector<int>& labels, std::size_t& pos,
                  std::size_t& neg) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::size, "scores and labels differ in length");
  pos = neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorCode::input, "labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw Error(ErrorCode::input, "scores must be finite");
    (labels[i] ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw Error(ErrorCode::input, "ROC needs at least one positive and one negative");
}

}  // namespace

std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::size_t P = 0, N = 0;
  check_labels(scores, labels, P, N);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> pts;
  RocPoint cur;
  cur.threshold = std::numeric_limits<double>::infinity();
  pts.push_back(cur);
  std::size_t i = 0;
  while (i < order.size()) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] ? cur.tp : cur.fp) += 1;
      ++i;
    }
    cur.threshold = t;
    cur.tpr = static_cast<double>(cur.tp) / static_cast<double>(P);
    cur.fpr = static_cast<double>(cur.fp) / static_cast<double>(N);
    pts.push_back(cur);
  }
  return pts;
}

Auc roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::size_t P = 0, N = 0;
  check_labels(scores, labels, P, N);
  const auto pts = roc_curve(scores, labels);
  Auc a;
  for (std::size_t i = 1; i < pts.size(); ++i)
    a.twice_area += static_cast<std::uint64_t>(pts[i].fp - pts[i - 1].fp) * (pts[i].tp + pts[i - 1].tp);
  a.denominator = 2 * static_cast<std::uint64_t>(P) * N;
  a.value = static_cast<double>(a.twice_area) / static_cast<double>(a.denominator);
  return a;
}

void run_roc(const fs::path& scores_csv, const fs::path& out_dir, std::ostream& log) {
  std::ifstream in(scores_csv);
  if (!in) throw Error(ErrorCode::io, "cannot open " + scores_csv.string());
  std::string line;
  if (!std::getline(in, line) || data::split_csv(line) != std::vector<std::string>{"score", "label"})
    throw Error(ErrorCode::format, "score file must start with the header score,label");
  std::vector<double> scores;
  std::vector<int> labels;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto f = data::split_csv(line);
    if (f.size() != 2) throw Error(ErrorCode::format, "line " + std::to_string(lineno) + ": expected score,label");
    scores.push_back(to_double("score", f[0]));
    labels.push_back(to_int("label", f[1]));
  }
  const auto pts = roc_curve(scores, labels);
  const Auc auc = roc_auc(scores, labels);
  fs::create_directories(out_dir);
  std::ofstream roc(out_dir / "roc.csv");
  roc << "threshold,tp,fp,tpr,fpr\n";
  for (const auto& p : pts)
    roc << (std::isinf(p.threshold) ? std::string("inf") : fixed6(p.threshold)) << ',' << p.tp << ',' << p.fp << ','
        << fixed6(p.tpr) << ',' << fixed6(p.fpr) << '\n';
  std::ofstream a(out_dir / "auc.csv");
  a << "auc,twice_area,denominator\n" << fixed6(auc.value) << ',' << auc.twice_area << ',' << auc.denominator << '\n';
  log << "AUC " << fixed6(auc.value) << " over " << scores.size() << " samples\n";
}

// ---------------------------------------------------------------------------
// PERCLOS

namespace {

using Clock = std::chrono::steady_clock;

std::string rect_fields(const std::optional<Rect>& r) {
  if (!r) return ",,,";
  return std::to_string(r->x) + ',' + std::to_string(r->y) + ',' + std::to_string(r->w) + ',' + std::to_string(r->h);
}

struct FrameResult {
  std::string status = "ok";
  double theta = 0.0;
  std::optional<Rect> face;
  std::optional<Rect> eye;
  double eye_error = 0.0;
  eyestate::EyeState state = eyestate::EyeState::unknown;
  double score = 0.0;
};

FrameResult process_frame(const GrayImage& img, const Models& m, const RunConfig& cfg) {
  FrameResult fr;
  GrayImage source = img;
  auto found = cascade::detect_with_rotation(source, m.face, cfg.sf);
  if (!found) {
    source = enhance::bhe(img);
    found = cascade::detect_with_rotation(source, m.face, cfg.sf);
    if (found) fr.status = "ok-bhe";
  }
  if (!found) {
    fr.status = "no-face";
    return fr;
  }
  fr.theta = found->theta;
  fr.face = found->found.face.rect;
  const GrayImage frame = found->theta == 0.0 ? source : affine_rotate(source, -found->theta);
  const Rect roi = found->found.roi;
  const GrayImage roi_img = crop(frame, roi);
  if (roi_img.width() < 8 || roi_img.height() < 8) {
    fr.status = "small-roi";
    return fr;
  }
  auto params = subspace::eye_detect_params();
  params.refine_step = cfg.eye_refine_step;
  const auto hit = subspace::subspace_detect(roi_img, m.eye, params);
  fr.eye = Rect{hit.rect.x + roi.x, hit.rect.y + roi.y, hit.rect.w, hit.rect.h};
  fr.eye_error = hit.error;
  const GrayImage resized = resize_bicubic(roi_img, params.resize_w, params.resize_h);
  const auto res = eyestate::eye_state(crop(resized, hit.resized_rect), m.state_features, m.state);
  fr.state = res.state;
  fr.score = res.score;
  return fr;
}

}  // namespace

void run_perclos(const fs::path& dataset, const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  if (cfg.models.empty()) throw Error(ErrorCode::parameter, "perclos needs models=<directory>");
  const auto ds = data::FrameDataset::open(dataset);
  const Models models = load_models(cfg.models);
  fs::create_directories(out_dir);
  std::ofstream det(out_dir / "detections.csv");
  det << "frame,status,theta,face_x,face_y,face_w,face_h,eye_x,eye_y,eye_w,eye_h,eye_error,state,score\n";

  std::vector<eyestate::EyeState> states;
  states.reserve(static_cast<std::size_t>(ds.size()));
  const auto t0 = Clock::now();
  for (int k = 0; k < ds.size(); ++k) {
    FrameResult fr;
    try {
      fr = process_frame(ds.frame(k), models, cfg);
    } catch (const Error& e) {
      fr = FrameResult{};
      fr.status = std::string("error:") + to_string(e.code());
    }
    states.push_back(fr.state);
    det << k << ',' << fr.status << ',' << fixed6(fr.theta) << ',' << rect_fields(fr.face) << ','
        << rect_fields(fr.eye) << ',' << (fr.eye ? fixed6(fr.eye_error) : "") << ',' << eyestate::to_string(fr.state)
        << ',' << (fr.state == eyestate::EyeState::unknown ? "" : fixed6(fr.score)) << '\n';
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  eyestate::PerclosParams pp{ds.manifest().fps, cfg.window_s, cfg.stride_s};
  std::ofstream pc(out_dir / "perclos.csv");
  pc << "minute,start_frame,end_frame,closed,known,perclos,warmup\n";
  for (const auto& r : eyestate::perclos(states, pp))
    pc << r.minute << ',' << r.start_frame << ',' << r.end_frame << ',' << r.closed << ',' << r.known << ','
       << (r.percent ? fixed6(*r.percent) : "undefined") << ',' << (r.warmup ? 1 : 0) << '\n';

  log << "perclos: " << ds.size() << " frames in " << fixed6(seconds) << " s ("
      << fixed6(seconds > 0 ? ds.size() / seconds : 0.0) << " frames/s) at sf " << fixed6(cfg.sf) << '\n';
}

// ---------------------------------------------------------------------------
// Saccades

std::vector<SaccadeRow> saccades_from_track(const std::vector<track::TrackPoint>& points, double left_x,
                                            double eye_width, double fps, double v_thresh) {
  if (!(eye_width > 0.0)) throw Error(ErrorCode::parameter, "eye width must be positive");
  std::vector<SaccadeRow> rows;
  int segment = 0;
  std::size_t i = 0;
  while (i < points.size()) {
    if (!points[i].valid) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    std::vector<double> theta;
    while (i < points.size() && points[i].valid) {
      theta.push_back((points[i].x[0] - left_x) / eye_width);
      const bool lost = points[i].lost;
      ++i;
      if (lost) break;
    }
    if (theta.size() >= 2) {
      const auto recs =
          iris::saccade_params(theta, fps, v_thresh > 0.0 ? std::optional<double>(v_thresh) : std::nullopt);
      for (auto r : recs) {
        r.onset += static_cast<int>(start);
        r.offset += static_cast<int>(start);
        rows.push_back({segment, r});
      }
    }
    ++segment;
  }
  return rows;
}

namespace {

struct EyeFrame {
  double left = 0.0;
  double width = 0.0;
  bool from_corners = false;
};

EyeFrame eye_frame(const GrayImage& img) {
  EyeFrame f{0.0, static_cast<double>(img.width()), false};
  if (auto c = iris::eye_corners(img)) {
    const double l = std::min(c->temporal.x, c->nasal.x);
    const double r = std::max(c->temporal.x, c->nasal.x);
    if (r - l >= 2.0) f = {l, r - l, true};
  }
  return f;
}

track::BoxConstraint frame_box(const EyeFrame& f, const GrayImage& img, double margin) {
  return track::position_box(f.left - margin, f.left + f.width + margin, 0.0, img.height() - 1.0);
}

}  // namespace

void run_saccade(const fs::path& dataset, const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto ds = data::FrameDataset::open(dataset);
  const double fps = ds.manifest().fps;
  fs::create_directories(out_dir);

  iris::IrisConfig ic;
  ic.gamma = cfg.gamma;
  ic.glint_radius = cfg.glint_radius;
  ic.t_low = cfg.canny_low;
  ic.t_high = cfg.canny_high;
  ic.rmin = cfg.rmin;
  ic.rmax = cfg.rmax;
  ic.min_support = cfg.min_support;

  track::TrackerConfig tc;
  tc.fps = fps;
  tc.Q = cfg.kf_q.asDiagonal();
  tc.R = cfg.kf_r.asDiagonal();
  tc.reverify_every = cfg.reverify;
  tc.max_misses = cfg.max_misses;
  tc.search_radius = cfg.search_radius;

  track::KalmanTracker tracker(tc);
  std::vector<track::TrackPoint> points;
  std::vector<EyeFrame> frames_geom;
  EyeFrame geom;
  bool need_geometry = true;
  std::size_t errors = 0;
  const auto t0 = Clock::now();
  for (int k = 0; k < ds.size(); ++k) {
    GrayImage img;
    try {
      img = ds.frame(k);
    } catch (const Error&) {
      ++errors;
      points.push_back(tracker.update(k, std::nullopt));
      frames_geom.push_back(geom);
      continue;
    }
    if (need_geometry) {
      geom = eye_frame(img);
      tracker.set_constraint(geom.from_corners ? std::optional(frame_box(geom, img, cfg.corner_margin))
                                               : std::nullopt);
      need_geometry = false;
    }
    const auto window = tracker.search_window(img.width(), img.height());
    std::optional<PointF> m;
    try {
      if (auto fix = iris::iris_center(img, ic, window)) m = PointF{fix->cx, fix->cy};
    } catch (const Error&) {
      ++errors;
    }
    const auto tp = tracker.update(k, m);
    points.push_back(tp);
    frames_geom.push_back(geom);
    if (tp.lost) need_geometry = true;
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  std::ofstream tr(out_dir / "track.csv");
  tr << "frame,px,py,vx,vy,constrained_flag,measured_flag\n";
  for (const auto& p : points) {
    tr << p.frame << ',';
    if (p.valid) tr << fixed6(p.x[0]) << ',' << fixed6(p.x[1]) << ',' << fixed6(p.x[2]) << ',' << fixed6(p.x[3]);
    else tr << ",,,";
    tr << ',' << (p.constrained ? 1 : 0) << ',' << (p.measured ? 1 : 0) << '\n';
  }

  // Geometry is fixed per track segment; the first frame of each segment decides.
  std::vector<SaccadeRow> rows;
  std::size_t seg_start = 0;
  int seg_index = 0;
  for (std::size_t i = 0; i <= points.size(); ++i) {
    const bool boundary = i == points.size() || (i > 0 && points[i - 1].lost);
    if (!boundary) continue;
    if (i > seg_start) {
      std::vector<track::TrackPoint> seg(points.begin() + static_cast<std::ptrdiff_t>(seg_start),
                                         points.begin() + static_cast<std::ptrdiff_t>(i));
      const EyeFrame g = frames_geom[seg_start];
      for (auto row : saccades_from_track(seg, g.left, g.width, fps, cfg.saccade_threshold)) {
        row.segment += seg_index;
        row.record.onset += static_cast<int>(seg_start);
        row.record.offset += static_cast<int>(seg_start);
        rows.push_back(row);
      }
      ++seg_index;
    }
    seg_start = i;
  }

  std::ofstream sc(out_dir / "saccades.csv");
  sc << "segment,onset,offset,amplitude,peak_velocity,duration,sr\n";
  for (const auto& r : rows)
    sc << r.segment << ',' << r.record.onset << ',' << r.record.offset << ',' << fixed6(r.record.amplitude) << ','
       << fixed6(r.record.peak_velocity) << ',' << fixed6(r.record.duration) << ',' << fixed6(r.record.sr) << '\n';

  if (!cfg.eog.empty()) {
    const eog::Series raw = eog::read_csv(cfg.eog);
    const auto peaks = eog::analyze(raw, cfg.f_lo, cfg.f_hi, cfg.truncate);
    std::vector<bool> used(peaks.size(), false);
    std::vector<std::pair<const SaccadeRow*, const eog::SaccadePeak*>> pairs;
    for (const auto& r : rows) {
      const double tv = 0.5 * (r.record.onset + r.record.offset) / fps;
      std::optional<std::size_t> best;
      double best_d = 0.5;
      for (std::size_t j = 0; j < peaks.size(); ++j) {
        if (used[j]) continue;
        const double te = 0.5 * static_cast<double>(peaks[j].start + peaks[j].end) / raw.rate;
        if (std::abs(te - tv) < best_d) {
          best_d = std::abs(te - tv);
          best = j;
        }
      }
      if (best) {
        used[*best] = true;
        pairs.emplace_back(&r, &peaks[*best]);
      }
    }
    auto per_unit = [](std::vector<double> v) {
      double m = 0.0;
      for (double x : v) m = std::max(m, std::abs(x));
      if (m > 0.0)
        for (double& x : v) x /= m;
      return v;
    };
    std::vector<double> ea, va, ev, vv;
    for (const auto& [r, p] : pairs) {
      ea.push_back(p->amplitude);
      va.push_back(std::abs(r->record.amplitude));
      ev.push_back(p->peak_velocity_per_second(raw.rate));
      vv.push_back(r->record.peak_velocity);
    }
    ea = per_unit(ea);
    va = per_unit(va);
    ev = per_unit(ev);
    vv = per_unit(vv);
    std::ofstream cr(out_dir / "correlation.csv");
    cr << "parameter,eog_value,video_value\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) cr << "amplitude," << fixed6(ea[i]) << ',' << fixed6(va[i]) << '\n';
    for (std::size_t i = 0; i < pairs.size(); ++i)
      cr << "peak_velocity," << fixed6(ev[i]) << ',' << fixed6(vv[i]) << '\n';
    std::ofstream cs(out_dir / "correlation_summary.csv");
    cs << "parameter,pairs,pearson\n";
    auto r_field = [&](const std::vector<double>& a, const std::vector<double>& b) -> std::string {
      if (a.size() < 2) return "undefined";
      const auto r = eog::pearson(a, b);
      return r ? fixed6(*r) : "undefined";
    };
    cs << "amplitude," << pairs.size() << ',' << r_field(ea, va) << '\n';
    cs << "peak_velocity," << pairs.size() << ',' << r_field(ev, vv) << '\n';
  }

  log << "saccade: " << ds.size() << " frames, " << rows.size() << " saccades, " << seg_index << " segments, "
      << errors << " frame errors in " << fixed6(seconds) << " s\n";
}

// ---------------------------------------------------------------------------
// Spectacles

namespace {

DistanceMetric metric_from(const std::string& s) {
  if (s == "chessboard") return DistanceMetric::chessboard;
  if (s == "cityblock") return DistanceMetric::cityblock;
  if (s == "euclidean") return DistanceMetric::euclidean;
  return DistanceMetric::quasi_euclidean;
}

}  // namespace

void run_spectacles(const fs::path& dataset, const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto ds = data::FrameDataset::open(dataset);
  spectacles::SpectacleConfig sc;
  sc.edge = cfg.edge_mask == "laplacian" ? spectacles::EdgeMask::laplacian : spectacles::EdgeMask::dog;
  sc.length = cfg.spectacle_length == "pixels" ? spectacles::LengthMeasure::pixels : spectacles::LengthMeasure::skeleton;
  sc.min_component = static_cast<std::size_t>(cfg.min_component);
  sc.metric = metric_from(cfg.metric);

  fs::create_directories(out_dir);
  std::ofstream out(out_dir / "spectacles.csv");
  out << "frame,D,detected,largest_component,second_component\n";
  std::size_t detected = 0;
  const auto t0 = Clock::now();
  for (int k = 0; k < ds.size(); ++k) {
    try {
      GrayImage img = ds.frame(k);
      if (const auto t = ds.truth_for(k); t && t->face) img = crop(img, *t->face);
      const auto res = spectacles::detect_spectacles(img, sc);
      const double l1 = res.components.empty() ? 0.0 : res.components[0].length;
      const double l2 = res.components.size() < 2 ? 0.0 : res.components[1].length;
      out << k << ',' << fixed6(res.D) << ',' << (res.detected ? 1 : 0) << ',' << fixed6(l1) << ',' << fixed6(l2)
          << '\n';
      detected += res.detected;
    } catch (const Error& e) {
      out << k << ",,error:" << to_string(e.code()) << ",,\n";
    }
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  log << "spectacles: " << detected << " of " << ds.size() << " frames with spectacles (" << fixed6(seconds)
      << " s)\n";
}

// ---------------------------------------------------------------------------
// Training

namespace {

using Rng = std::mt19937_64;

std::vector<std::size_t> shuffled(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng() % i]);
  return idx;
}

// Random rectangle of the given size with IoU below 0.1 against avoid.
std::optional<Rect> random_rect_avoiding(int w, int h, int rw, int rh, const std::optional<Rect>& avoid, Rng& rng) {
  if (rw > w || rh > h) return std::nullopt;
  for (int attempt = 0; attempt < 50; ++attempt) {
    const Rect r{static_cast<int>(rng() % static_cast<std::uint64_t>(w - rw + 1)),
                 static_cast<int>(rng() % static_cast<std::uint64_t>(h - rh + 1)), rw, rh};
    if (!avoid || iou(r, *avoid) < 0.1) return r;
  }
  return std::nullopt;
}

struct EyeSamples {
  std::vector<GrayImage> eyes;
  std::vector<std::vector<GrayImage>> shifted;  // per eye: displaced and rescaled crops
  std::vector<eyestate::EyeState> states;
  std::vector<GrayImage> others;
};

// The eye-window grid lands up to a quarter window away from the eye, so the
// state classifier also sees crops displaced by that much.
std::vector<GrayImage> shifted_eyes(const GrayImage& img, const Rect& eye, Rng& rng) {
  std::vector<GrayImage> out;
  for (int j = 0; j < 4; ++j) {
    const double scale = 0.55 + 0.6 * static_cast<double>(rng() % 1001) / 1000.0;
    const int w = std::max(4, static_cast<int>(std::lround(eye.w * scale)));
    const int h = std::max(4, static_cast<int>(std::lround(eye.h * scale)));
    const int sx = std::max(1, eye.w / 4), sy = std::max(1, eye.h / 4);
    const int cx = eye.x + eye.w / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * sx + 1)) - sx;
    const int cy = eye.y + eye.h / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * sy + 1)) - sy;
    const Rect r{cx - w / 2, cy - h / 2, w, h};
    if (img.contains(r)) out.push_back(resize_bicubic(crop(img, r), eyestate::kEyeWidth, eyestate::kEyeHeight));
  }
  return out;
}

EyeSamples collect_eyes(const data::FrameDataset& ds, Rng& rng) {
  EyeSamples s;
  for (const auto& row : ds.truth()) {
    if (!row.eye) continue;
    const GrayImage img = ds.frame(row.frame);
    if (!img.contains(*row.eye)) continue;
    s.eyes.push_back(resize_bicubic(crop(img, *row.eye), eyestate::kEyeWidth, eyestate::kEyeHeight));
    s.shifted.push_back(shifted_eyes(img, *row.eye, rng));
    s.states.push_back(row.state);
    if (auto r = random_rect_avoiding(img.width(), img.height(), row.eye->w, row.eye->h, row.eye, rng))
      s.others.push_back(resize_bicubic(crop(img, *r), eyestate::kEyeWidth, eyestate::kEyeHeight));
  }
  return s;
}

// Scanned windows rarely sit exactly on a face: shifted and rescaled copies
// (up to 8% of the side) make the stages tolerant of the scan grid.
std::vector<GrayImage> jittered_faces(const GrayImage& img, const Rect& face, Rng& rng) {
  std::vector<GrayImage> out;
  for (int j = 0; j < 4; ++j) {
    const double scale = 0.92 + 0.16 * static_cast<double>(rng() % 1001) / 1000.0;
    const int side = static_cast<int>(std::lround(face.w * scale));
    const int span = std::max(1, static_cast<int>(0.08 * face.w));
    const int cx = face.x + face.w / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * span + 1)) - span;
    const int cy = face.y + face.h / 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(2 * span + 1)) - span;
    const Rect r{cx - side / 2, cy - side / 2, side, side};
    if (!img.contains(r)) continue;
    GrayImage win = resize_bicubic(crop(img, r), cascade::kBaseWindow, cascade::kBaseWindow);
    out.push_back(j % 2 ? flip_horizontal(win) : win);
  }
  return out;
}

void train_face_cascade(const data::FrameDataset& ds, const RunConfig& cfg, const fs::path& out_dir, Rng& rng,
                        std::ostream& log) {
  std::vector<GrayImage> pos;
  std::vector<std::vector<GrayImage>> jittered;  // per face, training only
  std::vector<GrayImage> neg_sources, part_sources;
  for (int k = 0; k < ds.size(); ++k) {
    const auto t = ds.truth_for(k);
    const GrayImage img = ds.frame(k);
    if (t && t->face && img.contains(*t->face)) {
      pos.push_back(resize_bicubic(crop(img, *t->face), cascade::kBaseWindow, cascade::kBaseWindow));
      jittered.push_back(jittered_faces(img, *t->face, rng));
      // Face-free strips beside the face serve as extra negative material.
      const Rect f = *t->face;
      const Rect strips[] = {{0, 0, f.x, img.height()},
                             {f.right(), 0, img.width() - f.right(), img.height()},
                             {0, 0, img.width(), f.y},
                             {0, f.bottom(), img.width(), img.height() - f.bottom()}};
      for (const Rect& s : strips)
        if (s.w >= cascade::kBaseWindow && s.h >= cascade::kBaseWindow) neg_sources.push_back(crop(img, s));
      // Halves and the central three quarters of the face: windows inside them
      // are face parts, not faces.
      const Rect halves[] = {{f.x, f.y, f.w, f.h / 2},
                             {f.x, f.y + f.h / 2, f.w, f.h - f.h / 2},
                             {f.x, f.y, f.w / 2, f.h},
                             {f.x + f.w / 2, f.y, f.w - f.w / 2, f.h},
                             {f.x + f.w / 8, f.y + f.h / 8, f.w - f.w / 4, f.h - f.h / 4}};
      for (const Rect& s : halves)
        if (s.w >= cascade::kBaseWindow && s.h >= cascade::kBaseWindow) part_sources.push_back(crop(img, s));
    } else if (!t || !t->face) {
      neg_sources.push_back(img);
    }
  }
  if (pos.size() < 10 || neg_sources.size() < 2)
    throw Error(ErrorCode::input, "cascade training needs at least 10 faces and 2 face-free images");

  const auto pidx = shuffled(pos.size(), rng);
  const auto nidx = shuffled(neg_sources.size(), rng);
  const std::size_t p_hold = pos.size() / 5, n_hold = std::max<std::size_t>(1, neg_sources.size() / 5);
  std::vector<GrayImage> train_pos, hold_pos, train_neg, hold_neg;
  for (std::size_t i = 0; i < pidx.size(); ++i) {
    if (i < p_hold) {
      hold_pos.push_back(pos[pidx[i]]);
      continue;
    }
    train_pos.push_back(pos[pidx[i]]);
    train_pos.push_back(flip_horizontal(pos[pidx[i]]));
    for (const auto& j : jittered[pidx[i]]) train_pos.push_back(j);
  }
  for (std::size_t i = 0; i < nidx.size(); ++i) (i < n_hold ? hold_neg : train_neg).push_back(neg_sources[nidx[i]]);
  train_neg.insert(train_neg.end(), part_sources.begin(), part_sources.end());

  cascade::TrainParams tp;
  tp.max_stages = cfg.cascade_stages;
  tp.target_false_positive_rate = cfg.cascade_target_fpr;
  tp.max_rounds_per_stage = cfg.cascade_rounds;
  tp.feature_pool = static_cast<std::size_t>(cfg.feature_pool);
  tp.negatives_per_stage = static_cast<std::size_t>(cfg.negatives_per_stage);
  tp.seed = cfg.seed;
  const auto model = cascade::train_cascade(train_pos, train_neg, tp);
  cascade::save_model((out_dir / kFaceModel).string(), model);

  auto accepts = [&](const GrayImage& win) {
    return cascade::classify_window(model, cascade::make_integrals(win), Rect{0, 0, win.width(), win.height()}, 1.0)
        .has_value();
  };
  std::size_t tp_count = 0;
  for (const auto& w : hold_pos) tp_count += accepts(w);
  std::size_t fp_count = 0, negs = 0;
  for (const auto& src : hold_neg) {
    for (int j = 0; j < 50; ++j) {
      const int side = cascade::kBaseWindow + static_cast<int>(rng() % static_cast<std::uint64_t>(
                                                  std::max(1, std::min(src.width(), src.height()) - cascade::kBaseWindow + 1)));
      auto r = random_rect_avoiding(src.width(), src.height(), side, side, std::nullopt, rng);
      if (!r) continue;
      fp_count += accepts(resize_bicubic(crop(src, *r), cascade::kBaseWindow, cascade::kBaseWindow));
      ++negs;
    }
  }
  log << "cascade: " << model.stages.size() << " stages; held-out tpr "
      << fixed6(hold_pos.empty() ? 0.0 : static_cast<double>(tp_count) / hold_pos.size()) << ", fpr "
      << fixed6(negs ? static_cast<double>(fp_count) / negs : 0.0) << '\n';
}

struct Split {
  std::vector<std::size_t> train, hold;
};

Split split(std::size_t n, Rng& rng) {
  Split s;
  const auto idx = shuffled(n, rng);
  const std::size_t hold = n / 5;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < hold ? s.hold : s.train).push_back(idx[i]);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.hold.begin(), s.hold.end());
  return s;
}

void train_eye_subspace(const EyeSamples& es, const RunConfig& cfg, const fs::path& out_dir, Rng& rng,
                        std::ostream& log) {
  if (es.eyes.size() < 5) throw Error(ErrorCode::input, "subspace training needs at least five eye samples");
  const Split sp = split(es.eyes.size(), rng);
  std::vector<std::vector<double>> vecs;
  for (std::size_t i : sp.train) vecs.push_back(subspace::window_vector(es.eyes[i], eyestate::kEyeWidth, eyestate::kEyeHeight));
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg.pca_k), vecs.size() - 1);
  auto model = subspace::pca_train(vecs, k);
  model.window_w = eyestate::kEyeWidth;
  model.window_h = eyestate::kEyeHeight;
  subspace::save_model((out_dir / kEyeModel).string(), model);

  std::vector<double> scores;
  std::vector<int> labels;
  for (std::size_t i : sp.hold) {
    scores.push_back(-subspace::reconstruction_error(model, subspace::window_vector(es.eyes[i], model.window_w, model.window_h)));
    labels.push_back(1);
  }
  for (std::size_t i = 0; i < es.others.size(); i += 5) {
    scores.push_back(-subspace::reconstruction_error(model, subspace::window_vector(es.others[i], model.window_w, model.window_h)));
    labels.push_back(0);
  }
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0;
  log << "subspace: K " << model.k() << "; held-out eye/non-eye AUC "
      << (both ? fixed6(roc_auc(scores, labels).value) : std::string("undefined")) << '\n';
}

void train_state(const EyeSamples& es, bool lbp, const RunConfig& cfg, const fs::path& out_dir, Rng& rng,
                 std::ostream& log) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < es.eyes.size(); ++i)
    if (es.states[i] != eyestate::EyeState::unknown) usable.push_back(i);
  const auto closed = std::count_if(usable.begin(), usable.end(),
                                    [&](std::size_t i) { return es.states[i] == eyestate::EyeState::closed; });
  if (closed < 3 || usable.size() - static_cast<std::size_t>(closed) < 3)
    throw Error(ErrorCode::input, "eye-state training needs at least three open and three closed eyes");
  const Split sp = split(usable.size(), rng);

  std::vector<std::vector<double>> raw;
  for (std::size_t j : sp.train) {
    const GrayImage& e = es.eyes[usable[j]];
    raw.push_back(lbp ? eyestate::block_lbp(e) : subspace::window_vector(e, eyestate::kEyeWidth, eyestate::kEyeHeight));
  }
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(lbp ? cfg.lbp_k : cfg.pca_k), raw.size() - 1);
  auto features = subspace::pca_train(raw, k);
  if (!lbp) {
    features.window_w = eyestate::kEyeWidth;
    features.window_h = eyestate::kEyeHeight;
  }
  std::vector<std::vector<double>> x;
  std::vector<eyestate::EyeState> y;
  for (std::size_t j : sp.train) {
    x.push_back(eyestate::eye_features(es.eyes[usable[j]], features));
    y.push_back(es.states[usable[j]]);
    for (const GrayImage& e : es.shifted[usable[j]]) {
      x.push_back(eyestate::eye_features(e, features));
      y.push_back(es.states[usable[j]]);
    }
  }
  eyestate::SvmParams sp_params;
  sp_params.C = cfg.svm_c;
  sp_params.kernel.kind = cfg.kernel == "linear" ? eyestate::KernelKind::linear : eyestate::KernelKind::poly;
  sp_params.kernel.degree = cfg.degree;
  const auto clf = eyestate::classifier_train(x, y, sp_params);
  subspace::save_model((out_dir / kStateFeatures).string(), features);
  eyestate::save_classifier((out_dir / kStateClassifier).string(), clf);

  std::size_t correct = 0, total = 0;
  for (std::size_t j : sp.hold) {
    const auto truth = es.states[usable[j]];
    correct += eyestate::eye_state(es.eyes[usable[j]], features, clf).state == truth;
    ++total;
    for (const GrayImage& e : es.shifted[usable[j]]) {
      correct += eyestate::eye_state(e, features, clf).state == truth;
      ++total;
    }
  }
  log << (lbp ? "lbp" : "svm") << ": " << clf.support_vectors.size() << " support vectors; held-out accuracy "
      << fixed6(total == 0 ? 0.0 : static_cast<double>(correct) / total) << '\n';
}

}  // namespace

void run_train(const fs::path& dataset, const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  const auto ds = data::FrameDataset::open(dataset);
  if (ds.truth().empty()) throw Error(ErrorCode::input, "training needs a dataset with ground truth");
  fs::create_directories(out_dir);
  Rng rng(cfg.seed);
  const std::string& mode = cfg.train_mode;
  if (mode == "cascade" || mode == "all") train_face_cascade(ds, cfg, out_dir, rng, log);
  if (mode == "cascade") return;
  const EyeSamples es = collect_eyes(ds, rng);
  if (mode == "subspace" || mode == "all") train_eye_subspace(es, cfg, out_dir, rng, log);
  if (mode == "lbp" || mode == "all") train_state(es, true, cfg, out_dir, rng, log);
  if (mode == "svm") train_state(es, false, cfg, out_dir, rng, log);
}

}  // namespace ocular::pipeline
