#include "ocular/cascade.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace ocular::cascade {

const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::two_h: return "two_h";
    case FeatureKind::two_v: return "two_v";
    case FeatureKind::three_h: return "three_h";
    case FeatureKind::three_v: return "three_v";
    case FeatureKind::four: return "four";
  }
  return "?";
}

FeatureKind feature_kind_from_string(const std::string& s) {
  for (auto k : {FeatureKind::two_h, FeatureKind::two_v, FeatureKind::three_h, FeatureKind::three_v,
                 FeatureKind::four}) {
    if (s == to_string(k)) return k;
  }
  throw Error(ErrorCode::format, "unknown Haar feature kind '" + s + "'");
}

std::pair<int, int> feature_grid(FeatureKind k) {
  switch (k) {
    case FeatureKind::two_h: return {2, 1};
    case FeatureKind::two_v: return {1, 2};
    case FeatureKind::three_h: return {3, 1};
    case FeatureKind::three_v: return {1, 3};
    case FeatureKind::four: return {2, 2};
  }
  return {1, 1};
}

bool feature_fits(const HaarFeature& f, int window) {
  const auto [cols, rows] = feature_grid(f.kind);
  const Rect& b = f.base;
  return b.w >= cols && b.h >= rows && b.w % cols == 0 && b.h % rows == 0 && b.x >= 0 &&
         b.y >= 0 && b.right() <= window && b.bottom() <= window;
}

std::vector<HaarFeature> enumerate_features(int window) {
  std::vector<HaarFeature> out;
  for (auto k : {FeatureKind::two_h, FeatureKind::two_v, FeatureKind::three_h, FeatureKind::three_v,
                 FeatureKind::four}) {
    const auto [cols, rows] = feature_grid(k);
    for (int h = rows; h <= window; h += rows)
      for (int w = cols; w <= window; w += cols)
        for (int y = 0; y + h <= window; ++y)
          for (int x = 0; x + w <= window; ++x) out.push_back({k, Rect{x, y, w, h}});
  }
  return out;
}

namespace {

double cell_weight(FeatureKind k, int col, int row) {
  switch (k) {
    case FeatureKind::two_h: return col == 0 ? 1.0 : -1.0;
    case FeatureKind::two_v: return row == 0 ? 1.0 : -1.0;
    case FeatureKind::three_h: return col == 1 ? 2.0 : -1.0;
    case FeatureKind::three_v: return row == 1 ? 2.0 : -1.0;
    case FeatureKind::four: return col == row ? 1.0 : -1.0;
  }
  return 0.0;
}

int floor_scaled(int v, double scale) { return static_cast<int>(std::floor(v * scale)); }

template <typename Fn>
void visit_rects(const HaarFeature& f, int ox, int oy, double scale, Fn&& fn) {
  const auto [cols, rows] = feature_grid(f.kind);
  const int cw = std::max(1, floor_scaled(f.base.w / cols, scale));
  const int ch = std::max(1, floor_scaled(f.base.h / rows, scale));
  const int x0 = ox + floor_scaled(f.base.x, scale);
  const int y0 = oy + floor_scaled(f.base.y, scale);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) fn(Rect{x0 + c * cw, y0 + r * ch, cw, ch}, cell_weight(f.kind, c, r));
}

}  // namespace

std::vector<WeightedRect> feature_rects(const HaarFeature& f, int ox, int oy, double scale) {
  std::vector<WeightedRect> out;
  visit_rects(f, ox, oy, scale, [&](const Rect& r, double w) { out.push_back({r, w}); });
  return out;
}

DetectionIntegrals make_integrals(const GrayImage& img) {
  return {integral_image(img), squared_integral_image(img)};
}

int window_side(double scale) { return static_cast<int>(std::floor(kBaseWindow * scale)); }

double haar_raw(const IntegralImage& ii, const HaarFeature& f, const Rect& window, double scale) {
  double acc = 0.0;
  visit_rects(f, window.x, window.y, scale, [&](const Rect& r, double w) {
    if (r.x < window.x || r.y < window.y || r.right() > window.right() || r.bottom() > window.bottom())
      throw Error(ErrorCode::bounds, "scaled Haar feature does not fit its window");
    acc += w * static_cast<double>(rect_sum(ii, r));
  });
  return acc;
}

double window_stddev(const DetectionIntegrals& di, const Rect& window) {
  const auto n = static_cast<unsigned __int128>(window.area());
  const auto s = static_cast<unsigned __int128>(rect_sum(di.sum, window));
  const auto q = static_cast<unsigned __int128>(rect_sum(di.sq, window));
  const auto num = n * q - s * s;  // n^2 * variance, never negative
  const double nn = static_cast<double>(window.area());
  return std::sqrt(static_cast<double>(num) / (nn * nn));
}

namespace {

double normalizer(const DetectionIntegrals& di, const Rect& window) {
  return static_cast<double>(window.area()) * std::max(window_stddev(di, window), 1.0);
}

double stage_score(const Stage& st, const DetectionIntegrals& di, const Rect& window, double scale,
                   double norm) {
  double s = 0.0;
  for (const auto& wc : st.weak) s += wc.alpha * wc.vote(haar_raw(di.sum, wc.feature, window, scale) / norm);
  return s;
}

}  // namespace

double haar_eval(const DetectionIntegrals& di, const HaarFeature& f, const Rect& window, double scale) {
  return haar_raw(di.sum, f, window, scale) / normalizer(di, window);
}

double Stage::alpha_sum() const {
  double s = 0.0;
  for (const auto& wc : weak) s += wc.alpha;
  return s;
}

double Stage::score(const DetectionIntegrals& di, const Rect& window, double scale) const {
  return stage_score(*this, di, window, scale, normalizer(di, window));
}

std::optional<double> classify_window(const CascadeModel& model, const DetectionIntegrals& di,
                                      const Rect& window, double scale) {
  const double norm = normalizer(di, window);
  double margin = 0.0;
  for (const auto& st : model.stages) {
    const double s = stage_score(st, di, window, scale, norm);
    if (s < st.threshold) return std::nullopt;
    const double total = st.alpha_sum();
    margin += 1.0 + (total > 0.0 ? (s - st.threshold) / total : 0.0);
  }
  return margin;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void expect_token(std::istream& in, const std::string& want) {
  std::string tok;
  if (!(in >> tok) || tok != want)
    throw Error(ErrorCode::format, "cascade model: expected '" + want + "', got '" + tok + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw Error(ErrorCode::format, std::string("cascade model: bad ") + what);
  return v;
}

}  // namespace

void save_model(std::ostream& out, const CascadeModel& m) {
  out << "ocular-cascade 1\n";
  out << "window " << m.window << " scale_step " << fmt_real(m.scale_step) << " scale_count "
      << m.scale_count << "\n";
  out << "stages " << m.stages.size() << "\n";
  for (const auto& st : m.stages) {
    out << "stage " << st.weak.size() << ' ' << fmt_real(st.threshold) << "\n";
    for (const auto& wc : st.weak) {
      const Rect& r = wc.feature.base;
      out << to_string(wc.feature.kind) << ' ' << r.x << ' ' << r.y << ' ' << r.w << ' ' << r.h << ' '
          << fmt_real(wc.threshold) << ' ' << wc.parity << ' ' << fmt_real(wc.alpha) << "\n";
    }
  }
}

void save_model(const std::string& path, const CascadeModel& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  save_model(out, m);
}

CascadeModel load_model(std::istream& in) {
  expect_token(in, "ocular-cascade");
  if (read_value<int>(in, "version") != 1) throw Error(ErrorCode::format, "unsupported cascade version");
  CascadeModel m;
  expect_token(in, "window");
  m.window = read_value<int>(in, "window");
  expect_token(in, "scale_step");
  m.scale_step = read_value<double>(in, "scale_step");
  expect_token(in, "scale_count");
  m.scale_count = read_value<int>(in, "scale_count");
  expect_token(in, "stages");
  const auto n_stages = read_value<std::size_t>(in, "stage count");
  if (n_stages == 0) throw Error(ErrorCode::format, "cascade model has no stages");
  for (std::size_t s = 0; s < n_stages; ++s) {
    expect_token(in, "stage");
    Stage st;
    const auto n_weak = read_value<std::size_t>(in, "weak count");
    st.threshold = read_value<double>(in, "stage threshold");
    for (std::size_t k = 0; k < n_weak; ++k) {
      WeakClassifier wc;
      wc.feature.kind = feature_kind_from_string(read_value<std::string>(in, "kind"));
      Rect& r = wc.feature.base;
      r.x = read_value<int>(in, "x");
      r.y = read_value<int>(in, "y");
      r.w = read_value<int>(in, "w");
      r.h = read_value<int>(in, "h");
      wc.threshold = read_value<double>(in, "threshold");
      wc.parity = read_value<int>(in, "parity");
      wc.alpha = read_value<double>(in, "alpha");
      if (!feature_fits(wc.feature, m.window) || (wc.parity != 1 && wc.parity != -1))
        throw Error(ErrorCode::format, "cascade model: invalid weak classifier");
      st.weak.push_back(wc);
    }
    m.stages.push_back(std::move(st));
  }
  return m;
}

CascadeModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return load_model(in);
}

// ---------------------------------------------------------------------------
// Detection

std::vector<Detection> merge_detections(const std::vector<Detection>& raw, double iou_threshold,
                                        int min_neighbors, int width, int height) {
  const std::size_t n = raw.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (iou(raw[i].rect, raw[j].rect) <= iou_threshold) continue;
      const std::size_t a = find(i), b = find(j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  // Roots are the smallest index of their group, so visiting roots in index
  // order emits groups in order of their first member.
  struct Acc {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0, score = 0;
    int count = 0;
  };
  std::vector<Acc> acc(n);
  for (std::size_t i = 0; i < n; ++i) {
    Acc& a = acc[find(i)];
    a.x0 += raw[i].rect.x;
    a.y0 += raw[i].rect.y;
    a.x1 += raw[i].rect.right();
    a.y1 += raw[i].rect.bottom();
    a.score += raw[i].score;
    ++a.count;
  }
  std::vector<Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Acc& a = acc[i];
    if (find(i) != i || a.count < min_neighbors) continue;
    const int x0 = std::clamp(static_cast<int>(std::lround(a.x0 / a.count)), 0, width - 1);
    const int y0 = std::clamp(static_cast<int>(std::lround(a.y0 / a.count)), 0, height - 1);
    const int x1 = std::clamp(static_cast<int>(std::lround(a.x1 / a.count)), x0 + 1, width);
    const int y1 = std::clamp(static_cast<int>(std::lround(a.y1 / a.count)), y0 + 1, height);
    out.push_back({Rect{x0, y0, x1 - x0, y1 - y0}, a.score});
  }
  return out;
}

std::vector<Detection> detect_multiscale(const GrayImage& img, const CascadeModel& model,
                                         const ScanParams& params) {
  if (model.stages.empty()) throw Error(ErrorCode::state, "cascade model has no stages");
  std::vector<Detection> raw;
  if (img.width() < model.window || img.height() < model.window) return raw;
  const DetectionIntegrals di = make_integrals(img);
  double scale = 1.0;
  for (int s = 0; s < model.scale_count; ++s, scale *= model.scale_step) {
    const int side = window_side(scale);
    if (side > img.width() || side > img.height()) break;
    const int stride = std::max(1, static_cast<int>(std::lround(scale * params.step)));
    for (int y = 0; y + side <= img.height(); y += stride) {
      for (int x = 0; x + side <= img.width(); x += stride) {
        const Rect win{x, y, side, side};
        if (auto score = classify_window(model, di, win, scale)) raw.push_back({win, *score});
      }
    }
  }
  return merge_detections(raw, params.merge_iou, params.min_neighbors, img.width(), img.height());
}

Rect remap_rect(const Rect& r, double sf, int width, int height) {
  const int x0 = std::clamp(static_cast<int>(std::lround(r.x * sf)), 0, width - 1);
  const int y0 = std::clamp(static_cast<int>(std::lround(r.y * sf)), 0, height - 1);
  const int x1 = std::clamp(static_cast<int>(std::lround(r.right() * sf)), x0 + 1, width);
  const int y1 = std::clamp(static_cast<int>(std::lround(r.bottom() * sf)), y0 + 1, height);
  return Rect{x0, y0, x1 - x0, y1 - y0};
}

std::optional<FaceRoi> detect_downsampled(const GrayImage& img, const CascadeModel& model, double sf,
                                          const ScanParams& params) {
  const GrayImage small = resample_bicubic(img, sf);
  const auto dets = detect_multiscale(small, model, params);
  if (dets.empty()) return std::nullopt;
  const Detection* best = &dets.front();
  for (const auto& d : dets)
    if (d.score > best->score) best = &d;
  const Rect face = best->rect;
  // The eyes sit in the upper half: the lower edge moves to the midpoint of
  // the vertical sides.
  const Rect roi{face.x, face.y, face.w, std::max(1, face.h / 2)};
  FaceRoi out;
  out.face = {remap_rect(face, sf, img.width(), img.height()), best->score};
  out.roi = remap_rect(roi, sf, img.width(), img.height());
  return out;
}

std::optional<RotatedFaceRoi> detect_with_rotation(const GrayImage& img, const CascadeModel& model,
                                                   double sf, const ScanParams& params) {
  for (double theta : kRotationAttempts) {
    const GrayImage upright = theta == 0.0 ? img : affine_rotate(img, -theta);
    if (auto found = detect_downsampled(upright, model, sf, params)) return RotatedFaceRoi{*found, theta};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Template matching

double ncc(const GrayImage& img, const GrayImage& tmpl, int x, int y) {
  const int tw = tmpl.width();
  const int th = tmpl.height();
  if (x < 0 || y < 0 || x + tw > img.width() || y + th > img.height())
    throw Error(ErrorCode::bounds, "template window outside image");
  const double n = static_cast<double>(tw) * th;
  double fm = 0.0, tm = 0.0;
  for (int j = 0; j < th; ++j) {
    for (int i = 0; i < tw; ++i) {
      fm += img.at(x + i, y + j);
      tm += tmpl.at(i, j);
    }
  }
  fm /= n;
  tm /= n;
  double sft = 0.0, sff = 0.0, stt = 0.0;
  for (int j = 0; j < th; ++j) {
    for (int i = 0; i < tw; ++i) {
      const double df = img.at(x + i, y + j) - fm;
      const double dt = tmpl.at(i, j) - tm;
      sft += df * dt;
      sff += df * df;
      stt += dt * dt;
    }
  }
  if (sff <= 0.0 || stt <= 0.0) return 0.0;
  return std::clamp(sft / std::sqrt(sff * stt), -1.0, 1.0);
}

std::vector<TemplateMatch> template_scores(const GrayImage& img, const GrayImage& tmpl, double overlap) {
  if (tmpl.width() > img.width() || tmpl.height() > img.height())
    throw Error(ErrorCode::size, "template larger than image");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(ErrorCode::parameter, "overlap must lie in [0, 1)");
  const int sx = std::max(1, static_cast<int>(std::floor(tmpl.width() * (1.0 - overlap))));
  const int sy = std::max(1, static_cast<int>(std::floor(tmpl.height() * (1.0 - overlap))));
  std::vector<TemplateMatch> out;
  for (int y = 0; y + tmpl.height() <= img.height(); y += sy)
    for (int x = 0; x + tmpl.width() <= img.width(); x += sx)
      out.push_back({Rect{x, y, tmpl.width(), tmpl.height()}, ncc(img, tmpl, x, y)});
  return out;
}

std::vector<TemplateMatch> template_match(const GrayImage& img, const GrayImage& tmpl, double overlap,
                                          double min_gamma) {
  auto all = template_scores(img, tmpl, overlap);
  std::vector<TemplateMatch> out;
  for (const auto& m : all)
    if (m.gamma >= min_gamma) out.push_back(m);
  return out;
}

}  // namespace ocular::cascade
