#include "ocular/synth.hpp"

#include <algorithm>
#include <cmath>

#include "ocular/error.hpp"

namespace ocular::synth {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

double gaussian(Rng& rng, double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng); }

namespace {

std::uint8_t clamp_px(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

int clamp_value(int v) { return std::clamp(v, 0, 255); }

template <typename Inside>
void paint(GrayImage& img, int x0, int y0, int x1, int y1, int value, Inside inside) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width() - 1);
  y1 = std::min(y1, img.height() - 1);
  const auto v = static_cast<std::uint8_t>(clamp_value(value));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (inside(x + 0.5, y + 0.5)) img.at(x, y) = v;
}

}  // namespace

void fill_rect(GrayImage& img, const Rect& r, int value) {
  paint(img, r.x, r.y, r.right() - 1, r.bottom() - 1, value, [](double, double) { return true; });
}

void fill_ellipse(GrayImage& img, double cx, double cy, double ax, double ay, int value) {
  if (ax <= 0.0 || ay <= 0.0) return;
  paint(img, static_cast<int>(std::floor(cx - ax)), static_cast<int>(std::floor(cy - ay)),
        static_cast<int>(std::ceil(cx + ax)), static_cast<int>(std::ceil(cy + ay)), value, [&](double x, double y) {
          const double u = (x - cx) / ax, v = (y - cy) / ay;
          return u * u + v * v <= 1.0;
        });
}

void draw_ellipse_outline(GrayImage& img, double cx, double cy, double ax, double ay, double thickness, int value) {
  const double bx = ax - thickness, by = ay - thickness;
  paint(img, static_cast<int>(std::floor(cx - ax)), static_cast<int>(std::floor(cy - ay)),
        static_cast<int>(std::ceil(cx + ax)), static_cast<int>(std::ceil(cy + ay)), value, [&](double x, double y) {
          const double u = (x - cx) / ax, v = (y - cy) / ay;
          if (u * u + v * v > 1.0) return false;
          if (bx <= 0.0 || by <= 0.0) return true;
          const double p = (x - cx) / bx, q = (y - cy) / by;
          return p * p + q * q > 1.0;
        });
}

void fill_disk(GrayImage& img, double cx, double cy, double r, int value) { fill_ellipse(img, cx, cy, r, r, value); }

void draw_line(GrayImage& img, PointF a, PointF b, double thickness, int value) {
  const double half = thickness / 2.0;
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  paint(img, static_cast<int>(std::floor(std::min(a.x, b.x) - half)),
        static_cast<int>(std::floor(std::min(a.y, b.y) - half)), static_cast<int>(std::ceil(std::max(a.x, b.x) + half)),
        static_cast<int>(std::ceil(std::max(a.y, b.y) + half)), value, [&](double x, double y) {
          double t = len2 > 0.0 ? ((x - a.x) * dx + (y - a.y) * dy) / len2 : 0.0;
          t = std::clamp(t, 0.0, 1.0);
          const double px = a.x + t * dx - x, py = a.y + t * dy - y;
          return px * px + py * py <= half * half;
        });
}

void add_noise(GrayImage& img, double sigma, Rng& rng) {
  if (sigma <= 0.0) return;
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& p : img.pixels()) p = clamp_px(p + n(rng));
}

GrayImage background(int w, int h, Rng& rng) {
  GrayImage img(w, h);
  const double base = uniform(rng, 60.0, 190.0);
  const double gx = uniform(rng, -0.3, 0.3), gy = uniform(rng, -0.3, 0.3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = clamp_px(base + gx * (x - w / 2.0) + gy * (y - h / 2.0));
  const int blobs = 4 + static_cast<int>(rng() % 8);
  for (int i = 0; i < blobs; ++i) {
    const double ax = uniform(rng, 0.04, 0.3) * w, ay = uniform(rng, 0.04, 0.3) * h;
    fill_ellipse(img, uniform(rng, 0, w), uniform(rng, 0, h), ax, ay, static_cast<int>(uniform(rng, 20, 240)));
  }
  const int strokes = 2 + static_cast<int>(rng() % 6);
  for (int i = 0; i < strokes; ++i) {
    const PointF a{uniform(rng, 0, w), uniform(rng, 0, h)};
    const PointF b{uniform(rng, 0, w), uniform(rng, 0, h)};
    draw_line(img, a, b, uniform(rng, 1.0, 5.0), static_cast<int>(uniform(rng, 10, 250)));
  }
  const int boxes = static_cast<int>(rng() % 4);
  for (int i = 0; i < boxes; ++i) {
    const int bw = static_cast<int>(uniform(rng, 0.05, 0.35) * w), bh = static_cast<int>(uniform(rng, 0.05, 0.35) * h);
    fill_rect(img, Rect{static_cast<int>(uniform(rng, 0, w - bw)), static_cast<int>(uniform(rng, 0, h - bh)), bw, bh},
              static_cast<int>(uniform(rng, 10, 250)));
  }
  add_noise(img, 4.0, rng);
  return img;
}

FaceStyle random_style(Rng& rng) {
  FaceStyle s;
  s.skin = static_cast<int>(uniform(rng, 150.0, 210.0));
  return s;
}

namespace {

struct Frame {
  double x, y, w, h;
  PointF at(double u, double v) const { return {x + u * w, y + v * h}; }
};

// Brows, eyes, nose, mouth and optional rims in face-relative coordinates.
void draw_features(GrayImage& img, const Frame& f, const FaceStyle& s, Rng& rng, PointF& left_iris,
                   PointF& right_iris) {
  const double brow_t = std::max(1.5, 0.04 * f.h);
  const double tilt = uniform(rng, -0.01, 0.01);
  draw_line(img, f.at(0.18, 0.26 + tilt), f.at(0.42, 0.24), brow_t, s.skin - 90);
  draw_line(img, f.at(0.58, 0.24), f.at(0.82, 0.26 - tilt), brow_t, s.skin - 90);

  const double gaze = uniform(rng, -0.03, 0.03);
  for (int side = 0; side < 2; ++side) {
    const double ex = side == 0 ? 0.3 : 0.7;
    const PointF c = f.at(ex, 0.38);
    if (s.eyes_closed) {
      draw_line(img, f.at(ex - 0.11, 0.385), f.at(ex + 0.11, 0.385), std::max(1.5, 0.025 * f.h), s.skin - 100);
      draw_line(img, f.at(ex - 0.09, 0.405), f.at(ex + 0.09, 0.405), std::max(1.0, 0.012 * f.h), s.skin - 60);
    } else {
      fill_ellipse(img, c.x, c.y, 0.11 * f.w, 0.055 * f.h, std::min(250, s.skin + 45));
      const PointF iris{c.x + gaze * f.w, c.y};
      fill_ellipse(img, iris.x, iris.y, 0.045 * f.w, std::min(0.045 * f.w, 0.055 * f.h), 55);
      fill_disk(img, iris.x, iris.y, 0.018 * f.w, 20);
      (side == 0 ? left_iris : right_iris) = iris;
    }
    if (s.spectacles) {
      draw_ellipse_outline(img, c.x, c.y, 0.16 * f.w, 0.1 * f.h, std::max(2.0, 0.025 * f.w), 30);
    }
  }
  if (s.eyes_closed) {
    left_iris = f.at(0.3, 0.38);
    right_iris = f.at(0.7, 0.38);
  }
  if (s.spectacles) draw_line(img, f.at(0.45, 0.37), f.at(0.55, 0.37), std::max(2.0, 0.025 * f.w), 30);

  draw_line(img, f.at(0.5, 0.42), f.at(0.5, 0.6), std::max(1.0, 0.03 * f.w), s.skin - 30);
  fill_ellipse(img, f.at(0.5, 0.75).x, f.at(0.5, 0.75).y, 0.17 * f.w, 0.04 * f.h, s.skin - 85);
}

Rect eye_window(const Frame& f, double ex) {
  const double w = 0.25 * f.w, h = 0.2857 * f.h;
  const PointF c = f.at(ex, 0.38);
  return Rect{static_cast<int>(std::lround(c.x - w / 2)), static_cast<int>(std::lround(c.y - h / 2)),
              static_cast<int>(std::lround(w)), static_cast<int>(std::lround(h))};
}

}  // namespace

FaceTruth draw_face(GrayImage& img, const Rect& face, const FaceStyle& style, Rng& rng) {
  const Frame f{static_cast<double>(face.x), static_cast<double>(face.y), static_cast<double>(face.w),
                static_cast<double>(face.h)};
  fill_ellipse(img, f.x + f.w / 2, f.y + f.h / 2, f.w / 2, f.h / 2, style.skin);
  FaceTruth t;
  t.face = face;
  draw_features(img, f, style, rng, t.left_iris, t.right_iris);
  t.left_eye = eye_window(f, 0.3);
  t.right_eye = eye_window(f, 0.7);
  return t;
}

Scene face_scene(int w, int h, int face_size, const FaceStyle& style, Rng& rng) {
  if (face_size > w || face_size > h) throw Error(ErrorCode::size, "face larger than the scene");
  Scene s;
  s.image = background(w, h, rng);
  const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(w - face_size + 1));
  const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(h - face_size + 1));
  s.truth = draw_face(s.image, Rect{x, y, face_size, face_size}, style, rng);
  add_noise(s.image, 3.0, rng);
  return s;
}

GrayImage face_window(Rng& rng) {
  const int side = 72;
  const int jitter = 3;
  GrayImage canvas = background(side + 2 * jitter, side + 2 * jitter, rng);
  FaceStyle style = random_style(rng);
  style.eyes_closed = rng() % 4 == 0;
  style.spectacles = rng() % 6 == 0;
  draw_face(canvas, Rect{jitter, jitter, side, side}, style, rng);
  add_noise(canvas, 3.0, rng);
  const int ox = static_cast<int>(rng() % (2 * jitter + 1));
  const int oy = static_cast<int>(rng() % (2 * jitter + 1));
  return resize_bicubic(crop(canvas, Rect{ox, oy, side, side}), 24, 24);
}

namespace {

GrayImage rendered_face(Rng& rng, bool closed, int side, FaceTruth& truth) {
  GrayImage img = background(side, side, rng);
  FaceStyle style = random_style(rng);
  style.eyes_closed = closed;
  style.spectacles = rng() % 6 == 0;
  truth = draw_face(img, Rect{0, 0, side, side}, style, rng);
  add_noise(img, 3.0, rng);
  return img;
}

Rect jittered(Rect r, int jitter, Rng& rng, int w, int h) {
  if (jitter > 0) {
    r.x += static_cast<int>(rng() % static_cast<std::uint64_t>(2 * jitter + 1)) - jitter;
    r.y += static_cast<int>(rng() % static_cast<std::uint64_t>(2 * jitter + 1)) - jitter;
  }
  r.x = std::clamp(r.x, 0, w - r.w);
  r.y = std::clamp(r.y, 0, h - r.h);
  return r;
}

}  // namespace

GrayImage eye_patch(eyestate::EyeState state, Rng& rng, int jitter) {
  const int side = static_cast<int>(uniform(rng, 100.0, 180.0));
  FaceTruth t;
  const GrayImage face = rendered_face(rng, state == eyestate::EyeState::closed, side, t);
  const Rect eye = jittered(rng() % 2 ? t.left_eye : t.right_eye, jitter * side / 160, rng, side, side);
  return resize_bicubic(crop(face, eye), eyestate::kEyeWidth, eyestate::kEyeHeight);
}

GrayImage non_eye_patch(Rng& rng) {
  const int side = static_cast<int>(uniform(rng, 100.0, 180.0));
  if (rng() % 3 == 0) {
    const GrayImage bg = background(side, side, rng);
    const int w = static_cast<int>(0.25 * side), h = static_cast<int>(0.2857 * side);
    const Rect r{static_cast<int>(rng() % static_cast<std::uint64_t>(side - w)),
                 static_cast<int>(rng() % static_cast<std::uint64_t>(side - h)), w, h};
    return resize_bicubic(crop(bg, r), eyestate::kEyeWidth, eyestate::kEyeHeight);
  }
  FaceTruth t;
  const GrayImage face = rendered_face(rng, rng() % 2 == 0, side, t);
  // Forehead, cheeks, nose and mouth windows of the eye-window size.
  static constexpr double kSpots[][2] = {{0.5, 0.12}, {0.25, 0.6}, {0.75, 0.6}, {0.5, 0.52}, {0.5, 0.76}, {0.5, 0.38}};
  const auto& s = kSpots[rng() % std::size(kSpots)];
  const int w = static_cast<int>(0.25 * side), h = static_cast<int>(0.2857 * side);
  Rect r{static_cast<int>(s[0] * side - w / 2.0), static_cast<int>(s[1] * side - h / 2.0), w, h};
  r = jittered(r, 4, rng, side, side);
  return resize_bicubic(crop(face, r), eyestate::kEyeWidth, eyestate::kEyeHeight);
}

double almond_left(const IrisClipStyle& s) { return 0.1 * s.width; }
double almond_right(const IrisClipStyle& s) { return 0.9 * s.width; }

GrayImage iris_eye(const IrisClipStyle& s, PointF center, Rng& rng) {
  GrayImage img(s.width, s.height, 165);
  const double cx = s.width / 2.0, cy = s.height / 2.0;
  const double half_w = 0.4 * s.width, half_h = 0.34 * s.height;
  auto inside = [&](double x, double y) {
    const double u = (x - cx) / half_w;
    return std::abs(u) < 1.0 && std::abs(y - cy) < half_h * (1.0 - u * u);
  };
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      if (!inside(px, py)) continue;
      const double d = std::hypot(px - center.x, py - center.y);
      int v = 225;
      if (d <= s.iris_radius) v = 70;
      if (d <= 0.45 * s.iris_radius) v = 25;
      img.at(x, y) = static_cast<std::uint8_t>(v);
    }
  fill_disk(img, center.x + 0.3 * s.iris_radius, center.y - 0.3 * s.iris_radius, 2.0, 255);
  add_noise(img, s.noise, rng);
  return img;
}

GrayImage spectacle_face(int b, bool glasses, Rng& rng) {
  FaceStyle style = random_style(rng);
  style.spectacles = glasses;
  GrayImage img(b, b, static_cast<std::uint8_t>(style.skin));
  const Frame f{0.0, 0.0, static_cast<double>(b), static_cast<double>(b)};
  PointF l, r;
  draw_features(img, f, style, rng, l, r);
  add_noise(img, 3.0, rng);
  return img;
}

std::vector<double> sigmoid_trajectory(std::size_t n, double fps, double t0, double amplitude, double k) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fps;
    out[i] = amplitude / (1.0 + std::exp(-k * (t - t0)));
  }
  return out;
}

}  // namespace ocular::synth
