#pragma once

// Procedural renderers for the synthetic corpora: face proxies, eye
// patches, iris clips, spectacle crops, and gaze trajectories.

#include <cstdint>
#include <random>
#include <vector>

#include "ocular/eyestate.hpp"
#include "ocular/imgcore.hpp"

namespace ocular::synth {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);
double gaussian(Rng& rng, double sigma);

void fill_rect(GrayImage& img, const Rect& r, int value);
void fill_ellipse(GrayImage& img, double cx, double cy, double ax, double ay, int value);
/// Ring between the ellipse (ax, ay) and the one shrunk by thickness.
void draw_ellipse_outline(GrayImage& img, double cx, double cy, double ax, double ay, double thickness, int value);
void fill_disk(GrayImage& img, double cx, double cy, double r, int value);
void draw_line(GrayImage& img, PointF a, PointF b, double thickness, int value);
void add_noise(GrayImage& img, double sigma, Rng& rng);

/// Smooth shading, random blobs and strokes, plus noise. Contains nothing
/// face-like by construction.
GrayImage background(int w, int h, Rng& rng);

struct FaceStyle {
  int skin = 180;
  bool eyes_closed = false;
  bool spectacles = false;
};

FaceStyle random_style(Rng& rng);

struct FaceTruth {
  Rect face;
  Rect left_eye;   // eye windows with the 50:40 aspect of the eye model after ROI resizing
  Rect right_eye;
  PointF left_iris;
  PointF right_iris;
};

/// Draws a face proxy filling the rectangle: bright oval, dark brows, eyes
/// (dark iris discs or closed lid lines), nose shadow, mouth.
FaceTruth draw_face(GrayImage& img, const Rect& face, const FaceStyle& style, Rng& rng);

struct Scene {
  GrayImage image;
  FaceTruth truth;
};

/// Background with one face of side face_size at a random position.
Scene face_scene(int w, int h, int face_size, const FaceStyle& style, Rng& rng);

/// 24x24 face window: a face rendered at a larger size with small jitter,
/// downsampled.
GrayImage face_window(Rng& rng);

/// 50x40 eye patch cut from a rendered face the same way the pipeline cuts
/// it, with position jitter.
GrayImage eye_patch(eyestate::EyeState state, Rng& rng, int jitter = 4);

/// Random non-eye 50x40 patch (background or face regions away from eyes).
GrayImage non_eye_patch(Rng& rng);

struct IrisClipStyle {
  int width = 160;
  int height = 96;
  double iris_radius = 16.0;
  double noise = 2.0;
};

/// Eye crop: skin, almond sclera spanning 10%..90% of the width, iris and
/// pupil discs centered at (cx, cy), small glint.
GrayImage iris_eye(const IrisClipStyle& style, PointF center, Rng& rng);

/// Horizontal positions of the almond corners in iris_eye.
double almond_left(const IrisClipStyle& style);
double almond_right(const IrisClipStyle& style);

/// Upper-face crop of breadth b (b x b): skin, brows, eyes, optional
/// spectacle rims joined by a bridge.
GrayImage spectacle_face(int b, bool glasses, Rng& rng);

/// a / (1 + exp(-k (t - t0))) sampled at n frames of rate fps.
std::vector<double> sigmoid_trajectory(std::size_t n, double fps, double t0, double amplitude, double k);

}  // namespace ocular::synth
