#include "ocular/eyestate.hpp"

#include <cmath>

namespace ocular::eyestate {

const char* to_string(EyeState s) {
  switch (s) {
    case EyeState::open: return "open";
    case EyeState::closed: return "closed";
    case EyeState::unknown: return "unknown";
  }
  return "unknown";
}

EyeState eye_state_from_string(const std::string& s) {
  if (s == "open") return EyeState::open;
  if (s == "closed") return EyeState::closed;
  if (s == "unknown" || s.empty()) return EyeState::unknown;
  throw Error(ErrorCode::format, "unknown eye state '" + s + "'");
}

int lbp_code(const std::array<std::uint8_t, 9>& patch) {
  const int center = patch[4];
  int code = 0;
  for (std::size_t n = 0; n < kLbpNeighbors.size(); ++n) {
    const int dx = kLbpNeighbors[n][0];
    const int dy = kLbpNeighbors[n][1];
    if (patch[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)] >= center) code |= 1 << n;
  }
  return code;
}

GrayImage lbp_image(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  std::array<std::uint8_t, 9> patch{};
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
          patch[static_cast<std::size_t>((dy + 1) * 3 + dx + 1)] = img.clamped(x + dx, y + dy);
      out.at(x, y) = static_cast<std::uint8_t>(lbp_code(patch));
    }
  }
  return out;
}

std::vector<double> block_lbp(const GrayImage& eye) {
  const GrayImage sized =
      (eye.width() == kEyeWidth && eye.height() == kEyeHeight) ? eye : resize_bicubic(eye, kEyeWidth, kEyeHeight);
  const GrayImage codes = lbp_image(sized);
  std::vector<double> desc(kDescriptorLength, 0.0);
  const int blocks_x = kEyeWidth / kBlockWidth;
  for (int y = 0; y < kEyeHeight; ++y) {
    for (int x = 0; x < kEyeWidth; ++x) {
      const int block = (y / kBlockHeight) * blocks_x + x / kBlockWidth;
      desc[static_cast<std::size_t>(block) * kBins + codes.at(x, y) / 16] += 1.0;
    }
  }
  return desc;
}

std::vector<double> eye_features(const GrayImage& eye, const subspace::SubspaceModel& model) {
  if (model.window_w > 0 && model.window_h > 0)
    return subspace::project(model, subspace::window_vector(eye, model.window_w, model.window_h));
  if (model.dim == kDescriptorLength) return subspace::project(model, block_lbp(eye));
  throw Error(ErrorCode::input, "subspace model is neither an image model nor an LBP model");
}

EyeStateResult eye_state(const GrayImage& eye, const subspace::SubspaceModel& model, const KernelClassifier& clf) {
  const double score = clf.decision(eye_features(eye, model));
  if (!std::isfinite(score)) return {EyeState::unknown, score};
  return {score > 0.0 ? EyeState::closed : EyeState::open, score};
}

double perclos_percent(std::size_t closed, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::domain, "PERCLOS is undefined without known frames");
  if (closed > total) throw Error(ErrorCode::parameter, "closed count exceeds total");
  return 100.0 * static_cast<double>(closed) / static_cast<double>(total);
}

std::vector<PerclosRow> perclos(const std::vector<EyeState>& states, const PerclosParams& p) {
  if (!(p.fps > 0.0)) throw Error(ErrorCode::parameter, "fps must be positive");
  if (!(p.stride_s > 0.0) || p.stride_s > p.window_s)
    throw Error(ErrorCode::parameter, "stride must be positive and no longer than the window");
  const auto window_frames = static_cast<std::size_t>(std::llround(p.window_s * p.fps));
  std::vector<PerclosRow> rows;
  for (int minute = 1;; ++minute) {
    const auto end = static_cast<std::size_t>(std::llround(minute * p.stride_s * p.fps));
    if (end > states.size() || end == 0) break;
    PerclosRow r;
    r.minute = minute;
    r.end_frame = end;
    r.start_frame = end > window_frames ? end - window_frames : 0;
    r.warmup = end < window_frames;
    for (std::size_t i = r.start_frame; i < end; ++i) {
      if (states[i] == EyeState::unknown) continue;
      ++r.known;
      r.closed += states[i] == EyeState::closed;
    }
    if (r.known > 0) r.percent = perclos_percent(r.closed, r.known);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ocular::eyestate
