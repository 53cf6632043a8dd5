#include "ocular/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ocular/error.hpp"

namespace ocular::data {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::format, "bad number '" + s + "' for " + what);
  }
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::format, "bad integer '" + s + "' for " + what);
  }
}

std::optional<Rect> parse_rect(const std::vector<std::string>& f, std::size_t at, const std::string& what) {
  const bool any = std::any_of(f.begin() + static_cast<std::ptrdiff_t>(at),
                               f.begin() + static_cast<std::ptrdiff_t>(at + 4),
                               [](const std::string& s) { return !s.empty(); });
  if (!any) return std::nullopt;
  Rect r{parse_int(f[at], what), parse_int(f[at + 1], what), parse_int(f[at + 2], what), parse_int(f[at + 3], what)};
  if (r.w <= 0 || r.h <= 0) throw Error(ErrorCode::format, what + " rectangle must have positive size");
  return r;
}

}  // namespace

std::string frame_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06d.pgm", index);
  return buf;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::format, path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

Manifest read_manifest(const fs::path& path) {
  Manifest m;
  bool have_fps = false, have_frames = false;
  for (const auto& [k, v] : read_key_values(path)) {
    if (k == "fps") {
      m.fps = parse_double(v, "fps");
      have_fps = true;
    } else if (k == "frames") {
      m.frames = parse_int(v, "frames");
      have_frames = true;
    } else if (k == "truth") {
      m.truth = v;
    } else {
      throw Error(ErrorCode::format, "unknown manifest key '" + k + "'");
    }
  }
  if (!have_fps || !have_frames) throw Error(ErrorCode::format, "manifest needs fps= and frames=");
  if (!(m.fps > 0.0)) throw Error(ErrorCode::format, "fps must be positive");
  if (m.frames < 0) throw Error(ErrorCode::format, "frame count must be non-negative");
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", m.fps);
  out << "fps=" << buf << "\nframes=" << m.frames << '\n';
  if (m.truth) out << "truth=" << *m.truth << '\n';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

static const char* kTruthHeader = "frame,face_x,face_y,face_w,face_h,eye_x,eye_y,eye_w,eye_h,state,iris_x,iris_y";

std::vector<TruthRow> read_truth(const fs::path& path, int frame_count) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTruthHeader)
    throw Error(ErrorCode::format, "ground truth must start with the header " + std::string(kTruthHeader));
  std::vector<TruthRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 12) throw Error(ErrorCode::format, where + ": expected 12 fields");
    TruthRow r;
    r.frame = parse_int(f[0], where);
    if (r.frame < 0 || r.frame >= frame_count) throw Error(ErrorCode::format, where + ": frame outside dataset");
    r.face = parse_rect(f, 1, where);
    r.eye = parse_rect(f, 5, where);
    r.state = eyestate::eye_state_from_string(f[9]);
    if (!f[10].empty() || !f[11].empty()) r.iris = PointF{parse_double(f[10], where), parse_double(f[11], where)};
    rows.push_back(r);
  }
  return rows;
}

void write_truth(const fs::path& path, const std::vector<TruthRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << kTruthHeader << '\n';
  auto rect = [&](const std::optional<Rect>& r) {
    if (r) out << r->x << ',' << r->y << ',' << r->w << ',' << r->h;
    else out << ",,,";
  };
  for (const auto& r : rows) {
    out << r.frame << ',';
    rect(r.face);
    out << ',';
    rect(r.eye);
    out << ',' << (r.state == eyestate::EyeState::unknown ? "" : eyestate::to_string(r.state)) << ',';
    if (r.iris) out << fixed6(r.iris->x) << ',' << fixed6(r.iris->y);
    else out << ',';
    out << '\n';
  }
}

FrameDataset FrameDataset::open(const fs::path& dir) {
  FrameDataset ds;
  ds.dir_ = dir;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::io, "dataset directory not found: " + dir.string());
  ds.manifest_ = read_manifest(dir / "manifest.txt");
  if (ds.manifest_.truth) ds.truth_ = read_truth(dir / *ds.manifest_.truth, ds.manifest_.frames);
  return ds;
}

std::optional<TruthRow> FrameDataset::truth_for(int frame) const {
  for (const auto& r : truth_)
    if (r.frame == frame) return r;
  return std::nullopt;
}

fs::path FrameDataset::frame_path(int index) const { return dir_ / frame_name(index); }

GrayImage FrameDataset::frame(int index) const {
  if (index < 0 || index >= manifest_.frames) throw Error(ErrorCode::bounds, "frame index outside dataset");
  return read_pgm(frame_path(index).string());
}

void write_dataset(const fs::path& dir, const std::vector<GrayImage>& frames, double fps,
                   const std::vector<TruthRow>& truth) {
  fs::create_directories(dir);
  for (std::size_t i = 0; i < frames.size(); ++i)
    write_pgm((dir / frame_name(static_cast<int>(i))).string(), frames[i]);
  Manifest m;
  m.fps = fps;
  m.frames = static_cast<int>(frames.size());
  if (!truth.empty()) {
    m.truth = "truth.csv";
    write_truth(dir / "truth.csv", truth);
  }
  write_manifest(dir / "manifest.txt", m);
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace ocular::data
