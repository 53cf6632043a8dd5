#include "ocular/eog.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ocular/error.hpp"

namespace ocular::eog {

namespace {

struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{1.0, 0.0, 0.0};

  double dc_gain() const { return (b[0] + b[1] + b[2]) / (a[0] + a[1] + a[2]); }
};

// Bilinear transform of a 2nd-order Butterworth prototype with prewarping.
Biquad butter2(double fc, double rate, bool highpass) {
  const double k = std::tan(std::numbers::pi * fc / rate);
  const double q = std::numbers::sqrt2;
  const double norm = 1.0 / (1.0 + q * k + k * k);
  Biquad s;
  if (highpass) {
    s.b = {norm, -2.0 * norm, norm};
  } else {
    const double g = k * k * norm;
    s.b = {g, 2.0 * g, g};
  }
  s.a = {1.0, 2.0 * (k * k - 1.0) * norm, (1.0 - q * k + k * k) * norm};
  return s;
}

// Transposed direct form II, states scaled for a step of height x0.
std::vector<double> run_section(const Biquad& s, const std::vector<double>& x, double input_level) {
  const double g = s.dc_gain();
  double z2 = (s.b[2] - s.a[2] * g) * input_level;
  double z1 = (s.b[1] - s.a[1] * g) * input_level + z2;
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double out = s.b[0] * x[n] + z1;
    z1 = s.b[1] * x[n] - s.a[1] * out + z2;
    z2 = s.b[2] * x[n] - s.a[2] * out;
    y[n] = out;
  }
  return y;
}

std::vector<double> run_cascade(const std::vector<Biquad>& sections, std::vector<double> x) {
  if (x.empty()) return x;
  double level = x.front();
  for (const Biquad& s : sections) {
    x = run_section(s, x, level);
    level *= s.dc_gain();
  }
  return x;
}

void require_samples(const Series& x) {
  if (x.samples.empty()) throw Error(ErrorCode::input, "empty series");
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double s : v) m = std::max(m, std::abs(s));
  return m;
}

}  // namespace

Series bandpass(const Series& x, double f_lo, double f_hi) {
  if (!(x.rate > 0.0)) throw Error(ErrorCode::parameter, "sampling rate must be positive");
  if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < x.rate / 2.0))
    throw Error(ErrorCode::parameter, "band must satisfy 0 < f_lo < f_hi < rate/2");
  const std::vector<Biquad> sections = {butter2(f_lo, x.rate, true), butter2(f_hi, x.rate, false)};
  const std::vector<double>& s = x.samples;
  Series out{{}, x.rate};
  if (s.empty()) return out;

  const std::size_t n = s.size();
  const std::size_t pad = std::min<std::size_t>(n - 1, 3 * (2 * sections.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * s.front() - s[i]);
  ext.insert(ext.end(), s.begin(), s.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * s.back() - s[n - 1 - i]);

  std::vector<double> y = run_cascade(sections, std::move(ext));
  std::reverse(y.begin(), y.end());
  y = run_cascade(sections, std::move(y));
  std::reverse(y.begin(), y.end());
  out.samples.assign(y.begin() + static_cast<std::ptrdiff_t>(pad), y.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return out;
}

Series normalize(const Series& x) {
  require_samples(x);
  const double n = static_cast<double>(x.samples.size());
  double mean = 0.0;
  for (double s : x.samples) mean += s;
  mean /= n;
  // Second pass removes the rounding left by the first.
  double resid = 0.0;
  for (double s : x.samples) resid += s - mean;
  mean += resid / n;
  Series out{x.samples, x.rate};
  for (double& s : out.samples) s -= mean;
  return out;
}

Series truncate(const Series& x, double frac) {
  if (!(frac > 0.0 && frac < 1.0)) throw Error(ErrorCode::parameter, "truncation fraction must lie in (0, 1)");
  Series out{x.samples, x.rate};
  const double cut = frac * max_abs(x.samples);
  if (cut == 0.0) return out;
  for (double& s : out.samples)
    if (!(std::abs(s) > cut)) s = 0.0;
  return out;
}

Series per_unit(const Series& x) {
  require_samples(x);
  const double m = std::abs(*std::max_element(x.samples.begin(), x.samples.end()));
  if (m == 0.0) throw Error(ErrorCode::domain, "per-unit scaling needs a nonzero maximum");
  Series out{x.samples, x.rate};
  for (double& s : out.samples) s /= m;
  return out;
}

Series per_unit_by_polarity(const Series& x) {
  require_samples(x);
  const auto [lo, hi] = std::minmax_element(x.samples.begin(), x.samples.end());
  const double pos = std::max(0.0, *hi);
  const double neg = std::max(0.0, -*lo);
  if (pos == 0.0 && neg == 0.0) throw Error(ErrorCode::domain, "per-unit scaling of an all-zero series");
  Series out{x.samples, x.rate};
  for (double& s : out.samples) {
    if (s > 0.0) s /= pos;
    else if (s < 0.0) s /= neg;
  }
  return out;
}

std::vector<SaccadePeak> isolate_peaks(const Series& x) {
  std::vector<SaccadePeak> peaks;
  const std::vector<double>& s = x.samples;
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == 0.0) {
      ++i;
      continue;
    }
    SaccadePeak p;
    p.start = i;
    double extreme = s[i];
    while (i < s.size() && s[i] != 0.0) {
      if (std::abs(s[i]) > std::abs(extreme)) extreme = s[i];
      if (i > p.start) p.peak_velocity = std::max(p.peak_velocity, std::abs(s[i] - s[i - 1]));
      ++i;
    }
    p.end = i - 1;
    p.amplitude = std::abs(extreme);
    p.sign = extreme < 0.0 ? -1 : 1;
    peaks.push_back(p);
  }
  return peaks;
}

std::vector<SaccadePeak> analyze(const Series& raw, double f_lo, double f_hi, double frac) {
  const Series m = truncate(normalize(bandpass(raw, f_lo, f_hi)), frac);
  if (max_abs(m.samples) == 0.0) return {};
  return isolate_peaks(per_unit_by_polarity(m));
}

std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::size, "pearson inputs differ in length");
  if (a.size() < 2) throw Error(ErrorCode::size, "pearson needs at least two samples");
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  const double denom = saa == sbb ? saa : std::sqrt(saa) * std::sqrt(sbb);
  return std::clamp(sab / denom, -1.0, 1.0);
}

Series read_csv(std::istream& in) {
  Series s;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::format, "EOG file is empty");
  std::string head = line;
  head.erase(0, head.find_first_not_of("# \t"));
  const std::string key = "rate_hz=";
  if (head.rfind(key, 0) != 0) throw Error(ErrorCode::format, "EOG file must start with rate_hz=<value>");
  try {
    s.rate = std::stod(head.substr(key.size()));
  } catch (const std::exception&) {
    throw Error(ErrorCode::format, "unreadable sampling rate '" + head + "'");
  }
  if (!(s.rate > 0.0) || !std::isfinite(s.rate)) throw Error(ErrorCode::format, "sampling rate must be positive");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    double v = 0.0;
    if (!(ls >> v) || !std::isfinite(v))
      throw Error(ErrorCode::format, "bad EOG sample on line " + std::to_string(lineno));
    s.samples.push_back(v);
  }
  return s;
}

Series read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const Series& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.rate);
  out << "# rate_hz=" << buf << '\n';
  for (double v : s.samples) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf << '\n';
  }
}

}  // namespace ocular::eog
