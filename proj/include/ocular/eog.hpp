#pragma once

// EOG conditioning: band-pass, mean removal, hard truncation, per-unit
// scaling, saccadic peak isolation, and Pearson correlation.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ocular::eog {

struct Series {
  std::vector<double> samples;
  double rate = 256.0;  // Hz
};

/// Zero-phase band-pass: 2nd-order Butterworth high-pass at f_lo followed by
/// a 2nd-order Butterworth low-pass at f_hi, run forward then backward with
/// odd-extension padding and steady-state initial conditions.
Series bandpass(const Series& x, double f_lo = 0.4, double f_hi = 30.0);

/// d(n) = r(n) - mean(r)
Series normalize(const Series& x);

/// Zeroes samples with |d| <= frac * max|d|.
Series truncate(const Series& x, double frac = 0.15);

/// Divides by |max(m)|, the signed maximum.
Series per_unit(const Series& x);

/// Positive samples over |max|, negative samples over |min|, so each
/// polarity peaks at magnitude 1.
Series per_unit_by_polarity(const Series& x);

struct SaccadePeak {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
  double amplitude = 0.0;
  double peak_velocity = 0.0;  // per-unit per sample
  int sign = 1;

  double peak_velocity_per_second(double rate) const { return peak_velocity * rate; }
  double duration_seconds(double rate) const { return static_cast<double>(end - start + 1) / rate; }
};

/// Maximal runs of nonzero samples. Velocity differences are taken inside
/// the run only, so the step from the zero gap into the run does not count.
std::vector<SaccadePeak> isolate_peaks(const Series& x);

/// filter -> normalize -> truncate -> per-unit by polarity -> peaks
std::vector<SaccadePeak> analyze(const Series& raw, double f_lo = 0.4, double f_hi = 30.0, double frac = 0.15);

/// Pearson r; nullopt when either input has zero variance.
std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b);

/// One sample per line after a "rate_hz=<value>" line (optionally prefixed by '#').
Series read_csv(std::istream& in);
Series read_csv(const std::string& path);
void write_csv(std::ostream& out, const Series& s);

}  // namespace ocular::eog
