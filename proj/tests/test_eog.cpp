#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ocular/eog.hpp"
#include "ocular/synth.hpp"
#include "support.hpp"

using namespace ocular;
using namespace ocular::eog;
using namespace testsupport;

namespace {

Series sine(double freq, double rate, std::size_t n, double amp = 1.0) {
  Series s;
  s.rate = rate;
  for (std::size_t i = 0; i < n; ++i) s.samples.push_back(amp * std::sin(2 * std::numbers::pi * freq * i / rate));
  return s;
}

double rms(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s += v[i] * v[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

}  // namespace

TEST(Bandpass, PassbandToneKeepsItsAmplitude) {
  const Series x = sine(10.0, 256.0, 2048);
  const Series y = bandpass(x);
  EXPECT_EQ(y.samples.size(), x.samples.size());
  EXPECT_EQ(y.rate, 256.0);
  EXPECT_NEAR(rms(y.samples, 256, 1792) / rms(x.samples, 256, 1792), 1.0, 0.05);
}

TEST(Bandpass, StopbandToneIsAttenuated) {
  const Series x = sine(85.0, 256.0, 2048);
  const double ratio = rms(bandpass(x).samples, 256, 1792) / rms(x.samples, 256, 1792);
  EXPECT_LT(20 * std::log10(ratio), -20.0);
  const Series dc{std::vector<double>(2048, 3.0), 256.0};
  EXPECT_LT(rms(bandpass(dc).samples, 1024, 2048), 0.05);
}

TEST(Bandpass, ZeroPhaseKeepsPeakPosition) {
  Series x;
  x.rate = 256.0;
  for (int i = 0; i < 1024; ++i) x.samples.push_back(std::exp(-0.5 * std::pow((i - 512) / 20.0, 2)));
  const Series y = bandpass(x);
  const auto peak = std::max_element(y.samples.begin(), y.samples.end()) - y.samples.begin();
  EXPECT_NEAR(static_cast<double>(peak), 512.0, 1.0);
}

TEST(Bandpass, BadBand) {
  const Series x = sine(5.0, 100.0, 200);
  EXPECT_EQ(error_code_of([&] { bandpass(x, 10.0, 5.0); }), ErrorCode::parameter);
  EXPECT_EQ(error_code_of([&] { bandpass(x, 0.4, 60.0); }), ErrorCode::parameter);
  EXPECT_TRUE(bandpass(Series{{}, 256.0}).samples.empty());
  EXPECT_EQ(error_code_of([] { normalize(Series{{}, 256.0}); }), ErrorCode::input);
}

TEST(Conditioning, MeanTruncationAndScaling) {
  const Series x{{1, 2, 3, 10, -4}, 256.0};
  const Series n = normalize(x);
  EXPECT_NEAR(n.samples[0], 1 - 2.4, 1e-12);
  double sum = 0.0;
  for (double v : n.samples) sum += v;
  EXPECT_NEAR(sum, 0.0, 1e-12);

  const Series t = truncate(Series{{0.1, -0.5, 0.99, 1.0, -1.0, 0.2}, 1.0}, 0.99);
  EXPECT_EQ(t.samples, (std::vector<double>{0, 0, 0, 1.0, -1.0, 0}));
  EXPECT_THROW(truncate(x, 1.0), Error);

  EXPECT_EQ(per_unit(Series{{2, -8, 4}, 1.0}).samples, (std::vector<double>{0.5, -2, 1}));
  EXPECT_EQ(per_unit_by_polarity(Series{{2, -8, 4}, 1.0}).samples, (std::vector<double>{0.5, -1, 1}));
  EXPECT_EQ(error_code_of([] { per_unit(Series{{0, -1}, 1.0}); }), ErrorCode::domain);
  EXPECT_EQ(error_code_of([] { per_unit_by_polarity(Series{{0, 0}, 1.0}); }), ErrorCode::domain);
}

TEST(Peaks, RunsOfNonzeroSamples) {
  const Series x{{0, 0, 0.2, 0.6, 1.0, 0.5, 0, 0, -0.3, -1.0, 0}, 100.0};
  const auto peaks = isolate_peaks(x);
  ASSERT_EQ(peaks.size(), 2u);
  EXPECT_EQ(peaks[0].start, 2u);
  EXPECT_EQ(peaks[0].end, 5u);
  EXPECT_EQ(peaks[0].sign, 1);
  EXPECT_DOUBLE_EQ(peaks[0].amplitude, 1.0);
  EXPECT_NEAR(peaks[0].peak_velocity, 0.5, 1e-12);  // the gap-to-run step does not count
  EXPECT_NEAR(peaks[0].duration_seconds(100.0), 0.04, 1e-12);
  EXPECT_EQ(peaks[1].sign, -1);
  EXPECT_NEAR(peaks[1].peak_velocity, 0.7, 1e-12);
}

TEST(Analyze, SigmoidStepsStartALobeOfTheirDirection) {
  // Out and back, k = 20 /s at 256 Hz, plus slow drift the high-pass removes.
  // The zero-phase high-pass turns each step into a pre-lobe and a main lobe
  // of the step's sign starting at the midpoint.
  const std::size_t n = 2048;
  const auto out = synth::sigmoid_trajectory(n, 256.0, 2.0, 1.0, 20.0);
  const auto back = synth::sigmoid_trajectory(n, 256.0, 5.0, 1.0, 20.0);
  Series raw;
  raw.rate = 256.0;
  for (std::size_t i = 0; i < n; ++i) raw.samples.push_back(out[i] - back[i] + 0.05 * i / 256.0);
  const auto peaks = analyze(raw);
  auto lobe_at = [&](std::size_t t0, int sign) {
    for (const auto& p : peaks)
      if (p.sign == sign && p.start >= t0 && p.start <= t0 + 10 && p.amplitude > 0.9) return true;
    return false;
  };
  EXPECT_TRUE(lobe_at(512, 1));
  EXPECT_TRUE(lobe_at(1280, -1));
  for (const auto& p : peaks) EXPECT_LE(p.amplitude, 1.0);
}

TEST(Pearson, KnownCases) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  EXPECT_EQ(*pearson(a, a), 1.0);
  EXPECT_NEAR(*pearson(a, {10, 8, 6, 4, 2}), -1.0, 1e-15);
  EXPECT_NEAR(*pearson(a, {2, 1, 4, 3, 5}), 0.8, 1e-12);
  EXPECT_FALSE(pearson(a, {3, 3, 3, 3, 3}));
  EXPECT_EQ(error_code_of([&] { pearson(a, {1, 2}); }), ErrorCode::size);
}

TEST(Csv, RoundTripAndMalformedInput) {
  Series s{{0.125, -3.5, 1e-7, 42}, 256.0};
  std::stringstream ss;
  write_csv(ss, s);
  const Series back = read_csv(ss);
  EXPECT_EQ(back.rate, 256.0);
  EXPECT_EQ(back.samples, s.samples);
  std::stringstream hashed("# rate_hz=128\n1\n2\n");
  EXPECT_EQ(read_csv(hashed).rate, 128.0);
  std::stringstream nohead("1\n2\n");
  EXPECT_EQ(error_code_of([&] { read_csv(nohead); }), ErrorCode::format);
  std::stringstream bad("rate_hz=256\n1\nx\n");
  EXPECT_EQ(error_code_of([&] { read_csv(bad); }), ErrorCode::format);
  EXPECT_EQ(error_code_of([] { read_csv(std::string("/nonexistent/eog.csv")); }), ErrorCode::io);
}
