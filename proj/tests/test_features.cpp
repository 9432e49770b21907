// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"

using namespace softsed;

namespace {

std::vector<float> sine(double freq_hz, double sample_rate, double seconds) {
  auto n = static_cast<std::size_t>(sample_rate * seconds);
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i)
    s[i] = static_cast<float>(
        0.5 * std::sin(2.0 * std::numbers::pi * freq_hz * i / sample_rate));
  return s;
}

// Band that should dominate for a pure tone: argmax of the filterbank
// response at the tone's FFT bin.
int analytic_band(double freq_hz, double sample_rate) {
  auto fb = mel_filterbank(sample_rate);
  int bin = static_cast<int>(std::lround(freq_hz * kNFft / sample_rate));
  int best = 0;
  double best_w = -1.0;
  for (int m = 0; m < kNMels; ++m) {
    double w = fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(bin)];
    if (w > best_w) { best_w = w; best = m; }
  }
  return best;
}

}  // namespace

TEST_CASE("filterbank has no spectral holes between first and last centers") {
  const double sr = 44100.0;
  auto fb = mel_filterbank(sr);
  double first_center = mel_to_hz(hz_to_mel(kMelLowHz) +
                                  (hz_to_mel(kMelHighHz) - hz_to_mel(kMelLowHz)) /
                                      (kNMels + 1));
  double last_center = mel_to_hz(hz_to_mel(kMelLowHz) +
                                 (hz_to_mel(kMelHighHz) - hz_to_mel(kMelLowHz)) *
                                     kNMels / (kNMels + 1));
  for (int k = 0; k <= kNFft / 2; ++k) {
    double f = k * sr / kNFft;
    if (f <= first_center || f >= last_center) continue;
    double total = 0.0;
    for (int m = 0; m < kNMels; ++m)
      total += fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
    CHECK(total > 0.0);
  }
}

TEST_CASE("filter peak frequencies increase with band index") {
  auto fb = mel_filterbank(44100.0);
  int prev_peak = -1;
  for (int m = 0; m < kNMels; ++m) {
    int peak = 0;
    double best = -1.0;
    for (int k = 0; k <= kNFft / 2; ++k) {
      double w = fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
      if (w > best) { best = w; peak = k; }
    }
    CHECK(peak > prev_peak);
    prev_peak = peak;
  }
}

TEST_CASE("the band holding 1 kHz matches the analytic mel inversion") {
  const double sr = 44100.0;
  // Closed-form: centers are equally spaced in mel; find the center pair
  // bracketing 1 kHz and check the argmax band is one of them.
  double mel_lo = hz_to_mel(kMelLowHz);
  double step = (hz_to_mel(kMelHighHz) - mel_lo) / (kNMels + 1);
  double pos = (hz_to_mel(1000.0) - mel_lo) / step;  // in center units
  int band = analytic_band(1000.0, sr);
  CHECK(band >= static_cast<int>(std::floor(pos)) - 1);
  CHECK(band <= static_cast<int>(std::floor(pos)));
}

TEST_CASE("filterbank rejects out-of-range frequency bounds") {
  CHECK_THROWS_AS(mel_filterbank(16000.0), DataError);  // 14 kHz > Nyquist
  CHECK_THROWS_AS(mel_filterbank(44100.0, kNFft, kNMels, 500.0, 100.0),
                  DataError);
}

TEST_CASE("all-zero signal hits the log floor everywhere") {
  std::vector<float> zeros(44100, 0.0f);
  auto f = mel_energies(zeros, 44100.0);
  for (double v : f.data) CHECK(v == doctest::Approx(std::log(1e-10)));
}

TEST_CASE("a 1 kHz sine keeps a constant argmax band") {
  const double sr = 44100.0;
  auto s = sine(1000.0, sr, 2.0);
  auto f = mel_energies(s, sr);
  int expected = analytic_band(1000.0, sr);
  for (long frame = 0; frame < f.n_frames; ++frame) {
    int best = 0;
    double best_v = f.at(frame, 0);
    for (int b = 1; b < f.n_bands; ++b)
      if (f.at(frame, b) > best_v) { best_v = f.at(frame, b); best = b; }
    CHECK(best == expected);
  }
}

TEST_CASE("frame count arithmetic at 44.1 kHz") {
  std::vector<float> s(441000, 0.0f);
  auto f = mel_energies(s, 44100.0);
  CHECK(f.hop_samples == 882);
  CHECK(f.n_frames == 498);  // floor((441000 - 2048)/882) + 1
}

TEST_CASE("signals shorter than one window are rejected") {
  std::vector<float> s(1000, 0.0f);
  CHECK_THROWS_AS(mel_energies(s, 44100.0), DataError);
}

TEST_CASE("doubling the waveform raises log energies by log 4") {
  const double sr = 44100.0;
  auto s = sine(800.0, sr, 1.0);
  auto f1 = mel_energies(s, sr);
  for (auto& v : s) v *= 2.0f;
  auto f2 = mel_energies(s, sr);
  for (std::size_t i = 0; i < f1.data.size(); ++i) {
    if (f1.data[i] < std::log(1e-3)) continue;  // near the floor
    CHECK(f2.data[i] - f1.data[i] == doctest::Approx(std::log(4.0)).epsilon(1e-6));
  }
}

TEST_CASE("segment pooling: means, stddevs, and frame counts") {
  FeatureMatrix f;
  f.n_frames = 500;
  f.n_bands = 2;
  f.hop_samples = 882;
  f.n_samples = 441000;
  f.sample_rate = 44100.0;
  f.data.assign(static_cast<std::size_t>(f.n_frames) * 2, 3.5);
  auto pooled = segment_pool(f);
  CHECK(pooled.n_segments == 10);
  CHECK(pooled.dim == 4);
  for (long s = 0; s < pooled.n_segments; ++s) {
    auto row = pooled.segment(s);
    CHECK(row[0] == doctest::Approx(3.5));
    CHECK(row[1] == doctest::Approx(3.5));
    CHECK(row[2] == doctest::Approx(0.0));  // stddev of a constant
    CHECK(row[3] == doctest::Approx(0.0));
  }
}

TEST_CASE("pooling uses 50 frames per interior segment at 20 ms hop") {
  // Mark one frame per segment boundary and verify the mean shifts by the
  // expected 1/50.
  FeatureMatrix f;
  f.n_frames = 498;
  f.n_bands = 1;
  f.hop_samples = 882;
  f.n_samples = 441000;
  f.sample_rate = 44100.0;
  f.data.assign(498, 0.0);
  f.data[100] = 50.0;  // frame 100 belongs to segment 2
  auto pooled = segment_pool(f);
  CHECK(pooled.segment(2)[0] == doctest::Approx(1.0));
  CHECK(pooled.segment(1)[0] == doctest::Approx(0.0));
}

TEST_CASE("pooling is invariant to frame order within a segment") {
  Rng rng(8);
  FeatureMatrix f;
  f.n_frames = 100;
  f.n_bands = 1;
  f.hop_samples = 882;
  f.n_samples = 2 * 44100;
  f.sample_rate = 44100.0;
  f.data.resize(100);
  for (auto& v : f.data) v = rng.uniform(-1.0, 1.0);
  auto a = segment_pool(f);
  // Reverse the frames of segment 0 (frames 0..49).
  std::reverse(f.data.begin(), f.data.begin() + 50);
  auto b = segment_pool(f);
  CHECK(a.segment(0)[0] == doctest::Approx(b.segment(0)[0]));
  CHECK(a.segment(0)[1] == doctest::Approx(b.segment(0)[1]));
}

TEST_CASE("feature files round-trip through the binary container") {
  FeatureMatrix f;
  f.n_frames = 3;
  f.n_bands = 2;
  f.hop_samples = 882;
  f.sample_rate = 44100.0;
  f.data = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  std::ostringstream out;
  write_feature_file(out, f);
  std::istringstream in(out.str());
  auto back = read_feature_file(in);
  CHECK(back.n_frames == 3);
  CHECK(back.n_bands == 2);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(f.data[i]));

  SegmentFeatures seg;
  seg.n_segments = 2;
  seg.dim = 3;
  seg.data = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  std::ostringstream out2;
  write_feature_file(out2, seg);
  std::istringstream in2(out2.str());
  auto seg_back = read_segment_file(in2);
  CHECK(seg_back.n_segments == 2);
  CHECK(seg_back.dim == 3);
}

TEST_CASE("wav reader handles 16-bit PCM") {
  // Hand-built 8-sample mono PCM WAV at 8 kHz.
  std::string wav;
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) wav.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  auto u16 = [&](std::uint16_t v) {
    for (int i = 0; i < 2; ++i) wav.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  wav += "RIFF"; u32(36 + 16); wav += "WAVE";
  wav += "fmt "; u32(16); u16(1); u16(1); u32(8000); u32(16000); u16(2); u16(16);
  wav += "data"; u32(16);
  for (int i = 0; i < 8; ++i) u16(static_cast<std::uint16_t>(i * 1000));

  std::istringstream in(wav);
  auto data = read_wav(in);
  CHECK(data.sample_rate == 8000.0);
  REQUIRE(data.samples.size() == 8);
  CHECK(data.samples[1] == doctest::Approx(1000.0 / 32768.0));
}
