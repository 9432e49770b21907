// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_FEATURES_HPP
#define SOFTSED_FEATURES_HPP

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "softsed/common.hpp"

namespace softsed {

inline constexpr int kNFft = 2048;
inline constexpr int kNMels = 64;
inline constexpr double kMelLowHz = 50.0;
inline constexpr double kMelHighHz = 14000.0;
inline constexpr double kLogFloor = 1e-10;

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank, n_mels x (n_fft/2 + 1), filter centers equally
// spaced on the mel scale between f_lo and f_hi. Throws DataError when f_hi
// exceeds Nyquist or f_lo >= f_hi.
std::vector<std::vector<double>> mel_filterbank(double sample_rate,
                                                int n_fft = kNFft,
                                                int n_mels = kNMels,
                                                double f_lo = kMelLowHz,
                                                double f_hi = kMelHighHz);

// Log mel energies: frames x n_bands, Hann window, power spectrum,
// log(x + 1e-10). Hop is round(0.02 * sample_rate) samples.
struct FeatureMatrix {
  long n_frames = 0;
  int n_bands = 0;
  long hop_samples = 0;
  long n_samples = 0;  // source signal length; 0 when unknown (file input)
  double sample_rate = 0.0;
  std::vector<double> data;  // row-major [frame][band]

  double at(long frame, int band) const {
    return data[static_cast<std::size_t>(frame) * n_bands + band];
  }
};

FeatureMatrix mel_energies(std::span<const float> samples,
                           double sample_rate);

// Per-second pooled features: per band mean then population stddev,
// 2 * n_bands values per segment. Trailing partial seconds are dropped.
struct SegmentFeatures {
  long n_segments = 0;
  int dim = 0;
  std::vector<double> data;  // row-major [segment][dim]

  std::span<const double> segment(long s) const {
    return {data.data() + static_cast<std::size_t>(s) * dim,
            static_cast<std::size_t>(dim)};
  }
};

SegmentFeatures segment_pool(const FeatureMatrix& features);

// Mono WAV reader: 16-bit PCM or 32-bit float. Throws ParseError on
// malformed or unsupported files.
struct WavData {
  double sample_rate = 0.0;
  std::vector<float> samples;
};
WavData read_wav(std::istream& in);

// Flat binary container: 16-byte header (magic "SSFT", u32 n_frames,
// u32 n_bands, u32 hop_ms) followed by little-endian float32, row-major.
// SegmentFeatures are stored in the same container with hop_ms = 1000.
void write_feature_file(std::ostream& out, const FeatureMatrix& features);
void write_feature_file(std::ostream& out, const SegmentFeatures& features);
FeatureMatrix read_feature_file(std::istream& in);
SegmentFeatures read_segment_file(std::istream& in);

// Radix-2 FFT of a real signal (zero-padded to n), returning n/2+1 power
// spectrum values. n must be a power of two.
std::vector<double> power_spectrum(std::span<const double> frame, int n);

}  // namespace softsed

#endif  // SOFTSED_FEATURES_HPP
