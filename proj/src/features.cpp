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
#include <complex>
#include <cstring>
#include <numbers>

namespace softsed {

namespace {

// Iterative in-place radix-2 Cooley-Tukey, fixed algorithm for cross-platform
// reproducibility.
void fft(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    std::complex<double> wl(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("truncated feature file header");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void write_header(std::ostream& out, std::uint32_t n_frames,
                  std::uint32_t n_bands, std::uint32_t hop_ms) {
  out.write("SSFT", 4);
  write_u32(out, n_frames);
  write_u32(out, n_bands);
  write_u32(out, hop_ms);
}

struct RawFeatureFile {
  std::uint32_t n_frames = 0, n_bands = 0, hop_ms = 0;
  std::vector<float> data;
};

RawFeatureFile read_raw(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SSFT", 4) != 0)
    throw ParseError("not a feature file (bad magic)");
  RawFeatureFile f;
  f.n_frames = read_u32(in);
  f.n_bands = read_u32(in);
  f.hop_ms = read_u32(in);
  std::size_t count = std::size_t(f.n_frames) * f.n_bands;
  f.data.resize(count);
  // float32 is stored little-endian; this reader assumes a little-endian
  // host, which covers every supported platform.
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw ParseError("truncated feature file payload");
  return f;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<std::vector<double>> mel_filterbank(double sample_rate, int n_fft,
                                                int n_mels, double f_lo,
                                                double f_hi) {
  if (f_hi > sample_rate / 2.0)
    throw DataError("upper mel frequency exceeds Nyquist");
  if (f_lo >= f_hi || f_lo < 0.0)
    throw DataError("mel frequency bounds must satisfy 0 <= lo < hi");

  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(f_lo);
  const double mel_hi = hz_to_mel(f_hi);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[static_cast<std::size_t>(i)] = mel_to_hz(
        mel_lo + (mel_hi - mel_lo) * i / static_cast<double>(n_mels + 1));

  std::vector<std::vector<double>> fb(
      static_cast<std::size_t>(n_mels),
      std::vector<double>(static_cast<std::size_t>(n_bins), 0.0));
  for (int m = 0; m < n_mels; ++m) {
    double left = edges[static_cast<std::size_t>(m)];
    double center = edges[static_cast<std::size_t>(m) + 1];
    double right = edges[static_cast<std::size_t>(m) + 2];
    for (int k = 0; k < n_bins; ++k) {
      double f = k * sample_rate / n_fft;
      double w = 0.0;
      if (f > left && f < right)
        w = f <= center ? (f - left) / (center - left)
                        : (right - f) / (right - center);
      fb[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] = w;
    }
  }
  return fb;
}

std::vector<double> power_spectrum(std::span<const double> frame, int n) {
  if ((n & (n - 1)) != 0 || n <= 0)
    throw DataError("FFT size must be a power of two");
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < frame.size() && i < a.size(); ++i)
    a[i] = frame[i];
  fft(a);
  std::vector<double> power(static_cast<std::size_t>(n / 2 + 1));
  for (std::size_t k = 0; k < power.size(); ++k)
    power[k] = std::norm(a[k]);
  return power;
}

FeatureMatrix mel_energies(std::span<const float> samples,
                           double sample_rate) {
  if (samples.size() < static_cast<std::size_t>(kNFft))
    throw DataError("signal shorter than one analysis window (" +
                    std::to_string(kNFft) + " samples)");
  const long hop = std::lround(0.02 * sample_rate);
  const auto fb = mel_filterbank(sample_rate);

  FeatureMatrix out;
  out.sample_rate = sample_rate;
  out.hop_samples = hop;
  out.n_samples = static_cast<long>(samples.size());
  out.n_bands = kNMels;
  out.n_frames =
      static_cast<long>((samples.size() - kNFft) / static_cast<std::size_t>(hop)) + 1;
  out.data.resize(static_cast<std::size_t>(out.n_frames) * kNMels);

  // Periodic Hann window.
  std::vector<double> window(kNFft);
  for (int i = 0; i < kNFft; ++i)
    window[static_cast<std::size_t>(i)] =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / kNFft);

  std::vector<double> frame(kNFft);
  for (long f = 0; f < out.n_frames; ++f) {
    const std::size_t start = static_cast<std::size_t>(f * hop);
    for (int i = 0; i < kNFft; ++i)
      frame[static_cast<std::size_t>(i)] =
          static_cast<double>(samples[start + static_cast<std::size_t>(i)]) *
          window[static_cast<std::size_t>(i)];
    auto power = power_spectrum(frame, kNFft);
    for (int m = 0; m < kNMels; ++m) {
      double e = 0.0;
      const auto& row = fb[static_cast<std::size_t>(m)];
      for (std::size_t k = 0; k < power.size(); ++k) e += row[k] * power[k];
      out.data[static_cast<std::size_t>(f) * kNMels +
               static_cast<std::size_t>(m)] = std::log(e + kLogFloor);
    }
  }
  return out;
}

SegmentFeatures segment_pool(const FeatureMatrix& features) {
  if (features.n_frames <= 0 || features.hop_samples <= 0)
    throw DataError("empty feature matrix");
  const double frames_per_second =
      features.sample_rate / static_cast<double>(features.hop_samples);
  // Full seconds of signal; a trailing partial second is dropped. When the
  // signal length is unknown (precomputed file) fall back to the span the
  // frames cover.
  long n_segments =
      features.n_samples > 0
          ? static_cast<long>(std::floor(features.n_samples /
                                         features.sample_rate))
          : static_cast<long>(std::floor(features.n_frames /
                                         frames_per_second));
  // Never pool past the frames that exist.
  while (n_segments > 0 &&
         static_cast<long>(std::ceil((n_segments - 1) * frames_per_second)) >=
             features.n_frames)
    --n_segments;
  if (n_segments < 1)
    throw DataError("need at least one full second of frames to pool");

  const int bands = features.n_bands;
  SegmentFeatures out;
  out.n_segments = n_segments;
  out.dim = 2 * bands;
  out.data.assign(static_cast<std::size_t>(n_segments) * out.dim, 0.0);

  for (long s = 0; s < n_segments; ++s) {
    long first = static_cast<long>(std::ceil(s * frames_per_second));
    long last = std::min<long>(
        static_cast<long>(std::ceil((s + 1) * frames_per_second)),
        features.n_frames);
    long count = last - first;
    double* row = out.data.data() + static_cast<std::size_t>(s) * out.dim;
    for (int b = 0; b < bands; ++b) {
      double mean = 0.0;
      for (long f = first; f < last; ++f) mean += features.at(f, b);
      mean /= static_cast<double>(count);
      double var = 0.0;
      for (long f = first; f < last; ++f) {
        double d = features.at(f, b) - mean;
        var += d * d;
      }
      var /= static_cast<double>(count);
      row[b] = mean;
      row[bands + b] = std::sqrt(var);
    }
  }
  return out;
}

WavData read_wav(std::istream& in) {
  auto read_bytes = [&](char* dst, std::size_t n) {
    in.read(dst, static_cast<std::streamsize>(n));
    if (!in) throw ParseError("truncated WAV file");
  };
  auto read_u16 = [&]() {
    unsigned char b[2];
    read_bytes(reinterpret_cast<char*>(b), 2);
    return std::uint16_t(b[0]) | (std::uint16_t(b[1]) << 8);
  };
  auto read_u32le = [&]() {
    unsigned char b[4];
    read_bytes(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
  };

  char tag[4];
  read_bytes(tag, 4);
  if (std::memcmp(tag, "RIFF", 4) != 0) throw ParseError("not a RIFF file");
  read_u32le();  // total size
  read_bytes(tag, 4);
  if (std::memcmp(tag, "WAVE", 4) != 0) throw ParseError("not a WAV file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  WavData out;

  while (in.peek() != EOF) {
    read_bytes(tag, 4);
    std::uint32_t size = read_u32le();
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      format = read_u16();
      channels = read_u16();
      rate = read_u32le();
      read_u32le();  // byte rate
      read_u16();    // block align
      bits = read_u16();
      for (std::uint32_t i = 16; i < size; ++i) in.get();
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw ParseError("WAV data chunk before fmt chunk");
      if (channels != 1)
        throw ParseError("only single-channel WAV input is supported");
      if (format == 1 && bits == 16) {
        std::size_t n = size / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
          unsigned char b[2];
          read_bytes(reinterpret_cast<char*>(b), 2);
          auto v = static_cast<std::int16_t>(std::uint16_t(b[0]) |
                                             (std::uint16_t(b[1]) << 8));
          out.samples[i] = static_cast<float>(v) / 32768.0f;
        }
      } else if (format == 3 && bits == 32) {
        std::size_t n = size / 4;
        out.samples.resize(n);
        in.read(reinterpret_cast<char*>(out.samples.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw ParseError("truncated WAV data");
      } else {
        throw ParseError("unsupported WAV encoding (need 16-bit PCM or "
                         "32-bit float)");
      }
      out.sample_rate = rate;
      return out;
    } else {
      for (std::uint32_t i = 0; i < size; ++i) in.get();
    }
    if (size % 2 == 1) in.get();  // chunk padding
  }
  throw ParseError("WAV file has no data chunk");
}

void write_feature_file(std::ostream& out, const FeatureMatrix& features) {
  write_header(out, static_cast<std::uint32_t>(features.n_frames),
               static_cast<std::uint32_t>(features.n_bands),
               static_cast<std::uint32_t>(std::lround(
                   1000.0 * features.hop_samples / features.sample_rate)));
  std::vector<float> row(features.data.size());
  for (std::size_t i = 0; i < features.data.size(); ++i)
    row[i] = static_cast<float>(features.data[i]);
  out.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
}

void write_feature_file(std::ostream& out, const SegmentFeatures& features) {
  write_header(out, static_cast<std::uint32_t>(features.n_segments),
               static_cast<std::uint32_t>(features.dim), 1000);
  std::vector<float> row(features.data.size());
  for (std::size_t i = 0; i < features.data.size(); ++i)
    row[i] = static_cast<float>(features.data[i]);
  out.write(reinterpret_cast<const char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
}

FeatureMatrix read_feature_file(std::istream& in) {
  RawFeatureFile raw = read_raw(in);
  FeatureMatrix out;
  out.n_frames = raw.n_frames;
  out.n_bands = static_cast<int>(raw.n_bands);
  out.hop_samples = raw.hop_ms;  // milliseconds stand in when rate unknown
  out.sample_rate = 1000.0;
  out.data.assign(raw.data.begin(), raw.data.end());
  return out;
}

SegmentFeatures read_segment_file(std::istream& in) {
  RawFeatureFile raw = read_raw(in);
  if (raw.hop_ms != 1000)
    throw ParseError("feature file does not hold 1-s segment features");
  SegmentFeatures out;
  out.n_segments = raw.n_frames;
  out.dim = static_cast<int>(raw.n_bands);
  out.data.assign(raw.data.begin(), raw.data.end());
  return out;
}

}  // namespace softsed
