// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/crowdsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "softsed/textutil.hpp"

namespace softsed {

namespace {

// Geometric duration with support {1, 2, ...} and mean 1/p.
long geometric(Rng& rng, double p) {
  if (p >= 1.0) return 1;
  double u = rng.uniform();
  // 1 - u is in (0, 1]; log is finite.
  long d = 1 + static_cast<long>(std::floor(std::log(1.0 - u) /
                                            std::log(1.0 - p)));
  return std::max<long>(1, d);
}

}  // namespace

bool TrueActivityTrack::weak_label(long start, long len, int cls) const {
  long end = std::min<long>(start + len, duration);
  for (long t = std::max<long>(0, start); t < end; ++t)
    if (is_active(t, cls)) return true;
  return false;
}

TrueActivityTrack gen_truth(const TruthConfig& config, std::uint64_t seed) {
  if (config.duration < config.window)
    throw DataError("recording duration " + std::to_string(config.duration) +
                    " s is shorter than the annotation window " +
                    std::to_string(config.window) + " s");
  const std::size_t n_classes = config.classes.size();
  if (config.event_rate.size() != n_classes ||
      config.mean_duration.size() != n_classes)
    throw DataError("per-class rate/duration lists must match class count");

  TrueActivityTrack track;
  track.duration = config.duration;
  track.classes = config.classes;
  track.active.assign(static_cast<std::size_t>(config.duration),
                      std::vector<std::uint8_t>(n_classes, 0));

  for (std::size_t c = 0; c < n_classes; ++c) {
    double rate = config.event_rate[c];
    double mean_dur = config.mean_duration[c];
    if (rate < 0.0)
      throw DataError("negative event rate for class '" + config.classes[c] +
                      "'");
    if (rate == 0.0) continue;  // class never activates
    if (mean_dur < 1.0)
      throw DataError("mean event duration below 1 s for class '" +
                      config.classes[c] + "'");
    Rng rng(derive_seed(seed, c));
    double p_off = std::min(rate, 1.0);
    double p_on = 1.0 / mean_dur;
    long t = 0;
    while (t < config.duration) {
      t += geometric(rng, p_off);  // silent gap
      long on = geometric(rng, p_on);
      for (long s = t; s < std::min(t + on, config.duration); ++s)
        track.active[static_cast<std::size_t>(s)][c] = 1;
      t += on;
    }
  }
  return track;
}

WeakAnnotationSet gen_annotations(const TrueActivityTrack& truth,
                                  const std::vector<Annotator>& pool, int k,
                                  long window, long hop, std::uint64_t seed) {
  if (pool.empty()) throw DataError("annotator pool is empty");
  if (k < 1) throw DataError("need at least one annotator per window");
  if (static_cast<std::size_t>(k) > pool.size())
    throw DataError("k exceeds pool size");
  for (const auto& a : pool) {
    if (a.theta <= 0.0 || a.theta >= 1.0)
      throw DataError("competence of '" + a.id + "' must lie in (0,1)");
    if (a.xi < 0.0 || a.xi > 1.0)
      throw DataError("spam bias of '" + a.id + "' must lie in [0,1]");
  }

  WeakAnnotationSet set;
  set.recording = truth.recording;
  set.window = window;
  set.hop = hop;

  Rng rng(seed);
  std::vector<std::size_t> order(pool.size());
  const int n_classes = static_cast<int>(truth.classes.size());

  for (long start = 0; start + window <= truth.duration; start += hop) {
    // Partial Fisher-Yates draw of k distinct annotators.
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int i = 0; i < k; ++i) {
      std::size_t j = i + rng.below(order.size() - i);
      std::swap(order[i], order[j]);
    }
    for (int i = 0; i < k; ++i) {
      const Annotator& ann = pool[order[i]];
      set.assignments.emplace_back(ann.id, start);
      for (int c = 0; c < n_classes; ++c) {
        bool truth_vote = truth.weak_label(start, window, c);
        bool vote = rng.bernoulli(ann.theta) ? truth_vote
                                             : rng.bernoulli(ann.xi);
        if (vote) set.positives.emplace(ann.id, start, c);
      }
    }
  }
  return set;
}

HardLabelEvents truth_events(const TrueActivityTrack& truth) {
  HardLabelEvents out;
  out.recording = truth.recording;
  for (std::size_t c = 0; c < truth.classes.size(); ++c) {
    long run_start = -1;
    for (long t = 0; t <= truth.duration; ++t) {
      bool on = t < truth.duration && truth.is_active(t, static_cast<int>(c));
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        out.events.push_back({run_start, t, truth.classes[c]});
        run_start = -1;
      }
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const HardEvent& a, const HardEvent& b) {
                     return std::tie(a.onset, a.label) <
                            std::tie(b.onset, b.label);
                   });
  return out;
}

LabelPair gen_label_pair(const ClassVocabulary& vocab, long duration,
                         std::uint64_t seed) {
  Rng rng(seed);
  LabelPair pair;
  pair.soft.duration = duration;
  for (const auto& cls : vocab.classes) {
    long blobs = static_cast<long>(rng.below(4));
    for (long b = 0; b < blobs; ++b) {
      long start = static_cast<long>(rng.below(
          static_cast<std::uint64_t>(duration)));
      long len = 1 + static_cast<long>(rng.below(8));
      for (long t = start; t < std::min(start + len, duration); ++t) {
        // Quantize to the on-disk precision so round trips are exact.
        double v = std::round(rng.uniform(0.05, 1.0) * 1e6) / 1e6;
        pair.soft.set(t, cls, v);
      }
    }
  }
  // Hard labels are the soft track binarized at 0.5 (ties active).
  for (const auto& cls : vocab.classes) {
    long run_start = -1;
    for (long t = 0; t <= duration; ++t) {
      bool on = t < duration && pair.soft.at(t, cls) >= 0.5;
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        pair.hard.events.push_back({run_start, t, cls});
        run_start = -1;
      }
    }
  }
  std::stable_sort(pair.hard.events.begin(), pair.hard.events.end(),
                   [](const HardEvent& a, const HardEvent& b) {
                     return std::tie(a.onset, a.label) <
                            std::tie(b.onset, b.label);
                   });
  return pair;
}

SegmentFeatures synth_features(const SoftLabelTrack& activity,
                               const ClassVocabulary& vocab, int dim,
                               double noise_level,
                               std::uint64_t signature_seed,
                               std::uint64_t noise_seed) {
  if (dim < 1) throw DataError("feature dimension must be positive");
  const std::size_t n_classes = vocab.classes.size();
  std::vector<std::vector<double>> signatures(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Rng rng(derive_seed(signature_seed, c));
    signatures[c].resize(static_cast<std::size_t>(dim));
    for (auto& v : signatures[c]) v = rng.uniform(-0.5, 0.5);
  }

  Rng noise(noise_seed);
  SegmentFeatures out;
  out.n_segments = activity.duration;
  out.dim = dim;
  out.data.assign(static_cast<std::size_t>(activity.duration) * dim, 0.0);
  for (long t = 0; t < activity.duration; ++t) {
    double* row = out.data.data() + static_cast<std::size_t>(t) * dim;
    for (std::size_t c = 0; c < n_classes; ++c) {
      double a = activity.at(t, vocab.classes[c]);
      if (a == 0.0) continue;
      for (int d = 0; d < dim; ++d)
        row[d] += a * signatures[c][static_cast<std::size_t>(d)];
    }
    for (int d = 0; d < dim; ++d)
      row[d] += noise.uniform(-noise_level, noise_level);
  }
  return out;
}

SegmentFeatures synth_features(const TrueActivityTrack& truth, int dim,
                               double noise_level,
                               std::uint64_t signature_seed,
                               std::uint64_t noise_seed) {
  ClassVocabulary vocab{"synthetic", truth.classes};
  SoftLabelTrack track;
  track.duration = truth.duration;
  for (long t = 0; t < truth.duration; ++t)
    for (std::size_t c = 0; c < truth.classes.size(); ++c)
      if (truth.is_active(t, static_cast<int>(c)))
        track.set(t, truth.classes[c], 1.0);
  return synth_features(track, vocab, dim, noise_level, signature_seed,
                        noise_seed);
}

std::string serialize_votes(const WeakAnnotationSet& set,
                            const ClassVocabulary& vocab) {
  std::string out;
  for (const auto& [annotator, start, cls] : set.positives) {
    out += annotator;
    out += '\t';
    out += std::to_string(start);
    out += '\t';
    out += std::to_string(start + set.window);
    out += '\t';
    out += vocab.classes.at(static_cast<std::size_t>(cls));
    out += '\n';
  }
  return out;
}

std::string serialize_assignments(const WeakAnnotationSet& set) {
  auto sorted = set.assignments;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& [annotator, start] : sorted) {
    out += annotator;
    out += '\t';
    out += std::to_string(start);
    out += '\n';
  }
  return out;
}

WeakAnnotationSet parse_annotations(std::istream& votes,
                                    std::istream& assignments,
                                    const ClassVocabulary& vocab, long window,
                                    long hop) {
  WeakAnnotationSet set;
  set.window = window;
  set.hop = hop;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(assignments, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line, 2);
    if (fields.size() != 2)
      throw ParseError("assignments line " + std::to_string(line_no) +
                       ": expected 2 fields");
    set.assignments.emplace_back(
        fields[0], text::parse_long(fields[1], line_no, "window start"));
  }

  std::set<std::pair<std::string, long>> known(set.assignments.begin(),
                                               set.assignments.end());
  line_no = 0;
  while (std::getline(votes, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line, 4);
    if (fields.size() != 4)
      throw ParseError("votes line " + std::to_string(line_no) +
                       ": expected 4 fields");
    long start = text::parse_long(fields[1], line_no, "window start");
    long end = text::parse_long(fields[2], line_no, "window end");
    if (end <= start)
      throw ParseError("votes line " + std::to_string(line_no) +
                       ": window end must exceed start");
    set.window = end - start;
    int cls = vocab.index_of(fields[3]);
    if (cls < 0)
      throw ParseError("votes line " + std::to_string(line_no) +
                       ": unknown label '" + fields[3] + "'");
    set.positives.emplace(fields[0], start, cls);
    if (!known.count({fields[0], start})) {
      set.assignments.emplace_back(fields[0], start);
      known.insert({fields[0], start});
    }
  }
  return set;
}

}  // namespace softsed
