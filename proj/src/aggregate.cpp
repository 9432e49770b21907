// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/aggregate.hpp"

#include <algorithm>
#include <map>

namespace softsed {

OpinionMatrix build_opinions(const WeakAnnotationSet& set,
                             const ClassVocabulary& vocab, long duration) {
  if (duration < 0) throw DataError("negative duration");
  OpinionMatrix m;
  m.duration = duration;
  m.classes = vocab.classes;
  m.opinions.resize(static_cast<std::size_t>(duration) * vocab.classes.size());

  std::map<std::string, int> ann_idx;
  for (const auto& [annotator, start] : set.assignments) {
    auto [it, inserted] =
        ann_idx.emplace(annotator, static_cast<int>(m.annotators.size()));
    if (inserted) m.annotators.push_back(annotator);
    int j = it->second;
    long end = std::min(start + set.window, duration);
    if (start + set.window > duration)
      throw DataError("window at " + std::to_string(start) +
                      " extends past the stated duration");
    for (std::size_t c = 0; c < vocab.classes.size(); ++c) {
      std::uint8_t v =
          set.positives.count({annotator, start, static_cast<int>(c)}) ? 1
                                                                       : 0;
      for (long t = std::max<long>(0, start); t < end; ++t)
        m.opinions[static_cast<std::size_t>(t) * vocab.classes.size() + c]
            .push_back({j, v});
    }
  }
  return m;
}

SoftValue soft_label(std::span<const Opinion> opinions,
                     std::span<const double> thetas) {
  if (opinions.empty()) return {0.0, false};
  double num = 0.0;
  double den = 0.0;
  for (const Opinion& op : opinions) {
    double theta = thetas[static_cast<std::size_t>(op.annotator)];
    if (theta <= 0.0) throw DataError("competence weights must be positive");
    num += theta * op.vote;
    den += theta;
  }
  return {num / den, true};
}

AggregateResult aggregate_track(const WeakAnnotationSet& set,
                                const CompetenceTable& competence,
                                const ClassVocabulary& vocab, long duration) {
  OpinionMatrix m = build_opinions(set, vocab, duration);
  std::vector<double> thetas(m.annotators.size());
  for (std::size_t j = 0; j < m.annotators.size(); ++j)
    thetas[j] = competence.theta_of(m.annotators[j]);

  AggregateResult result;
  result.track.recording = set.recording;
  result.track.duration = duration;
  for (long t = 0; t < duration; ++t) {
    for (std::size_t c = 0; c < vocab.classes.size(); ++c) {
      const auto& ops = m.at(t, static_cast<int>(c));
      SoftValue v = soft_label(ops, thetas);
      result.track.set(t, vocab.classes[c], v.value);
      result.coverage.push_back({t, vocab.classes[c], ops.size()});
    }
  }
  return result;
}

ThresholdedActivity binarize(const SoftLabelTrack& track,
                             const ClassVocabulary& vocab,
                             std::span<const double> thresholds) {
  if (thresholds.size() != vocab.classes.size())
    throw DataError("one threshold per class required");
  for (double tau : thresholds)
    if (tau <= 0.0 || tau >= 1.0)
      throw DataError("thresholds must lie strictly inside (0,1)");

  ThresholdedActivity out;
  out.duration = track.duration;
  out.classes = vocab.classes;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  out.active.assign(static_cast<std::size_t>(track.duration),
                    std::vector<std::uint8_t>(vocab.classes.size(), 0));
  for (const auto& [key, value] : track.values) {
    int c = vocab.index_of(key.second);
    if (c < 0)
      throw DataError("track class '" + key.second +
                      "' not in the vocabulary");
    if (key.first < 0 || key.first >= track.duration)
      throw DataError("segment outside the track duration");
    if (value >= thresholds[static_cast<std::size_t>(c)])
      out.active[static_cast<std::size_t>(key.first)]
                [static_cast<std::size_t>(c)] = 1;
  }
  return out;
}

ThresholdedActivity binarize(const SoftLabelTrack& track,
                             const ClassVocabulary& vocab, double threshold) {
  std::vector<double> taus(vocab.classes.size(), threshold);
  return binarize(track, vocab, taus);
}

HardLabelEvents events_from_activity(const ThresholdedActivity& activity) {
  HardLabelEvents out;
  for (std::size_t c = 0; c < activity.classes.size(); ++c) {
    long run_start = -1;
    for (long t = 0; t <= activity.duration; ++t) {
      bool on =
          t < activity.duration && activity.is_active(t, static_cast<int>(c));
      if (on && run_start < 0) run_start = t;
      if (!on && run_start >= 0) {
        out.events.push_back({run_start, t, activity.classes[c]});
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

ThresholdedActivity rasterize_events(const HardLabelEvents& events,
                                     const ClassVocabulary& vocab,
                                     long duration) {
  ThresholdedActivity out;
  out.duration = duration;
  out.classes = vocab.classes;
  out.active.assign(static_cast<std::size_t>(duration),
                    std::vector<std::uint8_t>(vocab.classes.size(), 0));
  for (const auto& ev : events.events) {
    int c = vocab.index_of(ev.label);
    if (c < 0) throw DataError("unknown label '" + ev.label + "'");
    for (long t = std::max<long>(0, ev.onset);
         t < std::min(ev.offset, duration); ++t)
      out.active[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] =
          1;
  }
  return out;
}

std::string serialize_coverage(std::span<const CoverageEntry> coverage) {
  std::string out;
  for (const auto& e : coverage) {
    out += std::to_string(e.segment);
    out += '\t';
    out += e.cls;
    out += '\t';
    out += std::to_string(e.n_opinions);
    out += '\n';
  }
  return out;
}

}  // namespace softsed
