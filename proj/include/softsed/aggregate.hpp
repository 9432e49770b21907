// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_AGGREGATE_HPP
#define SOFTSED_AGGREGATE_HPP

#include <span>
#include <string>
#include <vector>

#include "softsed/competence.hpp"
#include "softsed/crowdsim.hpp"
#include "softsed/labelio.hpp"

namespace softsed {

// One window-level vote projected onto a 1-s segment.
struct Opinion {
  int annotator = 0;       // index into OpinionMatrix::annotators
  std::uint8_t vote = 0;   // 1 = class selected for the covering window
};

// Per (segment, class) list of opinions from every covering window. The same
// annotator contributes one opinion per covering window they were assigned.
struct OpinionMatrix {
  long duration = 0;
  std::vector<std::string> annotators;
  std::vector<std::string> classes;
  // opinions[segment * classes.size() + class]
  std::vector<std::vector<Opinion>> opinions;

  const std::vector<Opinion>& at(long segment, int cls) const {
    return opinions[static_cast<std::size_t>(segment) * classes.size() +
                    static_cast<std::size_t>(cls)];
  }
};

// Binary activity grid plus the thresholds that produced it.
struct ThresholdedActivity {
  long duration = 0;
  std::vector<std::string> classes;
  std::vector<std::vector<std::uint8_t>> active;  // [segment][class]
  std::vector<double> thresholds;                 // per class

  bool is_active(long segment, int cls) const {
    return active[static_cast<std::size_t>(segment)]
                 [static_cast<std::size_t>(cls)] != 0;
  }
};

// Projects window votes onto segments: segment t gets one opinion per
// (annotator, window) assignment whose window contains [t, t+1), with
// implicit negatives materialized as vote 0.
OpinionMatrix build_opinions(const WeakAnnotationSet& set,
                             const ClassVocabulary& vocab, long duration);

struct SoftValue {
  double value = 0.0;
  bool covered = false;  // false when no window covers the segment
};

// Competence-weighted average: sum(theta_j * v_j) / sum(theta_j).
// Zero opinions yield value 0 with covered = false.
SoftValue soft_label(std::span<const Opinion> opinions,
                     std::span<const double> thetas);

struct CoverageEntry {
  long segment = 0;
  std::string cls;
  std::size_t n_opinions = 0;
};

struct AggregateResult {
  SoftLabelTrack track;
  std::vector<CoverageEntry> coverage;  // every (segment, class) count
};

// Applies soft_label to every (segment, class) of the annotation set.
AggregateResult aggregate_track(const WeakAnnotationSet& set,
                                const CompetenceTable& competence,
                                const ClassVocabulary& vocab, long duration);

// Active iff value >= threshold (tie counts as active). Thresholds must lie
// in (0,1).
ThresholdedActivity binarize(const SoftLabelTrack& track,
                             const ClassVocabulary& vocab,
                             std::span<const double> thresholds);
ThresholdedActivity binarize(const SoftLabelTrack& track,
                             const ClassVocabulary& vocab, double threshold);

// Maximal runs of active segments become events [first, last + 1).
HardLabelEvents events_from_activity(const ThresholdedActivity& activity);

// Inverse of events_from_activity for integer events: marks every covered
// segment active.
ThresholdedActivity rasterize_events(const HardLabelEvents& events,
                                     const ClassVocabulary& vocab,
                                     long duration);

std::string serialize_coverage(std::span<const CoverageEntry> coverage);

}  // namespace softsed

#endif  // SOFTSED_AGGREGATE_HPP
