// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_CROWDSIM_HPP
#define SOFTSED_CROWDSIM_HPP

#include <cstdint>
#include <istream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "softsed/features.hpp"
#include "softsed/labelio.hpp"

namespace softsed {

// Synthetic annotator with known reliability. With probability theta a vote
// copies the true weak label; otherwise it is drawn Bernoulli(xi).
struct Annotator {
  std::string id;
  double theta = 0.8;  // in (0,1)
  double xi = 0.5;     // in [0,1]
};

// Simulation ground truth: binary activity per 1-s segment and class.
struct TrueActivityTrack {
  std::string recording;
  long duration = 0;
  std::vector<std::string> classes;
  std::vector<std::vector<std::uint8_t>> active;  // [segment][class]

  bool is_active(long segment, int cls) const {
    return active[static_cast<std::size_t>(segment)]
                 [static_cast<std::size_t>(cls)] != 0;
  }
  // 1 iff any 1-s segment of `cls` inside [start, start+len) is active.
  bool weak_label(long start, long len, int cls) const;
};

// Per-class alternating renewal parameters, whole-second resolution.
struct TruthConfig {
  long duration = 0;                  // seconds; must be >= window length
  std::vector<std::string> classes;
  std::vector<double> event_rate;     // events/s of inactivity, in (0, 1]
  std::vector<double> mean_duration;  // mean event length in s, >= 1
  long window = 10;                   // used only for the duration check
};

// Generates per-class activity as an alternating renewal process with
// geometric whole-second on/off durations (mean on = mean_duration, mean off
// = 1/event_rate), so the stationary active fraction is
// rate*mean_dur / (1 + rate*mean_dur). Deterministic given seed.
TrueActivityTrack gen_truth(const TruthConfig& config, std::uint64_t seed);

// Weak votes over overlapping fixed-length windows. Positive votes are
// explicit; a missing (annotator, window, class) triple on an existing
// assignment means "not selected" (vote 0).
struct WeakAnnotationSet {
  std::string recording;
  long window = 10;  // W, seconds
  long hop = 1;      // H, seconds
  // Every (annotator, window_start) pair that was shown to an annotator,
  // including pairs where nothing was selected.
  std::vector<std::pair<std::string, long>> assignments;
  // (annotator, window_start, class index) triples with vote 1.
  std::set<std::tuple<std::string, long, int>> positives;
};

// Samples k distinct annotators per window (starts 0, H, ..., duration-W)
// and casts one vote per class each, per the competence/spam model above.
WeakAnnotationSet gen_annotations(const TrueActivityTrack& truth,
                                  const std::vector<Annotator>& pool, int k,
                                  long window, long hop, std::uint64_t seed);

// Extracts (onset, offset, class) events from the truth raster.
HardLabelEvents truth_events(const TrueActivityTrack& truth);

// Random soft/hard label file pair for format tests: the hard events are
// exactly the soft track binarized at 0.5. Soft values are quantized to 6
// decimals so serialization round-trips bit-exactly.
struct LabelPair {
  SoftLabelTrack soft;
  HardLabelEvents hard;
};
LabelPair gen_label_pair(const ClassVocabulary& vocab, long duration,
                         std::uint64_t seed);

// Synthetic segment features standing in for audio at desk scale: each class
// gets a fixed signature direction drawn from signature_seed (shared across
// recordings), and segment t is the activity-weighted sum of signatures plus
// uniform noise. Lets the classifier stages run end to end without audio.
SegmentFeatures synth_features(const SoftLabelTrack& activity,
                               const ClassVocabulary& vocab, int dim,
                               double noise_level,
                               std::uint64_t signature_seed,
                               std::uint64_t noise_seed);
SegmentFeatures synth_features(const TrueActivityTrack& truth, int dim,
                               double noise_level,
                               std::uint64_t signature_seed,
                               std::uint64_t noise_seed);

// One line per positive vote: <annotator>\t<window_start>\t<window_end>\t<label>
std::string serialize_votes(const WeakAnnotationSet& set,
                            const ClassVocabulary& vocab);
// One line per assignment: <annotator>\t<window_start>
std::string serialize_assignments(const WeakAnnotationSet& set);

// Reads both files back. `window`/`hop` seed the defaults; window is
// overridden by the span seen on vote lines when present.
WeakAnnotationSet parse_annotations(std::istream& votes,
                                    std::istream& assignments,
                                    const ClassVocabulary& vocab,
                                    long window = 10, long hop = 1);

}  // namespace softsed

#endif  // SOFTSED_CROWDSIM_HPP
