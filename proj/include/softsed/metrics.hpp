// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_METRICS_HPP
#define SOFTSED_METRICS_HPP

#include <span>
#include <string>
#include <vector>

#include "softsed/aggregate.hpp"
#include "softsed/labelio.hpp"

namespace softsed {

struct ClassCounts {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  double f1() const {
    long denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : 2.0 * tp / static_cast<double>(denom);
  }
};

// 1-s segment-based evaluation: per segment k the error decomposition is
// S(k) = min(FN(k), FP(k)), D(k) = max(0, FN(k) - FP(k)),
// I(k) = max(0, FP(k) - FN(k)); ER = (S + D + I) / N_ref, micro F1 from
// pooled per-class counts.
struct SegmentEvalReport {
  std::vector<std::string> classes;
  std::vector<ClassCounts> per_class;
  ClassCounts micro;
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long n_ref = 0;
  double er = 0.0;
  double f1 = 0.0;
};

SegmentEvalReport segment_eval(const ThresholdedActivity& reference,
                               const ThresholdedActivity& system);

// Mean over segments of the summed per-class Bernoulli divergences
// D(ref || sys), with system scores clamped to [eps, 1 - eps] and
// 0 * log 0 = 0 on the reference side. Grids are [segment][class].
double kld(const std::vector<std::vector<double>>& system,
           const std::vector<std::vector<double>>& reference,
           double eps = 1e-7);

// Sorts, drops floor(trim * n) values from each end, returns the midrange
// (min + max) / 2 of the remainder. Throws DataError when nothing remains.
double trimmed_midrange(std::vector<double> values, double trim = 0.10);

enum class ThresholdMethod { kFixed, kTrimmedMidrange };

struct ThresholdTable {
  std::vector<std::string> classes;
  std::vector<double> tau;  // in (0,1)
  ThresholdMethod method = ThresholdMethod::kFixed;
  std::vector<std::string> warnings;  // classes that fell back to 0.5
};

// Per-class trimmed midrange over the non-zero soft values in the training
// tracks. Classes with no non-zero values, or whose non-zero values are all
// exactly 1 (hard-labeled classes), fall back to 0.5 with a warning.
ThresholdTable class_thresholds(std::span<const SoftLabelTrack> training,
                                const ClassVocabulary& vocab,
                                double trim = 0.10);

ThresholdTable fixed_thresholds(const ClassVocabulary& vocab,
                                double tau = 0.5);

// `metric\t<class|micro>\t<value>` lines.
std::string serialize_report(const SegmentEvalReport& report);
std::string serialize_thresholds(const ThresholdTable& table);
ThresholdTable parse_thresholds(std::istream& in,
                                const ClassVocabulary& vocab);

}  // namespace softsed

#endif  // SOFTSED_METRICS_HPP
