// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "softsed/textutil.hpp"

namespace softsed {

namespace {

std::string format6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

SegmentEvalReport segment_eval(const ThresholdedActivity& reference,
                               const ThresholdedActivity& system) {
  if (reference.duration != system.duration)
    throw DataError("reference and system durations differ (" +
                    std::to_string(reference.duration) + " vs " +
                    std::to_string(system.duration) + ")");
  if (reference.classes != system.classes)
    throw DataError("reference and system vocabularies differ");

  SegmentEvalReport report;
  report.classes = reference.classes;
  report.per_class.assign(reference.classes.size(), {});

  for (long t = 0; t < reference.duration; ++t) {
    long seg_fn = 0;
    long seg_fp = 0;
    for (std::size_t c = 0; c < reference.classes.size(); ++c) {
      bool ref = reference.is_active(t, static_cast<int>(c));
      bool sys = system.is_active(t, static_cast<int>(c));
      auto& counts = report.per_class[c];
      if (ref && sys) ++counts.tp;
      if (!ref && sys) { ++counts.fp; ++seg_fp; }
      if (ref && !sys) { ++counts.fn; ++seg_fn; }
      if (ref) ++report.n_ref;
    }
    report.substitutions += std::min(seg_fn, seg_fp);
    report.deletions += std::max<long>(0, seg_fn - seg_fp);
    report.insertions += std::max<long>(0, seg_fp - seg_fn);
  }

  for (const auto& counts : report.per_class) {
    report.micro.tp += counts.tp;
    report.micro.fp += counts.fp;
    report.micro.fn += counts.fn;
  }
  report.f1 = report.micro.f1();
  long errors = report.substitutions + report.deletions + report.insertions;
  report.er = report.n_ref > 0
                  ? static_cast<double>(errors) / report.n_ref
                  : (errors == 0 ? 0.0
                                 : std::numeric_limits<double>::infinity());
  return report;
}

double kld(const std::vector<std::vector<double>>& system,
           const std::vector<std::vector<double>>& reference, double eps) {
  if (system.size() != reference.size() || system.empty())
    throw DataError("system and reference grids must align and be non-empty");
  double total = 0.0;
  for (std::size_t t = 0; t < system.size(); ++t) {
    if (system[t].size() != reference[t].size())
      throw DataError("system and reference class counts differ");
    for (std::size_t c = 0; c < system[t].size(); ++c) {
      double p = reference[t][c];
      double q = std::clamp(system[t][c], eps, 1.0 - eps);
      if (p > 0.0) total += p * std::log(p / q);
      if (p < 1.0) total += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
    }
  }
  return total / static_cast<double>(system.size());
}

double trimmed_midrange(std::vector<double> values, double trim) {
  if (trim < 0.0 || trim >= 0.5)
    throw DataError("trim fraction must lie in [0, 0.5)");
  std::sort(values.begin(), values.end());
  auto cut = static_cast<std::size_t>(
      std::floor(trim * static_cast<double>(values.size())));
  if (values.size() < 2 * cut + 1)
    throw DataError("no values remain after trimming");
  return (values[cut] + values[values.size() - 1 - cut]) / 2.0;
}

ThresholdTable class_thresholds(std::span<const SoftLabelTrack> training,
                                const ClassVocabulary& vocab, double trim) {
  ThresholdTable table;
  table.classes = vocab.classes;
  table.method = ThresholdMethod::kTrimmedMidrange;
  table.tau.assign(vocab.classes.size(), 0.5);

  for (std::size_t c = 0; c < vocab.classes.size(); ++c) {
    std::vector<double> positives;
    for (const auto& track : training)
      for (const auto& [key, value] : track.values)
        if (key.second == vocab.classes[c] && value > 0.0)
          positives.push_back(value);
    if (positives.empty()) {
      table.warnings.push_back(vocab.classes[c]);
      continue;
    }
    // A class whose non-zero values are all exactly 1 is hard-labeled; the
    // midrange of binary activity is the conventional 0.5.
    if (std::all_of(positives.begin(), positives.end(),
                    [](double v) { return v == 1.0; })) {
      table.tau[c] = 0.5;
      continue;
    }
    table.tau[c] = std::clamp(trimmed_midrange(std::move(positives), trim),
                              0.01, 0.99);
  }
  return table;
}

ThresholdTable fixed_thresholds(const ClassVocabulary& vocab, double tau) {
  ThresholdTable table;
  table.classes = vocab.classes;
  table.method = ThresholdMethod::kFixed;
  table.tau.assign(vocab.classes.size(), tau);
  return table;
}

std::string serialize_report(const SegmentEvalReport& report) {
  std::string out;
  out += "er\tmicro\t" + format6(report.er) + "\n";
  out += "f1\tmicro\t" + format6(report.f1) + "\n";
  out += "substitutions\tmicro\t" + std::to_string(report.substitutions) +
         "\n";
  out += "deletions\tmicro\t" + std::to_string(report.deletions) + "\n";
  out += "insertions\tmicro\t" + std::to_string(report.insertions) + "\n";
  out += "n_ref\tmicro\t" + std::to_string(report.n_ref) + "\n";
  for (std::size_t c = 0; c < report.classes.size(); ++c)
    out += "f1\t" + report.classes[c] + "\t" +
           format6(report.per_class[c].f1()) + "\n";
  return out;
}

std::string serialize_thresholds(const ThresholdTable& table) {
  std::string out;
  out += std::string("# method\t") +
         (table.method == ThresholdMethod::kFixed ? "fixed"
                                                  : "trimmed_midrange") +
         "\n";
  for (std::size_t c = 0; c < table.classes.size(); ++c)
    out += table.classes[c] + "\t" + format6(table.tau[c]) + "\n";
  return out;
}

ThresholdTable parse_thresholds(std::istream& in,
                                const ClassVocabulary& vocab) {
  ThresholdTable table;
  table.classes = vocab.classes;
  table.tau.assign(vocab.classes.size(), 0.5);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line, 2);
    if (fields.size() != 2)
      throw ParseError("thresholds line " + std::to_string(line_no) +
                       ": expected 2 fields");
    int c = vocab.index_of(fields[0]);
    if (c < 0)
      throw ParseError("thresholds line " + std::to_string(line_no) +
                       ": unknown class '" + fields[0] + "'");
    table.tau[static_cast<std::size_t>(c)] =
        text::parse_real(fields[1], line_no, "threshold");
  }
  return table;
}

}  // namespace softsed
