// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_LABELIO_HPP
#define SOFTSED_LABELIO_HPP

#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "softsed/common.hpp"

namespace softsed {

// Ordered class list for one acoustic scene.
struct ClassVocabulary {
  std::string scene;
  std::vector<std::string> classes;

  // Index of a class name, or -1 if not in the vocabulary.
  int index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name) >= 0; }
  std::size_t size() const { return classes.size(); }

  // Throws DataError if classes are empty or duplicated.
  void validate() const;
};

// The five built-in scene vocabularies, six classes each.
std::vector<ClassVocabulary> default_vocabularies();

// Finds a scene by name; throws DataError if absent.
const ClassVocabulary& find_vocabulary(
    const std::vector<ClassVocabulary>& vocabs, std::string_view scene);

// One event instance with whole-second boundaries, [onset, offset).
struct HardEvent {
  long onset = 0;
  long offset = 0;
  std::string label;

  friend bool operator==(const HardEvent&, const HardEvent&) = default;
};

struct HardLabelEvents {
  std::string recording;
  std::vector<HardEvent> events;

  friend bool operator==(const HardLabelEvents&, const HardLabelEvents&) =
      default;
};

// Per-second soft activity grid. Entries absent from `values` are 0; zero
// values are never stored.
struct SoftLabelTrack {
  std::string recording;
  long duration = 0;  // whole seconds; segments are [t, t+1) for t < duration
  std::map<std::pair<long, std::string>, double> values;

  double at(long segment, const std::string& cls) const;
  // Stores a value, dropping exact zeros. Throws DataError outside [0,1].
  void set(long segment, const std::string& cls, double value);

  friend bool operator==(const SoftLabelTrack&, const SoftLabelTrack&) =
      default;
};

// Parses `<onset> <offset> <label>` lines. Tab-delimited fields are preferred
// (labels may contain spaces); otherwise any whitespace run splits fields.
// '#' lines and blank lines are skipped. Throws ParseError with a line number
// on malformed input, unknown labels, or offset <= onset.
HardLabelEvents parse_hard_labels(std::istream& in,
                                  const ClassVocabulary& vocab);

// Parses `<onset> <onset+1> <label> <value>` lines into a per-second track.
// Explicit zeros are tolerated and dropped. Throws ParseError on values
// outside [0,1], offsets != onset+1, or duplicate (segment, class) entries.
SoftLabelTrack parse_soft_labels(std::istream& in,
                                 const ClassVocabulary& vocab);

// Canonical form: tab-delimited, sorted by (onset, label), trailing newline
// per event.
std::string serialize_hard(const HardLabelEvents& events);

// Canonical form: tab-delimited, sorted by (segment, class), 6 decimals,
// zero entries omitted.
std::string serialize_soft(const SoftLabelTrack& track);

}  // namespace softsed

#endif  // SOFTSED_LABELIO_HPP
