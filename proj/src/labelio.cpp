// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/labelio.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "softsed/textutil.hpp"

namespace softsed {

using text::parse_long;
using text::parse_real;
using text::skippable;
using text::split_fields;

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

int ClassVocabulary::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return static_cast<int>(i);
  return -1;
}

void ClassVocabulary::validate() const {
  if (classes.empty())
    throw DataError("vocabulary for scene '" + scene + "' has no classes");
  std::set<std::string> seen;
  for (const auto& c : classes)
    if (!seen.insert(c).second)
      throw DataError("duplicate class '" + c + "' in scene '" + scene + "'");
}

std::vector<ClassVocabulary> default_vocabularies() {
  return {
      {"cafe/restaurant",
       {"children voices", "coffee machine", "cutlery/dishes", "footsteps",
        "furniture dragging", "people talking"}},
      {"city center",
       {"brakes squeaking", "car", "children voices", "footsteps",
        "large vehicle", "people talking"}},
      {"grocery store",
       {"announcement", "cash register", "children voices", "footsteps",
        "people talking", "shopping cart"}},
      {"metro station",
       {"children voices", "door opens/closes", "footsteps",
        "metro approaching", "metro leaving", "people talking"}},
      {"residential area",
       {"birds singing", "car", "children voices", "footsteps",
        "people talking", "wind blowing"}},
  };
}

const ClassVocabulary& find_vocabulary(
    const std::vector<ClassVocabulary>& vocabs, std::string_view scene) {
  for (const auto& v : vocabs)
    if (v.scene == scene) return v;
  throw DataError("unknown scene '" + std::string(scene) + "'");
}

double SoftLabelTrack::at(long segment, const std::string& cls) const {
  auto it = values.find({segment, cls});
  return it == values.end() ? 0.0 : it->second;
}

void SoftLabelTrack::set(long segment, const std::string& cls, double value) {
  if (value < 0.0 || value > 1.0)
    throw DataError("soft value " + std::to_string(value) +
                    " outside [0,1] for class '" + cls + "'");
  if (value == 0.0) {
    values.erase({segment, cls});
    return;
  }
  values[{segment, cls}] = value;
}

HardLabelEvents parse_hard_labels(std::istream& in,
                                  const ClassVocabulary& vocab) {
  HardLabelEvents out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split_fields(line, 3);
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       "3 fields (onset, offset, label), got " +
                       std::to_string(fields.size()));
    HardEvent ev;
    ev.onset = parse_long(fields[0], line_no, "onset");
    ev.offset = parse_long(fields[1], line_no, "offset");
    ev.label = fields[2];
    if (ev.onset < 0)
      throw ParseError("line " + std::to_string(line_no) +
                       ": negative onset");
    if (ev.offset <= ev.onset)
      throw ParseError("line " + std::to_string(line_no) +
                       ": offset must exceed onset");
    if (!vocab.contains(ev.label))
      throw ParseError("line " + std::to_string(line_no) +
                       ": unknown label '" + ev.label + "'");
    out.events.push_back(std::move(ev));
  }
  return out;
}

SoftLabelTrack parse_soft_labels(std::istream& in,
                                 const ClassVocabulary& vocab) {
  SoftLabelTrack out;
  std::string line;
  std::size_t line_no = 0;
  std::set<std::pair<long, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    auto fields = split_fields(line, 4);
    if (fields.size() != 4)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       "4 fields (onset, offset, label, value), got " +
                       std::to_string(fields.size()));
    long onset = parse_long(fields[0], line_no, "onset");
    long offset = parse_long(fields[1], line_no, "offset");
    if (onset < 0)
      throw ParseError("line " + std::to_string(line_no) +
                       ": negative onset");
    if (offset != onset + 1)
      throw ParseError("line " + std::to_string(line_no) +
                       ": soft-label segments must be 1 s (offset = onset+1)");
    const std::string& label = fields[2];
    if (!vocab.contains(label))
      throw ParseError("line " + std::to_string(line_no) +
                       ": unknown label '" + label + "'");
    double value = parse_real(fields[3], line_no, "value");
    if (value < 0.0 || value > 1.0)
      throw ParseError("line " + std::to_string(line_no) + ": value " +
                       fields[3] + " outside [0,1]");
    if (!seen.insert({onset, label}).second)
      throw ParseError("line " + std::to_string(line_no) +
                       ": duplicate entry for segment " +
                       std::to_string(onset) + ", class '" + label + "'");
    out.set(onset, label, value);
    out.duration = std::max(out.duration, offset);
  }
  return out;
}

std::string serialize_hard(const HardLabelEvents& events) {
  std::vector<HardEvent> sorted = events.events;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const HardEvent& a, const HardEvent& b) {
                     return std::tie(a.onset, a.label) <
                            std::tie(b.onset, b.label);
                   });
  std::string out;
  for (const auto& ev : sorted) {
    out += std::to_string(ev.onset);
    out += '\t';
    out += std::to_string(ev.offset);
    out += '\t';
    out += ev.label;
    out += '\n';
  }
  return out;
}

std::string serialize_soft(const SoftLabelTrack& track) {
  std::string out;
  for (const auto& [key, value] : track.values) {
    if (value == 0.0) continue;
    out += std::to_string(key.first);
    out += '\t';
    out += std::to_string(key.first + 1);
    out += '\t';
    out += key.second;
    out += '\t';
    out += format_value(value);
    out += '\n';
  }
  return out;
}

}  // namespace softsed
