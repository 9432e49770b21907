// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef SOFTSED_COMPETENCE_HPP
#define SOFTSED_COMPETENCE_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "softsed/crowdsim.hpp"

namespace softsed {

// Binary presence questions with one vote per (item, annotator) pair. Unlike
// WeakAnnotationSet, implicit negatives are materialized as explicit 0 votes:
// absence of a pair here means the annotator never saw the item.
struct VoteMatrix {
  std::vector<std::string> item_ids;
  std::vector<std::string> annotators;
  // votes[item] = list of (annotator index, vote in {0,1})
  std::vector<std::vector<std::pair<int, std::uint8_t>>> votes;

  std::size_t n_items() const { return item_ids.size(); }
  std::size_t total_votes() const;
};

// One item per (recording, window, class) question; every class in the
// vocabulary gets a vote for every assignment, 1 if selected else 0.
VoteMatrix materialize_votes(const WeakAnnotationSet& set,
                             const ClassVocabulary& vocab);
VoteMatrix materialize_votes(std::span<const WeakAnnotationSet> sets,
                             const ClassVocabulary& vocab);

struct EmConfig {
  int iterations = 50;
  int restarts = 10;
  double smoothing = 0.1;  // add-delta on all M-step counts
  std::uint64_t seed = 1;
};

struct CompetenceTable {
  std::map<std::string, double> theta;  // clamped to [0.01, 0.99]
  std::map<std::string, double> xi;
  double log_likelihood = 0.0;  // data log-likelihood of the chosen solution
  // Annotators whose votes all land on a single item; their theta has
  // essentially no support.
  std::set<std::string> low_support;

  double theta_of(const std::string& annotator) const;
};

// EM for the spamming model: latent truth T_i ~ Bernoulli(pi); a vote copies
// T_i with probability theta_j, otherwise is drawn Bernoulli(xi_j). Runs
// `restarts` independent random initializations for `iterations` full EM
// sweeps each and keeps the best penalized likelihood. Deterministic given
// the seed. If the winning solution has mean theta < 0.5 the label-flipped
// solution is taken instead.
CompetenceTable estimate_competence(const VoteMatrix& matrix,
                                    const EmConfig& config);

// Per-iteration penalized objective of a single EM run, exposed for the
// monotonicity check.
std::vector<double> em_objective_trace(const VoteMatrix& matrix,
                                       const EmConfig& config);

// Per item: 1 iff strictly more than half of its votes are 1; ties give 0.
std::vector<int> majority_vote(const VoteMatrix& matrix);

// Tab-delimited `<annotator>\t<theta>\t<xi>` with 6 decimals, sorted by id.
std::string serialize_competence(const CompetenceTable& table);
CompetenceTable parse_competence(std::istream& in);

}  // namespace softsed

#endif  // SOFTSED_COMPETENCE_HPP
