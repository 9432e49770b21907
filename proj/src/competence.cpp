// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "softsed/competence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "softsed/textutil.hpp"

namespace softsed {

namespace {

struct EmState {
  std::vector<double> theta;
  std::vector<double> xi;
  double pi = 0.5;
};

struct EmStats {
  std::vector<double> faithful;    // sum of per-vote copy posteriors
  std::vector<double> n_votes;     // votes per annotator
  std::vector<double> spam;        // sum of per-vote spam posteriors
  std::vector<double> spam_ones;   // spam posteriors on votes that were 1
  std::vector<double> tau;         // per-item posterior of T = 1
  double data_ll = 0.0;
};

double log_sum_exp(double a, double b) {
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Beta(1+delta, 1+delta) log prior on every parameter; the M-step below is
// exactly the MAP update for it, which keeps the penalized objective
// monotone under EM.
double log_prior(const EmState& s, double delta) {
  double lp = delta * (std::log(s.pi) + std::log(1.0 - s.pi));
  for (std::size_t j = 0; j < s.theta.size(); ++j) {
    lp += delta * (std::log(s.theta[j]) + std::log(1.0 - s.theta[j]));
    lp += delta * (std::log(s.xi[j]) + std::log(1.0 - s.xi[j]));
  }
  return lp;
}

EmStats e_step(const VoteMatrix& m, const EmState& s) {
  const std::size_t n_ann = m.annotators.size();
  EmStats st;
  st.faithful.assign(n_ann, 0.0);
  st.n_votes.assign(n_ann, 0.0);
  st.spam.assign(n_ann, 0.0);
  st.spam_ones.assign(n_ann, 0.0);
  st.tau.resize(m.n_items());

  for (std::size_t i = 0; i < m.n_items(); ++i) {
    double log1 = std::log(s.pi);
    double log0 = std::log(1.0 - s.pi);
    for (const auto& [j, v] : m.votes[i]) {
      double th = s.theta[static_cast<std::size_t>(j)];
      double xi = s.xi[static_cast<std::size_t>(j)];
      double spam_v = v ? xi : 1.0 - xi;
      log1 += std::log((v == 1 ? th : 0.0) + (1.0 - th) * spam_v);
      log0 += std::log((v == 0 ? th : 0.0) + (1.0 - th) * spam_v);
    }
    double lse = log_sum_exp(log1, log0);
    st.data_ll += lse;
    double tau = std::exp(log1 - lse);
    st.tau[i] = tau;

    for (const auto& [ji, v] : m.votes[i]) {
      auto j = static_cast<std::size_t>(ji);
      double th = s.theta[j];
      double xi = s.xi[j];
      double spam_v = v ? xi : 1.0 - xi;
      // P(faithful | T = t, v) for each latent value.
      double c1 = v == 1 ? th / (th + (1.0 - th) * spam_v) : 0.0;
      double c0 = v == 0 ? th / (th + (1.0 - th) * spam_v) : 0.0;
      double copy = tau * c1 + (1.0 - tau) * c0;
      st.faithful[j] += copy;
      st.n_votes[j] += 1.0;
      st.spam[j] += 1.0 - copy;
      st.spam_ones[j] += (1.0 - copy) * v;
    }
  }
  return st;
}

void m_step(const EmStats& st, double delta, EmState& s) {
  for (std::size_t j = 0; j < s.theta.size(); ++j) {
    s.theta[j] = (st.faithful[j] + delta) / (st.n_votes[j] + 2.0 * delta);
    s.xi[j] = (st.spam_ones[j] + delta) / (st.spam[j] + 2.0 * delta);
  }
  double tau_sum = std::accumulate(st.tau.begin(), st.tau.end(), 0.0);
  s.pi = (tau_sum + delta) /
         (static_cast<double>(st.tau.size()) + 2.0 * delta);
}

struct EmRun {
  EmState state;
  std::vector<double> objective_trace;
  double data_ll = 0.0;
  double objective = 0.0;
};

EmRun run_restart(const VoteMatrix& m, const EmConfig& cfg,
                  std::uint64_t restart_seed) {
  Rng rng(restart_seed);
  const std::size_t n_ann = m.annotators.size();
  EmState s;
  s.theta.resize(n_ann);
  s.xi.resize(n_ann);
  s.pi = 0.5;
  // Initialization biased toward the faithful mode.
  for (auto& t : s.theta) t = rng.uniform(0.5, 0.9);
  for (auto& x : s.xi) x = rng.uniform(0.3, 0.7);

  EmRun run;
  for (int it = 0; it < cfg.iterations; ++it) {
    EmStats st = e_step(m, s);
    run.objective_trace.push_back(st.data_ll + log_prior(s, cfg.smoothing));
    m_step(st, cfg.smoothing, s);
  }

  // Label-switching guard: a solution explaining the data with mostly
  // unfaithful annotators is the mirrored mode; flip the latent labels and
  // let EM reconverge.
  double mean_theta =
      std::accumulate(s.theta.begin(), s.theta.end(), 0.0) /
      static_cast<double>(n_ann);
  if (mean_theta < 0.5) {
    EmStats st = e_step(m, s);
    for (auto& t : st.tau) t = 1.0 - t;
    // Rebuild the parameters from the flipped posteriors, then reconverge.
    for (std::size_t j = 0; j < n_ann; ++j) {
      st.faithful[j] = 0.0;
      st.spam[j] = 0.0;
      st.spam_ones[j] = 0.0;
    }
    for (std::size_t i = 0; i < m.n_items(); ++i) {
      for (const auto& [ji, v] : m.votes[i]) {
        auto j = static_cast<std::size_t>(ji);
        // Treat a vote matching the flipped label as evidence of copying.
        double match = st.tau[i] * v + (1.0 - st.tau[i]) * (1 - v);
        st.faithful[j] += match;
        st.spam[j] += 1.0 - match;
        st.spam_ones[j] += (1.0 - match) * v;
      }
    }
    m_step(st, cfg.smoothing, s);
    for (int it = 0; it < 10; ++it) {
      EmStats st2 = e_step(m, s);
      m_step(st2, cfg.smoothing, s);
    }
  }

  EmStats final_st = e_step(m, s);
  run.data_ll = final_st.data_ll;
  run.objective = final_st.data_ll + log_prior(s, cfg.smoothing);
  run.state = std::move(s);
  return run;
}

}  // namespace

std::size_t VoteMatrix::total_votes() const {
  std::size_t n = 0;
  for (const auto& v : votes) n += v.size();
  return n;
}

VoteMatrix materialize_votes(const WeakAnnotationSet& set,
                             const ClassVocabulary& vocab) {
  return materialize_votes(std::span<const WeakAnnotationSet>(&set, 1),
                           vocab);
}

VoteMatrix materialize_votes(std::span<const WeakAnnotationSet> sets,
                             const ClassVocabulary& vocab) {
  VoteMatrix m;
  std::map<std::string, int> ann_idx;
  for (const auto& set : sets) {
    std::set<std::pair<std::string, long>> assignments(
        set.assignments.begin(), set.assignments.end());
    for (const auto& [annotator, start] : assignments) {
      auto [it, inserted] =
          ann_idx.emplace(annotator, static_cast<int>(m.annotators.size()));
      if (inserted) m.annotators.push_back(annotator);
      int j = it->second;
      for (std::size_t c = 0; c < vocab.classes.size(); ++c) {
        m.item_ids.push_back(set.recording + ":" + std::to_string(start) +
                             ":" + vocab.classes[c]);
        std::uint8_t v = set.positives.count(
                             {annotator, start, static_cast<int>(c)})
                             ? 1
                             : 0;
        m.votes.push_back({{j, v}});
      }
    }
  }
  // Merge duplicate item ids created by different annotators seeing the
  // same window.
  std::map<std::string, std::size_t> item_idx;
  VoteMatrix merged;
  merged.annotators = m.annotators;
  for (std::size_t i = 0; i < m.item_ids.size(); ++i) {
    auto [it, inserted] =
        item_idx.emplace(m.item_ids[i], merged.item_ids.size());
    if (inserted) {
      merged.item_ids.push_back(m.item_ids[i]);
      merged.votes.emplace_back();
    }
    auto& bucket = merged.votes[it->second];
    bucket.insert(bucket.end(), m.votes[i].begin(), m.votes[i].end());
  }
  if (merged.item_ids.empty()) throw DataError("no items: annotation set is empty");
  return merged;
}

double CompetenceTable::theta_of(const std::string& annotator) const {
  auto it = theta.find(annotator);
  if (it == theta.end())
    throw DataError("no competence estimate for annotator '" + annotator +
                    "'");
  return it->second;
}

CompetenceTable estimate_competence(const VoteMatrix& matrix,
                                    const EmConfig& config) {
  if (matrix.n_items() == 0) throw DataError("vote matrix is empty");
  if (config.iterations < 1 || config.restarts < 1)
    throw DataError("EM needs at least one iteration and one restart");

  EmRun best;
  bool have_best = false;
  for (int r = 0; r < config.restarts; ++r) {
    EmRun run = run_restart(matrix, config, derive_seed(config.seed,
                                                        static_cast<std::uint64_t>(r)));
    if (!have_best || run.objective > best.objective) {
      best = std::move(run);
      have_best = true;
    }
  }

  // Count distinct items per annotator for the low-support flag.
  std::vector<std::size_t> items_seen(matrix.annotators.size(), 0);
  for (const auto& item : matrix.votes)
    for (const auto& [j, v] : item)
      items_seen[static_cast<std::size_t>(j)] += 1;

  CompetenceTable table;
  table.log_likelihood = best.data_ll;
  for (std::size_t j = 0; j < matrix.annotators.size(); ++j) {
    table.theta[matrix.annotators[j]] =
        std::clamp(best.state.theta[j], 0.01, 0.99);
    table.xi[matrix.annotators[j]] = best.state.xi[j];
    if (items_seen[j] <= 1) table.low_support.insert(matrix.annotators[j]);
  }
  return table;
}

std::vector<double> em_objective_trace(const VoteMatrix& matrix,
                                       const EmConfig& config) {
  if (matrix.n_items() == 0) throw DataError("vote matrix is empty");
  EmRun run = run_restart(matrix, config, derive_seed(config.seed, 0));
  return run.objective_trace;
}

std::vector<int> majority_vote(const VoteMatrix& matrix) {
  if (matrix.n_items() == 0) throw DataError("vote matrix is empty");
  std::vector<int> labels(matrix.n_items(), 0);
  for (std::size_t i = 0; i < matrix.n_items(); ++i) {
    std::size_t ones = 0;
    for (const auto& [j, v] : matrix.votes[i]) ones += v;
    labels[i] = 2 * ones > matrix.votes[i].size() ? 1 : 0;
  }
  return labels;
}

std::string serialize_competence(const CompetenceTable& table) {
  std::string out;
  char buf[64];
  for (const auto& [annotator, theta] : table.theta) {
    std::snprintf(buf, sizeof buf, "%.6f\t%.6f", theta,
                  table.xi.at(annotator));
    out += annotator;
    out += '\t';
    out += buf;
    out += '\n';
  }
  return out;
}

CompetenceTable parse_competence(std::istream& in) {
  CompetenceTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split_fields(line, 3);
    if (fields.size() != 3)
      throw ParseError("competence line " + std::to_string(line_no) +
                       ": expected 3 fields");
    table.theta[fields[0]] = text::parse_real(fields[1], line_no, "theta");
    table.xi[fields[0]] = text::parse_real(fields[2], line_no, "xi");
  }
  return table;
}

}  // namespace softsed
