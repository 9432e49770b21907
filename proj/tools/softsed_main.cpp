// Copyright 2026 The softsed authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

// softsed command-line front end. Every stage reads and writes plain files so
// experiments can be scripted and resumed; all randomness is derived from one
// 64-bit seed, and every text artifact starts with a provenance comment
// carrying that seed plus a hash of the effective configuration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "softsed/aggregate.hpp"
#include "softsed/competence.hpp"
#include "softsed/crowdsim.hpp"
#include "softsed/features.hpp"
#include "softsed/labelio.hpp"
#include "softsed/metrics.hpp"
#include "softsed/model.hpp"

namespace fs = std::filesystem;

namespace {

using softsed::ClassVocabulary;
using softsed::DataError;
using softsed::HardLabelEvents;
using softsed::SegmentFeatures;
using softsed::SoftLabelTrack;
using softsed::ThresholdedActivity;

// --- provenance -------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// First line of every text artifact: seed plus a hash of the effective
// (defaults + config file + flags) option values of this invocation.
std::string provenance(std::uint64_t seed, const std::string& config_dump) {
  return "# softsed seed=" + std::to_string(seed) + " config=" +
         hex16(fnv1a64(config_dump)) + "\n";
}

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// --- file plumbing ----------------------------------------------------------

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ifstream open_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

std::ofstream open_binary_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

// --- small conversions ------------------------------------------------------

const ClassVocabulary& scene_vocab(const std::string& scene) {
  static const auto vocabs = softsed::default_vocabularies();
  return softsed::find_vocabulary(vocabs, scene);
}

std::vector<double> broadcast(std::vector<double> v, std::size_t n,
                              const std::string& what) {
  if (v.size() == 1) v.assign(n, v[0]);
  if (v.size() != n)
    throw DataError(what + ": expected 1 or " + std::to_string(n) +
                    " values, got " + std::to_string(v.size()));
  return v;
}

SoftLabelTrack load_soft(const fs::path& path, const ClassVocabulary& vocab,
                         long duration) {
  auto in = open_text(path);
  auto track = softsed::parse_soft_labels(in, vocab);
  long seen = 0;
  for (const auto& [key, value] : track.values)
    seen = std::max(seen, key.first + 1);
  track.duration = duration > 0 ? duration : seen;
  if (seen > track.duration)
    throw DataError("'" + path.string() + "' has segments past " +
                    std::to_string(track.duration) + " s");
  return track;
}

HardLabelEvents load_hard(const fs::path& path,
                          const ClassVocabulary& vocab) {
  auto in = open_text(path);
  return softsed::parse_hard_labels(in, vocab);
}

// [segment][class] grid of a soft track (absent entries are 0).
std::vector<std::vector<double>> soft_grid(const SoftLabelTrack& track,
                                           const ClassVocabulary& vocab) {
  std::vector<std::vector<double>> grid(
      static_cast<std::size_t>(track.duration),
      std::vector<double>(vocab.size(), 0.0));
  for (long t = 0; t < track.duration; ++t)
    for (std::size_t c = 0; c < vocab.size(); ++c)
      grid[static_cast<std::size_t>(t)][c] = track.at(t, vocab.classes[c]);
  return grid;
}

ThresholdedActivity activity_from_scores(
    const std::vector<std::vector<double>>& scores,
    const std::vector<std::string>& classes, std::span<const double> taus) {
  ThresholdedActivity act;
  act.duration = static_cast<long>(scores.size());
  act.classes = classes;
  act.thresholds.assign(taus.begin(), taus.end());
  act.active.assign(scores.size(),
                    std::vector<std::uint8_t>(classes.size(), 0));
  for (std::size_t t = 0; t < scores.size(); ++t)
    for (std::size_t c = 0; c < classes.size(); ++c)
      act.active[t][c] = scores[t][c] >= taus[c] ? 1 : 0;
  return act;
}

// --- pipeline ---------------------------------------------------------------

struct PipelineArgs {
  std::string scene = "cafe/restaurant";
  int recordings = 10;
  long duration = 200;
  long window = 10;
  long hop = 1;
  int annotators = 20;
  int k = 5;
  double theta_min = 0.5, theta_max = 0.9;
  double xi_min = 0.3, xi_max = 0.7;
  std::vector<double> event_rate = {0.02};
  std::vector<double> mean_duration = {10.0};
  int em_iterations = 50;
  int em_restarts = 10;
  double em_smoothing = 0.1;
  int feature_dim = 32;
  double noise = 0.05;
  int epochs = 40;
  int batch_size = 64;
  int hidden_dim = 64;
  double learning_rate = 1e-3;
  double trim = 0.1;
  std::uint64_t seed = 1;
  std::string out_dir = "pipeline_out";
};

std::vector<softsed::Annotator> make_pool(int n, double theta_min,
                                          double theta_max, double xi_min,
                                          double xi_max, std::uint64_t seed) {
  softsed::Rng rng(seed);
  std::vector<softsed::Annotator> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    char id[16];
    std::snprintf(id, sizeof(id), "ann%03d", j);
    pool.push_back(
        {id, rng.uniform(theta_min, theta_max), rng.uniform(xi_min, xi_max)});
  }
  return pool;
}

void run_pipeline(const PipelineArgs& a, const std::string& prov) {
  const auto& vocab = scene_vocab(a.scene);
  if (a.recordings < 2)
    throw DataError("pipeline needs at least 2 recordings for a split");

  softsed::TruthConfig truth_cfg;
  truth_cfg.duration = a.duration;
  truth_cfg.classes = vocab.classes;
  truth_cfg.event_rate = broadcast(a.event_rate, vocab.size(), "--event-rate");
  truth_cfg.mean_duration =
      broadcast(a.mean_duration, vocab.size(), "--mean-duration");
  truth_cfg.window = a.window;

  auto pool = make_pool(a.annotators, a.theta_min, a.theta_max, a.xi_min,
                        a.xi_max, softsed::derive_seed(a.seed, 1000));

  // Simulate every recording.
  std::vector<softsed::TrueActivityTrack> truths;
  std::vector<softsed::WeakAnnotationSet> sets;
  for (int r = 0; r < a.recordings; ++r) {
    char name[16];
    std::snprintf(name, sizeof(name), "rec%03d", r);
    auto truth = softsed::gen_truth(truth_cfg,
                                    softsed::derive_seed(a.seed, 2000 + r));
    truth.recording = name;
    auto set =
        softsed::gen_annotations(truth, pool, a.k, a.window, a.hop,
                                 softsed::derive_seed(a.seed, 3000 + r));
    set.recording = name;
    truths.push_back(std::move(truth));
    sets.push_back(std::move(set));
  }

  // Competence over the whole corpus, then per-recording aggregation.
  softsed::EmConfig em;
  em.iterations = a.em_iterations;
  em.restarts = a.em_restarts;
  em.smoothing = a.em_smoothing;
  em.seed = softsed::derive_seed(a.seed, 4000);
  auto votes = softsed::materialize_votes(sets, vocab);
  auto competence = softsed::estimate_competence(votes, em);

  std::vector<SoftLabelTrack> agg(truths.size());
  for (std::size_t r = 0; r < truths.size(); ++r) {
    agg[r] = softsed::aggregate_track(sets[r], competence, vocab, a.duration)
                 .track;
    agg[r].recording = truths[r].recording;
  }

  // Synthetic per-second features stand in for audio.
  std::vector<SegmentFeatures> feats(truths.size());
  for (std::size_t r = 0; r < truths.size(); ++r)
    feats[r] = softsed::synth_features(
        truths[r], a.feature_dim, a.noise, softsed::derive_seed(a.seed, 1),
        softsed::derive_seed(a.seed, 5000 + r));

  // 80/20 split by recording.
  const std::size_t n_train =
      std::max<std::size_t>(1, truths.size() * 4 / 5);

  std::vector<std::vector<double>> train_x;
  std::vector<std::vector<double>> train_soft;
  std::vector<std::vector<double>> train_hard;
  for (std::size_t r = 0; r < n_train; ++r) {
    auto grid = soft_grid(agg[r], vocab);
    for (long t = 0; t < a.duration; ++t) {
      auto row = feats[r].segment(t);
      train_x.emplace_back(row.begin(), row.end());
      train_soft.push_back(grid[static_cast<std::size_t>(t)]);
      auto& hard = train_hard.emplace_back(vocab.size(), 0.0);
      for (std::size_t c = 0; c < vocab.size(); ++c)
        hard[c] = grid[static_cast<std::size_t>(t)][c] >= 0.5 ? 1.0 : 0.0;
    }
  }

  softsed::TrainConfig tc;
  tc.epochs = a.epochs;
  tc.batch_size = a.batch_size;
  tc.hidden_dim = a.hidden_dim;
  tc.learning_rate = a.learning_rate;

  const softsed::TrainingSetup setups[] = {
      softsed::TrainingSetup::kHardBceSigmoid,
      softsed::TrainingSetup::kSoftBceSigmoid,
      softsed::TrainingSetup::kSoftMseLinear};
  std::vector<softsed::ModelParams> models;
  for (int i = 0; i < 3; ++i) {
    tc.seed = softsed::derive_seed(a.seed, 6000 + i);
    const auto& targets =
        setups[i] == softsed::TrainingSetup::kHardBceSigmoid ? train_hard
                                                             : train_soft;
    models.push_back(softsed::train(train_x, targets, setups[i], tc).params);
  }

  // Class-dependent thresholds from the training-split soft labels.
  std::vector<SoftLabelTrack> train_tracks(agg.begin(),
                                           agg.begin() + n_train);
  auto taus = softsed::class_thresholds(train_tracks, vocab, a.trim);

  // Validation references: binary truth for ER/F1 and BCE-row KLD, the
  // aggregated soft labels for the regression-row KLD.
  std::vector<std::vector<double>> ref_binary;
  std::vector<std::vector<double>> ref_soft;
  ThresholdedActivity ref_act;
  ref_act.classes = vocab.classes;
  ref_act.thresholds.assign(vocab.size(), 0.5);
  for (std::size_t r = n_train; r < truths.size(); ++r) {
    auto grid = soft_grid(agg[r], vocab);
    for (long t = 0; t < a.duration; ++t) {
      ref_act.active.push_back(truths[r].active[static_cast<std::size_t>(t)]);
      auto& row = ref_binary.emplace_back(vocab.size(), 0.0);
      for (std::size_t c = 0; c < vocab.size(); ++c)
        row[c] = truths[r].is_active(t, static_cast<int>(c)) ? 1.0 : 0.0;
      ref_soft.push_back(grid[static_cast<std::size_t>(t)]);
    }
  }
  ref_act.duration = static_cast<long>(ref_act.active.size());

  std::vector<std::vector<std::vector<double>>> val_scores(3);
  for (int i = 0; i < 3; ++i)
    for (std::size_t r = n_train; r < truths.size(); ++r) {
      auto scores = softsed::predict(models[i], feats[r]);
      val_scores[static_cast<std::size_t>(i)].insert(
          val_scores[static_cast<std::size_t>(i)].end(), scores.begin(),
          scores.end());
    }

  const std::vector<double> fixed(vocab.size(), 0.5);
  std::string report = prov;
  report += "setup\tthreshold\ter\tf1\tkld\n";
  auto add_row = [&](const std::string& name, const std::string& tau_label,
                     std::span<const double> tau,
                     const std::vector<std::vector<double>>& scores,
                     const std::vector<std::vector<double>>* kld_ref) {
    auto sys = activity_from_scores(scores, vocab.classes, tau);
    auto eval = softsed::segment_eval(ref_act, sys);
    report += name + "\t" + tau_label + "\t" + fmt6(eval.er) + "\t" +
              fmt6(eval.f1) + "\t" +
              (kld_ref ? fmt6(softsed::kld(scores, *kld_ref)) : "-") + "\n";
  };
  add_row("H_BCE_sig", fmt6(0.5), fixed, val_scores[0], &ref_binary);
  add_row("S_BCE_sig", fmt6(0.5), fixed, val_scores[1], &ref_binary);
  add_row("S_MSE_lin", fmt6(0.5), fixed, val_scores[2], &ref_soft);
  add_row("S_MSE_lin", "class-dependent", taus.tau, val_scores[2], nullptr);

  // Artifacts.
  const fs::path out(a.out_dir);
  fs::create_directories(out);
  write_text(out / "report.txt", report);
  write_text(out / "competence.txt",
             prov + softsed::serialize_competence(competence));
  write_text(out / "thresholds.txt",
             prov + softsed::serialize_thresholds(taus));
  for (std::size_t r = 0; r < truths.size(); ++r) {
    write_text(out / ("truth_" + truths[r].recording + ".txt"),
               prov + softsed::serialize_hard(softsed::truth_events(truths[r])));
    write_text(out / ("soft_" + truths[r].recording + ".txt"),
               prov + softsed::serialize_soft(agg[r]));
  }
  for (int i = 0; i < 3; ++i) {
    auto f = open_binary_out(out / ("model_" + setup_name(setups[i]) +
                                    ".ssmp"));
    softsed::save_model(f, models[static_cast<std::size_t>(i)]);
  }
  std::cout << report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"softsed: crowd-labelled sound event detection toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "",
                 "TOML config file; flags and SOFTSED_* env vars override it")
      ->envname("SOFTSED_CONFIG");

  // Shared knobs. Only one subcommand parses, so variables can be shared.
  std::string scene = "cafe/restaurant";
  std::uint64_t seed = 1;
  long duration = 0;
  long window = 10, hop = 1;
  std::string out_path = "-";

  auto add_scene = [&](CLI::App* cmd) {
    cmd->add_option("--scene", scene, "Scene vocabulary name")
        ->envname("SOFTSED_SCENE")
        ->capture_default_str();
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master 64-bit seed")
        ->envname("SOFTSED_SEED")
        ->capture_default_str();
  };
  auto add_window = [&](CLI::App* cmd) {
    cmd->add_option("--window", window, "Annotation window length W (s)")
        ->capture_default_str();
    cmd->add_option("--hop", hop, "Annotation hop H (s)")
        ->capture_default_str();
  };

  // Emits to stdout when the output path is "-".
  auto emit = [&](const std::string& content) {
    if (out_path == "-")
      std::cout << content;
    else
      write_text(out_path, content);
  };
  auto prov_line = [&] { return provenance(seed, app.config_to_str(true)); };

  // --- simulate ---------------------------------------------------------
  PipelineArgs sim;  // reuse the simulator fields
  std::string out_dir = "sim_out";
  {
    auto* cmd = app.add_subcommand(
        "simulate", "Generate a ground-truth track and crowd annotations");
    add_scene(cmd);
    add_seed(cmd);
    add_window(cmd);
    cmd->add_option("--duration", sim.duration, "Recording length (s)")
        ->capture_default_str();
    cmd->add_option("--annotators", sim.annotators, "Annotator pool size")
        ->capture_default_str();
    cmd->add_option("--k", sim.k, "Annotators per window")
        ->capture_default_str();
    cmd->add_option("--theta-min", sim.theta_min, "Pool competence lower bound")
        ->capture_default_str();
    cmd->add_option("--theta-max", sim.theta_max, "Pool competence upper bound")
        ->capture_default_str();
    cmd->add_option("--xi-min", sim.xi_min, "Pool spam-bias lower bound")
        ->capture_default_str();
    cmd->add_option("--xi-max", sim.xi_max, "Pool spam-bias upper bound")
        ->capture_default_str();
    cmd->add_option("--event-rate", sim.event_rate,
                    "Events per silent second; one value or one per class")
        ->capture_default_str();
    cmd->add_option("--mean-duration", sim.mean_duration,
                    "Mean event length (s); one value or one per class")
        ->capture_default_str();
    cmd->add_option("--out-dir", out_dir, "Output directory")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      softsed::TruthConfig cfg;
      cfg.duration = sim.duration;
      cfg.classes = vocab.classes;
      cfg.event_rate = broadcast(sim.event_rate, vocab.size(), "--event-rate");
      cfg.mean_duration =
          broadcast(sim.mean_duration, vocab.size(), "--mean-duration");
      cfg.window = window;
      auto pool = make_pool(sim.annotators, sim.theta_min, sim.theta_max,
                            sim.xi_min, sim.xi_max,
                            softsed::derive_seed(seed, 1000));
      auto truth = softsed::gen_truth(cfg, softsed::derive_seed(seed, 2000));
      auto set = softsed::gen_annotations(truth, pool, sim.k, window, hop,
                                          softsed::derive_seed(seed, 3000));
      const std::string prov = prov_line();
      const fs::path out(out_dir);
      write_text(out / "truth.txt",
                 prov + softsed::serialize_hard(softsed::truth_events(truth)));
      write_text(out / "votes.txt",
                 prov + softsed::serialize_votes(set, vocab));
      write_text(out / "assignments.txt",
                 prov + softsed::serialize_assignments(set));
      std::string pool_txt = prov;
      for (const auto& ann : pool)
        pool_txt += ann.id + "\t" + fmt6(ann.theta) + "\t" + fmt6(ann.xi) +
                    "\n";
      write_text(out / "annotators.txt", pool_txt);
    });
  }

  // --- estimate-competence ------------------------------------------------
  std::string votes_path, assignments_path;
  softsed::EmConfig em;
  {
    auto* cmd = app.add_subcommand(
        "estimate-competence", "Fit per-annotator reliability with EM");
    add_scene(cmd);
    add_seed(cmd);
    add_window(cmd);
    cmd->add_option("--votes", votes_path, "Positive-vote file")->required();
    cmd->add_option("--assignments", assignments_path,
                    "Window-assignment file")
        ->required();
    cmd->add_option("--iterations", em.iterations, "EM sweeps per restart")
        ->capture_default_str();
    cmd->add_option("--restarts", em.restarts, "Random restarts")
        ->capture_default_str();
    cmd->add_option("--smoothing", em.smoothing, "Add-delta count smoothing")
        ->capture_default_str();
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      auto votes_in = open_text(votes_path);
      auto assign_in = open_text(assignments_path);
      auto set = softsed::parse_annotations(votes_in, assign_in, vocab,
                                            window, hop);
      auto matrix = softsed::materialize_votes(set, vocab);
      em.seed = softsed::derive_seed(seed, 4000);
      auto table = softsed::estimate_competence(matrix, em);
      std::string body = prov_line();
      body += "# log_likelihood=" + fmt6(table.log_likelihood) + "\n";
      for (const auto& id : table.low_support)
        body += "# low_support\t" + id + "\n";
      body += softsed::serialize_competence(table);
      emit(body);
    });
  }

  // --- aggregate ------------------------------------------------------------
  std::string competence_path, coverage_path;
  {
    auto* cmd = app.add_subcommand(
        "aggregate", "Competence-weighted soft labels from window votes");
    add_scene(cmd);
    add_seed(cmd);
    add_window(cmd);
    cmd->add_option("--votes", votes_path, "Positive-vote file")->required();
    cmd->add_option("--assignments", assignments_path,
                    "Window-assignment file")
        ->required();
    cmd->add_option("--competence", competence_path,
                    "Annotator competence file")
        ->required();
    cmd->add_option("--duration", duration, "Recording length (s)")
        ->required();
    cmd->add_option("--coverage", coverage_path,
                    "Optional per-segment opinion-count file");
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      auto votes_in = open_text(votes_path);
      auto assign_in = open_text(assignments_path);
      auto set = softsed::parse_annotations(votes_in, assign_in, vocab,
                                            window, hop);
      auto comp_in = open_text(competence_path);
      auto competence = softsed::parse_competence(comp_in);
      auto result =
          softsed::aggregate_track(set, competence, vocab, duration);
      emit(prov_line() + softsed::serialize_soft(result.track));
      if (!coverage_path.empty())
        write_text(coverage_path,
                   prov_line() + softsed::serialize_coverage(result.coverage));
    });
  }

  // --- binarize ---------------------------------------------------------
  std::string soft_path, thresholds_path;
  double threshold = 0.5;
  {
    auto* cmd = app.add_subcommand(
        "binarize", "Threshold a soft-label file into hard events");
    add_scene(cmd);
    add_seed(cmd);
    cmd->add_option("--soft", soft_path, "Soft-label file")->required();
    cmd->add_option("--threshold", threshold, "Global decision threshold")
        ->capture_default_str();
    cmd->add_option("--thresholds-file", thresholds_path,
                    "Per-class threshold file (overrides --threshold)");
    cmd->add_option("--duration", duration,
                    "Recording length (s); 0 infers it from the file")
        ->capture_default_str();
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      auto track = load_soft(soft_path, vocab, duration);
      ThresholdedActivity act;
      if (!thresholds_path.empty()) {
        auto in = open_text(thresholds_path);
        auto table = softsed::parse_thresholds(in, vocab);
        act = softsed::binarize(track, vocab, table.tau);
      } else {
        act = softsed::binarize(track, vocab, threshold);
      }
      auto events = softsed::events_from_activity(act);
      emit(prov_line() + softsed::serialize_hard(events));
    });
  }

  // --- thresholds -------------------------------------------------------
  std::vector<std::string> soft_paths;
  double trim = 0.1;
  {
    auto* cmd = app.add_subcommand(
        "thresholds",
        "Class-wise trimmed-midrange thresholds from training soft labels");
    add_scene(cmd);
    add_seed(cmd);
    cmd->add_option("--soft", soft_paths, "Training soft-label files")
        ->required();
    cmd->add_option("--trim", trim, "Trim fraction per tail")
        ->capture_default_str();
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      std::vector<SoftLabelTrack> tracks;
      for (const auto& p : soft_paths)
        tracks.push_back(load_soft(p, vocab, 0));
      auto table = softsed::class_thresholds(tracks, vocab, trim);
      emit(prov_line() + softsed::serialize_thresholds(table));
    });
  }

  // --- extract-features ---------------------------------------------------
  std::string wav_path, frames_path;
  {
    auto* cmd = app.add_subcommand(
        "extract-features",
        "Log-mel features from a WAV file, pooled per second");
    add_seed(cmd);
    cmd->add_option("--wav", wav_path, "Mono 16-bit PCM or float32 WAV")
        ->required();
    cmd->add_option("--frames-out", frames_path,
                    "Optional frame-level feature file");
    cmd->add_option("-o,--out", out_path, "Segment feature file")->required();
    cmd->callback([&] {
      auto in = open_binary(wav_path);
      auto wav = softsed::read_wav(in);
      auto frames = softsed::mel_energies(wav.samples, wav.sample_rate);
      if (!frames_path.empty()) {
        auto f = open_binary_out(frames_path);
        softsed::write_feature_file(f, frames);
      }
      auto segments = softsed::segment_pool(frames);
      auto f = open_binary_out(out_path);
      softsed::write_feature_file(f, segments);
    });
  }

  // --- train --------------------------------------------------------------
  std::vector<std::string> feature_paths, label_paths;
  std::string setup_str = "S_MSE_lin";
  softsed::TrainConfig tc;
  double binarize_threshold = 0.5;
  {
    auto* cmd = app.add_subcommand(
        "train", "Train a segment classifier on soft-label targets");
    add_scene(cmd);
    add_seed(cmd);
    cmd->add_option("--features", feature_paths,
                    "Segment feature files, one per recording")
        ->required();
    cmd->add_option("--labels", label_paths,
                    "Soft-label files aligned with --features")
        ->required();
    cmd->add_option("--setup", setup_str,
                    "H_BCE_sig, S_BCE_sig, or S_MSE_lin")
        ->capture_default_str();
    cmd->add_option("--epochs", tc.epochs, "Training epochs")
        ->capture_default_str();
    cmd->add_option("--batch-size", tc.batch_size, "Mini-batch size")
        ->capture_default_str();
    cmd->add_option("--hidden-dim", tc.hidden_dim, "Hidden layer width")
        ->capture_default_str();
    cmd->add_option("--learning-rate", tc.learning_rate, "Adam step size")
        ->capture_default_str();
    cmd->add_option("--binarize-threshold", binarize_threshold,
                    "Target threshold for the hard-label setup")
        ->capture_default_str();
    cmd->add_option("-o,--out", out_path, "Model file")->required();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      if (feature_paths.size() != label_paths.size())
        throw DataError("--features and --labels must pair up");
      auto setup = softsed::setup_from_name(setup_str);
      std::vector<std::vector<double>> xs, ts;
      for (std::size_t i = 0; i < feature_paths.size(); ++i) {
        auto fin = open_binary(feature_paths[i]);
        auto feats = softsed::read_segment_file(fin);
        auto track = load_soft(label_paths[i], vocab, feats.n_segments);
        for (long t = 0; t < feats.n_segments; ++t) {
          auto row = feats.segment(t);
          xs.emplace_back(row.begin(), row.end());
          auto& target = ts.emplace_back(vocab.size(), 0.0);
          for (std::size_t c = 0; c < vocab.size(); ++c) {
            double v = track.at(t, vocab.classes[c]);
            target[c] = setup == softsed::TrainingSetup::kHardBceSigmoid
                            ? (v >= binarize_threshold ? 1.0 : 0.0)
                            : v;
          }
        }
      }
      tc.seed = softsed::derive_seed(seed, 6000);
      auto run = softsed::train(xs, ts, setup, tc);
      auto f = open_binary_out(out_path);
      softsed::save_model(f, run.params);
    });
  }

  // --- predict ------------------------------------------------------------
  std::string model_path, features_path;
  {
    auto* cmd = app.add_subcommand(
        "predict", "Per-segment class scores from a trained model");
    add_scene(cmd);
    add_seed(cmd);
    cmd->add_option("--model", model_path, "Model file")->required();
    cmd->add_option("--features", features_path, "Segment feature file")
        ->required();
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      auto min = open_binary(model_path);
      auto params = softsed::load_model(min);
      auto fin = open_binary(features_path);
      auto feats = softsed::read_segment_file(fin);
      if (params.output_dim() != static_cast<int>(vocab.size()))
        throw DataError("model emits " +
                        std::to_string(params.output_dim()) +
                        " classes but scene has " +
                        std::to_string(vocab.size()));
      auto scores = softsed::predict(params, feats);
      SoftLabelTrack track;
      track.duration = feats.n_segments;
      for (long t = 0; t < feats.n_segments; ++t)
        for (std::size_t c = 0; c < vocab.size(); ++c)
          track.set(t, vocab.classes[c],
                    std::clamp(scores[static_cast<std::size_t>(t)][c], 0.0,
                               1.0));
      emit(prov_line() + softsed::serialize_soft(track));
    });
  }

  // --- evaluate -------------------------------------------------------------
  std::string reference_path, system_path, ref_soft_path, sys_soft_path;
  {
    auto* cmd = app.add_subcommand(
        "evaluate", "Segment-based ER/F1 (and optional KLD) report");
    add_scene(cmd);
    add_seed(cmd);
    cmd->add_option("--reference", reference_path, "Reference hard-label file")
        ->required();
    cmd->add_option("--system", system_path, "System hard-label file")
        ->required();
    cmd->add_option("--duration", duration, "Recording length (s)")
        ->required();
    cmd->add_option("--ref-soft", ref_soft_path,
                    "Reference soft-label file for KLD");
    cmd->add_option("--sys-soft", sys_soft_path,
                    "System soft-label file for KLD");
    cmd->add_option("-o,--out", out_path, "Output file, '-' for stdout")
        ->capture_default_str();
    cmd->callback([&] {
      const auto& vocab = scene_vocab(scene);
      auto ref =
          softsed::rasterize_events(load_hard(reference_path, vocab), vocab,
                                    duration);
      auto sys = softsed::rasterize_events(load_hard(system_path, vocab),
                                           vocab, duration);
      auto eval = softsed::segment_eval(ref, sys);
      std::string body = prov_line() + softsed::serialize_report(eval);
      if (ref_soft_path.empty() != sys_soft_path.empty())
        throw DataError("--ref-soft and --sys-soft must be given together");
      if (!ref_soft_path.empty()) {
        auto ref_track = load_soft(ref_soft_path, vocab, duration);
        auto sys_track = load_soft(sys_soft_path, vocab, duration);
        body += "kld\tmicro\t" +
                fmt6(softsed::kld(soft_grid(sys_track, vocab),
                                  soft_grid(ref_track, vocab))) +
                "\n";
      }
      emit(body);
    });
  }

  // --- pipeline ---------------------------------------------------------
  PipelineArgs pa;
  {
    auto* cmd = app.add_subcommand(
        "pipeline",
        "Full synthetic experiment: simulate, estimate, aggregate, train "
        "all setups, predict, calibrate thresholds, and evaluate");
    add_scene(cmd);
    add_seed(cmd);
    add_window(cmd);
    cmd->add_option("--recordings", pa.recordings, "Number of recordings")
        ->capture_default_str();
    cmd->add_option("--duration", pa.duration, "Length per recording (s)")
        ->capture_default_str();
    cmd->add_option("--annotators", pa.annotators, "Annotator pool size")
        ->capture_default_str();
    cmd->add_option("--k", pa.k, "Annotators per window")
        ->capture_default_str();
    cmd->add_option("--theta-min", pa.theta_min, "Pool competence lower bound")
        ->capture_default_str();
    cmd->add_option("--theta-max", pa.theta_max, "Pool competence upper bound")
        ->capture_default_str();
    cmd->add_option("--xi-min", pa.xi_min, "Pool spam-bias lower bound")
        ->capture_default_str();
    cmd->add_option("--xi-max", pa.xi_max, "Pool spam-bias upper bound")
        ->capture_default_str();
    cmd->add_option("--event-rate", pa.event_rate,
                    "Events per silent second; one value or one per class")
        ->capture_default_str();
    cmd->add_option("--mean-duration", pa.mean_duration,
                    "Mean event length (s); one value or one per class")
        ->capture_default_str();
    cmd->add_option("--iterations", pa.em_iterations, "EM sweeps per restart")
        ->capture_default_str();
    cmd->add_option("--restarts", pa.em_restarts, "EM random restarts")
        ->capture_default_str();
    cmd->add_option("--smoothing", pa.em_smoothing,
                    "EM add-delta count smoothing")
        ->capture_default_str();
    cmd->add_option("--feature-dim", pa.feature_dim,
                    "Synthetic feature dimension")
        ->capture_default_str();
    cmd->add_option("--noise", pa.noise, "Synthetic feature noise level")
        ->capture_default_str();
    cmd->add_option("--epochs", pa.epochs, "Training epochs")
        ->capture_default_str();
    cmd->add_option("--batch-size", pa.batch_size, "Mini-batch size")
        ->capture_default_str();
    cmd->add_option("--hidden-dim", pa.hidden_dim, "Hidden layer width")
        ->capture_default_str();
    cmd->add_option("--learning-rate", pa.learning_rate, "Adam step size")
        ->capture_default_str();
    cmd->add_option("--trim", pa.trim, "Threshold trim fraction per tail")
        ->capture_default_str();
    cmd->add_option("--out-dir", pa.out_dir, "Output directory")
        ->capture_default_str();
    cmd->callback([&] {
      pa.scene = scene;
      pa.window = window;
      pa.hop = hop;
      pa.seed = seed;
      run_pipeline(pa, prov_line());
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const softsed::NumericError& e) {
    std::cerr << "error\tnumeric\t" << e.what() << "\n";
    return 4;
  } catch (const softsed::ParseError& e) {
    std::cerr << "error\tparse\t" << e.what() << "\n";
    return 3;
  } catch (const softsed::DataError& e) {
    std::cerr << "error\tdata\t" << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error\tinternal\t" << e.what() << "\n";
    return 4;
  }
  return 0;
}
