#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "wsd/checkpoint.hpp"
#include "wsd/corpus.hpp"

namespace wsd::eval {

struct Prediction {
  std::string instance_id;
  std::string sense_key;
  double match_probability = 0.0;
};

// Scores every candidate gloss and returns the argmax by match probability;
// exact ties go to the lowest inventory index.
Prediction disambiguate(const nn::Model& model,
                        const corpus::WsdInstance& instance,
                        const corpus::Sentence& sentence,
                        const corpus::SenseInventory& inventory);

struct EvaluationReport {
  std::string dataset;
  std::string model;
  std::string experiment;
  double f1_overall = 0.0;                 // percentage, unrounded
  std::map<corpus::Pos, double> f1_by_pos; // percentage per POS bucket
  std::size_t n_instances = 0;             // gold-file instance count
  std::size_t n_skipped = 0;
};

// An instance is correct iff its predicted key is in its gold set. Every
// gold instance gets exactly one prediction, so micro-F1 reduces to
// accuracy. Instances in `skipped` have no prediction; they count as wrong
// unless skip_missing excludes them from the denominator.
EvaluationReport score(std::span<const Prediction> predictions,
                       const corpus::GoldKeys& gold,
                       const std::map<std::string, corpus::Pos>& pos_index,
                       const std::set<std::string>& skipped = {},
                       bool skip_missing = false);

// Percentage rounded half-up to one decimal, as reported.
double round_percent(double value);

struct ReportTable {
  std::string text;  // rows grouped by dataset, one column per experiment
  std::string csv;   // dataset,model,experiment,f1_overall,f1_noun,f1_verb,
                     // f1_adj,f1_adv,n,skipped
};

ReportTable report_table(std::span<const EvaluationReport> reports);

std::string write_report_csv(std::span<const EvaluationReport> reports);
std::vector<EvaluationReport> read_report_csv(std::string_view text);

// Predictions file: `instance_id sense_key` per line (gold-key compatible).
std::string write_predictions(std::span<const Prediction> predictions);

}  // namespace wsd::eval
