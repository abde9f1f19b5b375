#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gswmt/charseq2seq.hpp"

namespace gswmt {

struct TestSetConfig {
  std::string name;
  std::string source_path;
  std::string target_path;
};

// One evaluation grid: rows are test sets, columns are normalization
// strategies (Baseline1, Baseline2, Phon, Orth, OrthThenPhon, CbnmtThenPhon,
// Cbnmt). Baseline1 decodes with the small LM (target side of the training
// data); every other column uses the large LM when one is configured.
struct ExperimentConfig {
  std::string train_source;
  std::string train_target;
  std::string dev_source;   // required when tuning_trials > 0
  std::string dev_target;
  std::vector<TestSetConfig> test_sets;
  std::vector<std::string> lexicons;  // TSV files injected as 1-token training pairs
  std::string large_lm_path;          // monolingual target text
  std::string pronunciation_dict;     // required by the Phon strategies
  std::string rules_path;             // empty = built-in cascade
  std::string cbnmt_pairs;            // empty = derive from 1:1 alignment links
  std::vector<std::string> strategies;

  int tuning_trials = 0;
  int ibm1_iterations = 20;
  int max_phrase_len = 7;
  int beam = 20;
  int distortion_limit = 4;
  int threads = 1;
  std::uint64_t seed = 42;
  CharModelHyperparams cbnmt;

  static ExperimentConfig load(const std::string& path);
  // Path and strategy validation; runs before any training.
  void validate() const;
};

struct ExperimentResult {
  std::vector<std::string> strategies;
  std::vector<std::string> test_sets;
  std::vector<std::vector<double>> bleu;  // [test_set][strategy], in [0,1]

  // TSV matrix, cells as percentages with 1 decimal.
  std::string to_tsv() const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace gswmt
