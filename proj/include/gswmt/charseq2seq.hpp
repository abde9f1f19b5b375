#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gswmt/charnet.hpp"

namespace gswmt {

struct WordPair {
  std::string source;
  std::string target;
};

// word<TAB>word pairs, one per line.
std::vector<WordPair> load_word_pairs(const std::string& path);

struct CharModelHyperparams {
  CharModelArch arch = CharModelArch::Gru;
  int hidden = 320;
  int embedding = 64;
  int batch_size = 16;
  int epochs = 12;
  double learning_rate = 1e-3;
  double grad_clip = 5.0;
  std::uint64_t seed = 1;
  bool verbose = false;  // per-epoch loss lines on stderr
};

struct CharModelTrainReport {
  std::vector<double> epoch_losses;  // mean cross-entropy per predicted char
};

// Character-level word translator: a single-layer recurrent-gated
// encoder/decoder (320 units, 64-dim embeddings) trained with minibatch
// Adam, batch width 16, the last incomplete batch padded with empty entries.
// Every word gets the ':' start symbol before its first letter; it is
// stripped from decoder output again.
class CharSeq2SeqModel {
 public:
  static constexpr int kMaxWordLen = 40;

  // Deduplicates the pairs; throws on words over 40 characters or an empty
  // training set.
  static CharSeq2SeqModel train(const std::vector<WordPair>& pairs,
                                const CharModelHyperparams& hp,
                                CharModelTrainReport* report = nullptr);

  std::string translate_word(const std::string& word) const;
  // Returns exactly one output per input; incomplete minibatches are padded.
  std::vector<std::string> translate_batch(const std::vector<std::string>& words) const;

  const CharModelHyperparams& config() const { return hp_; }
  std::size_t vocab_size() const { return symbols_.size(); }

  // Versioned binary checkpoint with magic header, the character vocabulary
  // and all parameter tensors with shapes.
  void save(const std::string& path) const;
  static CharSeq2SeqModel load(const std::string& path);

 private:
  using Net = detail::CharNet<float>;

  std::vector<int> encode_source(const std::string& word) const;

  CharModelHyperparams hp_;
  std::vector<std::string> symbols_;  // id -> utf8 symbol; 0..2 reserved
  std::unordered_map<std::string, int> symbol_ids_;
  Net net_;
};

}  // namespace gswmt
