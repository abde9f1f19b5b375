#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gswmt/corpus.hpp"
#include "gswmt/lm.hpp"

namespace gswmt {

using PhoneSequence = std::vector<std::string>;

struct PronunciationEntry {
  std::string word;
  PhoneSequence phones;
};

// word<TAB>space-separated phones, one entry per line.
std::vector<PronunciationEntry> load_pronunciation_dict(const std::string& path);

// Joint graphone model: words segment into (grapheme chunk, phone chunk)
// pairs with 1-2 graphemes and 0-2 phones; chunk probabilities come from EM
// over all segmentations, and a trigram model over graphone sequences drives
// decoding.
class G2PModel {
 public:
  struct Config {
    int em_iterations = 25;
    int beam = 8;
  };

  struct Graphone {
    std::string graphemes;  // UTF-8, 1-2 code points
    PhoneSequence phones;   // 0-2 phones
  };

  static G2PModel train(const std::vector<PronunciationEntry>& dict);
  static G2PModel train(const std::vector<PronunciationEntry>& dict, const Config& cfg);

  // Best graphone decoding under the trigram model, beam search with
  // deterministic lexicographic tie-breaks on the phone sequence. Throws when
  // a character cannot be covered by the inventory.
  PhoneSequence transcribe(const std::string& word) const;

  const std::vector<Graphone>& inventory() const { return inventory_; }
  std::size_t skipped_training_entries() const { return skipped_; }

  void save(const std::string& path) const;
  static G2PModel load(const std::string& path);

 private:
  std::vector<Graphone> inventory_;
  std::unordered_map<std::string, std::vector<std::size_t>> by_graphemes_;
  TrigramModel lm_;
  Config cfg_;
  std::size_t skipped_ = 0;

  void build_grapheme_index();
};

struct PhoneticIndex {
  // joined phone sequence -> candidate words with their corpus frequencies
  std::unordered_map<std::string, std::vector<std::pair<std::string, std::uint64_t>>> entries;
  std::size_t skipped = 0;  // vocabulary words that failed transcription

  static std::string key(const PhoneSequence& phones);
};

// Transcribes every vocabulary word with the model; failures are skipped and
// counted.
PhoneticIndex build_phonetic_index(const Vocabulary& vocab, const G2PModel& model);

// Transcribe the word and look it up first in the GSW index, then in the DE
// index. Among several candidates the highest corpus frequency wins, ties
// break lexicographically. Transcription failure yields no candidate.
std::optional<std::string> phonetic_candidate(const std::string& word,
                                              const PhoneticIndex& gsw_index,
                                              const PhoneticIndex& de_index,
                                              const G2PModel& model);

}  // namespace gswmt
