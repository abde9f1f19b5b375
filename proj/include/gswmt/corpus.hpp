#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace gswmt {

using Token = std::string;
using TokenSeq = std::vector<Token>;

enum class Dialect { BS, BL, BE, ZH, SG, VS, Unknown };
enum class Split { Train, Dev, Test, Heldout };
enum class Side { Source, Target };

const char* to_string(Dialect d);
const char* to_string(Split s);
Dialect dialect_from_string(const std::string& s);
Split split_from_string(const std::string& s);

// Punctuation marks that the tokenizer detaches as single-character tokens.
bool is_detached_punct(char32_t cp);
bool is_punctuation_token(const Token& t);

struct SentencePair {
  TokenSeq source;  // dialect side
  TokenSeq target;  // standard side
  Dialect dialect = Dialect::Unknown;
  std::string genre;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::vector<Split> split;  // one label per pair

  std::size_t size() const { return pairs.size(); }
  std::size_t count(Split s) const;
  // Indices of pairs carrying the given label, in corpus order.
  std::vector<std::size_t> indices(Split s) const;
  std::vector<SentencePair> pairs_in(Split s) const;
};

struct Vocabulary {
  std::unordered_map<std::string, std::uint64_t> counts;

  bool contains(const std::string& w) const { return counts.count(w) != 0; }
  std::uint64_t count(const std::string& w) const {
    auto it = counts.find(w);
    return it == counts.end() ? 0 : it->second;
  }
  std::size_t size() const { return counts.size(); }
  void add(const std::string& w, std::uint64_t n = 1) { counts[w] += n; }

  void save_tsv(const std::string& path) const;
  static Vocabulary load_tsv(const std::string& path);
};

struct Lexicon {
  std::vector<std::pair<std::string, std::string>> entries;  // (source, target)

  // Lexicon entries usable as 1-token training pairs.
  std::vector<SentencePair> as_sentence_pairs(Dialect d, const std::string& genre = "lexicon") const;
};

// Whitespace split; the punctuation marks . , ; : ! ? " ( ) become
// single-character tokens wherever they occur. Case and diacritics are
// preserved; apostrophes and hyphens stay inside tokens.
TokenSeq tokenize(std::string_view line);

std::string join_tokens(const TokenSeq& tokens);

// One sentence per line on each side; line i of the two files are mutual
// translations. All pairs start out labeled Train.
ParallelCorpus load_parallel_corpus(const std::string& source_path,
                                    const std::string& target_path,
                                    Dialect dialect, const std::string& genre);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;
};

// Deterministic shuffled-index split; indices beyond the requested counts
// are labeled Heldout.
ParallelCorpus split_corpus(ParallelCorpus corpus, const SplitCounts& counts,
                            std::uint64_t seed);

// Counts over the chosen side of the Train split; forms below min_count are
// dropped.
Vocabulary build_vocabulary(const ParallelCorpus& corpus, Side side,
                            std::uint64_t min_count = 1);

// Keeps exactly the pairs whose every target token (punctuation exempt) is
// in the vocabulary.
ParallelCorpus filter_by_target_vocabulary(const ParallelCorpus& corpus,
                                           const Vocabulary& vocab);

// Tab-separated source<TAB>target, one entry per line; duplicates removed.
Lexicon load_lexicon(const std::string& path);

// Plain-text sides plus the sidecar metadata TSV
// (index<TAB>dialect<TAB>genre<TAB>split).
void save_corpus_side(const ParallelCorpus& corpus, Side side, const std::string& path);
void save_corpus_metadata(const ParallelCorpus& corpus, const std::string& path);
void load_corpus_metadata(ParallelCorpus& corpus, const std::string& path);

// Read/write one-sentence-per-line token files.
std::vector<TokenSeq> load_tokenized_lines(const std::string& path);
void save_tokenized_lines(const std::vector<TokenSeq>& lines, const std::string& path);

}  // namespace gswmt
