#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gswmt/corpus.hpp"

namespace gswmt {

// Word translation probabilities t(target | source) learned with IBM Model 1.
struct TranslationTable {
  static constexpr const char* kNull = "<NULL>";

  // t[source][target] = probability; per source word the values sum to 1.
  std::unordered_map<std::string, std::unordered_map<std::string, double>> t;

  double prob(const std::string& target, const std::string& source) const;

  // TSV source<TAB>target<TAB>probability, sorted lexicographically.
  void save_tsv(const std::string& path) const;
  static TranslationTable load_tsv(const std::string& path);
};

// (source index, target index) links for one sentence pair.
using AlignmentLinks = std::set<std::pair<std::uint32_t, std::uint32_t>>;

enum class Direction { SourceToTarget, TargetToSource };

struct Ibm1Config {
  int iterations = 20;
  bool use_null = true;  // NULL-disabled mode exists for analytic tests
};

struct Ibm1Result {
  TranslationTable table;
  std::vector<double> log_likelihood;  // one value per iteration, non-decreasing
};

// EM from uniform initialization over co-occurring word pairs. With
// Direction::TargetToSource the roles of the two sides are swapped, yielding
// t(source | target).
Ibm1Result train_ibm1(const std::vector<SentencePair>& pairs, const Ibm1Config& cfg,
                      Direction direction = Direction::SourceToTarget);

// Each target word links to the source word maximizing t(e|f), or to NULL
// (omitted from the result). Ties among source words break to the smallest
// index; NULL keeps an exact tie with a real word.
AlignmentLinks viterbi_align(const SentencePair& pair, const TranslationTable& table);

enum class SymmetrizationHeuristic { Intersection, Union, GrowDiag };
SymmetrizationHeuristic heuristic_from_string(const std::string& s);

// Both inputs in (source index, target index) orientation. Grow-diag starts
// from the intersection and keeps adding union links 8-adjacent to an
// existing link, scanning row-major, until a fixpoint.
AlignmentLinks symmetrize(const AlignmentLinks& forward, const AlignmentLinks& reverse,
                          SymmetrizationHeuristic heuristic);

AlignmentLinks flip_links(const AlignmentLinks& links);

// Pharaoh "i-j i-j ..." lines, one sentence per line.
void save_alignments(const std::vector<AlignmentLinks>& alignments, const std::string& path);
std::vector<AlignmentLinks> load_alignments(const std::string& path);

}  // namespace gswmt
