#pragma once

#include <array>
#include <string>
#include <vector>

#include "gswmt/corpus.hpp"

namespace gswmt {

struct BleuReport {
  std::array<double, 4> precisions{};  // modified n-gram precisions p_1..p_4
  double brevity_penalty = 1.0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double score = 0.0;  // in [0,1]

  // TSV: p1 p2 p3 p4 BP bleu
  std::string to_tsv() const;
};

// Corpus-level BLEU with one reference per hypothesis. Clipped n-gram matches
// are summed over sentences before division; BP = exp(1 - r/h) when h < r.
// A zero precision at any order yields score 0 (no smoothing).
BleuReport compute_bleu(const std::vector<TokenSeq>& hypotheses,
                        const std::vector<TokenSeq>& references);

}  // namespace gswmt
