#include "gswmt/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace gswmt {

namespace {

std::unordered_map<std::string, std::uint64_t> ngram_counts(const TokenSeq& tokens, std::size_t n) {
  std::unordered_map<std::string, std::uint64_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t k = 0; k < n; ++k) {
      if (k) key += '\x1f';
      key += tokens[i + k];
    }
    counts[key]++;
  }
  return counts;
}

}  // namespace

BleuReport compute_bleu(const std::vector<TokenSeq>& hypotheses,
                        const std::vector<TokenSeq>& references) {
  if (hypotheses.size() != references.size())
    throw std::runtime_error("BLEU: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                             std::to_string(references.size()) + " references");
  if (hypotheses.empty()) throw std::runtime_error("BLEU: empty corpus");

  BleuReport report;
  std::array<std::uint64_t, 4> matched{}, total{};
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    report.hypothesis_length += hypotheses[s].size();
    report.reference_length += references[s].size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto hyp = ngram_counts(hypotheses[s], n);
      const auto ref = ngram_counts(references[s], n);
      for (const auto& [key, c] : hyp) {
        total[n - 1] += c;
        auto it = ref.find(key);
        if (it != ref.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }

  const double h = static_cast<double>(report.hypothesis_length);
  const double r = static_cast<double>(report.reference_length);
  report.brevity_penalty = (h < r && h > 0) ? std::exp(1.0 - r / h) : 1.0;

  double log_precision = 0.0;
  bool zero = false;
  for (std::size_t n = 0; n < 4; ++n) {
    report.precisions[n] =
        total[n] == 0 ? 0.0 : static_cast<double>(matched[n]) / static_cast<double>(total[n]);
    if (report.precisions[n] <= 0.0)
      zero = true;
    else
      log_precision += std::log(report.precisions[n]);
  }
  report.score = zero ? 0.0 : report.brevity_penalty * std::exp(log_precision / 4.0);
  return report;
}

std::string BleuReport::to_tsv() const {
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(4);
  out << precisions[0] << '\t' << precisions[1] << '\t' << precisions[2] << '\t' << precisions[3]
      << '\t' << brevity_penalty << '\t' << score;
  return out.str();
}

}  // namespace gswmt
