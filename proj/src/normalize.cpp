#include "gswmt/normalize.hpp"

#include <stdexcept>

namespace gswmt {

NormalizationStrategy strategy_from_string(const std::string& s) {
  if (s == "Orth") return NormalizationStrategy::Orth;
  if (s == "Phon") return NormalizationStrategy::Phon;
  if (s == "Cbnmt") return NormalizationStrategy::Cbnmt;
  if (s == "OrthThenPhon") return NormalizationStrategy::OrthThenPhon;
  if (s == "CbnmtThenPhon") return NormalizationStrategy::CbnmtThenPhon;
  throw std::runtime_error("unknown normalization strategy: " + s);
}

const char* to_string(NormalizationStrategy s) {
  switch (s) {
    case NormalizationStrategy::Orth: return "Orth";
    case NormalizationStrategy::Phon: return "Phon";
    case NormalizationStrategy::Cbnmt: return "Cbnmt";
    case NormalizationStrategy::OrthThenPhon: return "OrthThenPhon";
    default: return "CbnmtThenPhon";
  }
}

const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::KnownGSW: return "KnownGSW";
    case Resolution::KnownDE: return "KnownDE";
    default: return "Unchanged";
  }
}

namespace {

// Single-strategy conversion; empty optional when the strategy produced
// nothing (or could not run on this word).
std::optional<std::string> convert(const std::string& word, NormalizationStrategy strategy,
                                   const NormalizationModels& models) {
  switch (strategy) {
    case NormalizationStrategy::Orth:
      return apply_rules(word, models.rules);
    case NormalizationStrategy::Phon: {
      if (!models.g2p || !models.gsw_index || !models.de_index)
        throw std::runtime_error("Phon strategy needs a G2P model and both phonetic indices");
      return phonetic_candidate(word, *models.gsw_index, *models.de_index, *models.g2p);
    }
    case NormalizationStrategy::Cbnmt: {
      if (!models.char_model)
        throw std::runtime_error("Cbnmt strategy needs a trained char model");
      return models.char_model->translate_word(word);
    }
    default:
      throw std::logic_error("convert() called with a combined strategy");
  }
}

NormalizationOutcome resolve(const std::string& word, const std::optional<std::string>& converted,
                             const Vocabulary& gsw_vocab, const Vocabulary& de_vocab) {
  NormalizationOutcome outcome;
  outcome.word = word;
  outcome.output = word;
  if (!converted || *converted == word || converted->empty()) return outcome;
  if (gsw_vocab.contains(*converted)) {
    outcome.output = *converted;
    outcome.resolution = Resolution::KnownGSW;
  } else if (de_vocab.contains(*converted)) {
    outcome.output = *converted;
    outcome.resolution = Resolution::KnownDE;
  }
  return outcome;
}

}  // namespace

NormalizationOutcome normalize_oov(const std::string& word, NormalizationStrategy strategy,
                                   const Vocabulary& gsw_vocab, const Vocabulary& de_vocab,
                                   const NormalizationModels& models) {
  NormalizationStrategy first = strategy;
  std::optional<NormalizationStrategy> second;
  if (strategy == NormalizationStrategy::OrthThenPhon) {
    first = NormalizationStrategy::Orth;
    second = NormalizationStrategy::Phon;
  } else if (strategy == NormalizationStrategy::CbnmtThenPhon) {
    first = NormalizationStrategy::Cbnmt;
    second = NormalizationStrategy::Phon;
  }

  NormalizationOutcome outcome = resolve(word, convert(word, first, models), gsw_vocab, de_vocab);
  if (outcome.resolution == Resolution::Unchanged && second)
    outcome = resolve(word, convert(word, *second, models), gsw_vocab, de_vocab);
  return outcome;
}

TokenSeq normalize_sentence(const TokenSeq& sentence, const SentenceNormalizer& mode,
                            const Vocabulary& gsw_vocab, const Vocabulary& de_vocab,
                            const NormalizationModels& models) {
  TokenSeq out;
  out.reserve(sentence.size());
  for (const Token& tok : sentence) {
    if (is_punctuation_token(tok) || gsw_vocab.contains(tok)) {
      out.push_back(tok);
      continue;
    }
    if (mode.cbnmt_direct && mode.strategy == NormalizationStrategy::Cbnmt) {
      if (!models.char_model)
        throw std::runtime_error("Cbnmt strategy needs a trained char model");
      std::string converted = models.char_model->translate_word(tok);
      out.push_back(converted.empty() ? tok : converted);
      continue;
    }
    out.push_back(normalize_oov(tok, mode.strategy, gsw_vocab, de_vocab, models).output);
  }
  return out;
}

}  // namespace gswmt
