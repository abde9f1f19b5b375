#pragma once

// Synthetic pseudo-dialect fixtures: a German-like monolingual generator, a
// type-level stochastic "dialectizer" built from the inverses of the spelling
// cascade (plus a few habits the cascade does not cover), and a deterministic
// reference pronouncer for building pronunciation dictionaries.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gswmt/corpus.hpp"
#include "gswmt/rules.hpp"
#include "gswmt/utf8.hpp"

namespace fixtures {

inline double unit(std::mt19937_64& gen) {
  return double(gen() >> 11) * (1.0 / 9007199254740992.0);
}

// Clean German-like forms, chosen so the forward cascade is a no-op on them:
// no "scht"/"schp", no ä, no -ig endings, no aa/ii/gm/gf/gw/gäge starts.
inline const std::vector<std::string>& function_words() {
  static const std::vector<std::string> words = {
      "der",  "die",  "das",  "ein",  "eine", "und",  "ist",   "sind",  "war",  "in",
      "auf",  "mit",  "von",  "zu",   "nicht", "auch", "es",   "sie",   "er",   "wir",
      "den",  "dem",  "nur",  "noch", "dann", "wenn", "aber",  "oder",  "als",  "bei",
      "nach", "vor",  "hier", "dort", "sehr", "man",  "sich",  "hat",   "wird", "kann"};
  return words;
}

inline const std::vector<std::string>& noun_stems() {
  static const std::vector<std::string> stems = {
      "Anfang",   "Angst",    "Einwohner", "Regierung", "Gemeinde", "Sprache",  "Gegensatz",
      "Stein",    "Strasse",  "Stadt",     "Stunde",    "Sprung",   "Spiel",    "Sport",
      "Haus",     "Hund",     "Katze",     "Kind",      "Berg",     "Wald",     "Fluss",
      "See",      "Dorf",     "Land",      "Leben",     "Wetter",   "Sonne",    "Regen",
      "Wind",     "Meinung",  "Zeitung",   "Rechnung",  "Wohnung",  "Leistung", "Bewegung",
      "Anzug",    "Antwort",  "Anruf",     "Angebot",   "Einkommen", "Eingang", "Einsatz",
      "Gewinn",   "Gefallen", "Gemüse",   "Gesetz",    "Gesicht",  "Weg",      "Werk",
      "Wert",     "Wort",     "Welt",      "Nest",      "Fest",     "Rest",     "Besen",
      "Boden",    "Leder",    "Morgen",    "Segen",     "Regel",    "Feder",    "Wesen"};
  return stems;
}

inline const std::vector<std::string>& verb_stems() {
  static const std::vector<std::string> stems = {
      "geh",   "steh",  "sprech", "spiel", "stell", "stimm", "leb",   "lern",  "les",
      "geb",   "nehm",  "komm",   "kenn",  "denk",  "wohn",  "zeig",  "frag",  "sag",
      "hol",   "mach",  "brauch", "besuch", "bericht", "letz", "setz", "rett",  "bet",
      "wechsel", "regel", "leg",   "heb",   "web",   "feder", "segn",  "begegn", "rechn"};
  return stems;
}

inline const std::vector<std::string>& adjective_stems() {
  static const std::vector<std::string> stems = {
      "klein", "gross", "gut",   "neu",   "alt",  "jung",  "stark",  "still",  "stolz",
      "spät",  "fest",  "nett",  "leer",  "wert", "echt",  "ehrlich", "eben",  "gelb",
      "hell",  "dunkel", "schnell", "schwer", "leicht", "breit", "weit", "steil"};
  return stems;
}

// Full content vocabulary: inflections plus noun-noun compounds give a long
// Zipf tail so held-out text contains unseen types.
inline const std::vector<std::string>& content_vocabulary() {
  static const std::vector<std::string> vocab = [] {
    std::set<std::string> types;
    const auto violates = [](const std::string& w) {
      const std::string lower = gswmt::utf8::lowercased(w);
      if (lower.find("scht") != std::string::npos) return true;
      if (lower.find("schp") != std::string::npos) return true;
      if (lower.find("ä") != std::string::npos) return true;
      if (lower.size() >= 2 && lower.substr(lower.size() - 2) == "ig") return true;
      for (const char* p : {"aa", "ii", "gm", "gf", "gw", "gäge"})
        if (lower.rfind(p, 0) == 0) return true;
      return false;
    };
    for (const auto& stem : noun_stems()) {
      for (const char* suffix : {"", "e", "en", "s"}) types.insert(stem + suffix);
    }
    for (const auto& stem : verb_stems()) {
      for (const char* suffix : {"e", "st", "t", "en", "te", "ten"}) types.insert(stem + suffix);
    }
    for (const auto& stem : adjective_stems()) {
      for (const char* suffix : {"", "e", "er", "es", "en", "em"}) types.insert(stem + suffix);
    }
    const auto& nouns = noun_stems();
    for (std::size_t a = 0; a < nouns.size(); a += 2) {
      for (std::size_t b = 1; b < nouns.size(); b += 3) {
        if (a == b) continue;
        types.insert(nouns[a] + gswmt::utf8::lowercased(nouns[b]));
      }
    }
    std::vector<std::string> out;
    for (const auto& t : types) {
      if (t.size() < 2 || t.size() > 24) continue;
      if (violates(t)) continue;
      out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
  }();
  return vocab;
}

// Zipf-ish sampler over the content vocabulary, rank order shuffled by seed.
class WordSampler {
 public:
  explicit WordSampler(std::uint64_t seed) : gen_(seed) {
    ranked_ = content_vocabulary();
    std::mt19937_64 shuffle_gen(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::size_t i = ranked_.size(); i > 1; --i)
      std::swap(ranked_[i - 1], ranked_[shuffle_gen() % i]);
    weights_.resize(ranked_.size());
    double total = 0.0;
    for (std::size_t r = 0; r < ranked_.size(); ++r) {
      weights_[r] = 1.0 / std::pow(double(r + 4), 1.05);
      total += weights_[r];
    }
    for (auto& w : weights_) w /= total;
    cumulative_.resize(weights_.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < weights_.size(); ++r) {
      acc += weights_[r];
      cumulative_[r] = acc;
    }
  }

  const std::string& content_word() {
    const double u = unit(gen_);
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), u);
    const std::size_t idx =
        std::min<std::size_t>(ranked_.size() - 1, std::size_t(it - cumulative_.begin()));
    return ranked_[idx];
  }

  const std::string& function_word() {
    return function_words()[gen_() % function_words().size()];
  }

  gswmt::TokenSeq sentence() {
    gswmt::TokenSeq out;
    const std::size_t len = 4 + gen_() % 7;
    for (std::size_t i = 0; i < len; ++i) {
      if (i % 2 == 0 && unit(gen_) < 0.7)
        out.push_back(function_word());
      else
        out.push_back(content_word());
    }
    out.push_back(".");
    return out;
  }

 private:
  std::mt19937_64 gen_;
  std::vector<std::string> ranked_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// The inverses of the spelling cascade, expressed as rewrite rules.
inline const gswmt::RuleSet& inverse_cascade() {
  static const gswmt::RuleSet rules = [] {
    gswmt::RuleSet rs;
    const std::pair<const char*, const char*> table[] = {
        {".*st.*", ".*scht.*"}, {".*sp.*", ".*schp.*"}, {"^gegen.*", "^gäge.*"},
        {"CeC", "CäC"},         {"^gem.*", "^gm.*"},    {"^gef.*", "^gf.*"},
        {"^gew.*", "^gw.*"},    {"^an.*", "^aa.*"},     {".*ung$", ".*ig$"},
        {"^ein.*", "^ii.*"},
    };
    for (const auto& [p, r] : table) rs.rules.push_back(gswmt::RewriteRule::parse(p, r));
    return rs;
  }();
  return rules;
}

// Dialect habits outside the cascade: only the char model can learn these.
inline const gswmt::RuleSet& extra_dialect_rules() {
  static const gswmt::RuleSet rules = [] {
    gswmt::RuleSet rs;
    const std::pair<const char*, const char*> table[] = {
        {".*en$", ".*e$"},
        {".*ei.*", ".*ii.*"},
        {"^k.*", "^ch.*"},
    };
    for (const auto& [p, r] : table) rs.rules.push_back(gswmt::RewriteRule::parse(p, r));
    return rs;
  }();
  return rules;
}

struct PerturbOptions {
  double word_prob = 0.9;      // chance a type is dialectized at all
  double rule_prob = 0.75;     // chance per applicable cascade-inverse rule
  double cec_prob = 0.3;       // the CeC rule fires on nearly every word
  double extra_prob = 0.45;    // chance per extra habit
  bool cascade_inverses_only = false;
};

// Type-level perturbation: a given (word, seed) always yields the same
// dialect form, like a writer with consistent habits.
inline std::string perturb_word(const std::string& word, std::uint64_t seed,
                                const PerturbOptions& opt = {}) {
  std::mt19937_64 gen(std::hash<std::string>{}(word) * 0x100000001b3ull + seed);
  if (unit(gen) >= opt.word_prob) return word;
  std::string out = word;
  const auto& inv = inverse_cascade().rules;
  for (std::size_t i = 0; i < inv.size(); ++i) {
    const double p = i == 3 ? opt.cec_prob : opt.rule_prob;
    if (unit(gen) < p) out = gswmt::apply_rule(out, inv[i]);
  }
  if (!opt.cascade_inverses_only) {
    for (const auto& rule : extra_dialect_rules().rules)
      if (unit(gen) < opt.extra_prob) out = gswmt::apply_rule(out, rule);
  }
  if (out.empty() || gswmt::utf8::length(out) > 40) return word;
  return out;
}

inline gswmt::TokenSeq perturb_sentence(const gswmt::TokenSeq& sentence, std::uint64_t seed,
                                        const PerturbOptions& opt = {}) {
  gswmt::TokenSeq out;
  out.reserve(sentence.size());
  for (const auto& tok : sentence)
    out.push_back(gswmt::is_punctuation_token(tok) ? tok : perturb_word(tok, seed, opt));
  return out;
}

// Deterministic reference pronouncer (greedy longest match, lowercased).
// Deliberately collapses st/scht, sp/schp and e/ä so those spelling variants
// become homophones.
inline std::vector<std::string> reference_phones(const std::string& word) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> table = {
      {"sch", {"S"}},  {"scht", {"S", "t"}}, {"st", {"S", "t"}}, {"sp", {"S", "p"}},
      {"ch", {"x"}},   {"ck", {"k"}},        {"ie", {"i:"}},     {"ei", {"ai"}},
      {"eu", {"oy"}},  {"au", {"au"}},       {"aa", {"a:"}},     {"ee", {"e:"}},
      {"oo", {"o:"}},  {"ä", {"e"}},        {"ö", {"2"}},      {"ü", {"y"}},
      {"ss", {"s"}},   {"ng", {"N"}},        {"z", {"ts"}},      {"w", {"v"}},
      {"v", {"f"}},    {"qu", {"k", "v"}},
  };
  const std::u32string cps = gswmt::utf8::decode(gswmt::utf8::lowercased(word));
  std::vector<std::string> phones;
  std::size_t i = 0;
  while (i < cps.size()) {
    std::size_t best_len = 0;
    const std::vector<std::string>* best = nullptr;
    for (const auto& [graph, ph] : table) {
      const std::u32string g = gswmt::utf8::decode(graph);
      if (g.size() <= best_len || i + g.size() > cps.size()) continue;
      if (cps.compare(i, g.size(), g) == 0) {
        best_len = g.size();
        best = &ph;
      }
    }
    if (best) {
      phones.insert(phones.end(), best->begin(), best->end());
      i += best_len;
    } else {
      phones.push_back(gswmt::utf8::encode(cps[i]));
      i += 1;
    }
  }
  if (phones.empty()) phones.push_back("_");
  return phones;
}

}  // namespace fixtures
