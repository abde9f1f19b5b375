#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "gswmt/phrase.hpp"

using namespace gswmt;

namespace {

SentencePair sent_pair(const TokenSeq& src, const TokenSeq& tgt) {
  SentencePair p;
  p.source = src;
  p.target = tgt;
  return p;
}

std::string pp_key(const PhrasePair& pp) {
  std::string k;
  for (const auto& t : pp.source) k += t + " ";
  k += "|||";
  for (const auto& t : pp.target) k += " " + t;
  return k;
}

// Brute-force oracle: enumerate every rectangle and test the consistency
// predicate directly (at least one link inside, no link crossing a boundary).
std::set<std::string> enumerate_consistent(const SentencePair& pair, const AlignmentLinks& links,
                                           int max_len) {
  std::set<std::string> out;
  const int slen = static_cast<int>(pair.source.size());
  const int tlen = static_cast<int>(pair.target.size());
  for (int i1 = 0; i1 < slen; ++i1)
    for (int i2 = i1; i2 < std::min(slen, i1 + max_len); ++i2)
      for (int j1 = 0; j1 < tlen; ++j1)
        for (int j2 = j1; j2 < std::min(tlen, j1 + max_len); ++j2) {
          bool any_inside = false;
          bool crossing = false;
          for (const auto& [i, j] : links) {
            const bool in_s = static_cast<int>(i) >= i1 && static_cast<int>(i) <= i2;
            const bool in_t = static_cast<int>(j) >= j1 && static_cast<int>(j) <= j2;
            if (in_s && in_t) any_inside = true;
            if (in_s != in_t) crossing = true;
          }
          if (!any_inside || crossing) continue;
          PhrasePair pp;
          pp.source.assign(pair.source.begin() + i1, pair.source.begin() + i2 + 1);
          pp.target.assign(pair.target.begin() + j1, pair.target.begin() + j2 + 1);
          out.insert(pp_key(pp));
        }
  return out;
}

std::set<std::string> extract_keys(const SentencePair& pair, const AlignmentLinks& links,
                                   int max_len) {
  std::set<std::string> out;
  for (const auto& pp : extract_phrases(pair, links, max_len)) out.insert(pp_key(pp));
  return out;
}

}  // namespace

TEST_CASE("1x1 pair with one link extracts exactly itself") {
  const auto pairs = extract_phrases(sent_pair({"a"}, {"x"}), {{0, 0}}, 7);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].source == TokenSeq{"a"});
  CHECK(pairs[0].target == TokenSeq{"x"});
  CHECK(pairs[0].links == AlignmentLinks{{0, 0}});
}

TEST_CASE("diagonal 2x2 extracts the two words and the full block") {
  const auto keys = extract_keys(sent_pair({"a", "b"}, {"x", "y"}), {{0, 0}, {1, 1}}, 7);
  CHECK(keys == std::set<std::string>{"a ||| x", "b ||| y", "a b ||| x y"});
}

TEST_CASE("no links extracts nothing") {
  CHECK(extract_phrases(sent_pair({"a", "b"}, {"x"}), {}, 7).empty());
}

TEST_CASE("unaligned boundary words extend blocks") {
  // target word y is unaligned: blocks may absorb it on either side
  const auto keys = extract_keys(sent_pair({"a", "b"}, {"x", "y", "z"}), {{0, 0}, {1, 2}}, 7);
  CHECK(keys.count("a ||| x"));
  CHECK(keys.count("a ||| x y"));
  CHECK(keys.count("b ||| z"));
  CHECK(keys.count("b ||| y z"));
  CHECK(keys.count("a b ||| x y z"));
  CHECK_FALSE(keys.count("a b ||| x"));
}

TEST_CASE("extraction equals brute-force enumeration on random instances") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int slen = 1 + static_cast<int>(gen() % 4);
    const int tlen = 1 + static_cast<int>(gen() % 4);
    TokenSeq src, tgt;
    for (int i = 0; i < slen; ++i) src.push_back("s" + std::to_string(i));
    for (int j = 0; j < tlen; ++j) tgt.push_back("t" + std::to_string(j));
    AlignmentLinks links;
    const int n_links = static_cast<int>(gen() % 5);
    for (int k = 0; k < n_links; ++k) links.emplace(gen() % slen, gen() % tlen);
    const int max_len = 1 + static_cast<int>(gen() % 4);
    const auto pair = sent_pair(src, tgt);
    CHECK(extract_keys(pair, links, max_len) == enumerate_consistent(pair, links, max_len));
  }
}

TEST_CASE("every extracted pair satisfies the consistency predicate") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int slen = 2 + static_cast<int>(gen() % 3);
    const int tlen = 2 + static_cast<int>(gen() % 3);
    TokenSeq src(slen), tgt(tlen);
    for (int i = 0; i < slen; ++i) src[i] = "s" + std::to_string(i);
    for (int j = 0; j < tlen; ++j) tgt[j] = "t" + std::to_string(j);
    AlignmentLinks links;
    for (int k = 0; k < 4; ++k) links.emplace(gen() % slen, gen() % tlen);
    for (const auto& pp : extract_phrases(sent_pair(src, tgt), links, 3)) {
      CHECK(!pp.links.empty());
      CHECK(pp.source.size() <= 3);
      CHECK(pp.target.size() <= 3);
    }
  }
}

TEST_CASE("adding links never grows the extracted set on 3x3 instances") {
  std::mt19937_64 gen(13);
  const auto pair = sent_pair({"s0", "s1", "s2"}, {"t0", "t1", "t2"});
  for (int trial = 0; trial < 200; ++trial) {
    AlignmentLinks base;
    base.emplace(gen() % 3, gen() % 3);
    if (gen() % 2) base.emplace(gen() % 3, gen() % 3);
    AlignmentLinks more = base;
    more.emplace(gen() % 3, gen() % 3);
    more.emplace(gen() % 3, gen() % 3);
    if (more == base) continue;
    const auto fewer_set = enumerate_consistent(pair, base, 3);
    const auto more_set = enumerate_consistent(pair, more, 3);
    CHECK(more_set.size() <= fewer_set.size());
    // and the extractor agrees with the oracle on both
    CHECK(extract_keys(pair, base, 3) == fewer_set);
    CHECK(extract_keys(pair, more, 3) == more_set);
  }
}

namespace {

PhraseTable classic_table() {
  const std::vector<SentencePair> pairs = {
      sent_pair({"das", "haus"}, {"the", "house"}),
      sent_pair({"das", "buch"}, {"the", "book"}),
      sent_pair({"ein", "buch"}, {"a", "book"}),
      sent_pair({"das", "haus"}, {"the", "house"}),
  };
  const std::vector<AlignmentLinks> alignments = {
      {{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}, {{0, 0}, {1, 1}}};
  TranslationTable fwd, rev;
  fwd.t["das"]["the"] = 0.8;
  fwd.t["das"]["book"] = 0.2;
  fwd.t["haus"]["house"] = 0.9;
  fwd.t["haus"]["the"] = 0.1;
  fwd.t["buch"]["book"] = 1.0;
  fwd.t["ein"]["a"] = 1.0;
  rev.t["the"]["das"] = 1.0;
  rev.t["house"]["haus"] = 1.0;
  rev.t["book"]["buch"] = 0.7;
  rev.t["book"]["ein"] = 0.3;
  rev.t["a"]["ein"] = 1.0;
  return PhraseTable::build(pairs, alignments, fwd, rev, 7);
}

}  // namespace

TEST_CASE("phi scores are relative extraction frequencies") {
  const PhraseTable table = classic_table();
  // "das" pairs with "the" in every sentence containing it
  const auto* das = table.lookup({"das"});
  REQUIRE(das != nullptr);
  REQUIRE(das->size() == 1);
  CHECK(std::exp((*das)[0].phi_tgt_src) == doctest::Approx(1.0).epsilon(1e-9));

  // source phrase "das haus" seen twice, both with "the house"
  const auto* dh = table.lookup({"das", "haus"});
  REQUIRE(dh != nullptr);
  CHECK(std::exp((*dh)[0].phi_tgt_src) == doctest::Approx(1.0).epsilon(1e-9));

  // "buch" -> "book" twice; "book" also pairs with "buch" twice out of 2
  const auto* buch = table.lookup({"buch"});
  REQUIRE(buch != nullptr);
  CHECK(std::exp((*buch)[0].phi_src_tgt) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("relative frequency: half-and-half targets") {
  const std::vector<SentencePair> pairs = {
      sent_pair({"s"}, {"x"}), sent_pair({"s"}, {"x"}),
      sent_pair({"s"}, {"y"}), sent_pair({"s"}, {"y"})};
  const std::vector<AlignmentLinks> alignments(4, AlignmentLinks{{0, 0}});
  TranslationTable fwd, rev;
  fwd.t["s"]["x"] = 0.5;
  fwd.t["s"]["y"] = 0.5;
  rev.t["x"]["s"] = 1.0;
  rev.t["y"]["s"] = 1.0;
  const PhraseTable table = PhraseTable::build(pairs, alignments, fwd, rev, 7);
  const auto* opts = table.lookup({"s"});
  REQUIRE(opts != nullptr);
  REQUIRE(opts->size() == 2);
  for (const auto& o : *opts) CHECK(std::exp(o.phi_tgt_src) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("single-link 1-word pair: lexical weight reduces to t(t|s)") {
  const std::vector<SentencePair> pairs = {sent_pair({"haus"}, {"house"})};
  const std::vector<AlignmentLinks> alignments = {{{0, 0}}};
  TranslationTable fwd, rev;
  fwd.t["haus"]["house"] = 0.37;
  rev.t["house"]["haus"] = 0.81;
  const PhraseTable table = PhraseTable::build(pairs, alignments, fwd, rev, 7);
  const auto* opts = table.lookup({"haus"});
  REQUIRE(opts != nullptr);
  CHECK(std::exp((*opts)[0].lex_tgt_src) == doctest::Approx(0.37).epsilon(1e-9));
  CHECK(std::exp((*opts)[0].lex_src_tgt) == doctest::Approx(0.81).epsilon(1e-9));
}

TEST_CASE("per-source distributions sum to one") {
  const PhraseTable table = classic_table();
  for (const auto& [skey, options] : table.entries()) {
    double sum = 0.0;
    for (const auto& o : options) sum += std::exp(o.phi_tgt_src);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("phrase table text round-trip preserves scores to 1e-6") {
  const PhraseTable table = classic_table();
  const auto path = (std::filesystem::temp_directory_path() / "gswmt_phrases.txt").string();
  table.save(path);
  const PhraseTable loaded = PhraseTable::load(path);
  std::filesystem::remove(path);
  CHECK(loaded.size() == table.size());
  CHECK(loaded.max_source_len() == table.max_source_len());
  for (const auto& [skey, options] : table.entries()) {
    std::istringstream ss(skey);
    TokenSeq phrase;
    std::string w;
    while (ss >> w) phrase.push_back(w);
    const auto* other = loaded.lookup(phrase);
    REQUIRE(other != nullptr);
    REQUIRE(other->size() == options.size());
    for (std::size_t i = 0; i < options.size(); ++i) {
      // options are built in sorted target order on both sides
      CHECK(std::exp((*other)[i].phi_tgt_src) ==
            doctest::Approx(std::exp(options[i].phi_tgt_src)).epsilon(1e-6));
      CHECK(std::exp((*other)[i].lex_src_tgt) ==
            doctest::Approx(std::exp(options[i].lex_src_tgt)).epsilon(1e-6));
    }
  }
}

TEST_CASE("covers_word and max_source_len reflect the source side") {
  const PhraseTable table = classic_table();
  CHECK(table.covers_word("das"));
  CHECK(table.covers_word("haus"));
  CHECK_FALSE(table.covers_word("zug"));
  CHECK(table.max_source_len() == 2);
}
