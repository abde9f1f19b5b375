#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "gswmt/bleu.hpp"
#include "gswmt/decoder.hpp"
#include "oracles.hpp"

using namespace gswmt;

namespace {

}  // namespace

TEST_CASE("empty phrase table copies the input through") {
  PhraseTable table;
  const TrigramModel lm = TrigramModel::train({{"u", "v"}});
  DecoderConfig cfg;
  const Decoder decoder(table, lm, cfg);
  const auto result = decoder.translate({"xyz", "abc"});
  CHECK(result.target == TokenSeq{"xyz", "abc"});
}

TEST_CASE("single-candidate table translates the word") {
  const auto path = (std::filesystem::temp_directory_path() / "gswmt_dec_single.txt").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "a ||| x ||| 1 1 1 1\n";
  }
  const PhraseTable table = PhraseTable::load(path);
  std::filesystem::remove(path);
  const TrigramModel lm = TrigramModel::train({{"x"}});
  const Decoder decoder(table, lm, DecoderConfig{});
  CHECK(decoder.translate({"a"}).target == TokenSeq{"x"});
}

TEST_CASE("empty input yields empty output") {
  PhraseTable table;
  const TrigramModel lm = TrigramModel::train({{"u"}});
  const Decoder decoder(table, lm, DecoderConfig{});
  CHECK(decoder.translate({}).target.empty());
}

TEST_CASE("beam decoder score equals the exhaustive maximum on 200 random instances") {
  std::mt19937_64 gen(2024);
  int solvable = 0;
  for (int trial = 0; trial < 220 && solvable < 200; ++trial) {
    const oracles::Instance inst = oracles::random_instance(gen);
    const double expected = oracles::oracle_best(inst);
    // Rare random tables admit no covering segmentation at all (overlapping
    // multi-word options only); the enumeration target is undefined there.
    if (!std::isfinite(expected)) continue;
    ++solvable;
    const auto result = oracles::make_decoder(inst, 1000000).translate(inst.source);
    CHECK(result.score == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(solvable == 200);
}

TEST_CASE("monotone decoding with distortion limit 0 equals the monotone oracle") {
  std::mt19937_64 gen(31337);
  int solvable = 0;
  for (int trial = 0; trial < 60 && solvable < 40; ++trial) {
    oracles::Instance inst = oracles::random_instance(gen);
    inst.monotone = true;
    inst.distortion_limit = 0;
    const double expected = oracles::oracle_best(inst);
    if (!std::isfinite(expected)) continue;
    ++solvable;
    const auto result = oracles::make_decoder(inst, 100000).translate(inst.source);
    CHECK(result.score == doctest::Approx(expected).epsilon(1e-9));
  }
  CHECK(solvable == 40);
}

TEST_CASE("copy-through never deletes OOV tokens") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    oracles::Instance inst = oracles::random_instance(gen);
    TokenSeq source = inst.source;
    source.insert(source.begin() + gen() % (source.size() + 1), "OOV" + std::to_string(trial));
    const auto result = oracles::make_decoder(inst, 200).translate(source);
    std::map<std::string, int> in_count, out_count;
    for (const auto& t : source)
      if (!inst.table.covers_word(t)) in_count[t]++;
    for (const auto& t : result.target) out_count[t]++;
    for (const auto& [tok, c] : in_count) CHECK(out_count[tok] >= c);
  }
}

TEST_CASE("increasing the beam never decreases the best score") {
  std::mt19937_64 gen(555);
  for (int trial = 0; trial < 30; ++trial) {
    const oracles::Instance inst = oracles::random_instance(gen);
    double prev = -std::numeric_limits<double>::infinity();
    for (int beam : {1, 2, 4, 16, 64, 100000}) {
      const double score = oracles::make_decoder(inst, beam).translate(inst.source).score;
      CHECK(score >= prev - 1e-9);
      prev = score;
    }
  }
}

TEST_CASE("parallel corpus decoding equals serial") {
  std::mt19937_64 gen(7777);
  const oracles::Instance inst = oracles::random_instance(gen);
  std::vector<TokenSeq> sentences;
  for (int s = 0; s < 50; ++s) {
    TokenSeq sent;
    const std::size_t len = 1 + gen() % 6;
    for (std::size_t i = 0; i < len; ++i) sent.push_back(std::string(1, char('a' + gen() % 8)));
    sentences.push_back(sent);
  }
  const Decoder decoder = oracles::make_decoder(inst, 50);
  const auto serial = decoder.translate_corpus(sentences, 1);
  const auto parallel = decoder.translate_corpus(sentences, 4);
  CHECK(serial == parallel);
  CHECK(serial.size() == sentences.size());
}

TEST_CASE("decoding is deterministic across runs") {
  std::mt19937_64 gen(4242);
  const oracles::Instance inst = oracles::random_instance(gen);
  const Decoder decoder = oracles::make_decoder(inst, 8);
  const auto a = decoder.translate(inst.source);
  const auto b = decoder.translate(inst.source);
  CHECK(a.target == b.target);
  CHECK(a.score == b.score);
}

TEST_CASE("weights TSV round-trip") {
  FeatureWeights w;
  w.phi_tgt_src = 0.11;
  w.lm = 0.77;
  w.word_penalty = -0.4;
  const auto path = (std::filesystem::temp_directory_path() / "gswmt_weights.tsv").string();
  w.save_tsv(path);
  const FeatureWeights r = FeatureWeights::load_tsv(path);
  std::filesystem::remove(path);
  CHECK(r.phi_tgt_src == doctest::Approx(0.11));
  CHECK(r.lm == doctest::Approx(0.77));
  CHECK(r.word_penalty == doctest::Approx(-0.4));
  CHECK(r.distortion == doctest::Approx(w.distortion));
}

namespace {

std::vector<SentencePair> tuning_dev(std::mt19937_64& gen, const oracles::Instance& inst, int n) {
  std::vector<SentencePair> dev;
  const Decoder decoder = oracles::make_decoder(inst, 20);
  for (int s = 0; s < n; ++s) {
    SentencePair p;
    const std::size_t len = 1 + gen() % 4;
    for (std::size_t i = 0; i < len; ++i)
      p.source.push_back(std::string(1, char('a' + gen() % 6)));
    p.target = decoder.translate(p.source).target;  // references the defaults can reach
    if (p.target.empty()) p.target = p.source;
    dev.push_back(p);
  }
  return dev;
}

}  // namespace

TEST_CASE("tune_weights keeps the best candidate and is seed-deterministic") {
  std::mt19937_64 gen(808);
  const oracles::Instance inst = oracles::random_instance(gen);
  const auto dev = tuning_dev(gen, inst, 10);
  DecoderConfig base;
  base.beam = 20;
  base.distortion_limit = inst.distortion_limit;
  base.monotone = inst.monotone;

  // trials=1 evaluates only the default vector
  const FeatureWeights only_default = tune_weights(inst.table, inst.lm, base, dev, 1, 5);
  CHECK(only_default.phi_tgt_src == base.weights.phi_tgt_src);
  CHECK(only_default.lm == base.weights.lm);

  const auto eval = [&](const FeatureWeights& w) {
    DecoderConfig cfg = base;
    cfg.weights = w;
    const Decoder decoder(inst.table, inst.lm, cfg);
    std::vector<TokenSeq> hyps, refs;
    for (const auto& p : dev) {
      hyps.push_back(decoder.translate(p.source).target);
      refs.push_back(p.target);
    }
    return compute_bleu(hyps, refs).score;
  };

  const FeatureWeights tuned = tune_weights(inst.table, inst.lm, base, dev, 12, 5);
  CHECK(eval(tuned) >= eval(base.weights) - 1e-12);

  const FeatureWeights again = tune_weights(inst.table, inst.lm, base, dev, 12, 5);
  CHECK(tuned.phi_tgt_src == again.phi_tgt_src);
  CHECK(tuned.lm == again.lm);
  CHECK(tuned.distortion == again.distortion);

  CHECK_THROWS_AS(tune_weights(inst.table, inst.lm, base, {}, 3, 1), std::runtime_error);
}
