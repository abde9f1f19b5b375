#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gswmt/lm.hpp"

using namespace gswmt;

namespace {

double prob(const TrigramModel& m, std::vector<std::string> ctx, const std::string& w) {
  return std::exp(m.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), w));
}

std::vector<TokenSeq> random_corpus(std::mt19937_64& gen, int sentences, int vocab) {
  std::vector<TokenSeq> corpus;
  for (int s = 0; s < sentences; ++s) {
    TokenSeq sent;
    const std::size_t len = 1 + gen() % 6;
    for (std::size_t i = 0; i < len; ++i) sent.push_back(std::string(1, char('a' + gen() % vocab)));
    corpus.push_back(sent);
  }
  return corpus;
}

}  // namespace

TEST_CASE("hand-derived Witten-Bell values for the single sentence 'a b'") {
  const TrigramModel m = TrigramModel::train({{"a", "b"}});
  // history <s> a: one trigram event (b), one distinct continuation:
  // P(b | <s> a) = c/(c+T) = 1/2.
  CHECK(prob(m, {"<s>", "a"}, "b") == doctest::Approx(0.5).epsilon(1e-9));
  // bigram level: P(a | <s>) = 1/(1+1).
  CHECK(prob(m, {"<s>"}, "a") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(prob(m, {"a", "b"}, "</s>") == doctest::Approx(0.5).epsilon(1e-9));

  // score_sentence is the chain-rule sum including the end marker.
  const double expected = std::log(0.5) * 3;
  CHECK(m.score_sentence({"a", "b"}) == doctest::Approx(expected).epsilon(1e-12));

  // perplexity over the training sentence: exp(-log(1/8)/3) = 2.
  CHECK(m.perplexity({{"a", "b"}}) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("repeated single-word corpus drives P(a|<s>) toward 1") {
  double prev = 0.0;
  for (int n : {1, 10, 100}) {
    const TrigramModel m = TrigramModel::train(std::vector<TokenSeq>(n, TokenSeq{"a"}));
    const double p = prob(m, {"<s>"}, "a");
    CHECK(p == doctest::Approx(double(n) / (n + 1)).epsilon(1e-9));
    CHECK(p > prev);
    prev = p;
  }
}

TEST_CASE("conditional distributions are normalized over random histories") {
  std::mt19937_64 gen(11);
  const auto corpus = random_corpus(gen, 40, 5);
  const TrigramModel m = TrigramModel::train(corpus);
  const auto vocab = m.predictable_vocabulary();

  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "zz", "<s>"};
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> ctx;
    const int ctx_len = static_cast<int>(gen() % 3);
    for (int i = 0; i < ctx_len; ++i) ctx.push_back(pool[gen() % pool.size()]);
    double sum = 0.0;
    for (const auto& w : vocab)
      sum += std::exp(m.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), w));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("normalization also holds with min_count mapping to <unk>") {
  TrigramModel::Config cfg;
  cfg.min_count = 2;
  const TrigramModel m =
      TrigramModel::train({{"a", "b"}, {"a", "c"}, {"a", "b"}, {"d"}}, cfg);
  const auto vocab = m.predictable_vocabulary();
  for (const std::vector<std::string>& ctx :
       {std::vector<std::string>{}, {"a"}, {"<unk>"}, {"a", "b"}, {"<s>", "a"}}) {
    double sum = 0.0;
    for (const auto& w : vocab)
      sum += std::exp(m.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), w));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("unknown words get positive probability and never -inf") {
  const TrigramModel m = TrigramModel::train({{"a", "b"}, {"b", "a"}});
  const double lp = m.log_prob(std::span<const std::string>{}, "nie-gesehen");
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
  CHECK(std::isfinite(m.score_sentence({"x", "y", "z"})));
}

TEST_CASE("a sentence with an unseen word scores below the frequent-word variant") {
  std::vector<TokenSeq> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back({"der", "hund", "bellt"});
  corpus.push_back({"die", "katze", "schläft"});
  const TrigramModel m = TrigramModel::train(corpus);
  CHECK(m.score_sentence({"der", "dachs", "bellt"}) < m.score_sentence({"der", "hund", "bellt"}));
}

TEST_CASE("empty sentence scores log P(</s> | <s>)") {
  const TrigramModel m = TrigramModel::train({{"a"}, {}});
  CHECK(m.score_sentence({}) ==
        doctest::Approx(m.log_prob(std::span<const std::string>(
                            std::vector<std::string>{"<s>"}.data(), 1), "</s>"))
            .epsilon(1e-12));
}

TEST_CASE("adding a repetition of a sentence never decreases its score") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 60; ++trial) {
    auto corpus = random_corpus(gen, 8, 4);
    const TokenSeq& target = corpus[gen() % corpus.size()];
    const TrigramModel before = TrigramModel::train(corpus);
    auto corpus2 = corpus;
    corpus2.push_back(target);
    const TrigramModel after = TrigramModel::train(corpus2);
    CHECK(after.score_sentence(target) >= before.score_sentence(target) - 1e-9);
  }
}

TEST_CASE("perplexity definition and bounds") {
  const TrigramModel m = TrigramModel::train({{"a", "b"}, {"b", "a", "a"}});
  const std::vector<TokenSeq> corpus = {{"a", "b"}, {"a"}};
  double total = 0.0;
  std::size_t events = 0;
  for (const auto& s : corpus) {
    total += m.score_sentence(s);
    events += s.size() + 1;
  }
  CHECK(m.perplexity(corpus) == doctest::Approx(std::exp(-total / events)).epsilon(1e-12));
  CHECK(m.perplexity(corpus) >= 1.0);
  CHECK_THROWS_AS(m.perplexity({}), std::runtime_error);
}

TEST_CASE("training on an empty corpus fails") {
  CHECK_THROWS_AS(TrigramModel::train({}), std::runtime_error);
}

TEST_CASE("ARPA round-trip preserves conditional log-probabilities to 1e-4") {
  std::mt19937_64 gen(31);
  const auto corpus = random_corpus(gen, 60, 6);
  const TrigramModel m = TrigramModel::train(corpus);

  const auto path = (std::filesystem::temp_directory_path() / "gswmt_lm_roundtrip.arpa").string();
  m.save_arpa(path);
  const TrigramModel r = TrigramModel::load_arpa(path);
  std::filesystem::remove(path);

  CHECK(r.unigram_count() == m.unigram_count());
  CHECK(r.bigram_count() == m.bigram_count());
  CHECK(r.trigram_count() == m.trigram_count());

  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "neu"};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> ctx;
    const int ctx_len = static_cast<int>(gen() % 3);
    for (int i = 0; i < ctx_len; ++i) ctx.push_back(pool[gen() % pool.size()]);
    const std::string w = pool[gen() % pool.size()];
    const double a = m.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), w);
    const double b = r.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), w);
    CHECK(a == doctest::Approx(b).epsilon(1e-4));
  }

  std::mt19937_64 gen2(32);
  for (const auto& s : random_corpus(gen2, 20, 6))
    CHECK(m.score_sentence(s) == doctest::Approx(r.score_sentence(s)).epsilon(1e-4));
}
