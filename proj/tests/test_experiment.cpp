#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "gswmt/experiment.hpp"

using namespace gswmt;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("gswmt_exp_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    const std::string p = (path / name).string();
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p;
  }
};

std::string sentences_text(const std::vector<TokenSeq>& lines) {
  std::string out;
  for (const auto& l : lines) out += join_tokens(l) + "\n";
  return out;
}

// A small pseudo-dialect setup: train/test halves plus a pronunciation dict.
struct SmallData {
  std::string train_src, train_tgt, test_src, test_tgt, pron, cbnmt_pairs, large_lm;

  explicit SmallData(TempDir& dir, int train_n = 250, int test_n = 60) {
    fixtures::WordSampler sampler(123);
    std::vector<TokenSeq> clean;
    for (int i = 0; i < train_n + test_n; ++i) clean.push_back(sampler.sentence());
    std::vector<TokenSeq> dialect;
    for (const auto& s : clean) dialect.push_back(fixtures::perturb_sentence(s, 9));

    std::vector<TokenSeq> train_s(dialect.begin(), dialect.begin() + train_n);
    std::vector<TokenSeq> train_t(clean.begin(), clean.begin() + train_n);
    std::vector<TokenSeq> test_s(dialect.begin() + train_n, dialect.end());
    std::vector<TokenSeq> test_t(clean.begin() + train_n, clean.end());
    train_src = dir.file("train.src", sentences_text(train_s));
    train_tgt = dir.file("train.tgt", sentences_text(train_t));
    test_src = dir.file("test.src", sentences_text(test_s));
    test_tgt = dir.file("test.tgt", sentences_text(test_t));

    std::set<std::string> vocab_types;
    for (const auto& s : clean)
      for (const auto& t : s)
        if (!is_punctuation_token(t)) vocab_types.insert(t);
    std::string pron_text, pair_text;
    for (const auto& w : vocab_types) {
      pron_text += w + "\t";
      const auto phones = fixtures::reference_phones(w);
      for (std::size_t i = 0; i < phones.size(); ++i)
        pron_text += (i ? " " : "") + phones[i];
      pron_text += "\n";
      const std::string p = fixtures::perturb_word(w, 9);
      pair_text += p + "\t" + w + "\n";
    }
    pron = dir.file("pron.tsv", pron_text);
    cbnmt_pairs = dir.file("pairs.tsv", pair_text);

    fixtures::WordSampler mono(321);
    std::vector<TokenSeq> mono_lines;
    for (int i = 0; i < 300; ++i) mono_lines.push_back(mono.sentence());
    large_lm = dir.file("mono.txt", sentences_text(mono_lines));
  }
};

}  // namespace

TEST_CASE("run_experiment fills a matrix and is deterministic") {
  TempDir dir;
  SmallData data(dir);

  ExperimentConfig cfg;
  cfg.train_source = data.train_src;
  cfg.train_target = data.train_tgt;
  cfg.test_sets = {{"perturbed", data.test_src, data.test_tgt}};
  cfg.strategies = {"Baseline1", "Orth"};
  cfg.beam = 8;
  cfg.ibm1_iterations = 5;
  cfg.seed = 7;

  const ExperimentResult a = run_experiment(cfg);
  REQUIRE(a.test_sets.size() == 1);
  REQUIRE(a.strategies.size() == 2);
  REQUIRE(a.bleu.size() == 1);
  REQUIRE(a.bleu[0].size() == 2);
  for (double b : a.bleu[0]) {
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }

  const ExperimentResult b = run_experiment(cfg);
  CHECK(a.to_tsv() == b.to_tsv());

  // single-strategy single-test-set config gives a 1x1 matrix
  ExperimentConfig tiny = cfg;
  tiny.strategies = {"Baseline1"};
  const ExperimentResult c = run_experiment(tiny);
  CHECK(c.bleu.size() == 1);
  CHECK(c.bleu[0].size() == 1);
}

TEST_CASE("the TSV matrix has one row per test set and 1-decimal percentages") {
  ExperimentResult r;
  r.strategies = {"Baseline1", "Orth"};
  r.test_sets = {"x", "y"};
  r.bleu = {{0.3531, 0.4009}, {0.0, 1.0}};
  const std::string tsv = r.to_tsv();
  CHECK(tsv == "test_set\tBaseline1\tOrth\nx\t35.3\t40.1\ny\t0.0\t100.0\n");
}

TEST_CASE("validation fails before training: missing files and unknown strategies") {
  TempDir dir;
  SmallData data(dir, 30, 10);

  ExperimentConfig cfg;
  cfg.train_source = data.train_src;
  cfg.train_target = data.train_tgt;
  cfg.test_sets = {{"t", data.test_src, data.test_tgt}};
  cfg.strategies = {"Baseline1"};

  ExperimentConfig missing = cfg;
  missing.train_source = (dir.path / "nope.src").string();
  CHECK_THROWS_WITH_AS(run_experiment(missing), doctest::Contains("does not exist"),
                       std::runtime_error);

  ExperimentConfig unknown = cfg;
  unknown.strategies = {"Baseline1", "Quantum"};
  CHECK_THROWS_WITH_AS(run_experiment(unknown), doctest::Contains("unknown strategy"),
                       std::runtime_error);

  ExperimentConfig phon = cfg;
  phon.strategies = {"Phon"};
  CHECK_THROWS_WITH_AS(run_experiment(phon), doctest::Contains("pronunciation_dict"),
                       std::runtime_error);

  ExperimentConfig b2 = cfg;
  b2.strategies = {"Baseline2"};
  CHECK_THROWS_WITH_AS(run_experiment(b2), doctest::Contains("large_lm"), std::runtime_error);
}

TEST_CASE("experiment config JSON loads every field") {
  TempDir dir;
  SmallData data(dir, 30, 10);
  const std::string json = std::string("{\n") +
      "\"train_source\": \"" + data.train_src + "\",\n" +
      "\"train_target\": \"" + data.train_tgt + "\",\n" +
      "\"test_sets\": [{\"name\": \"t\", \"source\": \"" + data.test_src + "\", \"target\": \"" +
      data.test_tgt + "\"}],\n" +
      "\"strategies\": [\"Baseline1\", \"Baseline2\", \"Orth\"],\n" +
      "\"large_lm\": \"" + data.large_lm + "\",\n" +
      "\"pronunciation_dict\": \"" + data.pron + "\",\n" +
      "\"cbnmt_pairs\": \"" + data.cbnmt_pairs + "\",\n" +
      "\"tuning_trials\": 0,\n\"beam\": 5,\n\"seed\": 99,\n" +
      "\"cbnmt\": {\"epochs\": 2, \"hidden\": 16, \"embedding\": 8, \"arch\": \"gru\"}\n}\n";
  const std::string path = dir.file("config.json", json);
  const ExperimentConfig cfg = ExperimentConfig::load(path);
  CHECK(cfg.train_source == data.train_src);
  CHECK(cfg.strategies.size() == 3);
  CHECK(cfg.beam == 5);
  CHECK(cfg.seed == 99);
  CHECK(cfg.cbnmt.epochs == 2);
  CHECK(cfg.cbnmt.hidden == 16);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("a full small grid with phonetic and char-model columns runs") {
  TempDir dir;
  SmallData data(dir, 120, 30);

  ExperimentConfig cfg;
  cfg.train_source = data.train_src;
  cfg.train_target = data.train_tgt;
  cfg.test_sets = {{"perturbed", data.test_src, data.test_tgt}};
  cfg.strategies = {"Baseline1", "Baseline2", "Phon", "Orth", "OrthThenPhon", "CbnmtThenPhon",
                    "Cbnmt"};
  cfg.large_lm_path = data.large_lm;
  cfg.pronunciation_dict = data.pron;
  cfg.cbnmt_pairs = data.cbnmt_pairs;
  cfg.beam = 8;
  cfg.ibm1_iterations = 4;
  cfg.cbnmt.hidden = 48;
  cfg.cbnmt.embedding = 16;
  cfg.cbnmt.epochs = 4;
  cfg.seed = 3;

  const ExperimentResult r = run_experiment(cfg);
  REQUIRE(r.bleu.size() == 1);
  REQUIRE(r.bleu[0].size() == 7);
  for (double b : r.bleu[0]) {
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}
