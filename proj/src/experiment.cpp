#include "gswmt/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gswmt/align.hpp"
#include "gswmt/bleu.hpp"
#include "gswmt/decoder.hpp"
#include "gswmt/g2p.hpp"
#include "gswmt/lm.hpp"
#include "gswmt/normalize.hpp"
#include "gswmt/phrase.hpp"
#include "gswmt/rules.hpp"
#include "gswmt/utf8.hpp"
#include "json.hpp"

namespace gswmt {

namespace {

const std::set<std::string> kKnownStrategies = {
    "Baseline1", "Baseline2", "Phon", "Orth", "OrthThenPhon", "CbnmtThenPhon", "Cbnmt"};

bool needs_phon(const std::string& s) {
  return s == "Phon" || s == "OrthThenPhon" || s == "CbnmtThenPhon";
}
bool needs_cbnmt(const std::string& s) { return s == "Cbnmt" || s == "CbnmtThenPhon"; }

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::runtime_error("experiment config: missing " + what);
  if (!std::filesystem::exists(path))
    throw std::runtime_error("experiment config: " + what + " does not exist: " + path);
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;

  ExperimentConfig cfg;
  cfg.train_source = j.at("train_source").get<std::string>();
  cfg.train_target = j.at("train_target").get<std::string>();
  cfg.dev_source = j.value("dev_source", "");
  cfg.dev_target = j.value("dev_target", "");
  for (const auto& t : j.at("test_sets")) {
    cfg.test_sets.push_back({t.at("name").get<std::string>(),
                             t.at("source").get<std::string>(),
                             t.at("target").get<std::string>()});
  }
  cfg.lexicons = j.value("lexicons", std::vector<std::string>{});
  cfg.large_lm_path = j.value("large_lm", "");
  cfg.pronunciation_dict = j.value("pronunciation_dict", "");
  cfg.rules_path = j.value("rules", "");
  cfg.cbnmt_pairs = j.value("cbnmt_pairs", "");
  cfg.strategies = j.at("strategies").get<std::vector<std::string>>();
  cfg.tuning_trials = j.value("tuning_trials", 0);
  cfg.ibm1_iterations = j.value("ibm1_iterations", 20);
  cfg.max_phrase_len = j.value("max_phrase_len", 7);
  cfg.beam = j.value("beam", 20);
  cfg.distortion_limit = j.value("distortion_limit", 4);
  cfg.threads = j.value("threads", 1);
  cfg.seed = j.value("seed", std::uint64_t{42});
  if (j.contains("cbnmt")) {
    const auto& c = j["cbnmt"];
    cfg.cbnmt.epochs = c.value("epochs", cfg.cbnmt.epochs);
    cfg.cbnmt.learning_rate = c.value("learning_rate", cfg.cbnmt.learning_rate);
    cfg.cbnmt.hidden = c.value("hidden", cfg.cbnmt.hidden);
    cfg.cbnmt.embedding = c.value("embedding", cfg.cbnmt.embedding);
    cfg.cbnmt.batch_size = c.value("batch_size", cfg.cbnmt.batch_size);
    const std::string arch = c.value("arch", "gru");
    if (arch == "gru") cfg.cbnmt.arch = CharModelArch::Gru;
    else if (arch == "qrnn") cfg.cbnmt.arch = CharModelArch::Qrnn;
    else throw std::runtime_error("unknown cbnmt arch: " + arch);
  }
  return cfg;
}

void ExperimentConfig::validate() const {
  if (strategies.empty()) throw std::runtime_error("experiment config: no strategies");
  for (const auto& s : strategies)
    if (!kKnownStrategies.count(s)) throw std::runtime_error("unknown strategy name: " + s);
  if (test_sets.empty()) throw std::runtime_error("experiment config: no test sets");

  require_file(train_source, "train_source");
  require_file(train_target, "train_target");
  for (const auto& t : test_sets) {
    require_file(t.source_path, "test set '" + t.name + "' source");
    require_file(t.target_path, "test set '" + t.name + "' target");
  }
  for (const auto& l : lexicons) require_file(l, "lexicon");
  if (!large_lm_path.empty()) require_file(large_lm_path, "large_lm");
  if (!rules_path.empty()) require_file(rules_path, "rules");
  if (!cbnmt_pairs.empty()) require_file(cbnmt_pairs, "cbnmt_pairs");
  if (tuning_trials > 0) {
    require_file(dev_source, "dev_source");
    require_file(dev_target, "dev_target");
  }
  const bool any_baseline2 =
      std::find(strategies.begin(), strategies.end(), "Baseline2") != strategies.end();
  if (any_baseline2 && large_lm_path.empty())
    throw std::runtime_error("strategy Baseline2 requires large_lm");
  for (const auto& s : strategies) {
    if (needs_phon(s)) require_file(pronunciation_dict, "pronunciation_dict (for " + s + ")");
  }
}

std::string ExperimentResult::to_tsv() const {
  std::ostringstream out;
  out << "test_set";
  for (const auto& s : strategies) out << '\t' << s;
  out << '\n';
  for (std::size_t r = 0; r < test_sets.size(); ++r) {
    out << test_sets[r];
    for (std::size_t c = 0; c < strategies.size(); ++c) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", bleu[r][c] * 100.0);
      out << '\t' << buf;
    }
    out << '\n';
  }
  return out.str();
}

namespace {

// Unique 1:1-linked word pairs from the symmetrized training alignments.
std::vector<WordPair> derive_word_pairs(const std::vector<SentencePair>& pairs,
                                        const std::vector<AlignmentLinks>& links) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<WordPair> out;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    std::unordered_map<std::uint32_t, int> src_degree, tgt_degree;
    for (const auto& [i, j] : links[k]) {
      src_degree[i]++;
      tgt_degree[j]++;
    }
    for (const auto& [i, j] : links[k]) {
      if (src_degree[i] != 1 || tgt_degree[j] != 1) continue;
      const std::string& s = pairs[k].source[i];
      const std::string& t = pairs[k].target[j];
      if (is_punctuation_token(s) || is_punctuation_token(t)) continue;
      if (utf8::length(s) > CharSeq2SeqModel::kMaxWordLen ||
          utf8::length(t) > CharSeq2SeqModel::kMaxWordLen)
        continue;
      if (seen.emplace(s, t).second) out.push_back({s, t});
    }
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();

  // ---- data ----
  ParallelCorpus train = load_parallel_corpus(config.train_source, config.train_target,
                                              Dialect::Unknown, "train");
  for (const auto& lex_path : config.lexicons) {
    const Lexicon lex = load_lexicon(lex_path);
    for (auto& p : lex.as_sentence_pairs(Dialect::Unknown)) {
      train.pairs.push_back(std::move(p));
      train.split.push_back(Split::Train);
    }
  }
  const std::vector<SentencePair> train_pairs = train.pairs_in(Split::Train);

  const Vocabulary gsw_vocab = build_vocabulary(train, Side::Source);
  Vocabulary de_vocab = build_vocabulary(train, Side::Target);

  // ---- language models ----
  std::vector<TokenSeq> target_sents;
  target_sents.reserve(train_pairs.size());
  for (const auto& p : train_pairs) target_sents.push_back(p.target);
  const TrigramModel small_lm = TrigramModel::train(target_sents);

  std::unique_ptr<TrigramModel> large_lm;
  if (!config.large_lm_path.empty()) {
    const auto mono = load_tokenized_lines(config.large_lm_path);
    large_lm = std::make_unique<TrigramModel>(TrigramModel::train(mono));
    // The large monolingual data also extends what counts as a known DE word.
    for (const auto& sent : mono)
      for (const auto& tok : sent)
        if (!is_punctuation_token(tok)) de_vocab.add(tok);
  }
  const TrigramModel& main_lm = large_lm ? *large_lm : small_lm;

  // ---- alignment and phrase table ----
  Ibm1Config ibm_cfg;
  ibm_cfg.iterations = config.ibm1_iterations;
  const TranslationTable fwd =
      train_ibm1(train_pairs, ibm_cfg, Direction::SourceToTarget).table;
  const TranslationTable rev =
      train_ibm1(train_pairs, ibm_cfg, Direction::TargetToSource).table;
  std::vector<AlignmentLinks> alignments;
  alignments.reserve(train_pairs.size());
  for (const auto& p : train_pairs) {
    const AlignmentLinks f = viterbi_align(p, fwd);
    SentencePair swapped;
    swapped.source = p.target;
    swapped.target = p.source;
    const AlignmentLinks r = flip_links(viterbi_align(swapped, rev));
    alignments.push_back(symmetrize(f, r, SymmetrizationHeuristic::GrowDiag));
  }
  const PhraseTable table =
      PhraseTable::build(train_pairs, alignments, fwd, rev, config.max_phrase_len);

  // ---- normalization models ----
  const bool any_phon = std::any_of(config.strategies.begin(), config.strategies.end(),
                                    [](const std::string& s) { return needs_phon(s); });
  const bool any_cbnmt = std::any_of(config.strategies.begin(), config.strategies.end(),
                                     [](const std::string& s) { return needs_cbnmt(s); });
  NormalizationModels models;
  models.rules = config.rules_path.empty() ? RuleSet::default_rules()
                                           : RuleSet::load(config.rules_path);
  if (any_phon) {
    const auto dict = load_pronunciation_dict(config.pronunciation_dict);
    auto g2p = std::make_shared<G2PModel>(G2PModel::train(dict));
    models.gsw_index = std::make_shared<PhoneticIndex>(build_phonetic_index(gsw_vocab, *g2p));
    models.de_index = std::make_shared<PhoneticIndex>(build_phonetic_index(de_vocab, *g2p));
    models.g2p = std::move(g2p);
  }
  if (any_cbnmt) {
    std::vector<WordPair> pairs = config.cbnmt_pairs.empty()
                                      ? derive_word_pairs(train_pairs, alignments)
                                      : load_word_pairs(config.cbnmt_pairs);
    CharModelHyperparams hp = config.cbnmt;
    hp.seed = config.seed;
    models.char_model = std::make_shared<CharSeq2SeqModel>(CharSeq2SeqModel::train(pairs, hp));
  }

  // ---- weights ----
  DecoderConfig dec_cfg;
  dec_cfg.beam = config.beam;
  dec_cfg.distortion_limit = config.distortion_limit;
  if (config.tuning_trials > 0) {
    const ParallelCorpus dev = load_parallel_corpus(config.dev_source, config.dev_target,
                                                    Dialect::Unknown, "dev");
    dec_cfg.weights = tune_weights(table, main_lm, dec_cfg, dev.pairs, config.tuning_trials,
                                   config.seed, config.threads);
  }

  const Decoder small_decoder(table, small_lm, dec_cfg);
  const Decoder main_decoder(table, main_lm, dec_cfg);

  // ---- evaluation grid ----
  ExperimentResult result;
  result.strategies = config.strategies;
  for (const auto& ts : config.test_sets) {
    result.test_sets.push_back(ts.name);
    const auto sources = load_tokenized_lines(ts.source_path);
    const auto refs = load_tokenized_lines(ts.target_path);
    if (sources.size() != refs.size())
      throw std::runtime_error("test set '" + ts.name + "': " + std::to_string(sources.size()) +
                               " source lines vs " + std::to_string(refs.size()) + " references");
    std::vector<double> row;
    for (const auto& strategy : config.strategies) {
      std::vector<TokenSeq> inputs;
      if (strategy == "Baseline1" || strategy == "Baseline2") {
        inputs = sources;
      } else {
        SentenceNormalizer mode;
        mode.strategy = strategy_from_string(strategy == "Cbnmt" ? "Cbnmt" : strategy);
        mode.cbnmt_direct = strategy == "Cbnmt";
        inputs.reserve(sources.size());
        for (const auto& s : sources)
          inputs.push_back(normalize_sentence(s, mode, gsw_vocab, de_vocab, models));
      }
      const Decoder& decoder = strategy == "Baseline1" ? small_decoder : main_decoder;
      const auto hyps = decoder.translate_corpus(inputs, config.threads);
      row.push_back(compute_bleu(hyps, refs).score);
    }
    result.bleu.push_back(std::move(row));
  }
  return result;
}

}  // namespace gswmt
