// gswmt -- dialect-to-standard MT toolkit: phrase-based translation with an
// OOV normalization cascade (spelling rules, phonetic matching, character
// seq2seq) and BLEU evaluation.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gswmt/align.hpp"
#include "gswmt/bleu.hpp"
#include "gswmt/charseq2seq.hpp"
#include "gswmt/corpus.hpp"
#include "gswmt/decoder.hpp"
#include "gswmt/experiment.hpp"
#include "gswmt/g2p.hpp"
#include "gswmt/lm.hpp"
#include "gswmt/normalize.hpp"
#include "gswmt/phrase.hpp"
#include "gswmt/rules.hpp"

namespace {

using namespace gswmt;

std::vector<std::string> read_input_lines(const std::string& path) {
  std::vector<std::string> lines;
  std::string line;
  if (path.empty() || path == "-") {
    while (std::getline(std::cin, line)) lines.push_back(line);
    return lines;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write file: " + path);
  return file;
}

int run(CLI::App& app, int argc, char** argv) {
  std::uint64_t seed = 42;
  int threads = 1;
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--threads", threads, "sentence-level decoding threads")->capture_default_str();
  app.set_config("--config", "", "read defaults from a config file");
  app.require_subcommand(1);

  // ---- tokenize ----
  auto* tok = app.add_subcommand("tokenize", "tokenize text, one sentence per line");
  std::string tok_in, tok_out;
  tok->add_option("-i,--input", tok_in, "input file (default stdin)");
  tok->add_option("-o,--output", tok_out, "output file (default stdout)");
  tok->callback([&] {
    std::ofstream file;
    auto& out = open_output(file, tok_out);
    for (const auto& line : read_input_lines(tok_in)) out << join_tokens(tokenize(line)) << "\n";
  });

  // ---- split ----
  auto* split = app.add_subcommand("split", "split a parallel corpus into train/dev/test");
  std::string sp_src, sp_tgt, sp_dialect = "UNKNOWN", sp_genre = "unknown", sp_prefix;
  SplitCounts sp_counts;
  split->add_option("--source", sp_src, "source-side file")->required();
  split->add_option("--target", sp_tgt, "target-side file")->required();
  split->add_option("--dialect", sp_dialect, "dialect tag (BS BL BE ZH SG VS UNKNOWN)");
  split->add_option("--genre", sp_genre, "genre tag");
  split->add_option("--train", sp_counts.train, "train pair count")->required();
  split->add_option("--dev", sp_counts.dev, "dev pair count")->required();
  split->add_option("--test", sp_counts.test, "test pair count")->required();
  split->add_option("--out-prefix", sp_prefix, "output prefix")->required();
  split->callback([&] {
    ParallelCorpus corpus = load_parallel_corpus(sp_src, sp_tgt, dialect_from_string(sp_dialect),
                                                 sp_genre);
    corpus = split_corpus(std::move(corpus), sp_counts, seed);
    for (Split s : {Split::Train, Split::Dev, Split::Test, Split::Heldout}) {
      ParallelCorpus part;
      part.pairs = corpus.pairs_in(s);
      part.split.assign(part.pairs.size(), s);
      if (part.pairs.empty()) continue;
      save_corpus_side(part, Side::Source, sp_prefix + "." + to_string(s) + ".src");
      save_corpus_side(part, Side::Target, sp_prefix + "." + to_string(s) + ".tgt");
    }
    save_corpus_metadata(corpus, sp_prefix + ".meta.tsv");
    std::cerr << "split " << corpus.size() << " pairs: " << corpus.count(Split::Train)
              << " train, " << corpus.count(Split::Dev) << " dev, " << corpus.count(Split::Test)
              << " test, " << corpus.count(Split::Heldout) << " heldout\n";
  });

  // ---- train-lm ----
  auto* tlm = app.add_subcommand("train-lm", "train a Witten-Bell trigram model, write ARPA");
  std::string lm_in, lm_out;
  std::uint64_t lm_min_count = 1;
  tlm->add_option("-i,--input", lm_in, "tokenized sentences, one per line")->required();
  tlm->add_option("-o,--arpa", lm_out, "output ARPA file")->required();
  tlm->add_option("--min-count", lm_min_count, "map rarer words to <unk>")->capture_default_str();
  tlm->callback([&] {
    TrigramModel::Config cfg;
    cfg.min_count = lm_min_count;
    const TrigramModel model = TrigramModel::train(load_tokenized_lines(lm_in), cfg);
    model.save_arpa(lm_out);
    std::cerr << "trained: " << model.unigram_count() << " unigrams, " << model.bigram_count()
              << " bigrams, " << model.trigram_count() << " trigrams\n";
  });

  // ---- train-align ----
  auto* ta = app.add_subcommand("train-align",
                                "train IBM1 in both directions and symmetrize alignments");
  std::string ta_src, ta_tgt, ta_fwd, ta_rev, ta_align, ta_heur = "grow-diag";
  int ta_iters = 20;
  ta->add_option("--source", ta_src)->required();
  ta->add_option("--target", ta_tgt)->required();
  ta->add_option("--iterations", ta_iters)->capture_default_str();
  ta->add_option("--heuristic", ta_heur, "intersection | union | grow-diag")
      ->capture_default_str();
  ta->add_option("--table-fwd", ta_fwd, "t(target|source) TSV output");
  ta->add_option("--table-rev", ta_rev, "t(source|target) TSV output");
  ta->add_option("--alignments", ta_align, "symmetrized Pharaoh output");
  ta->callback([&] {
    const ParallelCorpus corpus =
        load_parallel_corpus(ta_src, ta_tgt, Dialect::Unknown, "train");
    Ibm1Config cfg;
    cfg.iterations = ta_iters;
    const auto fwd = train_ibm1(corpus.pairs, cfg, Direction::SourceToTarget);
    const auto rev = train_ibm1(corpus.pairs, cfg, Direction::TargetToSource);
    std::cerr << "ibm1 final log-likelihood: fwd " << fwd.log_likelihood.back() << ", rev "
              << rev.log_likelihood.back() << "\n";
    if (!ta_fwd.empty()) fwd.table.save_tsv(ta_fwd);
    if (!ta_rev.empty()) rev.table.save_tsv(ta_rev);
    if (!ta_align.empty()) {
      const auto heuristic = heuristic_from_string(ta_heur);
      std::vector<AlignmentLinks> out;
      for (const auto& p : corpus.pairs) {
        SentencePair swapped;
        swapped.source = p.target;
        swapped.target = p.source;
        out.push_back(symmetrize(viterbi_align(p, fwd.table),
                                 flip_links(viterbi_align(swapped, rev.table)), heuristic));
      }
      save_alignments(out, ta_align);
    }
  });

  // ---- extract-phrases ----
  auto* ep = app.add_subcommand("extract-phrases", "build a scored phrase table");
  std::string ep_src, ep_tgt, ep_align, ep_fwd, ep_rev, ep_out;
  int ep_max_len = 7;
  ep->add_option("--source", ep_src)->required();
  ep->add_option("--target", ep_tgt)->required();
  ep->add_option("--alignments", ep_align, "Pharaoh alignments")->required();
  ep->add_option("--table-fwd", ep_fwd, "t(target|source) TSV")->required();
  ep->add_option("--table-rev", ep_rev, "t(source|target) TSV")->required();
  ep->add_option("--max-len", ep_max_len)->capture_default_str();
  ep->add_option("-o,--out", ep_out, "phrase table output")->required();
  ep->callback([&] {
    const ParallelCorpus corpus =
        load_parallel_corpus(ep_src, ep_tgt, Dialect::Unknown, "train");
    const auto alignments = load_alignments(ep_align);
    const PhraseTable table =
        PhraseTable::build(corpus.pairs, alignments, TranslationTable::load_tsv(ep_fwd),
                           TranslationTable::load_tsv(ep_rev), ep_max_len);
    table.save(ep_out);
    std::cerr << "phrase table: " << table.size() << " entries\n";
  });

  // ---- train-g2p ----
  auto* tg = app.add_subcommand("train-g2p", "train the graphone G2P converter");
  std::string tg_dict, tg_out;
  int tg_iters = 25;
  tg->add_option("--dict", tg_dict, "pronunciation dictionary (word<TAB>phones)")->required();
  tg->add_option("-o,--model", tg_out, "model output (JSON)")->required();
  tg->add_option("--em-iterations", tg_iters)->capture_default_str();
  tg->callback([&] {
    G2PModel::Config cfg;
    cfg.em_iterations = tg_iters;
    const G2PModel model = G2PModel::train(load_pronunciation_dict(tg_dict), cfg);
    model.save(tg_out);
    std::cerr << "g2p: " << model.inventory().size() << " graphones, "
              << model.skipped_training_entries() << " entries skipped\n";
  });

  // ---- train-cbnmt ----
  auto* tc = app.add_subcommand("train-cbnmt", "train the character seq2seq word translator");
  std::string tc_pairs, tc_dev, tc_out, tc_arch = "gru";
  CharModelHyperparams hp;
  tc->add_option("--pairs", tc_pairs, "training word pairs (src<TAB>tgt)")->required();
  tc->add_option("--dev", tc_dev, "held-out word pairs for exact-match report");
  tc->add_option("-o,--model", tc_out, "checkpoint output")->required();
  tc->add_option("--epochs", hp.epochs)->capture_default_str();
  tc->add_option("--learning-rate", hp.learning_rate)->capture_default_str();
  tc->add_option("--hidden", hp.hidden)->capture_default_str();
  tc->add_option("--embedding", hp.embedding)->capture_default_str();
  tc->add_option("--batch-size", hp.batch_size)->capture_default_str();
  tc->add_option("--arch", tc_arch, "gru | qrnn")->capture_default_str();
  tc->callback([&] {
    hp.seed = seed;
    hp.verbose = true;
    if (tc_arch == "qrnn") hp.arch = CharModelArch::Qrnn;
    else if (tc_arch != "gru") throw std::runtime_error("unknown arch: " + tc_arch);
    const auto pairs = load_word_pairs(tc_pairs);
    const CharSeq2SeqModel model = CharSeq2SeqModel::train(pairs, hp);
    model.save(tc_out);
    if (!tc_dev.empty()) {
      const auto dev = load_word_pairs(tc_dev);
      std::vector<std::string> inputs;
      for (const auto& p : dev) inputs.push_back(p.source);
      const auto outputs = model.translate_batch(inputs);
      std::size_t exact = 0;
      for (std::size_t i = 0; i < dev.size(); ++i)
        if (outputs[i] == dev[i].target) ++exact;
      std::cerr << "dev exact-match: " << exact << "/" << dev.size() << "\n";
    }
  });

  // ---- train-rules-check ----
  auto* rc = app.add_subcommand("train-rules-check",
                                "validate a rules file against the built-in conversion fixtures");
  std::string rc_rules;
  rc->add_option("--rules", rc_rules, "rules TSV (default: built-in cascade)");
  rc->callback([&] {
    const RuleSet rules = rc_rules.empty() ? RuleSet::default_rules() : RuleSet::load(rc_rules);
    std::size_t failed = 0;
    for (const auto& [input, expected] : default_rule_examples()) {
      const bool ok = any_rule_converts(rules, input, expected);
      if (!ok) ++failed;
      std::cout << (ok ? "ok" : "FAIL") << '\t' << input << "\t->\t" << expected << "\n";
    }
    if (failed) throw std::runtime_error(std::to_string(failed) + " rule fixtures failed");
  });

  // ---- normalize ----
  auto* nm = app.add_subcommand("normalize", "normalize OOV words in tokenized text");
  std::string nm_in, nm_out, nm_gsw, nm_de, nm_rules, nm_g2p, nm_cbnmt, nm_strategy = "Orth";
  bool nm_direct = false;
  nm->add_option("-i,--input", nm_in, "tokenized sentences (default stdin)");
  nm->add_option("-o,--output", nm_out, "output (default stdout)");
  nm->add_option("--vocab-gsw", nm_gsw, "GSW vocabulary TSV")->required();
  nm->add_option("--vocab-de", nm_de, "DE vocabulary TSV")->required();
  nm->add_option("--strategy", nm_strategy, "Orth | Phon | Cbnmt | OrthThenPhon | CbnmtThenPhon")
      ->capture_default_str();
  nm->add_option("--rules", nm_rules, "rules TSV (default: built-in cascade)");
  nm->add_option("--g2p", nm_g2p, "G2P model (needed by Phon strategies)");
  nm->add_option("--cbnmt", nm_cbnmt, "char model checkpoint (needed by Cbnmt strategies)");
  nm->add_flag("--cbnmt-direct", nm_direct, "substitute char model output without vocab checks");
  nm->callback([&] {
    const Vocabulary gsw = Vocabulary::load_tsv(nm_gsw);
    const Vocabulary de = Vocabulary::load_tsv(nm_de);
    NormalizationModels models;
    models.rules = nm_rules.empty() ? RuleSet::default_rules() : RuleSet::load(nm_rules);
    SentenceNormalizer mode;
    mode.strategy = strategy_from_string(nm_strategy);
    mode.cbnmt_direct = nm_direct;
    if (!nm_g2p.empty()) {
      auto g2p = std::make_shared<G2PModel>(G2PModel::load(nm_g2p));
      models.gsw_index = std::make_shared<PhoneticIndex>(build_phonetic_index(gsw, *g2p));
      models.de_index = std::make_shared<PhoneticIndex>(build_phonetic_index(de, *g2p));
      models.g2p = std::move(g2p);
    }
    if (!nm_cbnmt.empty())
      models.char_model = std::make_shared<CharSeq2SeqModel>(CharSeq2SeqModel::load(nm_cbnmt));
    std::ofstream file;
    auto& out = open_output(file, nm_out);
    for (const auto& line : read_input_lines(nm_in))
      out << join_tokens(normalize_sentence(tokenize(line), mode, gsw, de, models)) << "\n";
  });

  // ---- translate ----
  auto* tr = app.add_subcommand("translate", "decode tokenized sentences");
  std::string tr_in, tr_out, tr_table, tr_lm, tr_weights;
  int tr_beam = 100, tr_dist = 4;
  bool tr_monotone = false;
  tr->add_option("-i,--input", tr_in, "tokenized sentences (default stdin)");
  tr->add_option("-o,--output", tr_out, "output (default stdout)");
  tr->add_option("--phrase-table", tr_table)->required();
  tr->add_option("--lm", tr_lm, "ARPA language model")->required();
  tr->add_option("--weights", tr_weights, "feature weights TSV");
  tr->add_option("--beam", tr_beam)->capture_default_str();
  tr->add_option("--distortion-limit", tr_dist, "negative = unlimited")->capture_default_str();
  tr->add_flag("--monotone", tr_monotone, "no reordering");
  tr->callback([&] {
    const PhraseTable table = PhraseTable::load(tr_table);
    const TrigramModel lm = TrigramModel::load_arpa(tr_lm);
    DecoderConfig cfg;
    cfg.beam = tr_beam;
    cfg.distortion_limit = tr_dist;
    cfg.monotone = tr_monotone;
    if (!tr_weights.empty()) cfg.weights = FeatureWeights::load_tsv(tr_weights);
    const Decoder decoder(table, lm, cfg);
    std::vector<TokenSeq> inputs;
    for (const auto& line : read_input_lines(tr_in)) inputs.push_back(tokenize(line));
    const auto outputs = decoder.translate_corpus(inputs, threads);
    std::ofstream file;
    auto& out = open_output(file, tr_out);
    for (const auto& sent : outputs) out << join_tokens(sent) << "\n";
  });

  // ---- tune ----
  auto* tu = app.add_subcommand("tune", "random-search weight tuning on a dev set");
  std::string tu_table, tu_lm, tu_src, tu_tgt, tu_out;
  int tu_trials = 32, tu_beam = 100, tu_dist = 4;
  tu->add_option("--phrase-table", tu_table)->required();
  tu->add_option("--lm", tu_lm)->required();
  tu->add_option("--dev-source", tu_src)->required();
  tu->add_option("--dev-target", tu_tgt)->required();
  tu->add_option("--trials", tu_trials)->capture_default_str();
  tu->add_option("--beam", tu_beam)->capture_default_str();
  tu->add_option("--distortion-limit", tu_dist)->capture_default_str();
  tu->add_option("-o,--out", tu_out, "weights TSV output")->required();
  tu->callback([&] {
    const PhraseTable table = PhraseTable::load(tu_table);
    const TrigramModel lm = TrigramModel::load_arpa(tu_lm);
    const ParallelCorpus dev =
        load_parallel_corpus(tu_src, tu_tgt, Dialect::Unknown, "dev");
    DecoderConfig cfg;
    cfg.beam = tu_beam;
    cfg.distortion_limit = tu_dist;
    const FeatureWeights best =
        tune_weights(table, lm, cfg, dev.pairs, tu_trials, seed, threads);
    best.save_tsv(tu_out);
  });

  // ---- bleu ----
  auto* bl = app.add_subcommand("bleu", "corpus BLEU of hypotheses against references");
  std::string bl_hyp, bl_ref;
  bl->add_option("--hyp", bl_hyp, "hypotheses, one per line")->required();
  bl->add_option("--ref", bl_ref, "references, one per line")->required();
  bl->callback([&] {
    const BleuReport report =
        compute_bleu(load_tokenized_lines(bl_hyp), load_tokenized_lines(bl_ref));
    std::cout << "p1\tp2\tp3\tp4\tbp\tbleu\n";
    char pct[32];
    std::snprintf(pct, sizeof(pct), "%.2f", report.score * 100.0);
    std::ostringstream row;
    row.setf(std::ios::fixed);
    row.precision(4);
    row << report.precisions[0] << '\t' << report.precisions[1] << '\t' << report.precisions[2]
        << '\t' << report.precisions[3] << '\t' << report.brevity_penalty << '\t' << pct;
    std::cout << row.str() << "\n";
  });

  // ---- run-experiment ----
  auto* re = app.add_subcommand("run-experiment", "train everything and fill the BLEU grid");
  std::string re_config, re_out;
  re->add_option("config", re_config, "experiment config JSON")->required();
  re->add_option("-o,--out", re_out, "matrix output (default stdout)");
  re->callback([&] {
    ExperimentConfig cfg = ExperimentConfig::load(re_config);
    if (threads > 1) cfg.threads = threads;
    const ExperimentResult result = run_experiment(cfg);
    std::ofstream file;
    auto& out = open_output(file, re_out);
    out << result.to_tsv();
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dialect-to-standard MT toolkit"};
  try {
    return run(app, argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
