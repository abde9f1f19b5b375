#include "gswmt/decoder.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "gswmt/bleu.hpp"

namespace gswmt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxSourceLen = 256;

struct Coverage {
  std::array<std::uint64_t, 4> bits{};

  bool test(int i) const { return (bits[i >> 6] >> (i & 63)) & 1; }
  void set(int i) { bits[i >> 6] |= std::uint64_t(1) << (i & 63); }
  bool overlaps(int start, int len) const {
    for (int i = start; i < start + len; ++i)
      if (test(i)) return true;
    return false;
  }
  bool operator==(const Coverage& o) const { return bits == o.bits; }
};

struct CoverageHash {
  std::size_t operator()(const Coverage& c) const {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto b : c.bits) h = (h ^ b) * 0x100000001b3ull;
    return h;
  }
};

struct TransOpt {
  int start = 0;
  int len = 0;
  TokenSeq target;
  double features[4] = {0, 0, 0, 0};  // phi(t|s), phi(s|t), lex(t|s), lex(s|t)
};

struct Hypothesis {
  Coverage coverage;
  std::string target_text;        // space-joined prefix, used for tie-breaks
  std::array<std::string, 2> ctx; // up to the last two target tokens
  int ctx_len = 0;
  int end = -1;                   // index of the last covered source word
  double score = 0.0;
  double rest = 0.0;
};

struct RecombKey {
  Coverage coverage;
  std::array<std::string, 2> ctx;
  int ctx_len;
  int end;
  bool operator==(const RecombKey& o) const {
    return end == o.end && ctx_len == o.ctx_len && ctx == o.ctx && coverage == o.coverage;
  }
};

struct RecombKeyHash {
  std::size_t operator()(const RecombKey& k) const {
    std::size_t h = CoverageHash{}(k.coverage);
    h = h * 31 + std::hash<std::string>{}(k.ctx[0]);
    h = h * 31 + std::hash<std::string>{}(k.ctx[1]);
    h = h * 31 + static_cast<std::size_t>(k.end + 1);
    h = h * 31 + static_cast<std::size_t>(k.ctx_len);
    return h;
  }
};

// Better score wins; equal scores keep the lexicographically smaller prefix.
bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.target_text < b.target_text;
}

bool better_pruning(const Hypothesis& a, const Hypothesis& b) {
  const double sa = a.score + a.rest;
  const double sb = b.score + b.rest;
  if (sa != sb) return sa > sb;
  return a.target_text < b.target_text;
}

}  // namespace

TranslationResult Decoder::translate(const TokenSeq& source) const {
  TranslationResult result = decode(source, config_.monotone);
  if (result.score == kNegInf && !config_.monotone) {
    // The distortion limit can strand every surviving hypothesis; retry
    // monotone before falling back to a plain copy.
    result = decode(source, true);
  }
  if (result.score == kNegInf) {
    // Overlapping multi-word options can leave a position no hypothesis can
    // reach (no segmentation covers the sentence). Copy the sentence through
    // word by word so decoding stays total.
    const FeatureWeights& w = config_.weights;
    result.target = source;
    result.score = 0.0;
    std::vector<std::string> ctx = {TrigramModel::kBos};
    for (const auto& word : source) {
      result.score += w.lm * lm_.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), word) +
                      w.word_penalty * -1.0 + w.phrase_penalty * -1.0;
      ctx.push_back(word);
      if (ctx.size() > 2) ctx.erase(ctx.begin());
    }
    result.score +=
        w.lm * lm_.log_prob(std::span<const std::string>(ctx.data(), ctx.size()), TrigramModel::kEos);
  }
  return result;
}

TranslationResult Decoder::decode(const TokenSeq& source, bool monotone) const {
  const int n = static_cast<int>(source.size());
  const FeatureWeights& w = config_.weights;
  if (n == 0) {
    TranslationResult r;
    const std::string bos = TrigramModel::kBos;
    r.score = w.lm * lm_.log_prob(std::span<const std::string>(&bos, 1), TrigramModel::kEos);
    return r;
  }
  if (source.size() > kMaxSourceLen)
    throw std::runtime_error("decoder supports sentences up to 256 words");

  // Collect translation options per source span.
  const int max_len = std::min<int>(n, table_.max_source_len());
  std::vector<TransOpt> options;
  std::vector<bool> covered(n, false);
  for (int s = 0; s < n; ++s) {
    for (int len = 1; len <= max_len && s + len <= n; ++len) {
      TokenSeq phrase(source.begin() + s, source.begin() + s + len);
      const auto* opts = table_.lookup(phrase);
      if (!opts) continue;
      for (const auto& po : *opts) {
        TransOpt o;
        o.start = s;
        o.len = len;
        o.target = po.target;
        o.features[0] = po.phi_tgt_src;
        o.features[1] = po.phi_src_tgt;
        o.features[2] = po.lex_tgt_src;
        o.features[3] = po.lex_src_tgt;
        options.push_back(std::move(o));
        for (int i = s; i < s + len; ++i) covered[i] = true;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (covered[i]) continue;
    TransOpt o;  // copy-through
    o.start = i;
    o.len = 1;
    o.target = {source[i]};
    options.push_back(std::move(o));
  }

  std::vector<std::vector<const TransOpt*>> by_start(n);
  for (const auto& o : options) by_start[o.start].push_back(&o);

  const auto weighted_translation = [&](const TransOpt& o) {
    return w.phi_tgt_src * o.features[0] + w.phi_src_tgt * o.features[1] +
           w.lex_tgt_src * o.features[2] + w.lex_src_tgt * o.features[3] +
           w.word_penalty * -static_cast<double>(o.target.size()) + w.phrase_penalty * -1.0;
  };

  // Rest cost: per span, the best option score plus a unigram LM estimate,
  // combined over segmentations of the span.
  std::vector<std::vector<double>> future(n, std::vector<double>(n, kNegInf));
  for (const auto& o : options) {
    double est = weighted_translation(o);
    for (const auto& word : o.target)
      est += w.lm * lm_.log_prob(std::span<const std::string>{}, word);
    auto& cell = future[o.start][o.start + o.len - 1];
    cell = std::max(cell, est);
  }
  for (int len = 2; len <= n; ++len) {
    for (int s = 0; s + len <= n; ++s) {
      const int e = s + len - 1;
      for (int k = s; k < e; ++k) {
        if (future[s][k] == kNegInf || future[k + 1][e] == kNegInf) continue;
        future[s][e] = std::max(future[s][e], future[s][k] + future[k + 1][e]);
      }
    }
  }
  const auto rest_cost = [&](const Coverage& cov) {
    double total = 0.0;
    int run_start = -1;
    for (int i = 0; i <= n; ++i) {
      const bool cov_i = i < n ? cov.test(i) : true;
      if (!cov_i && run_start < 0) run_start = i;
      if (cov_i && run_start >= 0) {
        total += future[run_start][i - 1];
        run_start = -1;
      }
    }
    return total;
  };

  std::vector<std::vector<Hypothesis>> stacks(n + 1);
  std::vector<std::unordered_map<RecombKey, std::size_t, RecombKeyHash>> index(n + 1);

  Hypothesis init;
  init.ctx[0] = TrigramModel::kBos;
  init.ctx_len = 1;
  init.rest = rest_cost(init.coverage);
  stacks[0].push_back(std::move(init));

  const auto push = [&](int stack, Hypothesis&& hyp) {
    RecombKey key{hyp.coverage, hyp.ctx, hyp.ctx_len, hyp.end};
    auto [it, inserted] = index[stack].try_emplace(key, stacks[stack].size());
    if (inserted) {
      stacks[stack].push_back(std::move(hyp));
    } else if (better(hyp, stacks[stack][it->second])) {
      stacks[stack][it->second] = std::move(hyp);
    }
  };

  for (int k = 0; k < n; ++k) {
    auto& stack = stacks[k];
    if (static_cast<int>(stack.size()) > config_.beam) {
      std::sort(stack.begin(), stack.end(), better_pruning);
      stack.resize(config_.beam);
    }
    for (const auto& hyp : stack) {
      int leftmost = 0;
      while (leftmost < n && hyp.coverage.test(leftmost)) ++leftmost;
      for (int s = monotone ? leftmost : 0; s < n; ++s) {
        if (monotone && s != leftmost) break;
        const int jump = s - (hyp.end + 1);
        if (!monotone && config_.distortion_limit >= 0 &&
            std::abs(jump) > config_.distortion_limit)
          continue;
        for (const TransOpt* o : by_start[s]) {
          if (hyp.coverage.overlaps(s, o->len)) continue;
          Hypothesis next;
          next.coverage = hyp.coverage;
          for (int i = s; i < s + o->len; ++i) next.coverage.set(i);
          next.end = s + o->len - 1;
          next.score = hyp.score + weighted_translation(*o) + w.distortion * -std::abs(jump);
          // LM feature: score each added target word in its growing context.
          std::array<std::string, 2> ctx = hyp.ctx;
          int ctx_len = hyp.ctx_len;
          next.target_text = hyp.target_text;
          for (const auto& word : o->target) {
            next.score +=
                w.lm * lm_.log_prob(std::span<const std::string>(ctx.data(), ctx_len), word);
            if (ctx_len < 2) {
              ctx[ctx_len++] = word;
            } else {
              ctx[0] = ctx[1];
              ctx[1] = word;
            }
            if (!next.target_text.empty()) next.target_text += ' ';
            next.target_text += word;
          }
          next.ctx = ctx;
          next.ctx_len = ctx_len;
          next.rest = rest_cost(next.coverage);
          push(k + o->len, std::move(next));
        }
      }
    }
  }

  const Hypothesis* best = nullptr;
  double best_score = kNegInf;
  for (const auto& hyp : stacks[n]) {
    const double complete =
        hyp.score + w.lm * lm_.log_prob(std::span<const std::string>(hyp.ctx.data(), hyp.ctx_len),
                                        TrigramModel::kEos);
    if (best == nullptr || complete > best_score ||
        (complete == best_score && hyp.target_text < best->target_text)) {
      best = &hyp;
      best_score = complete;
    }
  }

  TranslationResult result;
  if (best == nullptr) {
    result.score = kNegInf;
    return result;
  }
  result.score = best_score;
  std::istringstream ss(best->target_text);
  std::string tok;
  while (ss >> tok) result.target.push_back(tok);
  return result;
}

std::vector<TokenSeq> Decoder::translate_corpus(const std::vector<TokenSeq>& sentences,
                                                int threads) const {
  std::vector<TokenSeq> out(sentences.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < sentences.size(); ++i) out[i] = translate(sentences[i]).target;
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const int count = std::min<int>(threads, static_cast<int>(sentences.size()));
  for (int t = 0; t < count; ++t) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= sentences.size()) break;
        out[i] = translate(sentences[i]).target;
      }
    });
  }
  for (auto& th : workers) th.join();
  return out;
}

namespace {

struct WeightRange {
  double lo, hi;
};

// Sampling ranges for random-search tuning.
constexpr WeightRange kRanges[8] = {
    {0.0, 1.0},   // phi(t|s)
    {0.0, 1.0},   // phi(s|t)
    {0.0, 1.0},   // lex(t|s)
    {0.0, 1.0},   // lex(s|t)
    {0.0, 1.0},   // lm
    {-1.0, 1.0},  // word penalty
    {-1.0, 1.0},  // phrase penalty
    {0.0, 1.0},   // distortion
};

double unit_draw(std::mt19937_64& gen) {
  // 53-bit draw; uniform_real_distribution output is not pinned across
  // standard libraries.
  return static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

FeatureWeights tune_weights(const PhraseTable& table, const TrigramModel& lm,
                            const DecoderConfig& base, const std::vector<SentencePair>& dev,
                            int trials, std::uint64_t seed, int threads) {
  if (dev.empty()) throw std::runtime_error("weight tuning needs a non-empty dev corpus");
  if (trials < 1) throw std::runtime_error("weight tuning needs at least 1 trial");

  std::vector<TokenSeq> sources, references;
  sources.reserve(dev.size());
  for (const auto& p : dev) {
    sources.push_back(p.source);
    references.push_back(p.target);
  }

  std::mt19937_64 gen(seed);
  FeatureWeights best = base.weights;
  double best_bleu = -1.0;
  for (int t = 0; t < trials; ++t) {
    FeatureWeights cand = base.weights;
    if (t > 0) {
      double* slots[8] = {&cand.phi_tgt_src,  &cand.phi_src_tgt,   &cand.lex_tgt_src,
                          &cand.lex_src_tgt,  &cand.lm,            &cand.word_penalty,
                          &cand.phrase_penalty, &cand.distortion};
      for (int f = 0; f < 8; ++f)
        *slots[f] = kRanges[f].lo + (kRanges[f].hi - kRanges[f].lo) * unit_draw(gen);
    }
    DecoderConfig cfg = base;
    cfg.weights = cand;
    Decoder decoder(table, lm, cfg);
    const auto hyps = decoder.translate_corpus(sources, threads);
    const double bleu = compute_bleu(hyps, references).score;
    if (bleu > best_bleu) {
      best_bleu = bleu;
      best = cand;
    }
  }
  return best;
}

void FeatureWeights::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.precision(12);
  out << "phi_tgt_src\t" << phi_tgt_src << "\nphi_src_tgt\t" << phi_src_tgt << "\nlex_tgt_src\t"
      << lex_tgt_src << "\nlex_src_tgt\t" << lex_src_tgt << "\nlm\t" << lm << "\nword_penalty\t"
      << word_penalty << "\nphrase_penalty\t" << phrase_penalty << "\ndistortion\t" << distortion
      << "\n";
}

FeatureWeights FeatureWeights::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  FeatureWeights w;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw std::runtime_error("bad weights line: " + line);
    const std::string name = line.substr(0, tab);
    const double value = std::stod(line.substr(tab + 1));
    if (name == "phi_tgt_src") w.phi_tgt_src = value;
    else if (name == "phi_src_tgt") w.phi_src_tgt = value;
    else if (name == "lex_tgt_src") w.lex_tgt_src = value;
    else if (name == "lex_src_tgt") w.lex_src_tgt = value;
    else if (name == "lm") w.lm = value;
    else if (name == "word_penalty") w.word_penalty = value;
    else if (name == "phrase_penalty") w.phrase_penalty = value;
    else if (name == "distortion") w.distortion = value;
    else throw std::runtime_error("unknown weight name: " + name);
  }
  return w;
}

}  // namespace gswmt
