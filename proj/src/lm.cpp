#include "gswmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace gswmt {

namespace {
constexpr double kLn10 = 2.302585092994045684;
constexpr double kSentinelLog10 = -99.0;  // ARPA convention for <s>
constexpr std::uint32_t kMaxId = (1u << 21) - 1;
}  // namespace

TrigramModel TrigramModel::train(const std::vector<TokenSeq>& sentences) {
  return train(sentences, Config{});
}

TrigramModel TrigramModel::train(const std::vector<TokenSeq>& sentences, const Config& cfg) {
  if (sentences.empty()) throw std::runtime_error("cannot train language model on empty corpus");

  // Raw word frequencies decide what maps to <unk>.
  std::unordered_map<std::string, std::uint64_t> raw;
  for (const auto& s : sentences)
    for (const auto& w : s) raw[w]++;

  std::vector<std::string> kept;
  kept.reserve(raw.size());
  for (const auto& [w, c] : raw)
    if (c >= cfg.min_count) kept.push_back(w);
  std::sort(kept.begin(), kept.end());

  TrigramModel m;
  m.id_to_word_ = {kBos, kEos, kUnk};
  m.bos_ = 0;
  m.eos_ = 1;
  m.unk_ = 2;
  for (const auto& w : kept) m.id_to_word_.push_back(w);
  if (m.id_to_word_.size() > kMaxId)
    throw std::runtime_error("language model vocabulary exceeds 2^21 types");
  for (std::uint32_t i = 0; i < m.id_to_word_.size(); ++i) m.word_to_id_[m.id_to_word_[i]] = i;

  const std::uint32_t vocab = static_cast<std::uint32_t>(m.id_to_word_.size());
  std::vector<std::uint64_t> c1(vocab, 0);
  std::unordered_map<std::uint64_t, std::uint64_t> c2, c3;

  for (const auto& s : sentences) {
    std::vector<std::uint32_t> seq;
    seq.reserve(s.size() + 2);
    seq.push_back(m.bos_);
    for (const auto& w : s) {
      auto it = m.word_to_id_.find(w);
      seq.push_back(it == m.word_to_id_.end() ? m.unk_ : it->second);
    }
    seq.push_back(m.eos_);
    for (std::size_t i = 1; i < seq.size(); ++i) {
      c1[seq[i]]++;
      c2[key2(seq[i - 1], seq[i])]++;
      if (i >= 2) c3[key3(seq[i - 2], seq[i - 1], seq[i])]++;
    }
  }

  // Unigram level: P(w) = c/(N+T); <unk> additionally absorbs the Witten-Bell
  // unseen mass T/(N+T) so the distribution sums to one exactly.
  std::uint64_t total = 0, types = 0;
  for (std::uint32_t w = 0; w < vocab; ++w) {
    if (w == m.bos_) continue;
    total += c1[w];
    if (c1[w] > 0) ++types;
  }
  m.logp1_.assign(vocab, 0.0);
  m.logbow1_.assign(vocab, 0.0);
  const double denom1 = static_cast<double>(total + types);
  for (std::uint32_t w = 0; w < vocab; ++w) {
    if (w == m.bos_) {
      m.logp1_[w] = kSentinelLog10 * kLn10;
    } else if (w == m.unk_) {
      m.logp1_[w] = std::log((static_cast<double>(c1[w]) + static_cast<double>(types)) / denom1);
    } else if (c1[w] > 0) {
      m.logp1_[w] = std::log(static_cast<double>(c1[w]) / denom1);
    } else {
      // Only possible for words pruned everywhere; keep a hard floor.
      m.logp1_[w] = kSentinelLog10 * kLn10;
    }
  }

  // Bigram level, grouped by history word.
  struct HistStats {
    std::uint64_t total = 0;
    std::uint64_t types = 0;
  };
  std::unordered_map<std::uint32_t, HistStats> h1;
  for (const auto& [key, c] : c2) {
    auto& st = h1[static_cast<std::uint32_t>(key >> 21)];
    st.total += c;
    st.types += 1;
  }
  std::unordered_map<std::uint32_t, double> seen_lower1;  // sum of P_uni over seen continuations
  for (const auto& [key, c] : c2) {
    const std::uint32_t u = static_cast<std::uint32_t>(key >> 21);
    const std::uint32_t w = static_cast<std::uint32_t>(key & kMaxId);
    seen_lower1[u] += std::exp(m.logp1_[w]);
  }
  for (const auto& [u, st] : h1) {
    const double ct = static_cast<double>(st.total + st.types);
    const double leftover = 1.0 - seen_lower1[u];
    if (leftover < 1e-12) {
      // Every predictable event follows this history; undiscounted MLE keeps
      // the distribution normalized and the backoff path is unreachable.
      m.logbow1_[u] = kSentinelLog10 * kLn10;
    } else {
      m.logbow1_[u] = std::log(static_cast<double>(st.types) / ct) - std::log(leftover);
    }
  }
  for (const auto& [key, c] : c2) {
    const std::uint32_t u = static_cast<std::uint32_t>(key >> 21);
    const auto& st = h1[u];
    const bool mle = 1.0 - seen_lower1[u] < 1e-12;
    const double denom = mle ? static_cast<double>(st.total) : static_cast<double>(st.total + st.types);
    m.logp2_[key] = std::log(static_cast<double>(c) / denom);
  }

  // Trigram level, grouped by history bigram.
  std::unordered_map<std::uint64_t, HistStats> h2;
  for (const auto& [key, c] : c3) {
    auto& st = h2[key >> 21];
    st.total += c;
    st.types += 1;
  }
  std::unordered_map<std::uint64_t, double> seen_lower2;
  for (const auto& [key, c] : c3) {
    const std::uint64_t hist = key >> 21;
    const std::uint32_t v = static_cast<std::uint32_t>(hist & kMaxId);
    const std::uint32_t w = static_cast<std::uint32_t>(key & kMaxId);
    seen_lower2[hist] += std::exp(m.logp2_.at(key2(v, w)));
  }
  for (const auto& [hist, st] : h2) {
    const double ct = static_cast<double>(st.total + st.types);
    const double leftover = 1.0 - seen_lower2[hist];
    if (leftover < 1e-12) {
      m.logbow2_[hist] = kSentinelLog10 * kLn10;
    } else {
      m.logbow2_[hist] = std::log(static_cast<double>(st.types) / ct) - std::log(leftover);
    }
  }
  for (const auto& [key, c] : c3) {
    const std::uint64_t hist = key >> 21;
    const auto& st = h2[hist];
    const bool mle = 1.0 - seen_lower2[hist] < 1e-12;
    const double denom = mle ? static_cast<double>(st.total) : static_cast<double>(st.total + st.types);
    m.logp3_[key] = std::log(static_cast<double>(c) / denom);
  }
  return m;
}

std::uint32_t TrigramModel::id_or_unk(const std::string& w) const {
  auto it = word_to_id_.find(w);
  return it == word_to_id_.end() ? unk_ : it->second;
}

double TrigramModel::lp_uni(std::uint32_t w) const { return logp1_[w]; }

double TrigramModel::lp_bi(std::uint32_t u, std::uint32_t w) const {
  auto it = logp2_.find(key2(u, w));
  if (it != logp2_.end()) return it->second;
  return logbow1_[u] + lp_uni(w);
}

double TrigramModel::lp_tri(std::uint32_t u, std::uint32_t v, std::uint32_t w) const {
  auto it = logp3_.find(key3(u, v, w));
  if (it != logp3_.end()) return it->second;
  auto bw = logbow2_.find(key2(u, v));
  return (bw == logbow2_.end() ? 0.0 : bw->second) + lp_bi(v, w);
}

double TrigramModel::log_prob(std::span<const std::string> context, const std::string& word) const {
  const std::uint32_t w = id_or_unk(word);
  if (context.empty()) return lp_uni(w);
  if (context.size() == 1) return lp_bi(id_or_unk(context[0]), w);
  const std::uint32_t u = id_or_unk(context[context.size() - 2]);
  const std::uint32_t v = id_or_unk(context[context.size() - 1]);
  return lp_tri(u, v, w);
}

double TrigramModel::score_sentence(const TokenSeq& sentence) const {
  std::vector<std::uint32_t> seq;
  seq.reserve(sentence.size() + 2);
  seq.push_back(bos_);
  for (const auto& w : sentence) seq.push_back(id_or_unk(w));
  seq.push_back(eos_);
  double total = 0.0;
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (i == 1)
      total += lp_bi(seq[0], seq[1]);
    else
      total += lp_tri(seq[i - 2], seq[i - 1], seq[i]);
  }
  return total;
}

double TrigramModel::perplexity(const std::vector<TokenSeq>& corpus) const {
  if (corpus.empty()) throw std::runtime_error("cannot compute perplexity of empty corpus");
  double total = 0.0;
  std::size_t events = 0;
  for (const auto& s : corpus) {
    total += score_sentence(s);
    events += s.size() + 1;
  }
  return std::exp(-total / static_cast<double>(events));
}

std::vector<std::string> TrigramModel::predictable_vocabulary() const {
  std::vector<std::string> out;
  for (std::uint32_t w = 0; w < id_to_word_.size(); ++w)
    if (w != bos_) out.push_back(id_to_word_[w]);
  return out;
}

void TrigramModel::save_arpa(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  save_arpa(out);
}

void TrigramModel::save_arpa(std::ostream& out) const {
  out << std::setprecision(6) << std::fixed;

  // Sort n-grams by their word strings so files are reproducible.
  std::vector<std::uint32_t> ids(id_to_word_.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  std::sort(ids.begin(), ids.end(),
            [&](std::uint32_t a, std::uint32_t b) { return id_to_word_[a] < id_to_word_[b]; });

  const auto words2 = [&](std::uint64_t key) {
    return id_to_word_[key >> 21] + " " + id_to_word_[key & kMaxId];
  };
  const auto words3 = [&](std::uint64_t key) {
    return id_to_word_[key >> 42] + " " + id_to_word_[(key >> 21) & kMaxId] + " " +
           id_to_word_[key & kMaxId];
  };

  std::vector<std::pair<std::string, std::uint64_t>> bi, tri;
  bi.reserve(logp2_.size());
  for (const auto& [key, lp] : logp2_) bi.emplace_back(words2(key), key);
  std::sort(bi.begin(), bi.end());
  tri.reserve(logp3_.size());
  for (const auto& [key, lp] : logp3_) tri.emplace_back(words3(key), key);
  std::sort(tri.begin(), tri.end());

  out << "\\data\\\n";
  out << "ngram 1=" << id_to_word_.size() << "\n";
  out << "ngram 2=" << logp2_.size() << "\n";
  out << "ngram 3=" << logp3_.size() << "\n\n";

  std::unordered_map<std::uint32_t, bool> is_hist1;
  for (const auto& [key, lp] : logp2_) is_hist1[static_cast<std::uint32_t>(key >> 21)] = true;

  out << "\\1-grams:\n";
  for (std::uint32_t id : ids) {
    out << logp1_[id] / kLn10 << '\t' << id_to_word_[id];
    if (is_hist1.count(id)) out << '\t' << logbow1_[id] / kLn10;
    out << '\n';
  }
  out << "\n\\2-grams:\n";
  for (const auto& [text, key] : bi) {
    out << logp2_.at(key) / kLn10 << '\t' << text;
    auto bw = logbow2_.find(key);
    if (bw != logbow2_.end()) out << '\t' << bw->second / kLn10;
    out << '\n';
  }
  out << "\n\\3-grams:\n";
  for (const auto& [text, key] : tri) out << logp3_.at(key) / kLn10 << '\t' << text << '\n';
  out << "\n\\end\\\n";
}

TrigramModel TrigramModel::load_arpa(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return load_arpa(in);
}

TrigramModel TrigramModel::load_arpa(std::istream& in) {
  TrigramModel m;
  std::string line;
  int order = 0;
  std::vector<std::tuple<double, std::string, double, bool>> uni;  // logp, word, bow, has_bow
  struct Raw {
    double logp;
    std::vector<std::string> words;
    double bow;
    bool has_bow;
  };
  std::vector<Raw> bi, tri;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line == "\\data\\") continue;
    if (line == "\\1-grams:") { order = 1; continue; }
    if (line == "\\2-grams:") { order = 2; continue; }
    if (line == "\\3-grams:") { order = 3; continue; }
    if (line == "\\end\\") break;
    if (order == 0) continue;  // ngram count headers

    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 2) throw std::runtime_error("bad ARPA line: " + line);
    const double logp = std::stod(fields[0]) * kLn10;
    const bool has_bow = fields.size() >= 3;
    const double bow = has_bow ? std::stod(fields[2]) * kLn10 : 0.0;

    std::vector<std::string> words;
    std::istringstream ws(fields[1]);
    std::string w;
    while (ws >> w) words.push_back(w);
    if (static_cast<int>(words.size()) != order)
      throw std::runtime_error("ARPA entry order mismatch: " + line);

    if (order == 1)
      uni.emplace_back(logp, words[0], bow, has_bow);
    else if (order == 2)
      bi.push_back({logp, words, bow, has_bow});
    else
      tri.push_back({logp, words, bow, has_bow});
  }

  for (const auto& [logp, word, bow, has_bow] : uni) {
    m.word_to_id_[word] = static_cast<std::uint32_t>(m.id_to_word_.size());
    m.id_to_word_.push_back(word);
    m.logp1_.push_back(logp);
    m.logbow1_.push_back(has_bow ? bow : 0.0);
  }
  const auto find_id = [&](const std::string& w) {
    auto it = m.word_to_id_.find(w);
    if (it == m.word_to_id_.end()) throw std::runtime_error("ARPA references unknown word: " + w);
    return it->second;
  };
  if (!m.word_to_id_.count(kBos) || !m.word_to_id_.count(kEos) || !m.word_to_id_.count(kUnk))
    throw std::runtime_error("ARPA file lacks <s>, </s> or <unk>");
  m.bos_ = m.word_to_id_[kBos];
  m.eos_ = m.word_to_id_[kEos];
  m.unk_ = m.word_to_id_[kUnk];

  for (const auto& r : bi) {
    const std::uint64_t key = key2(find_id(r.words[0]), find_id(r.words[1]));
    m.logp2_[key] = r.logp;
    if (r.has_bow) m.logbow2_[key] = r.bow;
  }
  for (const auto& r : tri)
    m.logp3_[key3(find_id(r.words[0]), find_id(r.words[1]), find_id(r.words[2]))] = r.logp;
  return m;
}

}  // namespace gswmt
