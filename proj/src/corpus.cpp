#include "gswmt/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gswmt/utf8.hpp"

namespace gswmt {

const char* to_string(Dialect d) {
  switch (d) {
    case Dialect::BS: return "BS";
    case Dialect::BL: return "BL";
    case Dialect::BE: return "BE";
    case Dialect::ZH: return "ZH";
    case Dialect::SG: return "SG";
    case Dialect::VS: return "VS";
    default: return "UNKNOWN";
  }
}

const char* to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
    default: return "heldout";
  }
}

Dialect dialect_from_string(const std::string& s) {
  if (s == "BS") return Dialect::BS;
  if (s == "BL") return Dialect::BL;
  if (s == "BE") return Dialect::BE;
  if (s == "ZH") return Dialect::ZH;
  if (s == "SG") return Dialect::SG;
  if (s == "VS") return Dialect::VS;
  if (s == "UNKNOWN") return Dialect::Unknown;
  throw std::runtime_error("unknown dialect tag: " + s);
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "dev") return Split::Dev;
  if (s == "test") return Split::Test;
  if (s == "heldout") return Split::Heldout;
  throw std::runtime_error("unknown split label: " + s);
}

bool is_detached_punct(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'(': case U')':
      return true;
    default:
      return false;
  }
}

bool is_punctuation_token(const Token& t) {
  return t.size() == 1 && is_detached_punct(static_cast<char32_t>(static_cast<unsigned char>(t[0])));
}

std::size_t ParallelCorpus::count(Split s) const {
  std::size_t n = 0;
  for (Split x : split)
    if (x == s) ++n;
  return n;
}

std::vector<std::size_t> ParallelCorpus::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(i);
  return out;
}

std::vector<SentencePair> ParallelCorpus::pairs_in(Split s) const {
  std::vector<SentencePair> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s) out.push_back(pairs[i]);
  return out;
}

TokenSeq tokenize(std::string_view line) {
  TokenSeq out;
  std::string cur;
  // The detached marks are all ASCII, so byte-level scanning is UTF-8 safe.
  const auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  for (char ch : line) {
    unsigned char b = static_cast<unsigned char>(ch);
    if (b == ' ' || b == '\t' || b == '\r' || b == '\n') {
      flush();
    } else if (b < 0x80 && is_detached_punct(b)) {
      flush();
      out.push_back(std::string(1, ch));
    } else {
      cur.push_back(ch);
    }
  }
  flush();
  return out;
}

std::string join_tokens(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

ParallelCorpus load_parallel_corpus(const std::string& source_path,
                                    const std::string& target_path,
                                    Dialect dialect, const std::string& genre) {
  const auto src_lines = read_lines(source_path);
  const auto tgt_lines = read_lines(target_path);
  if (src_lines.size() != tgt_lines.size()) {
    throw std::runtime_error("line count mismatch: " + source_path + " has " +
                             std::to_string(src_lines.size()) + " lines, " + target_path +
                             " has " + std::to_string(tgt_lines.size()));
  }
  ParallelCorpus corpus;
  corpus.pairs.reserve(src_lines.size());
  for (std::size_t i = 0; i < src_lines.size(); ++i) {
    SentencePair pair;
    pair.source = tokenize(src_lines[i]);
    pair.target = tokenize(tgt_lines[i]);
    pair.dialect = dialect;
    pair.genre = genre;
    if (pair.source.empty() || pair.target.empty()) {
      throw std::runtime_error("empty line at line " + std::to_string(i + 1) + " (" +
                               (pair.source.empty() ? source_path : target_path) + ")");
    }
    corpus.pairs.push_back(std::move(pair));
  }
  corpus.split.assign(corpus.pairs.size(), Split::Train);
  return corpus;
}

ParallelCorpus split_corpus(ParallelCorpus corpus, const SplitCounts& counts,
                            std::uint64_t seed) {
  const std::size_t n = corpus.size();
  const std::size_t requested = counts.train + counts.dev + counts.test;
  if (requested > n) {
    throw std::runtime_error("split counts (" + std::to_string(requested) +
                             ") exceed corpus size (" + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  // Hand-rolled Fisher-Yates: std::shuffle output differs across standard
  // libraries, and split labels must be reproducible from the seed alone.
  std::mt19937_64 gen(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(order[i - 1], order[j]);
  }
  corpus.split.assign(n, Split::Heldout);
  std::size_t k = 0;
  for (std::size_t i = 0; i < counts.train; ++i) corpus.split[order[k++]] = Split::Train;
  for (std::size_t i = 0; i < counts.dev; ++i) corpus.split[order[k++]] = Split::Dev;
  for (std::size_t i = 0; i < counts.test; ++i) corpus.split[order[k++]] = Split::Test;
  return corpus;
}

Vocabulary build_vocabulary(const ParallelCorpus& corpus, Side side,
                            std::uint64_t min_count) {
  Vocabulary vocab;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus.split[i] != Split::Train) continue;
    const TokenSeq& toks = side == Side::Source ? corpus.pairs[i].source : corpus.pairs[i].target;
    for (const Token& t : toks) vocab.counts[t]++;
  }
  if (min_count > 1) {
    for (auto it = vocab.counts.begin(); it != vocab.counts.end();) {
      if (it->second < min_count)
        it = vocab.counts.erase(it);
      else
        ++it;
    }
  }
  return vocab;
}

ParallelCorpus filter_by_target_vocabulary(const ParallelCorpus& corpus,
                                           const Vocabulary& vocab) {
  ParallelCorpus out;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    bool keep = true;
    for (const Token& t : corpus.pairs[i].target) {
      if (is_punctuation_token(t)) continue;
      if (!vocab.contains(t)) {
        keep = false;
        break;
      }
    }
    if (keep) {
      out.pairs.push_back(corpus.pairs[i]);
      out.split.push_back(corpus.split[i]);
    }
  }
  return out;
}

Lexicon load_lexicon(const std::string& path) {
  const auto lines = read_lines(path);
  Lexicon lex;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = lines[i].find('\t', start);
      if (tab == std::string::npos) {
        cols.push_back(lines[i].substr(start));
        break;
      }
      cols.push_back(lines[i].substr(start, tab - start));
      start = tab + 1;
    }
    if (cols.size() != 2)
      throw std::runtime_error("lexicon row " + std::to_string(i + 1) + " has " +
                               std::to_string(cols.size()) + " columns, expected 2");
    for (const auto& c : cols) {
      if (c.empty() || c.find_first_of(" \t") != std::string::npos)
        throw std::runtime_error("lexicon row " + std::to_string(i + 1) +
                                 ": entries must be single non-empty tokens");
    }
    std::string key = cols[0] + "\t" + cols[1];
    if (seen.emplace(key, true).second)
      lex.entries.emplace_back(cols[0], cols[1]);
  }
  return lex;
}

std::vector<SentencePair> Lexicon::as_sentence_pairs(Dialect d, const std::string& genre) const {
  std::vector<SentencePair> out;
  out.reserve(entries.size());
  for (const auto& [src, tgt] : entries) {
    SentencePair p;
    p.source = {src};
    p.target = {tgt};
    p.dialect = d;
    p.genre = genre;
    out.push_back(std::move(p));
  }
  return out;
}

void Vocabulary::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  std::vector<std::pair<std::string, std::uint64_t>> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [w, c] : sorted) out << w << '\t' << c << '\n';
}

Vocabulary Vocabulary::load_tsv(const std::string& path) {
  Vocabulary vocab;
  for (const auto& line : read_lines(path)) {
    if (line.empty()) continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("bad vocabulary line (expected word<TAB>count): " + line);
    vocab.counts[line.substr(0, tab)] =
        static_cast<std::uint64_t>(std::stoull(line.substr(tab + 1)));
  }
  return vocab;
}

void save_corpus_side(const ParallelCorpus& corpus, Side side, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& p : corpus.pairs)
    out << join_tokens(side == Side::Source ? p.source : p.target) << '\n';
}

void save_corpus_metadata(const ParallelCorpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out << i << '\t' << to_string(corpus.pairs[i].dialect) << '\t' << corpus.pairs[i].genre
        << '\t' << to_string(corpus.split[i]) << '\n';
  }
}

void load_corpus_metadata(ParallelCorpus& corpus, const std::string& path) {
  const auto lines = read_lines(path);
  for (const auto& line : lines) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string idx, dialect, genre, split;
    if (!std::getline(ss, idx, '\t') || !std::getline(ss, dialect, '\t') ||
        !std::getline(ss, genre, '\t') || !std::getline(ss, split, '\t'))
      throw std::runtime_error("bad metadata line: " + line);
    std::size_t i = static_cast<std::size_t>(std::stoull(idx));
    if (i >= corpus.size())
      throw std::runtime_error("metadata index out of range: " + idx);
    corpus.pairs[i].dialect = dialect_from_string(dialect);
    corpus.pairs[i].genre = genre;
    corpus.split[i] = split_from_string(split);
  }
}

std::vector<TokenSeq> load_tokenized_lines(const std::string& path) {
  std::vector<TokenSeq> out;
  for (const auto& line : read_lines(path)) out.push_back(tokenize(line));
  return out;
}

void save_tokenized_lines(const std::vector<TokenSeq>& lines, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& l : lines) out << join_tokens(l) << '\n';
}

}  // namespace gswmt
