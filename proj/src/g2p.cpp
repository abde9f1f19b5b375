#include "gswmt/g2p.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gswmt/utf8.hpp"
#include "json.hpp"

namespace gswmt {

namespace {

// Graphone LM tokens: graphemes and phones joined with control separators so
// they survive the ARPA whitespace format.
std::string graphone_token(const std::string& graphemes, const PhoneSequence& phones) {
  std::string token = graphemes;
  token += '\x1f';
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (i) token += '\x1e';
    token += phones[i];
  }
  return token;
}

struct Transition {
  int di;  // graphemes consumed, 1..2
  int dj;  // phones consumed, 0..2
};

constexpr Transition kTransitions[] = {{1, 0}, {1, 1}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};

}  // namespace

std::vector<PronunciationEntry> load_pronunciation_dict(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<PronunciationEntry> dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("pronunciation dict line " + std::to_string(lineno) +
                               " lacks a tab separator");
    PronunciationEntry entry;
    entry.word = line.substr(0, tab);
    std::istringstream ss(line.substr(tab + 1));
    std::string phone;
    while (ss >> phone) entry.phones.push_back(phone);
    if (entry.word.empty() || entry.phones.empty())
      throw std::runtime_error("pronunciation dict line " + std::to_string(lineno) +
                               ": need word and at least one phone");
    dict.push_back(std::move(entry));
  }
  return dict;
}

G2PModel G2PModel::train(const std::vector<PronunciationEntry>& dict) {
  return train(dict, Config{});
}

G2PModel G2PModel::train(const std::vector<PronunciationEntry>& dict, const Config& cfg) {
  if (dict.empty()) throw std::runtime_error("cannot train G2P on empty dictionary");

  struct Prepared {
    std::u32string graphemes;
    PhoneSequence phones;
  };
  std::vector<Prepared> data;
  data.reserve(dict.size());
  for (const auto& e : dict) data.push_back({utf8::decode(e.word), e.phones});

  // Collect candidate graphones from segmentation-reachable transitions, with
  // deterministic (ordered) iteration throughout.
  std::map<std::pair<std::string, std::string>, double> q;  // (g, joined p) -> prob
  const auto phone_key = [](const PhoneSequence& p, std::size_t j, int dj) {
    std::string key;
    for (int k = 0; k < dj; ++k) {
      if (k) key += '\x1e';
      key += p[j + k];
    }
    return key;
  };

  const auto reachability = [&](const Prepared& d, std::vector<std::vector<char>>& fwd,
                                std::vector<std::vector<char>>& bwd) {
    const int n = static_cast<int>(d.graphemes.size());
    const int m = static_cast<int>(d.phones.size());
    fwd.assign(n + 1, std::vector<char>(m + 1, 0));
    bwd.assign(n + 1, std::vector<char>(m + 1, 0));
    fwd[0][0] = 1;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= m; ++j) {
        if (!fwd[i][j]) continue;
        for (const auto& t : kTransitions)
          if (i + t.di <= n && j + t.dj <= m) fwd[i + t.di][j + t.dj] = 1;
      }
    bwd[n][m] = 1;
    for (int i = n; i >= 0; --i)
      for (int j = m; j >= 0; --j) {
        if (bwd[i][j]) continue;
        for (const auto& t : kTransitions)
          if (i + t.di <= n && j + t.dj <= m && bwd[i + t.di][j + t.dj]) {
            bwd[i][j] = 1;
            break;
          }
      }
  };

  std::size_t usable = 0;
  for (const auto& d : data) {
    std::vector<std::vector<char>> fwd, bwd;
    reachability(d, fwd, bwd);
    if (!fwd[d.graphemes.size()][d.phones.size()]) continue;
    ++usable;
    const int n = static_cast<int>(d.graphemes.size());
    const int m = static_cast<int>(d.phones.size());
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= m; ++j) {
        if (!fwd[i][j]) continue;
        for (const auto& t : kTransitions) {
          if (i + t.di > n || j + t.dj > m || !bwd[i + t.di][j + t.dj]) continue;
          q[{utf8::encode(d.graphemes.substr(i, t.di)), phone_key(d.phones, j, t.dj)}] = 1.0;
        }
      }
  }
  if (usable == 0) throw std::runtime_error("no pronunciation entry is segmentable");
  for (auto& [k, v] : q) v = 1.0 / static_cast<double>(q.size());

  // EM over the segmentation lattice (joint model, globally normalized).
  for (int iter = 0; iter < cfg.em_iterations; ++iter) {
    std::map<std::pair<std::string, std::string>, double> counts;
    for (const auto& d : data) {
      const int n = static_cast<int>(d.graphemes.size());
      const int m = static_cast<int>(d.phones.size());
      std::vector<std::vector<double>> alpha(n + 1, std::vector<double>(m + 1, 0.0));
      std::vector<std::vector<double>> beta(n + 1, std::vector<double>(m + 1, 0.0));
      alpha[0][0] = 1.0;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) {
          if (alpha[i][j] == 0.0) continue;
          for (const auto& t : kTransitions) {
            if (i + t.di > n || j + t.dj > m) continue;
            auto it = q.find({utf8::encode(d.graphemes.substr(i, t.di)), phone_key(d.phones, j, t.dj)});
            if (it == q.end()) continue;
            alpha[i + t.di][j + t.dj] += alpha[i][j] * it->second;
          }
        }
      const double z = alpha[n][m];
      if (z <= 0.0) continue;
      beta[n][m] = 1.0;
      for (int i = n; i >= 0; --i)
        for (int j = m; j >= 0; --j) {
          for (const auto& t : kTransitions) {
            if (i + t.di > n || j + t.dj > m) continue;
            auto it = q.find({utf8::encode(d.graphemes.substr(i, t.di)), phone_key(d.phones, j, t.dj)});
            if (it == q.end()) continue;
            beta[i][j] += it->second * beta[i + t.di][j + t.dj];
          }
        }
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= m; ++j) {
          if (alpha[i][j] == 0.0) continue;
          for (const auto& t : kTransitions) {
            if (i + t.di > n || j + t.dj > m) continue;
            const auto key = std::make_pair(utf8::encode(d.graphemes.substr(i, t.di)),
                                            phone_key(d.phones, j, t.dj));
            auto it = q.find(key);
            if (it == q.end()) continue;
            const double gamma = alpha[i][j] * it->second * beta[i + t.di][j + t.dj] / z;
            if (gamma > 0.0) counts[key] += gamma;
          }
        }
    }
    double total = 0.0;
    for (const auto& [k, c] : counts) total += c;
    if (total <= 0.0) break;
    for (auto& [k, v] : q) {
      auto it = counts.find(k);
      v = it == counts.end() ? 0.0 : it->second / total;
    }
  }

  // Viterbi-segment the training data under the learned q and fit the
  // graphone trigram model on the resulting sequences.
  G2PModel model;
  model.cfg_ = cfg;
  std::map<std::pair<std::string, std::string>, std::size_t> inventory_ids;
  std::vector<TokenSeq> sequences;
  for (const auto& d : data) {
    const int n = static_cast<int>(d.graphemes.size());
    const int m = static_cast<int>(d.phones.size());
    constexpr double kNegInf = -1e300;
    std::vector<std::vector<double>> best(n + 1, std::vector<double>(m + 1, kNegInf));
    std::vector<std::vector<int>> back(n + 1, std::vector<int>(m + 1, -1));
    best[0][0] = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= m; ++j) {
        if (best[i][j] == kNegInf) continue;
        for (int t = 0; t < 6; ++t) {
          const auto& tr = kTransitions[t];
          if (i + tr.di > n || j + tr.dj > m) continue;
          auto it = q.find({utf8::encode(d.graphemes.substr(i, tr.di)), phone_key(d.phones, j, tr.dj)});
          if (it == q.end() || it->second <= 0.0) continue;
          const double s = best[i][j] + std::log(it->second);
          if (s > best[i + tr.di][j + tr.dj]) {
            best[i + tr.di][j + tr.dj] = s;
            back[i + tr.di][j + tr.dj] = t;
          }
        }
      }
    if (best[n][m] == kNegInf) {
      model.skipped_++;
      continue;
    }
    std::vector<std::pair<std::string, PhoneSequence>> segs;
    int i = n, j = m;
    while (i > 0 || j > 0) {
      const auto& tr = kTransitions[back[i][j]];
      i -= tr.di;
      j -= tr.dj;
      PhoneSequence p(d.phones.begin() + j, d.phones.begin() + j + tr.dj);
      segs.emplace_back(utf8::encode(d.graphemes.substr(i, tr.di)), std::move(p));
    }
    std::reverse(segs.begin(), segs.end());
    TokenSeq tokens;
    for (auto& [g, p] : segs) {
      const auto key = std::make_pair(g, phone_key(p, 0, static_cast<int>(p.size())));
      if (!inventory_ids.count(key)) {
        inventory_ids[key] = model.inventory_.size();
        model.inventory_.push_back({g, p});
      }
      tokens.push_back(graphone_token(g, p));
    }
    sequences.push_back(std::move(tokens));
  }
  if (sequences.empty()) throw std::runtime_error("no pronunciation entry survived segmentation");
  model.lm_ = TrigramModel::train(sequences);
  model.build_grapheme_index();
  return model;
}

void G2PModel::build_grapheme_index() {
  by_graphemes_.clear();
  for (std::size_t k = 0; k < inventory_.size(); ++k)
    by_graphemes_[inventory_[k].graphemes].push_back(k);
}

PhoneSequence G2PModel::transcribe(const std::string& word) const {
  if (word.empty()) throw std::runtime_error("cannot transcribe empty word");
  const std::u32string cps = utf8::decode(word);
  const int n = static_cast<int>(cps.size());

  struct State {
    double score = 0.0;
    std::array<std::string, 2> ctx;
    int ctx_len = 0;
    PhoneSequence phones;
  };
  std::vector<std::vector<State>> beams(n + 1);
  State init;
  init.ctx[0] = TrigramModel::kBos;
  init.ctx_len = 1;
  beams[0].push_back(std::move(init));

  int furthest = 0;
  for (int pos = 0; pos < n; ++pos) {
    auto& beam = beams[pos];
    if (beam.empty()) continue;
    furthest = std::max(furthest, pos);
    std::sort(beam.begin(), beam.end(), [](const State& a, const State& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.phones < b.phones;
    });
    if (static_cast<int>(beam.size()) > cfg_.beam) beam.resize(cfg_.beam);
    for (const auto& st : beam) {
      for (int len = 1; len <= 2 && pos + len <= n; ++len) {
        auto it = by_graphemes_.find(utf8::encode(cps.substr(pos, len)));
        if (it == by_graphemes_.end()) continue;
        for (std::size_t k : it->second) {
          const Graphone& g = inventory_[k];
          State next = st;
          const std::string token = graphone_token(g.graphemes, g.phones);
          next.score += lm_.log_prob(std::span<const std::string>(st.ctx.data(), st.ctx_len), token);
          if (next.ctx_len < 2) {
            next.ctx[next.ctx_len++] = token;
          } else {
            next.ctx[0] = next.ctx[1];
            next.ctx[1] = token;
          }
          next.phones.insert(next.phones.end(), g.phones.begin(), g.phones.end());
          beams[pos + len].push_back(std::move(next));
        }
      }
    }
  }

  if (beams[n].empty())
    throw std::runtime_error("cannot transcribe '" + word + "': no graphone covers '" +
                             utf8::encode(cps[std::min(furthest, n - 1)]) + "'");
  const State* best = nullptr;
  double best_score = 0.0;
  for (const auto& st : beams[n]) {
    const double s = st.score + lm_.log_prob(std::span<const std::string>(st.ctx.data(), st.ctx_len),
                                             TrigramModel::kEos);
    if (best == nullptr || s > best_score || (s == best_score && st.phones < best->phones)) {
      best = &st;
      best_score = s;
    }
  }
  return best->phones;
}

void G2PModel::save(const std::string& path) const {
  nlohmann::json j;
  j["format"] = "g2p-graphone-trigram";
  j["version"] = 1;
  j["beam"] = cfg_.beam;
  j["em_iterations"] = cfg_.em_iterations;
  nlohmann::json inv = nlohmann::json::array();
  for (const auto& g : inventory_) inv.push_back({{"g", g.graphemes}, {"p", g.phones}});
  j["graphones"] = std::move(inv);
  std::ostringstream arpa;
  lm_.save_arpa(arpa);
  j["arpa"] = arpa.str();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(1) << '\n';
}

G2PModel G2PModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "g2p-graphone-trigram")
    throw std::runtime_error("not a G2P model file: " + path);
  G2PModel model;
  model.cfg_.beam = j.value("beam", 8);
  model.cfg_.em_iterations = j.value("em_iterations", 25);
  for (const auto& g : j.at("graphones"))
    model.inventory_.push_back({g.at("g").get<std::string>(), g.at("p").get<PhoneSequence>()});
  std::istringstream arpa(j.at("arpa").get<std::string>());
  model.lm_ = TrigramModel::load_arpa(arpa);
  model.build_grapheme_index();
  return model;
}

std::string PhoneticIndex::key(const PhoneSequence& phones) {
  std::string out;
  for (std::size_t i = 0; i < phones.size(); ++i) {
    if (i) out += ' ';
    out += phones[i];
  }
  return out;
}

PhoneticIndex build_phonetic_index(const Vocabulary& vocab, const G2PModel& model) {
  PhoneticIndex index;
  std::vector<std::string> words;
  words.reserve(vocab.counts.size());
  for (const auto& [w, c] : vocab.counts) words.push_back(w);
  std::sort(words.begin(), words.end());
  for (const auto& w : words) {
    try {
      const PhoneSequence phones = model.transcribe(w);
      index.entries[PhoneticIndex::key(phones)].emplace_back(w, vocab.count(w));
    } catch (const std::exception&) {
      index.skipped++;
    }
  }
  return index;
}

std::optional<std::string> phonetic_candidate(const std::string& word,
                                              const PhoneticIndex& gsw_index,
                                              const PhoneticIndex& de_index,
                                              const G2PModel& model) {
  PhoneSequence phones;
  try {
    phones = model.transcribe(word);
  } catch (const std::exception&) {
    return std::nullopt;
  }
  const std::string key = PhoneticIndex::key(phones);
  for (const PhoneticIndex* index : {&gsw_index, &de_index}) {
    auto it = index->entries.find(key);
    if (it == index->entries.end()) continue;
    const std::string* best = nullptr;
    std::uint64_t best_freq = 0;
    for (const auto& [w, freq] : it->second) {
      if (best == nullptr || freq > best_freq || (freq == best_freq && w < *best)) {
        best = &w;
        best_freq = freq;
      }
    }
    if (best) return *best;
  }
  return std::nullopt;
}

}  // namespace gswmt
