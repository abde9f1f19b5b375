#include "gswmt/charseq2seq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "gswmt/utf8.hpp"

namespace gswmt {

namespace {

constexpr char kMagic[4] = {'G', 'S', 'W', 'C'};
constexpr std::uint32_t kVersion = 1;
constexpr const char* kStartSymbol = ":";


struct Batch {
  std::vector<std::vector<int>> src, dec_in, dec_out;  // [time][lane]
};

// Source lane: ':' + word. Decoder: in = <go> ':' word, out = ':' word <eos>.
// Empty padding lanes stay all-pad and contribute no loss.
Batch make_batch(const std::vector<std::vector<int>>& src_ids,
                 const std::vector<std::vector<int>>& tgt_ids, std::size_t begin, std::size_t count,
                 std::size_t width) {
  Batch b;
  std::size_t src_len = 1, dec_len = 2;
  for (std::size_t k = 0; k < count; ++k) {
    src_len = std::max(src_len, src_ids[begin + k].size());
    dec_len = std::max(dec_len, tgt_ids[begin + k].size() + 1);  // +1 for <go>/<eos>
  }
  b.src.assign(src_len, std::vector<int>(width, 0));
  b.dec_in.assign(dec_len, std::vector<int>(width, 0));
  b.dec_out.assign(dec_len, std::vector<int>(width, 0));
  for (std::size_t k = 0; k < count; ++k) {
    const auto& s = src_ids[begin + k];
    for (std::size_t t = 0; t < s.size(); ++t) b.src[t][k] = s[t];
    const auto& y = tgt_ids[begin + k];
    b.dec_in[0][k] = detail::CharNet<float>::kGo;
    for (std::size_t t = 0; t < y.size(); ++t) {
      b.dec_in[t + 1][k] = y[t];
      b.dec_out[t][k] = y[t];
    }
    b.dec_out[y.size()][k] = detail::CharNet<float>::kEos;
  }
  return b;
}

}  // namespace

std::vector<WordPair> load_word_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<WordPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("word pair line " + std::to_string(lineno) +
                               " lacks a tab separator");
    pairs.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return pairs;
}

CharSeq2SeqModel CharSeq2SeqModel::train(const std::vector<WordPair>& pairs,
                                         const CharModelHyperparams& hp,
                                         CharModelTrainReport* report) {
  if (pairs.empty()) throw std::runtime_error("cannot train char model on empty training set");

  std::vector<WordPair> data;
  {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : pairs)
      if (seen.emplace(p.source, p.target).second) data.push_back(p);
  }
  for (const auto& p : data) {
    if (utf8::length(p.source) > kMaxWordLen || utf8::length(p.target) > kMaxWordLen)
      throw std::runtime_error("char model word over " + std::to_string(kMaxWordLen) +
                               " characters: " + p.source + " / " + p.target);
    if (p.source.empty() || p.target.empty())
      throw std::runtime_error("char model pair with empty word");
  }

  CharSeq2SeqModel model;
  model.hp_ = hp;

  // Character vocabulary: reserved ids, then sorted code points from the data
  // (':' is always present since it prefixes every word).
  std::set<std::string> charset;
  charset.insert(kStartSymbol);
  for (const auto& p : data) {
    for (char32_t cp : utf8::decode(p.source)) charset.insert(utf8::encode(cp));
    for (char32_t cp : utf8::decode(p.target)) charset.insert(utf8::encode(cp));
  }
  model.symbols_ = {"<pad>", "<go>", "<eos>"};
  for (const auto& c : charset) model.symbols_.push_back(c);
  for (std::size_t i = 0; i < model.symbols_.size(); ++i)
    model.symbol_ids_[model.symbols_[i]] = static_cast<int>(i);

  const auto to_ids = [&](const std::string& word, bool with_start) {
    std::vector<int> ids;
    if (with_start) ids.push_back(model.symbol_ids_.at(kStartSymbol));
    for (char32_t cp : utf8::decode(word)) ids.push_back(model.symbol_ids_.at(utf8::encode(cp)));
    return ids;
  };
  std::vector<std::vector<int>> src_ids(data.size()), tgt_ids(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    src_ids[k] = to_ids(data[k].source, true);
    tgt_ids[k] = to_ids(data[k].target, true);
  }

  model.net_ = Net(hp.arch, static_cast<int>(model.symbols_.size()), hp.embedding, hp.hidden);
  model.net_.init(hp.seed);

  Net grads(hp.arch, static_cast<int>(model.symbols_.size()), hp.embedding, hp.hidden);
  Net adam_m(hp.arch, static_cast<int>(model.symbols_.size()), hp.embedding, hp.hidden);
  Net adam_v(hp.arch, static_cast<int>(model.symbols_.size()), hp.embedding, hp.hidden);
  auto params = model.net_.tensors();
  auto gt = grads.tensors();
  auto mt = adam_m.tensors();
  auto vt = adam_v.tensors();

  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t adam_t = 0;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < hp.epochs; ++epoch) {
    std::mt19937_64 gen(hp.seed + 1000003ull * static_cast<std::uint64_t>(epoch + 1));
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[gen() % i]);

    std::vector<std::vector<int>> sh_src(data.size()), sh_tgt(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      sh_src[i] = src_ids[order[i]];
      sh_tgt[i] = tgt_ids[order[i]];
    }

    double epoch_loss = 0.0;
    std::size_t epoch_chars = 0;
    const std::size_t width = static_cast<std::size_t>(hp.batch_size);
    for (std::size_t begin = 0; begin < data.size(); begin += width) {
      const std::size_t count = std::min(width, data.size() - begin);
      Batch batch = make_batch(sh_src, sh_tgt, begin, count, width);
      grads.set_zero();
      std::size_t predicted = 0;
      const float loss =
          model.net_.forward_backward(batch.src, batch.dec_in, batch.dec_out, &grads, &predicted);
      if (predicted == 0) continue;
      epoch_loss += loss;
      epoch_chars += predicted;

      // Mean-per-char loss: scale the summed gradients, then clip globally.
      const float inv = 1.0f / static_cast<float>(predicted);
      double sqnorm = 0.0;
      for (auto& g : gt) {
        *g.value *= inv;
        sqnorm += static_cast<double>(g.value->squaredNorm());
      }
      const double norm = std::sqrt(sqnorm);
      if (hp.grad_clip > 0 && norm > hp.grad_clip) {
        const float scale = static_cast<float>(hp.grad_clip / norm);
        for (auto& g : gt) *g.value *= scale;
      }

      ++adam_t;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(adam_t));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(adam_t));
      for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = *params[i].value;
        auto& g = *gt[i].value;
        auto& m = *mt[i].value;
        auto& v = *vt[i].value;
        m = static_cast<float>(beta1) * m + static_cast<float>(1.0 - beta1) * g;
        v = (static_cast<float>(beta2) * v.array() +
             static_cast<float>(1.0 - beta2) * g.array().square()).matrix();
        p.array() -= static_cast<float>(hp.learning_rate) *
                     (m.array() / static_cast<float>(bc1)) /
                     ((v.array() / static_cast<float>(bc2)).sqrt() + static_cast<float>(eps));
      }
    }
    const double mean_loss = epoch_chars ? epoch_loss / static_cast<double>(epoch_chars) : 0.0;
    if (report) report->epoch_losses.push_back(mean_loss);
    if (hp.verbose)
      std::cerr << "epoch " << (epoch + 1) << "/" << hp.epochs << " loss " << mean_loss << "\n";
  }
  return model;
}

std::vector<int> CharSeq2SeqModel::encode_source(const std::string& word) const {
  std::vector<int> ids;
  ids.push_back(symbol_ids_.at(kStartSymbol));
  for (char32_t cp : utf8::decode(word)) {
    auto it = symbol_ids_.find(utf8::encode(cp));
    // Characters outside the training alphabet map to pad: the encoder masks
    // pad steps, so the state simply carries past them.
    ids.push_back(it == symbol_ids_.end() ? Net::kPad : it->second);
  }
  return ids;
}

std::string CharSeq2SeqModel::translate_word(const std::string& word) const {
  return translate_batch({word}).front();
}

std::vector<std::string> CharSeq2SeqModel::translate_batch(
    const std::vector<std::string>& words) const {
  for (const auto& w : words)
    if (utf8::length(w) > kMaxWordLen)
      throw std::runtime_error("char model input over " + std::to_string(kMaxWordLen) +
                               " characters: " + w);
  std::vector<std::string> out;
  out.reserve(words.size());
  const std::size_t width = static_cast<std::size_t>(hp_.batch_size);
  for (std::size_t begin = 0; begin < words.size(); begin += width) {
    const std::size_t count = std::min(width, words.size() - begin);
    std::size_t max_len = 1;
    std::vector<std::vector<int>> lanes(count);
    for (std::size_t k = 0; k < count; ++k) {
      lanes[k] = encode_source(words[begin + k]);
      max_len = std::max(max_len, lanes[k].size());
    }
    // Incomplete batches are padded with empty lanes up to the batch width.
    std::vector<std::vector<int>> src(max_len, std::vector<int>(width, 0));
    for (std::size_t k = 0; k < count; ++k)
      for (std::size_t t = 0; t < lanes[k].size(); ++t) src[t][k] = lanes[k][t];

    // ':' plus up to 40 output characters, then <eos>.
    const auto decoded = net_.decode(src, kMaxWordLen + 2);
    for (std::size_t k = 0; k < count; ++k) {
      std::string word;
      std::size_t chars = 0;
      for (std::size_t t = 0; t < decoded[k].size() && chars < kMaxWordLen; ++t) {
        const int id = decoded[k][t];
        if (id < 3) continue;  // specials never reach the output
        const std::string& sym = symbols_[id];
        if (t == 0 && sym == kStartSymbol) continue;  // strip the start symbol
        word += sym;
        ++chars;
      }
      out.push_back(std::move(word));
    }
  }
  return out;
}

void CharSeq2SeqModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  const auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  out.write(kMagic, 4);
  put32(kVersion);
  put32(hp_.arch == CharModelArch::Gru ? 0 : 1);
  put32(static_cast<std::uint32_t>(hp_.embedding));
  put32(static_cast<std::uint32_t>(hp_.hidden));
  put32(static_cast<std::uint32_t>(hp_.batch_size));
  put32(static_cast<std::uint32_t>(kMaxWordLen));
  put32(static_cast<std::uint32_t>(symbols_.size()));
  for (const auto& s : symbols_) {
    put32(static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  auto tensors = const_cast<Net&>(net_).tensors();
  put32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put32(static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put32(static_cast<std::uint32_t>(t.value->rows()));
    put32(static_cast<std::uint32_t>(t.value->cols()));
    out.write(reinterpret_cast<const char*>(t.value->data()),
              static_cast<std::streamsize>(sizeof(float) * t.value->size()));
  }
}

CharSeq2SeqModel CharSeq2SeqModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a char model checkpoint: " + path);
  const auto get32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw std::runtime_error("truncated char model checkpoint");
    return v;
  };
  const std::uint32_t version = get32();
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

  CharSeq2SeqModel model;
  model.hp_.arch = get32() == 0 ? CharModelArch::Gru : CharModelArch::Qrnn;
  model.hp_.embedding = static_cast<int>(get32());
  model.hp_.hidden = static_cast<int>(get32());
  model.hp_.batch_size = static_cast<int>(get32());
  get32();  // max word length, fixed
  const std::uint32_t vocab = get32();
  for (std::uint32_t i = 0; i < vocab; ++i) {
    const std::uint32_t len = get32();
    std::string s(len, '\0');
    in.read(s.data(), len);
    model.symbol_ids_[s] = static_cast<int>(model.symbols_.size());
    model.symbols_.push_back(std::move(s));
  }
  model.net_ = Net(model.hp_.arch, static_cast<int>(vocab), model.hp_.embedding, model.hp_.hidden);
  auto tensors = model.net_.tensors();
  const std::uint32_t tensor_count = get32();
  if (tensor_count != tensors.size())
    throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::uint32_t i = 0; i < tensor_count; ++i) {
    const std::uint32_t name_len = get32();
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const std::uint32_t rows = get32();
    const std::uint32_t cols = get32();
    if (name != tensors[i].name || rows != tensors[i].value->rows() ||
        cols != tensors[i].value->cols())
      throw std::runtime_error("checkpoint tensor mismatch at " + name);
    in.read(reinterpret_cast<char*>(tensors[i].value->data()),
            static_cast<std::streamsize>(sizeof(float) * rows * cols));
    if (!in) throw std::runtime_error("truncated char model checkpoint");
  }
  return model;
}

}  // namespace gswmt
