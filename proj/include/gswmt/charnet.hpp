#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gswmt {

enum class CharModelArch { Gru, Qrnn };

namespace detail {

// Encoder-decoder network over symbol ids, templated on scalar so training
// runs in float while finite-difference checks run in double. Two cell types:
// a gated recurrent cell (default) and a quasi-recurrent cell with width-2
// convolutional gates and fo-pooling.
//
// Column conventions: embedding E x V, batch as columns (H x B states).
template <typename Scalar>
class CharNet {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  static constexpr int kPad = 0;
  static constexpr int kGo = 1;
  static constexpr int kEos = 2;

  CharNet() = default;
  CharNet(CharModelArch arch, int vocab, int embed, int hidden)
      : arch_(arch), V_(vocab), E_(embed), H_(hidden) {
    allocate();
  }

  CharModelArch arch() const { return arch_; }
  int vocab_size() const { return V_; }
  int embed_dim() const { return E_; }
  int hidden_dim() const { return H_; }

  struct Named {
    std::string name;
    Mat* value;
  };
  std::vector<Named> tensors() {
    std::vector<Named> out;
    out.push_back({"embed", &embed_});
    const auto add_cell = [&](const char* prefix, Cell& c) {
      for (std::size_t i = 0; i < c.names.size(); ++i)
        out.push_back({std::string(prefix) + c.names[i], c.mats[i]});
    };
    add_cell("enc.", enc_);
    add_cell("dec.", dec_);
    out.push_back({"out.W", &Wo_});
    out.push_back({"out.b", &bo_});
    return out;
  }

  void init(std::uint64_t seed, Scalar range = Scalar(0.08)) {
    std::mt19937_64 gen(seed);
    for (auto& t : tensors())
      for (Eigen::Index i = 0; i < t.value->size(); ++i)
        t.value->data()[i] = (unit(gen) * Scalar(2) - Scalar(1)) * range;
  }

  void set_zero() {
    for (auto& t : tensors()) t.value->setZero();
  }

  // One teacher-forced batch: src/dec_in/dec_out are [time][batch] id grids,
  // pad = 0. Returns summed cross-entropy over non-pad targets and the count
  // of such targets; gradients (d loss-sum / d param) accumulate into `grads`.
  Scalar forward_backward(const std::vector<std::vector<int>>& src,
                          const std::vector<std::vector<int>>& dec_in,
                          const std::vector<std::vector<int>>& dec_out, CharNet* grads,
                          std::size_t* predicted) const {
    const int B = src.empty() ? (dec_in.empty() ? 0 : (int)dec_in[0].size()) : (int)src[0].size();
    const int Ts = (int)src.size();
    const int Td = (int)dec_in.size();

    const Mat zx = Mat::Zero(E_, B);

    // ---- encoder forward ----
    std::vector<Mat> eh(Ts + 1), ez(Ts), er(Ts), eg(Ts), ex(Ts), ec(Ts + 1), ef(Ts);
    eh[0] = Mat::Zero(H_, B);
    ec[0] = Mat::Zero(H_, B);
    std::vector<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> emask(Ts);
    for (int t = 0; t < Ts; ++t) {
      ex[t] = gather(src[t]);
      emask[t].resize(B);
      for (int b = 0; b < B; ++b) emask[t](b) = src[t][b] == kPad ? Scalar(0) : Scalar(1);
      if (arch_ == CharModelArch::Gru) {
        gru_step(enc_, ex[t], eh[t], ez[t], er[t], eg[t]);
        Mat cand = ((Scalar(1) - ez[t].array()) * eh[t].array() + ez[t].array() * eg[t].array());
        eh[t + 1] = eh[t] + (cand - eh[t]) * emask[t].asDiagonal();
      } else {
        const Mat& xprev = t == 0 ? zx : ex[t - 1];
        qrnn_gates(enc_, ex[t], xprev, ez[t], ef[t], nullptr);
        Mat cand = (ef[t].array() * ec[t].array() +
                    (Scalar(1) - ef[t].array()) * ez[t].array()).matrix();
        ec[t + 1] = ec[t] + (cand - ec[t]) * emask[t].asDiagonal();
      }
    }
    const Mat& summary = arch_ == CharModelArch::Gru ? eh[Ts] : ec[Ts];

    // ---- decoder forward ----
    std::vector<Mat> dh(Td + 1), dz(Td), dr(Td), dg(Td), dx(Td), dc(Td + 1), df(Td), doo(Td);
    std::vector<Mat> probs(Td);
    dh[0] = summary;
    dc[0] = summary;
    Scalar loss = Scalar(0);
    std::size_t count = 0;
    for (int t = 0; t < Td; ++t) {
      dx[t] = gather(dec_in[t]);
      Mat h_t;
      if (arch_ == CharModelArch::Gru) {
        gru_step(dec_, dx[t], dh[t], dz[t], dr[t], dg[t]);
        dh[t + 1] = ((Scalar(1) - dz[t].array()) * dh[t].array() + dz[t].array() * dg[t].array());
        h_t = dh[t + 1];
      } else {
        const Mat& xprev = t == 0 ? zx : dx[t - 1];
        qrnn_gates(dec_, dx[t], xprev, dz[t], df[t], &doo[t]);
        dc[t + 1] = (df[t].array() * dc[t].array() +
                     (Scalar(1) - df[t].array()) * dz[t].array()).matrix();
        h_t = (doo[t].array() * dc[t + 1].array()).matrix();
        dh[t + 1] = h_t;
      }
      Mat logits = (Wo_ * h_t).colwise() + bo_.col(0);
      probs[t] = softmax(logits);
      for (int b = 0; b < B; ++b) {
        const int y = dec_out[t][b];
        if (y == kPad) continue;
        loss -= std::log(std::max(probs[t](y, b), Scalar(1e-30)));
        ++count;
      }
    }
    if (predicted) *predicted = count;
    if (!grads) return loss;

    // ---- decoder backward ----
    Mat dstate = Mat::Zero(H_, B);  // d loss / d h (GRU) or / d c (QRNN)
    Mat d_summary = Mat::Zero(H_, B);
    std::vector<Mat> ddx(Td, Mat::Zero(E_, B));
    for (int t = Td - 1; t >= 0; --t) {
      Mat dlogits = probs[t];
      for (int b = 0; b < B; ++b) {
        const int y = dec_out[t][b];
        if (y == kPad)
          dlogits.col(b).setZero();
        else
          dlogits(y, b) -= Scalar(1);
      }
      const Mat& h_t = dh[t + 1];
      grads->Wo_.noalias() += dlogits * h_t.transpose();
      grads->bo_.col(0).noalias() += dlogits.rowwise().sum();
      Mat dht = Wo_.transpose() * dlogits;
      if (arch_ == CharModelArch::Gru) {
        dht += dstate;
        Mat dprev;
        gru_backward(dec_, grads->dec_, dx[t], dh[t], dz[t], dr[t], dg[t], dht, ddx[t], dprev);
        dstate = std::move(dprev);
      } else {
        Mat dct = dstate;
        Mat ddo = (dc[t + 1].array() * dht.array()).matrix();
        dct += (doo[t].array() * dht.array()).matrix();
        Mat dprev_c, ddxprev;
        qrnn_backward(dec_, grads->dec_, dx[t], t == 0 ? zx : dx[t - 1], dc[t], dz[t], df[t],
                      &doo[t], &ddo, dct, ddx[t], t == 0 ? d_summary : ddx[t - 1], dprev_c,
                      t == 0);
        dstate = std::move(dprev_c);
      }
    }
    if (arch_ == CharModelArch::Gru)
      d_summary = dstate;
    else
      d_summary += dstate;  // d c'_0; QRNN x_{-1} grads were routed above
    for (int t = 0; t < Td; ++t) scatter(dec_in[t], ddx[t], grads->embed_);

    // ---- encoder backward ----
    std::vector<Mat> dex(Ts, Mat::Zero(E_, B));
    Mat denc = d_summary;
    if (arch_ == CharModelArch::Gru) {
      for (int t = Ts - 1; t >= 0; --t) {
        Mat dht = denc * emask[t].asDiagonal();   // gradient into the candidate
        Mat dcarry = denc - dht;                  // gradient carried past pads
        Mat dprev;
        gru_backward(enc_, grads->enc_, ex[t], eh[t], ez[t], er[t], eg[t], dht, dex[t], dprev);
        denc = dcarry + dprev;
      }
    } else {
      Mat dummy = Mat::Zero(E_, B);
      for (int t = Ts - 1; t >= 0; --t) {
        Mat dcand = denc * emask[t].asDiagonal();
        Mat dcarry = denc - dcand;
        Mat dprev_c;
        qrnn_backward(enc_, grads->enc_, ex[t], t == 0 ? zx : ex[t - 1], ec[t], ez[t], ef[t],
                      nullptr, nullptr, dcand, dex[t], t == 0 ? dummy : dex[t - 1], dprev_c,
                      t == 0);
        denc = dcarry + dprev_c;
      }
    }
    for (int t = 0; t < Ts; ++t) scatter(src[t], dex[t], grads->embed_);
    return loss;
  }

  // Greedy decode; per lane stops at <eos> or after max_steps outputs.
  std::vector<std::vector<int>> decode(const std::vector<std::vector<int>>& src,
                                       int max_steps) const {
    const int B = src.empty() ? 0 : (int)src[0].size();
    const int Ts = (int)src.size();
    Mat h = Mat::Zero(H_, B), c = Mat::Zero(H_, B);
    Mat xprev = Mat::Zero(E_, B);
    for (int t = 0; t < Ts; ++t) {
      Mat x = gather(src[t]);
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic> mask(B);
      for (int b = 0; b < B; ++b) mask(b) = src[t][b] == kPad ? Scalar(0) : Scalar(1);
      if (arch_ == CharModelArch::Gru) {
        Mat z, r, g;
        gru_step(enc_, x, h, z, r, g);
        Mat cand = ((Scalar(1) - z.array()) * h.array() + z.array() * g.array());
        h = h + (cand - h) * mask.asDiagonal();
      } else {
        Mat z, f;
        qrnn_gates(enc_, x, xprev, z, f, nullptr);
        Mat cand = (f.array() * c.array() + (Scalar(1) - f.array()) * z.array()).matrix();
        c = c + (cand - c) * mask.asDiagonal();
        xprev = x;
      }
    }
    if (arch_ == CharModelArch::Qrnn) h = c;  // c is the carried state

    std::vector<std::vector<int>> out(B);
    std::vector<int> prev(B, kGo);
    std::vector<bool> done(B, false);
    xprev = Mat::Zero(E_, B);
    for (int step = 0; step < max_steps; ++step) {
      Mat x = gather(prev);
      Mat h_t;
      if (arch_ == CharModelArch::Gru) {
        Mat z, r, g;
        gru_step(dec_, x, h, z, r, g);
        h = ((Scalar(1) - z.array()) * h.array() + z.array() * g.array());
        h_t = h;
      } else {
        Mat z, f, o;
        qrnn_gates(dec_, x, xprev, z, f, &o);
        h = (f.array() * h.array() + (Scalar(1) - f.array()) * z.array()).matrix();
        h_t = (o.array() * h.array()).matrix();
        xprev = x;
      }
      Mat logits = (Wo_ * h_t).colwise() + bo_.col(0);
      bool all_done = true;
      for (int b = 0; b < B; ++b) {
        if (done[b]) continue;
        Eigen::Index best;
        logits.col(b).maxCoeff(&best);
        const int sym = static_cast<int>(best);
        prev[b] = sym;
        if (sym == kEos) {
          done[b] = true;
        } else {
          out[b].push_back(sym);
          all_done = false;
        }
      }
      if (all_done) break;
    }
    return out;
  }

 private:
  struct Cell {
    std::vector<std::string> names;
    std::vector<Mat*> mats;
    // GRU: Wz Wr Wh (HxE), Uz Ur Uh (HxH), bz br bh (Hx1)
    // QRNN: Wz0 Wz1 Wf0 Wf1 [Wo0 Wo1] (HxE), bz bf [bo] (Hx1)
    Mat Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh;
    Mat Wz0, Wz1, Wf0, Wf1, Wo0, Wo1, bf, bo;
  };

  void allocate() {
    const auto setup = [&](Cell& c, bool output_gate) {
      c.names.clear();
      c.mats.clear();
      if (arch_ == CharModelArch::Gru) {
        c.Wz = Mat::Zero(H_, E_); c.Wr = Mat::Zero(H_, E_); c.Wh = Mat::Zero(H_, E_);
        c.Uz = Mat::Zero(H_, H_); c.Ur = Mat::Zero(H_, H_); c.Uh = Mat::Zero(H_, H_);
        c.bz = Mat::Zero(H_, 1); c.br = Mat::Zero(H_, 1); c.bh = Mat::Zero(H_, 1);
        c.names = {"Wz", "Wr", "Wh", "Uz", "Ur", "Uh", "bz", "br", "bh"};
        c.mats = {&c.Wz, &c.Wr, &c.Wh, &c.Uz, &c.Ur, &c.Uh, &c.bz, &c.br, &c.bh};
      } else {
        c.Wz0 = Mat::Zero(H_, E_); c.Wz1 = Mat::Zero(H_, E_);
        c.Wf0 = Mat::Zero(H_, E_); c.Wf1 = Mat::Zero(H_, E_);
        c.bz = Mat::Zero(H_, 1); c.bf = Mat::Zero(H_, 1);
        c.names = {"Wz0", "Wz1", "Wf0", "Wf1", "bz", "bf"};
        c.mats = {&c.Wz0, &c.Wz1, &c.Wf0, &c.Wf1, &c.bz, &c.bf};
        if (output_gate) {
          c.Wo0 = Mat::Zero(H_, E_); c.Wo1 = Mat::Zero(H_, E_); c.bo = Mat::Zero(H_, 1);
          c.names.insert(c.names.end(), {"Wo0", "Wo1", "bo"});
          c.mats.insert(c.mats.end(), {&c.Wo0, &c.Wo1, &c.bo});
        }
      }
    };
    setup(enc_, false);
    setup(dec_, true);
    embed_ = Mat::Zero(E_, V_);
    Wo_ = Mat::Zero(V_, H_);
    bo_ = Mat::Zero(V_, 1);
  }

  static Scalar unit(std::mt19937_64& gen) {
    return Scalar(static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0));
  }

  Mat gather(const std::vector<int>& ids) const {
    Mat x(E_, ids.size());
    for (std::size_t b = 0; b < ids.size(); ++b) x.col(b) = embed_.col(ids[b]);
    return x;
  }
  void scatter(const std::vector<int>& ids, const Mat& dx, Mat& dembed) const {
    for (std::size_t b = 0; b < ids.size(); ++b) dembed.col(ids[b]) += dx.col(b);
  }

  static Mat sigmoid(const Mat& a) {
    return (Scalar(1) / (Scalar(1) + (-a.array()).exp())).matrix();
  }
  static Mat softmax(Mat logits) {
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
      auto col = logits.col(b).array();
      col -= col.maxCoeff();
      col = col.exp();
      col /= col.sum();
    }
    return logits;
  }

  void gru_step(const Cell& c, const Mat& x, const Mat& h, Mat& z, Mat& r, Mat& g) const {
    z = sigmoid(((c.Wz * x + c.Uz * h).colwise() + c.bz.col(0)));
    r = sigmoid(((c.Wr * x + c.Ur * h).colwise() + c.br.col(0)));
    Mat hr = (r.array() * h.array()).matrix();
    g = ((c.Wh * x + c.Uh * hr).colwise() + c.bh.col(0)).array().tanh().matrix();
  }

  // dh: gradient w.r.t. the candidate state produced at this step; dx_out and
  // dh_prev receive the input/previous-state gradients.
  void gru_backward(const Cell& c, Cell& gc, const Mat& x, const Mat& h_prev, const Mat& z,
                    const Mat& r, const Mat& g, const Mat& dh, Mat& dx_out, Mat& dh_prev) const {
    Mat dz = ((g.array() - h_prev.array()) * dh.array()).matrix();
    Mat dg = (z.array() * dh.array()).matrix();
    dh_prev = ((Scalar(1) - z.array()) * dh.array()).matrix();

    Mat dag = ((Scalar(1) - g.array().square()) * dg.array()).matrix();
    Mat hr = (r.array() * h_prev.array()).matrix();
    gc.Wh.noalias() += dag * x.transpose();
    gc.Uh.noalias() += dag * hr.transpose();
    gc.bh.col(0).noalias() += dag.rowwise().sum();
    dx_out.noalias() += c.Wh.transpose() * dag;
    Mat dhr = c.Uh.transpose() * dag;
    Mat dr = (h_prev.array() * dhr.array()).matrix();
    dh_prev += (r.array() * dhr.array()).matrix();

    Mat daz = (z.array() * (Scalar(1) - z.array()) * dz.array()).matrix();
    gc.Wz.noalias() += daz * x.transpose();
    gc.Uz.noalias() += daz * h_prev.transpose();
    gc.bz.col(0).noalias() += daz.rowwise().sum();
    dx_out.noalias() += c.Wz.transpose() * daz;
    dh_prev.noalias() += c.Uz.transpose() * daz;

    Mat dar = (r.array() * (Scalar(1) - r.array()) * dr.array()).matrix();
    gc.Wr.noalias() += dar * x.transpose();
    gc.Ur.noalias() += dar * h_prev.transpose();
    gc.br.col(0).noalias() += dar.rowwise().sum();
    dx_out.noalias() += c.Wr.transpose() * dar;
    dh_prev.noalias() += c.Ur.transpose() * dar;
  }

  void qrnn_gates(const Cell& c, const Mat& x, const Mat& xprev, Mat& z, Mat& f, Mat* o) const {
    z = ((c.Wz0 * x + c.Wz1 * xprev).colwise() + c.bz.col(0)).array().tanh().matrix();
    f = sigmoid((c.Wf0 * x + c.Wf1 * xprev).colwise() + c.bf.col(0));
    if (o) *o = sigmoid((c.Wo0 * x + c.Wo1 * xprev).colwise() + c.bo.col(0));
  }

  // dcand: gradient w.r.t. the pooled candidate c̃_t (after any external o/h
  // handling); do_in: gradient w.r.t. the output gate when present.
  void qrnn_backward(const Cell& c, Cell& gc, const Mat& x, const Mat& xprev, const Mat& c_prev,
                     const Mat& z, const Mat& f, const Mat* o, const Mat* do_in, const Mat& dcand,
                     Mat& dx_out, Mat& dxprev_out, Mat& dc_prev, bool prev_is_zero) const {
    Mat df = ((c_prev.array() - z.array()) * dcand.array()).matrix();
    Mat dz = ((Scalar(1) - f.array()) * dcand.array()).matrix();
    dc_prev = (f.array() * dcand.array()).matrix();

    Mat daz = ((Scalar(1) - z.array().square()) * dz.array()).matrix();
    gc.Wz0.noalias() += daz * x.transpose();
    gc.bz.col(0).noalias() += daz.rowwise().sum();
    dx_out.noalias() += c.Wz0.transpose() * daz;
    if (!prev_is_zero) {
      gc.Wz1.noalias() += daz * xprev.transpose();
      dxprev_out.noalias() += c.Wz1.transpose() * daz;
    }

    Mat daf = (f.array() * (Scalar(1) - f.array()) * df.array()).matrix();
    gc.Wf0.noalias() += daf * x.transpose();
    gc.bf.col(0).noalias() += daf.rowwise().sum();
    dx_out.noalias() += c.Wf0.transpose() * daf;
    if (!prev_is_zero) {
      gc.Wf1.noalias() += daf * xprev.transpose();
      dxprev_out.noalias() += c.Wf1.transpose() * daf;
    }

    if (o && do_in) {
      Mat dao = (o->array() * (Scalar(1) - o->array()) * do_in->array()).matrix();
      gc.Wo0.noalias() += dao * x.transpose();
      gc.bo.col(0).noalias() += dao.rowwise().sum();
      dx_out.noalias() += c.Wo0.transpose() * dao;
      if (!prev_is_zero) {
        gc.Wo1.noalias() += dao * xprev.transpose();
        dxprev_out.noalias() += c.Wo1.transpose() * dao;
      }
    }
  }

  CharModelArch arch_ = CharModelArch::Gru;
  int V_ = 0, E_ = 0, H_ = 0;
  Mat embed_, Wo_, bo_;
  Cell enc_, dec_;
};

}  // namespace detail
}  // namespace gswmt
