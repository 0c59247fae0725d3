#include "pronsim/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace pronsim {

void EncoderConfig::validate() const {
  if (phone_embed_dim == 0 || hidden_dim == 0)
    throw std::invalid_argument("encoder dims must be positive");
  const bool ok = (num_layers == 1 && !bidirectional) ||
                  (num_layers == 2 && !bidirectional) ||
                  (num_layers == 2 && bidirectional);
  if (!ok)
    throw std::invalid_argument(
        "encoder variant must be lstm, 2lstm, or bi2lstm");
}

EncoderConfig encoder_config_from_name(const std::string& name,
                                       std::size_t phone_embed_dim,
                                       std::size_t hidden_dim) {
  EncoderConfig cfg;
  cfg.phone_embed_dim = phone_embed_dim;
  cfg.hidden_dim = hidden_dim;
  if (name == "lstm") {
    cfg.num_layers = 1;
  } else if (name == "2lstm") {
    cfg.num_layers = 2;
  } else if (name == "bi2lstm") {
    cfg.num_layers = 2;
    cfg.bidirectional = true;
  } else {
    throw std::invalid_argument("unknown encoder variant: " + name);
  }
  cfg.validate();
  return cfg;
}

std::string encoder_config_name(const EncoderConfig& cfg) {
  if (cfg.bidirectional) return "bi2lstm";
  return cfg.num_layers == 2 ? "2lstm" : "lstm";
}

Encoder Encoder::init(const EncoderConfig& cfg, std::size_t inventory_size,
                      Rng& rng) {
  cfg.validate();
  if (inventory_size == 0)
    throw std::invalid_argument("inventory must be non-empty");
  Encoder enc;
  enc.cfg = cfg;
  enc.inventory_size = inventory_size;

  const double se = 1.0 / std::sqrt(static_cast<double>(cfg.phone_embed_dim));
  enc.table = Parameter("phone_table",
                        Tensor::mat(inventory_size + 1, cfg.phone_embed_dim));
  for (std::size_t i = 0; i < inventory_size; ++i)
    for (std::size_t j = 0; j < cfg.phone_embed_dim; ++j)
      enc.table.value.at(i, j) = rng.uniform(-se, se);
  // pad row stays zero

  const std::size_t h = cfg.hidden_dim;
  const double sw = 1.0 / std::sqrt(static_cast<double>(h));
  for (int layer = 0; layer < cfg.num_layers; ++layer) {
    const std::size_t in_dim =
        layer == 0 ? cfg.phone_embed_dim : cfg.out_dim();
    for (std::size_t dir = 0; dir < (cfg.bidirectional ? 2u : 1u); ++dir) {
      Cell c;
      c.in_dim = in_dim;
      const std::string tag =
          "lstm" + std::to_string(layer) + (dir ? "_bwd" : "_fwd");
      c.w = Parameter(tag + "_w", Tensor::mat(4 * h, in_dim + h));
      c.b = Parameter(tag + "_b", Tensor::vec(4 * h));
      for (std::size_t i = 0; i < c.w.value.size(); ++i)
        c.w.value[i] = rng.uniform(-sw, sw);
      for (std::size_t i = h; i < 2 * h; ++i) c.b.value[i] = 1.0;
      enc.cells.push_back(std::move(c));
    }
  }
  return enc;
}

std::vector<Parameter*> Encoder::params() {
  std::vector<Parameter*> ps{&table};
  for (auto& c : cells) {
    ps.push_back(&c.w);
    ps.push_back(&c.b);
  }
  return ps;
}

Tensor embed_phones(const Pronunciation& p, const Encoder& enc) {
  if (p.empty()) throw std::invalid_argument("empty pronunciation");
  Tensor out = Tensor::mat(p.size(), enc.cfg.phone_embed_dim);
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t] < 0 || static_cast<std::size_t>(p[t]) > enc.inventory_size)
      throw std::out_of_range("phone id out of range");
    const double* src = enc.table.value.row(p[t]);
    double* dst = out.row(t);
    for (std::size_t j = 0; j < enc.cfg.phone_embed_dim; ++j) dst[j] = src[j];
  }
  return out;
}

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// One direction over one layer.  Recurrence step k reads input row
// order(k); trace rows are indexed by k.
void lstm_forward(const Encoder::Cell& cell, const Tensor& x, bool reversed,
                  std::size_t h, Tensor& hs_out,
                  EncodeTrace::CellTrace* ct) {
  const std::size_t t_len = x.rows();
  const std::size_t in = cell.in_dim;
  std::vector<double> c_prev(h, 0.0), h_prev(h, 0.0), z(4 * h);
  for (std::size_t k = 0; k < t_len; ++k) {
    const std::size_t t = reversed ? t_len - 1 - k : k;
    const double* xt = x.row(t);
    for (std::size_t i = 0; i < 4 * h; ++i) {
      const double* wr = cell.w.value.row(i);
      double s = cell.b.value[i];
      for (std::size_t j = 0; j < in; ++j) s += wr[j] * xt[j];
      for (std::size_t j = 0; j < h; ++j) s += wr[in + j] * h_prev[j];
      z[i] = s;
    }
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = sigmoid(z[j]);
      const double fg = sigmoid(z[h + j]);
      const double gg = std::tanh(z[2 * h + j]);
      const double og = sigmoid(z[3 * h + j]);
      const double c = fg * c_prev[j] + ig * gg;
      const double hv = og * std::tanh(c);
      if (ct) {
        ct->is.at(k, j) = ig;
        ct->fs.at(k, j) = fg;
        ct->gs.at(k, j) = gg;
        ct->os.at(k, j) = og;
        ct->cs.at(k, j) = c;
        ct->hs.at(k, j) = hv;
      }
      c_prev[j] = c;
      h_prev[j] = hv;
      hs_out.at(t, j) = hv;  // hs_out is input-order indexed
    }
  }
}

// dH is dL/d(hs_out) in input order; accumulates cell grads and dX.
void lstm_backward(Encoder::Cell& cell, const Tensor& x, bool reversed,
                   std::size_t h, const EncodeTrace::CellTrace& ct,
                   const Tensor& d_h_inorder, Tensor& dx) {
  const std::size_t t_len = x.rows();
  const std::size_t in = cell.in_dim;
  std::vector<double> dh_carry(h, 0.0), dc_carry(h, 0.0), dz(4 * h);
  for (std::size_t kk = t_len; kk-- > 0;) {
    const std::size_t t = reversed ? t_len - 1 - kk : kk;
    const double* xt = x.row(t);
    const double* hp = kk > 0 ? ct.hs.row(kk - 1) : nullptr;
    const double* cp = kk > 0 ? ct.cs.row(kk - 1) : nullptr;
    for (std::size_t j = 0; j < h; ++j) {
      const double ig = ct.is.at(kk, j), fg = ct.fs.at(kk, j);
      const double gg = ct.gs.at(kk, j), og = ct.os.at(kk, j);
      const double c = ct.cs.at(kk, j);
      const double tc = std::tanh(c);
      const double dh = d_h_inorder.at(t, j) + dh_carry[j];
      const double dc = dc_carry[j] + dh * og * (1.0 - tc * tc);
      const double c_prev = cp ? cp[j] : 0.0;
      dz[j] = dc * gg * ig * (1.0 - ig);
      dz[h + j] = dc * c_prev * fg * (1.0 - fg);
      dz[2 * h + j] = dc * ig * (1.0 - gg * gg);
      dz[3 * h + j] = dh * tc * og * (1.0 - og);
      dc_carry[j] = dc * fg;
      dh_carry[j] = 0.0;
    }
    for (std::size_t i = 0; i < 4 * h; ++i) {
      const double g = dz[i];
      if (g == 0.0) continue;
      cell.b.grad[i] += g;
      double* wg = cell.w.grad.row(i);
      const double* wr = cell.w.value.row(i);
      double* dxt = dx.row(t);
      for (std::size_t j = 0; j < in; ++j) {
        wg[j] += g * xt[j];
        dxt[j] += g * wr[j];
      }
      for (std::size_t j = 0; j < h; ++j) {
        wg[in + j] += g * (hp ? hp[j] : 0.0);
        dh_carry[j] += g * wr[in + j];
      }
    }
  }
}

}  // namespace

EncodedSequence encode(const Pronunciation& p, const Encoder& enc,
                       EncodeTrace* trace) {
  const std::size_t t_len = p.size();
  const std::size_t h = enc.cfg.hidden_dim;
  const std::size_t dirs = enc.dirs();

  Tensor x = embed_phones(p, enc);
  if (trace) {
    trace->ids = p;
    trace->embedded = x;
    trace->layer_in.clear();
    trace->cell_traces.assign(enc.cells.size(), {});
  }

  for (int layer = 0; layer < enc.cfg.num_layers; ++layer) {
    if (trace) trace->layer_in.push_back(x);
    Tensor out = Tensor::mat(t_len, dirs * h);
    for (std::size_t dir = 0; dir < dirs; ++dir) {
      const auto& cell = enc.cell(layer, dir);
      EncodeTrace::CellTrace* ct = nullptr;
      if (trace) {
        ct = &trace->cell_traces[layer * dirs + dir];
        ct->is = Tensor::mat(t_len, h);
        ct->fs = Tensor::mat(t_len, h);
        ct->gs = Tensor::mat(t_len, h);
        ct->os = Tensor::mat(t_len, h);
        ct->cs = Tensor::mat(t_len, h);
        ct->hs = Tensor::mat(t_len, h);
      }
      Tensor hs = Tensor::mat(t_len, h);
      lstm_forward(cell, x, dir == 1, h, hs, ct);
      for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < h; ++j)
          out.at(t, dir * h + j) = hs.at(t, j);
    }
    x = std::move(out);
  }

  EncodedSequence res;
  res.per_step = std::move(x);
  res.final = Tensor::vec(enc.cfg.out_dim());
  if (enc.cfg.bidirectional) {
    for (std::size_t j = 0; j < h; ++j) {
      res.final[j] = res.per_step.at(t_len - 1, j);       // forward last
      res.final[h + j] = res.per_step.at(0, h + j);       // backward first
    }
  } else {
    for (std::size_t j = 0; j < h; ++j)
      res.final[j] = res.per_step.at(t_len - 1, j);
  }
  return res;
}

void encode_backward(const EncodeTrace& trace, Encoder& enc,
                     const Tensor& d_per_step, const Tensor& d_final) {
  const std::size_t t_len = trace.ids.size();
  const std::size_t h = enc.cfg.hidden_dim;
  const std::size_t dirs = enc.dirs();

  Tensor d_out = d_per_step.size()
                     ? d_per_step
                     : Tensor::mat(t_len, enc.cfg.out_dim());
  if (d_final.size()) {
    if (enc.cfg.bidirectional) {
      for (std::size_t j = 0; j < h; ++j) {
        d_out.at(t_len - 1, j) += d_final[j];
        d_out.at(0, h + j) += d_final[h + j];
      }
    } else {
      for (std::size_t j = 0; j < h; ++j) d_out.at(t_len - 1, j) += d_final[j];
    }
  }

  for (int layer = enc.cfg.num_layers; layer-- > 0;) {
    const Tensor& x = trace.layer_in[layer];
    Tensor dx = Tensor::zeros(x.shape);
    for (std::size_t dir = 0; dir < dirs; ++dir) {
      // Slice this direction's columns of d_out.
      Tensor dh = Tensor::mat(t_len, h);
      for (std::size_t t = 0; t < t_len; ++t)
        for (std::size_t j = 0; j < h; ++j)
          dh.at(t, j) = d_out.at(t, dir * h + j);
      lstm_backward(enc.cell(layer, dir), x, dir == 1, h,
                    trace.cell_traces[layer * dirs + dir], dh, dx);
    }
    d_out = std::move(dx);
  }

  // d_out is now the gradient of the embedded input.
  for (std::size_t t = 0; t < t_len; ++t) {
    double* tg = enc.table.grad.row(trace.ids[t]);
    const double* src = d_out.row(t);
    for (std::size_t j = 0; j < enc.cfg.phone_embed_dim; ++j) tg[j] += src[j];
  }
}

PaddedBatch pad_batch(const std::vector<Pronunciation>& seqs, PhoneId pad_id) {
  if (seqs.empty()) throw std::invalid_argument("pad_batch: empty batch");
  PaddedBatch b;
  for (const auto& s : seqs) b.t_max = std::max(b.t_max, s.size());
  b.mask = Tensor::mat(seqs.size(), b.t_max);
  for (const auto& s : seqs) {
    Pronunciation row = s;
    row.resize(b.t_max, pad_id);
    b.ids.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < seqs.size(); ++i)
    for (std::size_t t = 0; t < seqs[i].size(); ++t) b.mask.at(i, t) = 1.0;
  return b;
}

}  // namespace pronsim
