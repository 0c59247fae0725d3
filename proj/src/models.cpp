#include "pronsim/models.hpp"

#include <cmath>
#include <stdexcept>

namespace pronsim {

namespace {

void init_dense(Parameter& w, Parameter& b, const std::string& name,
                std::size_t out, std::size_t in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(in));
  w = Parameter(name + "_w", Tensor::mat(out, in));
  b = Parameter(name + "_b", Tensor::vec(out));
  for (std::size_t i = 0; i < w.value.size(); ++i)
    w.value[i] = rng.uniform(-s, s);
  // Small positive bias keeps relu layers off the exact kink and alive even
  // when everything upstream happens to be zero.
  b.value.fill(0.1);
}

}  // namespace

RankModel RankModel::init(const EncoderConfig& cfg, std::size_t inventory_size,
                          std::size_t embed_dim, bool final_relu, Rng& rng) {
  if (embed_dim == 0) throw std::invalid_argument("embed_dim must be >= 1");
  RankModel m;
  m.enc = Encoder::init(cfg, inventory_size, rng);
  m.embed_dim = embed_dim;
  m.final_relu = final_relu;
  init_dense(m.w1, m.b1, "rank_fc1", cfg.hidden_dim, cfg.out_dim(), rng);
  init_dense(m.w2, m.b2, "rank_fc2", embed_dim, cfg.hidden_dim, rng);
  return m;
}

std::vector<Parameter*> RankModel::params() {
  auto ps = enc.params();
  for (Parameter* p : {&w1, &b1, &w2, &b2}) ps.push_back(p);
  return ps;
}

Tensor embed_pronunciation(const Pronunciation& p, const RankModel& model,
                           RankTrace* trace) {
  RankTrace local;
  RankTrace& t = trace ? *trace : local;
  t.seq = encode(p, model.enc, trace ? &t.enc : nullptr);
  t.z1 = affine(t.seq.final, model.w1, model.b1);
  t.a1 = activation(Activation::Relu, t.z1);
  t.z2 = affine(t.a1, model.w2, model.b2);
  t.out = model.final_relu ? activation(Activation::Relu, t.z2) : t.z2;
  return t.out;
}

void embed_pronunciation_backward(const RankTrace& trace, RankModel& model,
                                  const Tensor& d_out) {
  Tensor dz2 = model.final_relu
                   ? activation_backward(Activation::Relu, trace.z2, trace.out,
                                         d_out)
                   : d_out;
  Tensor da1 = affine_backward(trace.a1, model.w2, model.b2, dz2);
  Tensor dz1 = activation_backward(Activation::Relu, trace.z1, trace.a1, da1);
  Tensor d_final = affine_backward(trace.seq.final, model.w1, model.b1, dz1);
  encode_backward(trace.enc, model.enc, Tensor(), d_final);
}

double similarity(const Pronunciation& p1, const Pronunciation& p2,
                  const RankModel& model) {
  return cosine_similarity01(embed_pronunciation(p1, model),
                             embed_pronunciation(p2, model));
}

double hinge_loss(double margin, double f_pos, double f_neg) {
  if (margin <= 0.0) throw std::invalid_argument("margin must be positive");
  return std::max(0.0, margin - f_pos + f_neg);
}

double triplet_loss(const Triplet& t, const RankModel& model, double margin) {
  const Tensor us = embed_pronunciation(t.surface, model);
  const double f_pos = cosine_similarity01(us, embed_pronunciation(t.positive, model));
  const double f_neg = cosine_similarity01(us, embed_pronunciation(t.negative, model));
  return hinge_loss(margin, f_pos, f_neg);
}

double triplet_loss_backward(const Triplet& t, RankModel& model, double margin,
                             double grad_scale) {
  TripletGroupResult r = triplet_group_loss(t.surface, t.positive,
                                            {t.negative}, model, margin, true,
                                            grad_scale);
  return r.total_loss;
}

TripletGroupResult triplet_group_loss(const Pronunciation& surface,
                                      const Pronunciation& positive,
                                      const std::vector<Pronunciation>& negatives,
                                      RankModel& model, double margin,
                                      bool backward, double grad_scale) {
  if (margin <= 0.0) throw std::invalid_argument("margin must be positive");
  RankTrace ts, tp;
  const Tensor us = embed_pronunciation(surface, model, backward ? &ts : nullptr);
  const Tensor up = embed_pronunciation(positive, model, backward ? &tp : nullptr);
  const double f_pos = cosine_similarity01(us, up);

  TripletGroupResult res;
  Tensor d_us = Tensor::zeros(us.shape);
  Tensor d_up = Tensor::zeros(up.shape);

  for (const auto& neg : negatives) {
    RankTrace tn;
    const Tensor un =
        embed_pronunciation(neg, model, backward ? &tn : nullptr);
    const double f_neg = cosine_similarity01(us, un);
    const double loss = hinge_loss(margin, f_pos, f_neg);
    if (loss <= 0.0) continue;
    res.total_loss += loss;
    ++res.violations;
    if (!backward) continue;
    // d loss / d f_pos = -1, d loss / d f_neg = +1
    cosine_similarity01_backward(us, up, -grad_scale, d_us, d_up);
    Tensor d_un = Tensor::zeros(un.shape);
    cosine_similarity01_backward(us, un, grad_scale, d_us, d_un);
    embed_pronunciation_backward(tn, model, d_un);
  }

  if (backward && res.violations > 0) {
    embed_pronunciation_backward(ts, model, d_us);
    embed_pronunciation_backward(tp, model, d_up);
  }
  return res;
}

// ---------------------------------------------------------------------------

BinaryModel BinaryModel::init(const EncoderConfig& cfg,
                              std::size_t inventory_size, std::size_t t_max,
                              std::size_t step_dim, Rng& rng) {
  if (t_max == 0 || step_dim == 0)
    throw std::invalid_argument("t_max and step_dim must be positive");
  BinaryModel m;
  m.enc = Encoder::init(cfg, inventory_size, rng);
  m.t_max = t_max;
  m.step_dim = step_dim;
  init_dense(m.w1, m.b1, "bin_fc1", step_dim, 2 * cfg.out_dim(), rng);
  init_dense(m.w2, m.b2, "bin_fc2", step_dim, step_dim, rng);
  init_dense(m.w3, m.b3, "bin_fc3", step_dim, step_dim, rng);
  init_dense(m.w_out, m.b_out, "bin_out", 2, t_max * step_dim, rng);
  return m;
}

std::vector<Parameter*> BinaryModel::params() {
  auto ps = enc.params();
  for (Parameter* p : {&w1, &b1, &w2, &b2, &w3, &b3, &w_out, &b_out})
    ps.push_back(p);
  return ps;
}

namespace {

struct BinaryTrace {
  EncodeTrace enc1, enc2;
  EncodedSequence seq1, seq2;
  std::size_t t_used = 0;
  std::vector<Tensor> z, z1, a1, z2, a2, z3, a3;  // per used step
  Tensor flat;
  Tensor logits;
  SoftmaxNll sm;
};

// Steps beyond a branch's length contribute zero encoder output; steps
// beyond both lengths are left as zeros in the flattened vector, so a
// pronunciation scores identically whether or not the other is longer.
void binary_forward(const Pronunciation& p1, const Pronunciation& p2,
                    const BinaryModel& model, bool keep_trace, BinaryTrace& t) {
  if (p1.size() > model.t_max || p2.size() > model.t_max)
    throw std::invalid_argument("sequence longer than model t_max");
  const std::size_t d = model.enc.cfg.out_dim();
  t.seq1 = encode(p1, model.enc, keep_trace ? &t.enc1 : nullptr);
  t.seq2 = encode(p2, model.enc, keep_trace ? &t.enc2 : nullptr);
  t.t_used = std::max(p1.size(), p2.size());

  t.flat = Tensor::vec(model.t_max * model.step_dim);
  for (std::size_t step = 0; step < t.t_used; ++step) {
    Tensor z = Tensor::vec(2 * d);
    if (step < p1.size())
      for (std::size_t j = 0; j < d; ++j) z[j] = t.seq1.per_step.at(step, j);
    if (step < p2.size())
      for (std::size_t j = 0; j < d; ++j) z[d + j] = t.seq2.per_step.at(step, j);
    Tensor z1 = affine(z, model.w1, model.b1);
    Tensor a1 = activation(Activation::Relu, z1);
    Tensor z2 = affine(a1, model.w2, model.b2);
    Tensor a2 = activation(Activation::Relu, z2);
    Tensor z3 = affine(a2, model.w3, model.b3);
    Tensor a3 = activation(Activation::Relu, z3);
    for (std::size_t j = 0; j < model.step_dim; ++j)
      t.flat[step * model.step_dim + j] = a3[j];
    if (keep_trace) {
      t.z.push_back(std::move(z));
      t.z1.push_back(std::move(z1));
      t.a1.push_back(std::move(a1));
      t.z2.push_back(std::move(z2));
      t.a2.push_back(std::move(a2));
      t.z3.push_back(std::move(z3));
      t.a3.push_back(std::move(a3));
    }
  }
  t.logits = affine(t.flat, model.w_out, model.b_out);
}

void binary_backward(const BinaryTrace& t, BinaryModel& model,
                     const Tensor& d_logits, std::size_t len1,
                     std::size_t len2) {
  const std::size_t d = model.enc.cfg.out_dim();
  Tensor d_flat = affine_backward(t.flat, model.w_out, model.b_out, d_logits);
  Tensor d_steps1 = Tensor::mat(len1, d);
  Tensor d_steps2 = Tensor::mat(len2, d);
  for (std::size_t step = 0; step < t.t_used; ++step) {
    Tensor da3 = Tensor::vec(model.step_dim);
    for (std::size_t j = 0; j < model.step_dim; ++j)
      da3[j] = d_flat[step * model.step_dim + j];
    Tensor dz3 = activation_backward(Activation::Relu, t.z3[step], t.a3[step], da3);
    Tensor da2 = affine_backward(t.a2[step], model.w3, model.b3, dz3);
    Tensor dz2 = activation_backward(Activation::Relu, t.z2[step], t.a2[step], da2);
    Tensor da1 = affine_backward(t.a1[step], model.w2, model.b2, dz2);
    Tensor dz1 = activation_backward(Activation::Relu, t.z1[step], t.a1[step], da1);
    Tensor dz = affine_backward(t.z[step], model.w1, model.b1, dz1);
    if (step < len1)
      for (std::size_t j = 0; j < d; ++j) d_steps1.at(step, j) += dz[j];
    if (step < len2)
      for (std::size_t j = 0; j < d; ++j) d_steps2.at(step, j) += dz[d + j];
  }
  encode_backward(t.enc1, model.enc, d_steps1, Tensor());
  encode_backward(t.enc2, model.enc, d_steps2, Tensor());
}

}  // namespace

double binary_score(const Pronunciation& p1, const Pronunciation& p2,
                    const BinaryModel& model) {
  BinaryTrace t;
  binary_forward(p1, p2, model, false, t);
  const SoftmaxNll sm = softmax_nll(t.logits, 1);
  return sm.probs[1];
}

double binary_loss(const LabeledPair& pair, BinaryModel& model, bool backward,
                   double grad_scale) {
  if (pair.label != 1 && pair.label != -1)
    throw std::invalid_argument("label must be -1 or +1");
  const std::size_t cls = pair.label == 1 ? 1 : 0;
  BinaryTrace t;
  binary_forward(pair.surface, pair.canonical, model, backward, t);
  t.sm = softmax_nll(t.logits, cls);
  if (backward) {
    Tensor d_logits = softmax_nll_backward(t.sm, cls, grad_scale);
    binary_backward(t, model, d_logits, pair.surface.size(),
                    pair.canonical.size());
  }
  return t.sm.loss;
}

}  // namespace pronsim
