#pragma once

#include <vector>

#include "pronsim/encoder.hpp"
#include "pronsim/ops.hpp"

namespace pronsim {

// (p^s, p^+, p^-): surface, same-word pronunciation, other-word pronunciation.
struct Triplet {
  Pronunciation surface;
  Pronunciation positive;
  Pronunciation negative;
};

struct LabeledPair {
  Pronunciation surface;
  Pronunciation canonical;
  int label = 1;  // -1 or +1
};

// ---------------------------------------------------------------------------
// Ranking model: shared encoder, two dense layers, cosine similarity.

struct RankModel {
  Encoder enc;
  Parameter w1, b1;  // out_dim -> hidden_dim, relu
  Parameter w2, b2;  // hidden_dim -> embed_dim
  std::size_t embed_dim = 120;
  // With ReLU after every dense layer the embeddings live in the
  // non-negative orthant (all similarities land in [0.5, 1]), and hinge
  // training drives words that only occur as negatives into the zero
  // corner, where the cosine is undefined.  Training therefore defaults to
  // omitting the ReLU on the embedding output; the switch restores it.
  bool final_relu = false;

  static RankModel init(const EncoderConfig& cfg, std::size_t inventory_size,
                        std::size_t embed_dim, bool final_relu, Rng& rng);
  std::vector<Parameter*> params();
};

struct RankTrace {
  EncodeTrace enc;
  EncodedSequence seq;
  Tensor z1, a1;  // layer-1 pre/post activation
  Tensor z2;      // layer-2 pre activation
  Tensor out;
};

Tensor embed_pronunciation(const Pronunciation& p, const RankModel& model,
                           RankTrace* trace = nullptr);

// d_out is dL/d(embedding); accumulates grads through dense layers and encoder.
void embed_pronunciation_backward(const RankTrace& trace, RankModel& model,
                                  const Tensor& d_out);

// f(p1, p2) = 1 - d_cos(g(p1), g(p2)), in [0, 1].
double similarity(const Pronunciation& p1, const Pronunciation& p2,
                  const RankModel& model);

// max{0, margin - f_pos + f_neg}
double hinge_loss(double margin, double f_pos, double f_neg);

// hinge_loss over the model's similarities: max{0, margin - f(s,p+) + f(s,p-)}
double triplet_loss(const Triplet& t, const RankModel& model, double margin);

// Same loss; also accumulates gradients scaled by grad_scale.
double triplet_loss_backward(const Triplet& t, RankModel& model, double margin,
                             double grad_scale = 1.0);

// All triplets sharing one (surface, positive): the shared branches are
// encoded once and receive the summed gradient of every active hinge.
struct TripletGroupResult {
  double total_loss = 0.0;
  std::size_t violations = 0;  // triplets with loss > 0
};

TripletGroupResult triplet_group_loss(const Pronunciation& surface,
                                      const Pronunciation& positive,
                                      const std::vector<Pronunciation>& negatives,
                                      RankModel& model, double margin,
                                      bool backward, double grad_scale = 1.0);

// ---------------------------------------------------------------------------
// Binary model: Siamese encoder, per-step dense stack, softmax over 2 classes.
// Class 1 is "same word" (label +1); the mapping is fixed and serialized.

struct BinaryModel {
  Encoder enc;
  Parameter w1, b1, w2, b2, w3, b3;  // per-step layers, relu after each
  Parameter w_out, b_out;            // [2 x (t_max * step_dim)]
  std::size_t t_max = 0;
  std::size_t step_dim = 0;

  static BinaryModel init(const EncoderConfig& cfg, std::size_t inventory_size,
                          std::size_t t_max, std::size_t step_dim, Rng& rng);
  std::vector<Parameter*> params();
};

// Probability that the two pronunciations are of the same word.
double binary_score(const Pronunciation& p1, const Pronunciation& p2,
                    const BinaryModel& model);

double binary_loss(const LabeledPair& pair, BinaryModel& model, bool backward,
                   double grad_scale = 1.0);

}  // namespace pronsim
