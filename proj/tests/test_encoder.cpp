#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pronsim/encoder.hpp"
#include "pronsim/ops.hpp"

using namespace pronsim;

namespace {

constexpr std::size_t kInv = 9;

Pronunciation random_seq(Rng& rng, std::size_t min_len, std::size_t max_len) {
  Pronunciation p(min_len + rng.below(max_len - min_len + 1));
  for (auto& id : p) id = static_cast<PhoneId>(rng.below(kInv));
  return p;
}

// Independently coded single LSTM cell step (gate order i, f, g, o).
void cell_step_oracle(const Encoder::Cell& cell, std::size_t h,
                      const double* x, std::vector<double>& c_state,
                      std::vector<double>& h_state) {
  const std::size_t in = cell.in_dim;
  std::vector<double> z(4 * h);
  for (std::size_t i = 0; i < 4 * h; ++i) {
    double s = cell.b.value[i];
    for (std::size_t j = 0; j < in; ++j) s += cell.w.value.at(i, j) * x[j];
    for (std::size_t j = 0; j < h; ++j)
      s += cell.w.value.at(i, in + j) * h_state[j];
    z[i] = s;
  }
  auto sg = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  std::vector<double> new_c(h), new_h(h);
  for (std::size_t j = 0; j < h; ++j) {
    const double i_g = sg(z[j]);
    const double f_g = sg(z[h + j]);
    const double g_g = std::tanh(z[2 * h + j]);
    const double o_g = sg(z[3 * h + j]);
    new_c[j] = f_g * c_state[j] + i_g * g_g;
    new_h[j] = o_g * std::tanh(new_c[j]);
  }
  c_state = new_c;
  h_state = new_h;
}

Encoder make_encoder(const std::string& variant, Rng& rng,
                     std::size_t embed = 5, std::size_t hidden = 6) {
  return Encoder::init(encoder_config_from_name(variant, embed, hidden), kInv,
                       rng);
}

}  // namespace

TEST_CASE("embed_phones is a table lookup") {
  Rng rng(1);
  Encoder enc = make_encoder("lstm", rng);
  const Tensor one = embed_phones({3}, enc);
  CHECK(one.rows() == 1);
  for (std::size_t j = 0; j < enc.cfg.phone_embed_dim; ++j)
    CHECK(one.at(0, j) == enc.table.value.at(3, j));

  const Tensor rep = embed_phones({4, 4, 4}, enc);
  for (std::size_t t = 1; t < 3; ++t)
    for (std::size_t j = 0; j < enc.cfg.phone_embed_dim; ++j)
      CHECK(rep.at(t, j) == rep.at(0, j));

  CHECK_THROWS_AS(embed_phones({static_cast<PhoneId>(kInv + 1)}, enc),
                  std::out_of_range);
}

TEST_CASE("table gradient touches exactly the looked-up rows") {
  Rng rng(2);
  Encoder enc = make_encoder("lstm", rng);
  EncodeTrace trace;
  const Pronunciation p{2, 5, 2};
  const auto seq = encode(p, enc, &trace);
  Tensor d_final = Tensor::vec(enc.cfg.out_dim());
  d_final.fill(1.0);
  encode_backward(trace, enc, Tensor(), d_final);
  for (std::size_t row = 0; row <= kInv; ++row) {
    double mag = 0.0;
    for (std::size_t j = 0; j < enc.cfg.phone_embed_dim; ++j)
      mag += std::abs(enc.table.grad.at(row, j));
    if (row == 2 || row == 5)
      CHECK(mag > 0.0);
    else
      CHECK(mag == 0.0);
  }
}

TEST_CASE("length-1 encode equals one cell step from zero state") {
  Rng rng(3);
  Encoder enc = make_encoder("lstm", rng);
  const Pronunciation p{4};
  const auto seq = encode(p, enc);

  const Tensor x = embed_phones(p, enc);
  std::vector<double> c(enc.cfg.hidden_dim, 0.0), h(enc.cfg.hidden_dim, 0.0);
  cell_step_oracle(enc.cell(0, 0), enc.cfg.hidden_dim, x.row(0), c, h);
  for (std::size_t j = 0; j < enc.cfg.hidden_dim; ++j) {
    CHECK(seq.per_step.at(0, j) == doctest::Approx(h[j]).epsilon(1e-15));
    CHECK(seq.final[j] == doctest::Approx(h[j]).epsilon(1e-15));
  }
}

TEST_CASE("encode matches step-by-step cell oracle") {
  Rng rng(4);
  for (const char* variant : {"lstm", "2lstm"}) {
    Encoder enc = make_encoder(variant, rng);
    const std::size_t h = enc.cfg.hidden_dim;
    const Pronunciation p = random_seq(rng, 5, 5);
    const auto seq = encode(p, enc);

    Tensor x = embed_phones(p, enc);
    for (int layer = 0; layer < enc.cfg.num_layers; ++layer) {
      std::vector<double> cs(h, 0.0), hs(h, 0.0);
      Tensor out = Tensor::mat(p.size(), h);
      for (std::size_t t = 0; t < p.size(); ++t) {
        cell_step_oracle(enc.cell(layer, 0), h, x.row(t), cs, hs);
        for (std::size_t j = 0; j < h; ++j) out.at(t, j) = hs[j];
      }
      x = out;
    }
    for (std::size_t t = 0; t < p.size(); ++t)
      for (std::size_t j = 0; j < h; ++j)
        CHECK(seq.per_step.at(t, j) ==
              doctest::Approx(x.at(t, j)).epsilon(1e-12));
  }
}

TEST_CASE("bidirectional output layout") {
  Rng rng(5);
  Encoder enc = make_encoder("bi2lstm", rng);
  const std::size_t h = enc.cfg.hidden_dim;
  CHECK(enc.cfg.out_dim() == 2 * h);
  const Pronunciation p = random_seq(rng, 4, 7);
  const auto seq = encode(p, enc);
  CHECK(seq.per_step.cols() == 2 * h);
  // final = concat(forward last, backward first)
  for (std::size_t j = 0; j < h; ++j) {
    CHECK(seq.final[j] == seq.per_step.at(p.size() - 1, j));
    CHECK(seq.final[h + j] == seq.per_step.at(0, h + j));
  }
}

TEST_CASE("encode is deterministic") {
  Rng rng(6);
  Encoder enc = make_encoder("bi2lstm", rng);
  const Pronunciation p = random_seq(rng, 3, 8);
  const auto a = encode(p, enc);
  const auto b = encode(p, enc);
  CHECK(a.per_step.data == b.per_step.data);
  CHECK(a.final.data == b.final.data);
}

TEST_CASE("encode backward passes grad_check for all variants") {
  Rng rng(7);
  for (const char* variant : {"lstm", "2lstm", "bi2lstm"}) {
    Encoder enc = make_encoder(variant, rng);
    const Pronunciation p = random_seq(rng, 3, 8);
    // Fixed random probes scalarize per_step and final.
    Tensor probe_step = Tensor::mat(p.size(), enc.cfg.out_dim());
    Tensor probe_final = Tensor::vec(enc.cfg.out_dim());
    for (auto& v : probe_step.data) v = rng.uniform(-1.0, 1.0);
    for (auto& v : probe_final.data) v = rng.uniform(-1.0, 1.0);

    EncodeTrace trace;
    auto fn = [&](bool with_grad) {
      const auto seq = encode(p, enc, with_grad ? &trace : nullptr);
      double loss = 0.0;
      for (std::size_t i = 0; i < seq.per_step.size(); ++i)
        loss += probe_step.data[i] * seq.per_step.data[i];
      for (std::size_t i = 0; i < seq.final.size(); ++i)
        loss += probe_final[i] * seq.final[i];
      if (with_grad) encode_backward(trace, enc, probe_step, probe_final);
      return loss;
    };
    auto params = enc.params();
    CHECK(grad_check(fn, params, 1e-5, 1e-4, 64, rng).all_pass());
  }
}

TEST_CASE("pad_batch masks") {
  Rng rng(8);
  Encoder enc = make_encoder("lstm", rng);
  const Pronunciation a{1, 2}, b{3, 4, 5, 6};
  const auto batch = pad_batch({a, b}, enc.pad_id());
  CHECK(batch.t_max == 4);
  CHECK(batch.ids[0] == Pronunciation{1, 2, enc.pad_id(), enc.pad_id()});
  CHECK(batch.ids[1] == b);
  CHECK(batch.mask.at(0, 0) == 1.0);
  CHECK(batch.mask.at(0, 2) == 0.0);
  CHECK(batch.mask.at(1, 3) == 1.0);

  const auto equal = pad_batch({a, a}, enc.pad_id());
  for (double m : equal.mask.data) CHECK(m == 1.0);
}

TEST_CASE("padded-batch loss equals sum of unpadded per-sequence losses") {
  Rng rng(9);
  Encoder enc = make_encoder("2lstm", rng);
  std::vector<Pronunciation> seqs{{1, 2}, {3, 4, 5, 6}, {7}};
  const auto batch = pad_batch(seqs, enc.pad_id());

  auto seq_loss = [&](const Pronunciation& p) {
    const auto out = encode(p, enc);
    double s = 0.0;
    for (double v : out.final.data) s += v;
    return s;
  };

  double batched = 0.0;
  for (std::size_t i = 0; i < batch.ids.size(); ++i) {
    // Real length recovered from the mask; padded positions contribute 0.
    std::size_t len = 0;
    for (std::size_t t = 0; t < batch.t_max; ++t)
      if (batch.mask.at(i, t) == 1.0) ++len;
    const Pronunciation row(batch.ids[i].begin(), batch.ids[i].begin() + len);
    batched += seq_loss(row);
  }
  double individual = 0.0;
  for (const auto& s : seqs) individual += seq_loss(s);
  CHECK(batched == doctest::Approx(individual).epsilon(1e-12));
}
