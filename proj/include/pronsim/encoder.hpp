#pragma once

#include <vector>

#include "pronsim/phonology.hpp"
#include "pronsim/tensor.hpp"

namespace pronsim {

// The three variants from the experiments: (1, false), (2, false), (2, true).
struct EncoderConfig {
  std::size_t phone_embed_dim = 64;
  std::size_t hidden_dim = 48;
  int num_layers = 1;
  bool bidirectional = false;

  std::size_t out_dim() const {
    return bidirectional ? 2 * hidden_dim : hidden_dim;
  }
  void validate() const;
};

EncoderConfig encoder_config_from_name(const std::string& name,
                                       std::size_t phone_embed_dim,
                                       std::size_t hidden_dim);
std::string encoder_config_name(const EncoderConfig& cfg);

// Shared phone embedding table + stacked (optionally bidirectional) LSTM.
// The embedding table carries one extra row reserved for the pad id,
// kept at zero and outside the real inventory.
struct Encoder {
  EncoderConfig cfg;
  std::size_t inventory_size = 0;
  Parameter table;  // [(inventory_size + 1) x phone_embed_dim]

  struct Cell {
    Parameter w;  // [4H x (in_dim + H)], gate order i, f, g, o
    Parameter b;  // [4H], forget-gate block initialized to 1
    std::size_t in_dim = 0;
  };
  std::vector<Cell> cells;  // layer-major; bidirectional: fwd then bwd per layer

  static Encoder init(const EncoderConfig& cfg, std::size_t inventory_size,
                      Rng& rng);

  PhoneId pad_id() const { return static_cast<PhoneId>(inventory_size); }
  std::size_t dirs() const { return cfg.bidirectional ? 2 : 1; }
  Cell& cell(int layer, std::size_t dir) { return cells[layer * dirs() + dir]; }
  const Cell& cell(int layer, std::size_t dir) const {
    return cells[layer * dirs() + dir];
  }
  std::vector<Parameter*> params();
};

struct EncodedSequence {
  Tensor per_step;  // [T x out_dim]
  Tensor final;     // [out_dim]
};

// Intermediate state kept for backward.
struct EncodeTrace {
  Pronunciation ids;
  Tensor embedded;                 // [T x E]
  std::vector<Tensor> layer_in;    // per layer, [T x in_dim]
  struct CellTrace {
    // Indexed by recurrence step (reversed input order for backward cells).
    Tensor is, fs, gs, os, cs, hs;  // each [T x H]
  };
  std::vector<CellTrace> cell_traces;  // same indexing as Encoder::cells
};

// Row t of embedded equals the table row of p[t].
Tensor embed_phones(const Pronunciation& p, const Encoder& enc);

EncodedSequence encode(const Pronunciation& p, const Encoder& enc,
                       EncodeTrace* trace = nullptr);

// d_per_step [T x out_dim] and d_final [out_dim] (either may be empty for
// zero).  Accumulates into all cell and table gradients.
void encode_backward(const EncodeTrace& trace, Encoder& enc,
                     const Tensor& d_per_step, const Tensor& d_final);

struct PaddedBatch {
  std::vector<Pronunciation> ids;  // each padded to t_max with pad_id
  Tensor mask;                     // [B x t_max], 1 on real positions
  std::size_t t_max = 0;
};

PaddedBatch pad_batch(const std::vector<Pronunciation>& seqs, PhoneId pad_id);

}  // namespace pronsim
