#include "pronsim/gradcheck.hpp"

#include <sstream>

namespace pronsim {

namespace {

constexpr std::size_t kInventorySize = 12;

Pronunciation random_seq(Rng& rng) {
  Pronunciation p(3 + rng.below(6));  // lengths 3..8
  for (auto& id : p) id = static_cast<PhoneId>(rng.below(kInventorySize));
  return p;
}

EncoderConfig small_config(const std::string& variant) {
  return encoder_config_from_name(variant, /*phone_embed_dim=*/7,
                                  /*hidden_dim=*/10);
}

ModelGradCheck check_rank(const std::string& variant, std::uint64_t seed,
                          double h, double tol) {
  Rng rng(seed);
  Rng init_rng = rng.stream(1);
  RankModel model = RankModel::init(small_config(variant), kInventorySize,
                                    /*embed_dim=*/9, /*final_relu=*/true,
                                    init_rng);
  const double margin = 0.3;
  Triplet t;
  // Keep the hinge comfortably active so the finite difference never
  // crosses the max(0, .) kink.
  for (int attempt = 0; attempt < 100; ++attempt) {
    t = {random_seq(rng), random_seq(rng), random_seq(rng)};
    if (triplet_loss(t, model, margin) > 1e-3) break;
  }
  auto fn = [&](bool with_grad) {
    return with_grad ? triplet_loss_backward(t, model, margin)
                     : triplet_loss(t, model, margin);
  };
  ModelGradCheck out{"rank", variant, seed, {}};
  auto params = model.params();
  Rng coord_rng = rng.stream(2);
  out.report = grad_check(fn, params, h, tol, 64, coord_rng);
  return out;
}

ModelGradCheck check_binary(const std::string& variant, std::uint64_t seed,
                            double h, double tol) {
  Rng rng(seed);
  Rng init_rng = rng.stream(1);
  BinaryModel model = BinaryModel::init(small_config(variant), kInventorySize,
                                        /*t_max=*/8, /*step_dim=*/6, init_rng);
  LabeledPair pair{random_seq(rng), random_seq(rng),
                   rng.uniform() < 0.5 ? -1 : 1};
  auto fn = [&](bool with_grad) {
    return binary_loss(pair, model, with_grad);
  };
  ModelGradCheck out{"binary", variant, seed, {}};
  auto params = model.params();
  Rng coord_rng = rng.stream(2);
  out.report = grad_check(fn, params, h, tol, 64, coord_rng);
  return out;
}

}  // namespace

std::vector<ModelGradCheck> run_model_grad_checks(
    std::span<const std::uint64_t> seeds, double h, double tol) {
  std::vector<ModelGradCheck> out;
  for (const char* variant : {"lstm", "2lstm", "bi2lstm"}) {
    for (std::uint64_t seed : seeds) {
      out.push_back(check_rank(variant, seed, h, tol));
      out.push_back(check_binary(variant, seed, h, tol));
    }
  }
  return out;
}

std::string format_grad_checks(const std::vector<ModelGradCheck>& checks) {
  std::ostringstream os;
  for (const auto& c : checks) {
    double worst = 0.0;
    for (const auto& e : c.report.entries)
      worst = std::max(worst, e.max_rel_err);
    os << (c.report.all_pass() ? "PASS" : "FAIL") << '\t' << c.model << '\t'
       << c.variant << "\tseed=" << c.seed << "\tmax_rel_err=" << worst << '\n';
    if (!c.report.all_pass())
      for (const auto& e : c.report.entries)
        if (!e.pass)
          os << "  FAIL param " << e.param << " rel_err=" << e.max_rel_err
             << '\n';
  }
  return os.str();
}

bool all_grad_checks_pass(const std::vector<ModelGradCheck>& checks) {
  for (const auto& c : checks)
    if (!c.report.all_pass()) return false;
  return true;
}

}  // namespace pronsim
