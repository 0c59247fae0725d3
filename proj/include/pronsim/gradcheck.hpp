#pragma once

#include <span>

#include "pronsim/models.hpp"
#include "pronsim/ops.hpp"

namespace pronsim {

// One full-model gradient check: every parameter tensor of one architecture
// with one encoder variant, on the loss of a random training example with
// sequence lengths in [3, 8].
struct ModelGradCheck {
  std::string model;    // "rank" | "binary"
  std::string variant;  // "lstm" | "2lstm" | "bi2lstm"
  std::uint64_t seed = 0;
  GradCheckReport report;
};

std::vector<ModelGradCheck> run_model_grad_checks(
    std::span<const std::uint64_t> seeds, double h = 1e-5, double tol = 1e-4);

std::string format_grad_checks(const std::vector<ModelGradCheck>& checks);

bool all_grad_checks_pass(const std::vector<ModelGradCheck>& checks);

}  // namespace pronsim
