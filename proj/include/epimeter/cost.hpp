#pragma once

#include <cstdint>

#include "epimeter/learner.hpp"

namespace epimeter {

// Accounted compute of one run: training cost over trained (masked) tokens
// plus full-test decode cost over every test token, input and label alike.
struct CostModel {
  std::uint64_t train_ops = 0;
  std::uint64_t infer_ops = 0;
  std::uint64_t total() const { return train_ops + infer_ops; }
};

CostModel make_cost_model(std::uint64_t train_tokens, std::uint64_t test_total_tokens,
                          const CostProfile& prof);

}  // namespace epimeter
