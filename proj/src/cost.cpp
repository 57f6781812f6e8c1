#include "epimeter/cost.hpp"

namespace epimeter {

CostModel make_cost_model(std::uint64_t train_tokens, std::uint64_t test_total_tokens,
                          const CostProfile& prof) {
  CostModel m;
  m.train_ops = train_tokens * (prof.predict_ops + prof.update_ops);
  m.infer_ops = test_total_tokens * prof.predict_ops;
  return m;
}

}  // namespace epimeter
