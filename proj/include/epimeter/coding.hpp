#pragma once

#include <cstdint>
#include <vector>

#include "json.hpp"

#include "epimeter/dataset.hpp"
#include "epimeter/learner.hpp"
#include "epimeter/trace.hpp"

namespace epimeter {

// Probability floor applied to coding distributions before log / KL, so
// quantized tables cannot produce infinite code lengths.
inline constexpr double kProbFloor = 1.0 / 4294967296.0;  // 2^-32

// KL(p || q) in bits over a shared vocab; raw zero q under positive p is an
// error, tiny float negatives are clamped to 0.
double token_kl(const std::vector<double>& p, const std::vector<double>& q);

// -log2 of the (floored) probability the model assigns to token t.
double token_loss_bits(const std::vector<double>& p, Token t, double floor = kProbFloor);

// Appendix-style scaled test loss: (K / K_hat) * sum of heldout per-record
// losses, with K_hat = heldout record count.
double scale_test_loss(const std::vector<double>& heldout_record_losses, std::uint64_t k,
                       std::uint64_t k_hat);

// Scores a model on the first `heldout_records` test records (0 = all)
// without mutating persistent state; consumed counts every token visited.
struct EvalResult {
  double heldout_bits = 0;
  std::vector<double> record_losses;  // per heldout record
  std::uint64_t heldout_masked_tokens = 0;
  std::uint64_t heldout_total_tokens = 0;
  std::uint64_t heldout_records = 0;
};
EvalResult evaluate_model(Learner& model, const Dataset& test, std::size_t heldout_records,
                          double floor = kProbFloor);

struct PrequentialOptions {
  std::vector<std::uint64_t> budgets;  // masked-train-token checkpoints; empty = full pass
  std::size_t heldout_records = 0;     // test records scoring the final loss (0 = all)
  bool exact_rescore = false;          // rescore consumed train stream instead
  double prob_floor = kProbFloor;
  std::uint64_t seed = 0;  // recorded in the trace; the run itself is deterministic
};

struct PrequentialResult {
  CodingTrace trace;                  // trace up to the last budget
  std::vector<EstimatePoint> points;  // one per budget
};

// Trains an online learner over the masked train stream, recording per-record
// step losses; model_bits at a budget is the area between the step losses and
// the current model's final loss (estimated on unseen test data and scaled,
// or by exact rescoring of the consumed stream).
PrequentialResult prequential_run(const nlohmann::json& learner_spec, const Dataset& train,
                                  const Dataset& test, const PrequentialOptions& opt = {});

}  // namespace epimeter
