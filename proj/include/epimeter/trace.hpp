#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "epimeter/cost.hpp"

namespace epimeter {

// One coding step: a record's masked log-loss (prequential) or its
// distillation KL plus amortized overhead (requential).
struct TraceStep {
  std::uint64_t step = 0;
  double bits = 0;           // loss or KL, in bits
  double overhead_bits = 0;  // requential: log2(1+KL) + 4 for the step's batch
  std::uint64_t tokens = 0;  // masked tokens consumed this step
  std::uint64_t cum_ops = 0; // accounted training ops after this step
};

struct CodingTrace {
  std::string mode;  // "prequential" | "requential" | "requential_bridge"
  std::string learner_kind;
  std::string hyperparams;
  std::uint64_t seed = 0;
  double prob_floor = 0;
  std::vector<TraceStep> steps;

  double final_loss_bits_per_token = 0;  // per masked test token
  double model_bits = 0;                 // clamped at 0
  double model_bits_raw = 0;             // before clamping
  double model_bits_with_overhead = 0;   // requential only
  double data_bits = 0;                  // scaled test code length
  std::uint64_t data_tokens = 0;         // masked test tokens (the scaled target count)
  std::uint64_t train_tokens = 0;        // masked tokens trained on
  std::uint64_t test_total_tokens = 0;   // every test token, input and label
  CostProfile profile;
  bool truncated = false;  // teacher stream exhausted before the budget
};

// One run sampled at one budget; the unit the frontier consumes.
struct EstimatePoint {
  std::uint64_t t_ops = 0;
  double model_bits = 0;
  double data_bits = 0;
  double total_bits = 0;
  double data_bits_per_token = 0;
  std::uint64_t train_tokens = 0;
  std::string hyperparams;
  std::uint64_t run_id = 0;  // groups points of one training run
  std::uint64_t seed = 0;
  std::uint64_t trace_digest = 0;
};

std::uint64_t compute_trace_digest(const CodingTrace& trace);
void trace_to_csv(const CodingTrace& trace, std::ostream& os);  // step,bits,cumulative_ops
nlohmann::json trace_summary_json(const CodingTrace& trace);

EstimatePoint two_part(const CodingTrace& trace, const CostModel& cost);

}  // namespace epimeter
