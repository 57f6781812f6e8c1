#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "json.hpp"

#include "epimeter/dataset.hpp"
#include "epimeter/trace.hpp"

namespace epimeter {

// Requential coding: describe a model by coding a synthetic training run.
// Each step takes one train record as a template, lets the teacher sample
// its target block, scores the student with the exact per-token
// KL(teacher || student) at the sampled prefix, and trains the student on
// the sampled tokens; per-step cost is KL + log2(1+KL) + 4, the overhead
// amortized over the step's token batch.
//
// Teacher modes:
//  - live (default): the teacher trains on the real record before each step
//    and an EMA of its checkpoints (time scale ema_tau; 0 disables) is the
//    sampling/scoring distribution. While the previous step's per-token KL
//    exceeds max_kl the teacher is frozen: the record stream still advances
//    but teacher training and EMA blending pause until the student catches
//    up. Exhausting the train stream before the budget truncates the run.
//  - static: the teacher is pretrained on the full train set, then frozen;
//    record templates cycle, so any budget is reachable.
//  - bridge (static_teacher + bridge_real_data): no sampling — the student
//    trains on the real tokens and each step costs student loss minus
//    teacher loss on them, the Appendix-style bridge to the prequential sum.
struct RequentialOptions {
  nlohmann::json student_spec;
  nlohmann::json teacher_spec;  // defaults to student_spec when null
  double ema_tau = 0;           // 0 = raw live teacher, no EMA
  double max_kl = std::numeric_limits<double>::infinity();  // per-token freeze threshold
  bool static_teacher = false;
  std::size_t pretrain_passes = 1;  // static mode: passes over train before freezing
  bool bridge_real_data = false;
  bool lockstep = false;  // teacher trains on the sampled tokens (stays equal to student)
  std::vector<std::uint64_t> budgets;  // student-token checkpoints; empty = one train pass
  std::size_t heldout_records = 0;
  double prob_floor = 0;  // 0 = library default
  std::uint64_t seed = 0;
};

struct RequentialResult {
  CodingTrace trace;
  std::vector<EstimatePoint> points;  // without-overhead model bits
  std::vector<std::uint8_t> final_student_snapshot;
};

RequentialResult requential_run(const RequentialOptions& opt, const Dataset& train,
                                const Dataset& test);

}  // namespace epimeter
