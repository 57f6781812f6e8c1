#pragma once

#include "epimeter/learner.hpp"

namespace epimeter {

// Exponential moving average of learner checkpoints: one step blends
// ema <- w * ema + (1 - w) * raw with w = exp(-1/tau), so large tau keeps
// the running average nearly frozen and small tau tracks the raw state.
struct EmaSchedule {
  double tau = 100.0;  // time scale in update steps, > 0
  void validate() const;
  double weight() const;  // exp(-1/tau)
};

void ema_update(const EmaSchedule& sched, Learner& ema, const Learner& raw);

}  // namespace epimeter
