#include "epimeter/ema.hpp"

#include <cmath>
#include <stdexcept>

namespace epimeter {

void EmaSchedule::validate() const {
  if (!(tau > 0)) throw std::invalid_argument("EMA time scale must be positive");
}

double EmaSchedule::weight() const {
  validate();
  return std::exp(-1.0 / tau);
}

void ema_update(const EmaSchedule& sched, Learner& ema, const Learner& raw) {
  if (ema.kind() != raw.kind() || ema.vocab_size() != raw.vocab_size())
    throw std::invalid_argument("EMA requires same-shape learners");
  ema.blend_from(ema, raw, sched.weight());
}

}  // namespace epimeter
