#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "epimeter/dataset.hpp"
#include "epimeter/rng.hpp"

namespace epimeter {

// Abstract per-token operation counts of one predict / update call; the
// coding module turns these into the accounted compute T.
struct CostProfile {
  std::uint64_t predict_ops = 1;
  std::uint64_t update_ops = 0;
};

// Online probabilistic sequence model over one dataset's vocabulary.
//
// Records are consumed through a per-record protocol: begin_record resets
// any in-context state, predict(rec, pos) returns the next-token
// distribution at a position, advance(rec, pos) reveals the true token to
// the in-context state without learning (evaluation passes), and
// update(rec, pos) learns from the token and then advances. predict is
// const and never mutates state; update is deterministic.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual std::uint32_t vocab_size() const = 0;
  virtual std::string kind() const = 0;
  virtual CostProfile cost_profile() const = 0;

  virtual void begin_record(const RecordView& rec) = 0;
  virtual std::vector<double> predict(const RecordView& rec, std::size_t pos) const = 0;
  virtual void advance(const RecordView& rec, std::size_t pos) = 0;
  virtual void update(const RecordView& rec, std::size_t pos) = 0;

  // Inverse-CDF draw against predict with u from a seeded stream.
  Token sample(const RecordView& rec, std::size_t pos, double u) const {
    return static_cast<Token>(sample_index(predict(rec, pos), u));
  }

  virtual std::unique_ptr<Learner> clone() const = 0;

  // EMA support: state <- w * prev + (1 - w) * raw, elementwise over count
  // tables. Kinds without blendable state throw std::invalid_argument.
  virtual void blend_from(const Learner& prev, const Learner& raw, double w) = 0;

  // Versioned binary snapshot (kind-tagged); load via load_learner().
  virtual void save(std::ostream& os) const = 0;
};

std::unique_ptr<Learner> load_learner(std::istream& is);

}  // namespace epimeter
