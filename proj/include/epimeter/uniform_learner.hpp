#pragma once

#include "epimeter/learner.hpp"

namespace epimeter {

// Fixed uniform predictor; update is a no-op (fixed point of training).
class UniformBaseline : public Learner {
 public:
  explicit UniformBaseline(std::uint32_t vocab);

  std::uint32_t vocab_size() const override { return vocab_; }
  std::string kind() const override { return "uniform"; }
  CostProfile cost_profile() const override { return {1, 0}; }

  void begin_record(const RecordView&) override {}
  std::vector<double> predict(const RecordView&, std::size_t) const override;
  void advance(const RecordView&, std::size_t) override {}
  void update(const RecordView&, std::size_t) override {}

  std::unique_ptr<Learner> clone() const override;
  void blend_from(const Learner& prev, const Learner& raw, double w) override;
  void save(std::ostream& os) const override;
  static std::unique_ptr<Learner> load_payload(std::istream& is);

 private:
  std::uint32_t vocab_;
};

}  // namespace epimeter
