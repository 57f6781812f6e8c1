#pragma once

#include <cstdint>

#include "epimeter/kt.hpp"
#include "epimeter/learner.hpp"

namespace epimeter {

// Conditional model for two-block records: a KT table keyed on a fixed
// window of input tokens aligned to the target position, plus the last
// prev_r target tokens. Alignment right-aligns the input block against the
// target block (target j maps to input j - (target_len - input_len)); with
// wrap=true window indices wrap around the input block (ring topologies),
// otherwise out-of-range slots read a sentinel.
struct WindowedSpec {
  std::uint32_t vocab = 2;
  std::vector<int> offsets;  // window offsets relative to the aligned input cell
  std::uint32_t prev_r = 0;  // trailing target tokens included in the key
  bool wrap = true;

  void validate() const;
};

class WindowedConditional : public Learner {
 public:
  explicit WindowedConditional(const WindowedSpec& spec);

  std::uint32_t vocab_size() const override { return table_.vocab; }
  std::string kind() const override { return "windowed"; }
  CostProfile cost_profile() const override { return {2ull * table_.vocab, 2}; }
  const WindowedSpec& spec() const { return spec_; }

  void begin_record(const RecordView& rec) override;
  std::vector<double> predict(const RecordView& rec, std::size_t pos) const override;
  void advance(const RecordView& rec, std::size_t pos) override;
  void update(const RecordView& rec, std::size_t pos) override;

  std::unique_ptr<Learner> clone() const override;
  void blend_from(const Learner& prev, const Learner& raw, double w) override;
  void save(std::ostream& os) const override;
  static std::unique_ptr<Learner> load_payload(std::istream& is);

  const KtTable& table() const { return table_; }

 private:
  std::uint64_t key(const RecordView& rec, std::size_t pos) const;
  WindowedSpec spec_;
  KtTable table_;
  std::vector<std::uint32_t> prev_;  // last prev_r target tokens, sentinel = vocab
};

}  // namespace epimeter
