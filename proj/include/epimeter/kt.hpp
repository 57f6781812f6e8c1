#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "epimeter/learner.hpp"

namespace epimeter {

// Count table with Krichevsky-Trofimov add-half smoothing, keyed by exact
// positional context packing (no hash-collision ambiguity). Counts are
// doubles so EMA snapshot blending stays within the family; fresh keys
// predict uniform.
struct KtTable {
  std::uint32_t vocab = 2;
  std::unordered_map<std::uint64_t, std::vector<double>> counts;

  std::vector<double> predict(std::uint64_t key) const;
  void observe(std::uint64_t key, Token t);
  // *this <- w * prev + (1-w) * raw over the union of keys.
  void blend(const KtTable& prev, const KtTable& raw, double w);
  void save(std::ostream& os) const;  // keys sorted for bit-exact round trips
  static KtTable load(std::istream& is);
  std::size_t distinct_contexts() const { return counts.size(); }
};

// Packs fixed-radix slot values into a single table key; validates that the
// key space fits in 64 bits.
std::uint64_t pack_slots(const std::vector<std::uint32_t>& slots, std::uint32_t radix);
void check_key_capacity(std::size_t slot_count, std::uint32_t radix);

// Order-r context model: key = last r tokens (record-start sentinel padded),
// radix vocab+1.
class KtContext : public Learner {
 public:
  KtContext(std::uint32_t vocab, std::uint32_t order);

  std::uint32_t vocab_size() const override { return table_.vocab; }
  std::string kind() const override { return "kt"; }
  CostProfile cost_profile() const override { return {2ull * table_.vocab, 2}; }
  std::uint32_t order() const { return order_; }

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
  std::uint64_t key() const;
  std::uint32_t order_;
  KtTable table_;
  std::vector<std::uint32_t> ctx_;  // most recent last; sentinel = vocab
};

}  // namespace epimeter
