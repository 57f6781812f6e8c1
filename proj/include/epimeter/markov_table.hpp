#pragma once

#include <array>
#include <cstdint>

#include "epimeter/kt.hpp"
#include "epimeter/learner.hpp"

namespace epimeter {

// Table learner for serialized-Markov records. The key for a chain position
// with previous symbol s can combine three feature groups:
//  - digits: the most significant serialized digits of row s when that row
//    is printed in the record's input block (sentinel when hidden),
//  - ctx: a coarse summary of in-record transition counts from s
//    (argmax target, argmax-dominance bucket, total-count bucket),
//  - prev_r trailing chain symbols.
struct MarkovTableSpec {
  std::uint32_t chain_vocab = 4;    // V; dataset vocab is V+1 (separator)
  std::uint32_t digits_per_entry = 4;
  bool use_digits = true;
  std::uint32_t digits_used = 1;    // leading digits per row entry in the key
  bool use_ctx = false;
  std::uint32_t ratio_buckets = 4;
  std::uint32_t total_buckets = 4;
  std::uint32_t prev_r = 0;

  void validate() const;
};

class MarkovTableLearner : public Learner {
 public:
  explicit MarkovTableLearner(const MarkovTableSpec& spec);

  std::uint32_t vocab_size() const override { return table_.vocab; }
  std::string kind() const override { return "markov_table"; }
  CostProfile cost_profile() const override { return {2ull * table_.vocab, 2}; }
  const MarkovTableSpec& spec() const { return spec_; }

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
  std::uint32_t state_at(const RecordView& rec, std::size_t pos) const;

  MarkovTableSpec spec_;
  KtTable table_;
  std::uint32_t hidden_ = 0;                  // hidden row count of the current record
  std::vector<double> counts_;                // V*V in-record transition counts
  std::vector<double> totals_;                // V row totals
  std::vector<std::uint32_t> prev_;           // trailing chain symbols, sentinel = V
};

}  // namespace epimeter
