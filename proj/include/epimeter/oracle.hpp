#pragma once

#include <cstdint>

#include "epimeter/hidden_bits.hpp"
#include "epimeter/learner.hpp"
#include "epimeter/markov.hpp"

namespace epimeter {

// Exact posterior over hidden-bit records by brute-force latent enumeration.
// Forward records (input = visible part of Z, target = f(Z)) enumerate the
// 2^h hidden-bit assignments; reversed records (input = f(Z), target =
// visible part of Z) enumerate all 2^n initial states and keep the
// preimages of the observed image. Candidates inconsistent with revealed
// target tokens are filtered as the record advances; prediction averages
// the survivors. update does not learn (the oracle is already optimal).
class HiddenBitsOracle : public Learner {
 public:
  explicit HiddenBitsOracle(const HiddenBitsConfig& cfg, bool reversed = false,
                            std::uint64_t max_candidates = 1ull << 20);

  std::uint32_t vocab_size() const override { return 2; }
  std::string kind() const override { return "oracle_hidden_bits"; }
  CostProfile cost_profile() const override { return {nominal_, nominal_}; }

  void begin_record(const RecordView& rec) override;
  std::vector<double> predict(const RecordView& rec, std::size_t pos) const override;
  void advance(const RecordView& rec, std::size_t pos) override;
  void update(const RecordView& rec, std::size_t pos) override;

  std::unique_ptr<Learner> clone() const override;
  void blend_from(const Learner&, const Learner&, double) override;
  void save(std::ostream& os) const override;
  static std::unique_ptr<Learner> load_payload(std::istream& is);

  std::size_t active_candidates() const { return active_.size(); }
  // true when distinct latent assignments always yield distinct target blocks
  bool record_injective() const;

 private:
  std::uint64_t target_bit(std::size_t j, std::uint32_t c) const;

  HiddenBitsConfig cfg_;
  bool reversed_;
  std::uint64_t max_candidates_;
  std::uint64_t nominal_ = 1;
  std::vector<std::uint64_t> states_;  // candidate Z, bit i = z_i
  std::vector<std::uint64_t> images_;  // f(Z) per candidate (forward mode)
  std::vector<std::uint32_t> active_;  // indices still consistent
};

// Exact predictor for serialized-Markov records: visible rows are decoded
// from the record, hidden rows use the Dirichlet(1) posterior mean over
// in-record transition counts, the first chain token is uniform over V.
class MarkovOracle : public Learner {
 public:
  explicit MarkovOracle(const MarkovSpec& spec);

  std::uint32_t vocab_size() const override { return spec_.vocab + 1; }
  std::string kind() const override { return "oracle_markov"; }
  CostProfile cost_profile() const override { return {2ull * (spec_.vocab + 1), 2}; }

  void begin_record(const RecordView& rec) override;
  std::vector<double> predict(const RecordView& rec, std::size_t pos) const override;
  void advance(const RecordView& rec, std::size_t pos) override;
  void update(const RecordView& rec, std::size_t pos) override;

  std::unique_ptr<Learner> clone() const override;
  void blend_from(const Learner&, const Learner&, double) override;
  void save(std::ostream& os) const override;
  static std::unique_ptr<Learner> load_payload(std::istream& is);

 private:
  MarkovSpec spec_;
  std::uint32_t hidden_ = 0;
  std::vector<double> rows_;    // V*V decoded visible rows (hidden rows zero)
  std::vector<double> counts_;  // V*V in-record transition counts
  std::vector<double> totals_;
};

}  // namespace epimeter
