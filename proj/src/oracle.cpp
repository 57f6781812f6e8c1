#include "epimeter/oracle.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "epimeter/binio.hpp"
#include "epimeter/eca.hpp"
#include "epimeter/error.hpp"

namespace epimeter {

namespace {

std::uint64_t eca_image(std::uint64_t z, std::uint32_t n, std::uint32_t steps, int rule) {
  std::vector<std::uint8_t> s(n);
  for (std::uint32_t i = 0; i < n; ++i) s[i] = (z >> i) & 1;
  for (std::uint32_t k = 0; k < steps; ++k) s = eca_next(s, rule);
  std::uint64_t img = 0;
  for (std::uint32_t i = 0; i < n; ++i)
    if (s[i]) img |= 1ull << i;
  return img;
}

}  // namespace

HiddenBitsOracle::HiddenBitsOracle(const HiddenBitsConfig& cfg, bool reversed,
                                   std::uint64_t max_candidates)
    : cfg_(cfg), reversed_(reversed), max_candidates_(max_candidates) {
  cfg_.validate();
  if (cfg_.state_size > 63)
    throw std::invalid_argument("oracle packs states into 64 bits: state_size <= 63");
  const std::uint32_t bits = reversed_ ? cfg_.state_size : cfg_.hidden;
  if ((1ull << bits) > max_candidates_)
    throw ResourceError("latent enumeration needs 2^" + std::to_string(bits) +
                        " candidates, budget is " + std::to_string(max_candidates_));
  nominal_ = 1ull << bits;
}

void HiddenBitsOracle::begin_record(const RecordView& rec) {
  const std::uint32_t n = cfg_.state_size, h = cfg_.hidden;
  const std::size_t vis = n - h;
  const bool shape_ok = reversed_ ? (rec.input_len == n && rec.size() == n + vis)
                                  : (rec.input_len == vis && rec.size() == vis + n);
  if (!shape_ok) throw std::invalid_argument("record shape does not match oracle config");
  states_.clear();
  images_.clear();
  active_.clear();
  if (!reversed_) {
    std::uint64_t visible = 0;
    for (std::size_t j = 0; j < vis; ++j)
      if (rec.tokens[j]) visible |= 1ull << (h + j);
    states_.reserve(std::size_t{1} << h);
    images_.reserve(std::size_t{1} << h);
    for (std::uint64_t c = 0; c < (1ull << h); ++c) {
      const std::uint64_t z = visible | c;
      states_.push_back(z);
      images_.push_back(eca_image(z, n, cfg_.fwd_steps, cfg_.rule));
    }
  } else {
    std::uint64_t observed = 0;
    for (std::uint32_t i = 0; i < n; ++i)
      if (rec.tokens[i]) observed |= 1ull << i;
    for (std::uint64_t z = 0; z < (1ull << n); ++z)
      if (eca_image(z, n, cfg_.fwd_steps, cfg_.rule) == observed) states_.push_back(z);
  }
  active_.resize(states_.size());
  for (std::uint32_t i = 0; i < active_.size(); ++i) active_[i] = i;
}

std::uint64_t HiddenBitsOracle::target_bit(std::size_t j, std::uint32_t c) const {
  return reversed_ ? (states_[c] >> (cfg_.hidden + j)) & 1 : (images_[c] >> j) & 1;
}

std::vector<double> HiddenBitsOracle::predict(const RecordView& rec, std::size_t pos) const {
  if (pos < rec.input_len) throw std::invalid_argument("oracle predicts target positions");
  const std::size_t j = pos - rec.input_len;
  if (active_.empty()) return {0.5, 0.5};
  std::size_t ones = 0;
  for (auto c : active_) ones += target_bit(j, c);
  const double p1 = static_cast<double>(ones) / active_.size();
  return {1.0 - p1, p1};
}

void HiddenBitsOracle::advance(const RecordView& rec, std::size_t pos) {
  if (pos < rec.input_len) return;
  const std::size_t j = pos - rec.input_len;
  const std::uint64_t bit = rec.tokens[pos] & 1;
  std::vector<std::uint32_t> keep;
  keep.reserve(active_.size());
  for (auto c : active_)
    if (target_bit(j, c) == bit) keep.push_back(c);
  active_ = std::move(keep);
}

void HiddenBitsOracle::update(const RecordView& rec, std::size_t pos) { advance(rec, pos); }

std::unique_ptr<Learner> HiddenBitsOracle::clone() const {
  return std::make_unique<HiddenBitsOracle>(*this);
}

void HiddenBitsOracle::blend_from(const Learner&, const Learner&, double) {
  throw std::invalid_argument("oracle state is not blendable");
}

bool HiddenBitsOracle::record_injective() const {
  if (reversed_) return states_.size() <= 1;
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(images_.size());
  for (auto img : images_)
    if (!seen.insert(img).second) return false;
  return true;
}

void HiddenBitsOracle::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, cfg_.state_size);
  binio::put_le<std::uint32_t>(os, cfg_.hidden);
  binio::put_le<std::uint32_t>(os, cfg_.fwd_steps);
  binio::put_le<std::int32_t>(os, cfg_.rule);
  binio::put_le<std::uint8_t>(os, reversed_ ? 1 : 0);
  binio::put_le<std::uint64_t>(os, max_candidates_);
}

std::unique_ptr<Learner> HiddenBitsOracle::load_payload(std::istream& is) {
  HiddenBitsConfig cfg;
  cfg.state_size = binio::get_le<std::uint32_t>(is);
  cfg.hidden = binio::get_le<std::uint32_t>(is);
  cfg.fwd_steps = binio::get_le<std::uint32_t>(is);
  cfg.rule = binio::get_le<std::int32_t>(is);
  const bool reversed = binio::get_le<std::uint8_t>(is) != 0;
  const std::uint64_t budget = binio::get_le<std::uint64_t>(is);
  return std::make_unique<HiddenBitsOracle>(cfg, reversed, budget);
}

MarkovOracle::MarkovOracle(const MarkovSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t v = spec_.vocab;
  rows_.assign(v * v, 0.0);
  counts_.assign(v * v, 0.0);
  totals_.assign(v, 0.0);
}

void MarkovOracle::begin_record(const RecordView& rec) {
  const std::uint32_t v = spec_.vocab;
  const std::size_t row_len = std::size_t{v} * markov_digits_per_entry(v);
  if (rec.input_len < 1 || (rec.input_len - 1) % row_len != 0)
    throw std::invalid_argument("record input block does not match markov row layout");
  const std::size_t visible = (rec.input_len - 1) / row_len;
  if (visible > v) throw std::invalid_argument("record has more rows than vocab");
  hidden_ = v - static_cast<std::uint32_t>(visible);
  rows_.assign(rows_.size(), 0.0);
  counts_.assign(counts_.size(), 0.0);
  totals_.assign(totals_.size(), 0.0);
  for (std::uint32_t s = hidden_; s < v; ++s) {
    const auto row = decode_visible_row(spec_, rec, s);
    for (std::uint32_t t = 0; t < v; ++t) rows_[std::size_t{s} * v + t] = row[t];
  }
}

std::vector<double> MarkovOracle::predict(const RecordView& rec, std::size_t pos) const {
  if (pos < rec.input_len)
    throw std::invalid_argument("oracle predicts chain positions only");
  const std::uint32_t v = spec_.vocab;
  std::vector<double> p(v + 1, 0.0);
  if (pos == rec.input_len) {
    for (std::uint32_t t = 0; t < v; ++t) p[t] = 1.0 / v;
    return p;
  }
  const Token s = rec.tokens[pos - 1];
  if (s >= v) throw std::invalid_argument("chain state out of range");
  if (s >= hidden_) {
    for (std::uint32_t t = 0; t < v; ++t) p[t] = rows_[std::size_t{s} * v + t];
  } else {
    const double total = totals_[s];
    for (std::uint32_t t = 0; t < v; ++t)
      p[t] = (counts_[std::size_t{s} * v + t] + 1.0) / (total + v);
  }
  return p;
}

void MarkovOracle::advance(const RecordView& rec, std::size_t pos) {
  if (pos <= rec.input_len) return;
  const std::uint32_t v = spec_.vocab;
  const Token prev = rec.tokens[pos - 1], cur = rec.tokens[pos];
  if (prev < v && cur < v) {
    counts_[std::size_t{prev} * v + cur] += 1.0;
    totals_[prev] += 1.0;
  }
}

void MarkovOracle::update(const RecordView& rec, std::size_t pos) { advance(rec, pos); }

std::unique_ptr<Learner> MarkovOracle::clone() const {
  return std::make_unique<MarkovOracle>(*this);
}

void MarkovOracle::blend_from(const Learner&, const Learner&, double) {
  throw std::invalid_argument("oracle state is not blendable");
}

void MarkovOracle::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, spec_.vocab);
  binio::put_le<std::uint32_t>(os, spec_.hidden_rows);
  binio::put_le<std::uint32_t>(os, spec_.seq_len);
}

std::unique_ptr<Learner> MarkovOracle::load_payload(std::istream& is) {
  MarkovSpec spec;
  spec.vocab = binio::get_le<std::uint32_t>(is);
  spec.hidden_rows = binio::get_le<std::uint32_t>(is);
  spec.seq_len = binio::get_le<std::uint32_t>(is);
  return std::make_unique<MarkovOracle>(spec);
}

}  // namespace epimeter
