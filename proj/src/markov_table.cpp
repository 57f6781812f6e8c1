#include "epimeter/markov_table.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "epimeter/binio.hpp"

namespace epimeter {

void MarkovTableSpec::validate() const {
  if (chain_vocab < 2) throw std::invalid_argument("chain_vocab must be >= 2");
  if (digits_per_entry < 1) throw std::invalid_argument("digits_per_entry must be >= 1");
  if (use_digits && (digits_used < 1 || digits_used > digits_per_entry))
    throw std::invalid_argument("digits_used must be in [1, digits_per_entry]");
  if (use_ctx && (ratio_buckets < 1 || total_buckets < 1))
    throw std::invalid_argument("ctx bucket counts must be >= 1");
  // Key capacity: digit and prev slots have radix V+1; ctx slots have their own.
  const std::uint32_t v1 = chain_vocab + 1;
  std::uint64_t cap = 1;
  auto mul = [&cap](std::uint64_t r) {
    if (cap > (~0ull) / r) throw std::invalid_argument("context key space exceeds 64 bits");
    cap *= r;
  };
  if (use_digits)
    for (std::uint32_t i = 0; i < chain_vocab * digits_used; ++i) mul(v1);
  if (use_ctx) {
    mul(v1);
    mul(ratio_buckets);
    mul(total_buckets);
  }
  for (std::uint32_t i = 0; i < prev_r; ++i) mul(v1);
}

MarkovTableLearner::MarkovTableLearner(const MarkovTableSpec& spec) : spec_(spec) {
  spec_.validate();
  table_.vocab = spec_.chain_vocab + 1;
  counts_.assign(std::size_t{spec_.chain_vocab} * spec_.chain_vocab, 0.0);
  totals_.assign(spec_.chain_vocab, 0.0);
  prev_.assign(spec_.prev_r, spec_.chain_vocab);
}

void MarkovTableLearner::begin_record(const RecordView& rec) {
  const std::uint32_t v = spec_.chain_vocab;
  const std::size_t row_len = std::size_t{v} * spec_.digits_per_entry;
  if (rec.input_len < 1 || (rec.input_len - 1) % row_len != 0)
    throw std::invalid_argument("record input block does not match markov row layout");
  const std::size_t visible = (rec.input_len - 1) / row_len;
  if (visible > v) throw std::invalid_argument("record has more rows than chain_vocab");
  hidden_ = v - static_cast<std::uint32_t>(visible);
  counts_.assign(counts_.size(), 0.0);
  totals_.assign(totals_.size(), 0.0);
  prev_.assign(spec_.prev_r, v);
}

std::uint32_t MarkovTableLearner::state_at(const RecordView& rec, std::size_t pos) const {
  if (pos <= rec.input_len) return spec_.chain_vocab;  // first chain token: no state
  const Token t = rec.tokens[pos - 1];
  return t < spec_.chain_vocab ? t : spec_.chain_vocab;
}

std::uint64_t MarkovTableLearner::key(const RecordView& rec, std::size_t pos) const {
  if (pos < rec.input_len)
    throw std::invalid_argument("markov_table predicts chain positions only");
  const std::uint32_t v = spec_.chain_vocab;
  const std::uint32_t sentinel = v;
  const std::uint32_t s = state_at(rec, pos);
  std::uint64_t k = 0;
  auto push = [&k](std::uint32_t slot, std::uint64_t radix) { k = k * radix + slot; };
  if (spec_.use_digits) {
    const bool visible = s < v && s >= hidden_;
    const std::size_t row_start =
        visible ? std::size_t{s - hidden_} * v * spec_.digits_per_entry : 0;
    for (std::uint32_t e = 0; e < v; ++e)
      for (std::uint32_t g = 0; g < spec_.digits_used; ++g) {
        std::uint32_t slot = sentinel;
        if (visible) slot = rec.tokens[row_start + std::size_t{e} * spec_.digits_per_entry + g];
        push(slot < v ? slot : sentinel, v + 1);
      }
  }
  if (spec_.use_ctx) {
    std::uint32_t am = sentinel, ratio = 0, totb = 0;
    if (s < v && totals_[s] > 0) {
      const double* row = &counts_[std::size_t{s} * v];
      std::uint32_t best = 0;
      for (std::uint32_t t = 1; t < v; ++t)
        if (row[t] > row[best]) best = t;
      am = best;
      const double total = totals_[s];
      auto clampb = [](double x, std::uint32_t n) {
        long long b = static_cast<long long>(x);
        if (b < 0) b = 0;
        if (b >= static_cast<long long>(n)) b = n - 1;
        return static_cast<std::uint32_t>(b);
      };
      ratio = clampb(spec_.ratio_buckets * row[best] / (total + 1.0), spec_.ratio_buckets);
      totb = clampb(std::log2(1.0 + total), spec_.total_buckets);
    }
    push(am, v + 1);
    push(ratio, spec_.ratio_buckets);
    push(totb, spec_.total_buckets);
  }
  for (auto t : prev_) push(t, v + 1);
  return k;
}

std::vector<double> MarkovTableLearner::predict(const RecordView& rec,
                                                std::size_t pos) const {
  return table_.predict(key(rec, pos));
}

void MarkovTableLearner::advance(const RecordView& rec, std::size_t pos) {
  if (pos < rec.input_len) return;
  const std::uint32_t v = spec_.chain_vocab;
  const Token cur = rec.tokens[pos];
  if (pos > rec.input_len) {
    const Token prev = rec.tokens[pos - 1];
    if (prev < v && cur < v) {
      counts_[std::size_t{prev} * v + cur] += 1.0;
      totals_[prev] += 1.0;
    }
  }
  if (spec_.prev_r > 0) {
    prev_.erase(prev_.begin());
    prev_.push_back(cur < v ? cur : v);
  }
}

void MarkovTableLearner::update(const RecordView& rec, std::size_t pos) {
  table_.observe(key(rec, pos), rec.tokens[pos]);
  advance(rec, pos);
}

std::unique_ptr<Learner> MarkovTableLearner::clone() const {
  return std::make_unique<MarkovTableLearner>(*this);
}

void MarkovTableLearner::blend_from(const Learner& prev, const Learner& raw, double w) {
  const auto* p = dynamic_cast<const MarkovTableLearner*>(&prev);
  const auto* r = dynamic_cast<const MarkovTableLearner*>(&raw);
  auto same = [this](const MarkovTableLearner* o) {
    return o && o->spec_.chain_vocab == spec_.chain_vocab &&
           o->spec_.digits_per_entry == spec_.digits_per_entry &&
           o->spec_.use_digits == spec_.use_digits &&
           o->spec_.digits_used == spec_.digits_used &&
           o->spec_.use_ctx == spec_.use_ctx &&
           o->spec_.ratio_buckets == spec_.ratio_buckets &&
           o->spec_.total_buckets == spec_.total_buckets && o->spec_.prev_r == spec_.prev_r;
  };
  if (!same(p) || !same(r))
    throw std::invalid_argument("blend requires same-shape markov_table learners");
  table_.blend(p->table_, r->table_, w);
}

void MarkovTableLearner::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, spec_.chain_vocab);
  binio::put_le<std::uint32_t>(os, spec_.digits_per_entry);
  binio::put_le<std::uint8_t>(os, spec_.use_digits ? 1 : 0);
  binio::put_le<std::uint32_t>(os, spec_.digits_used);
  binio::put_le<std::uint8_t>(os, spec_.use_ctx ? 1 : 0);
  binio::put_le<std::uint32_t>(os, spec_.ratio_buckets);
  binio::put_le<std::uint32_t>(os, spec_.total_buckets);
  binio::put_le<std::uint32_t>(os, spec_.prev_r);
  table_.save(os);
}

std::unique_ptr<Learner> MarkovTableLearner::load_payload(std::istream& is) {
  MarkovTableSpec spec;
  spec.chain_vocab = binio::get_le<std::uint32_t>(is);
  spec.digits_per_entry = binio::get_le<std::uint32_t>(is);
  spec.use_digits = binio::get_le<std::uint8_t>(is) != 0;
  spec.digits_used = binio::get_le<std::uint32_t>(is);
  spec.use_ctx = binio::get_le<std::uint8_t>(is) != 0;
  spec.ratio_buckets = binio::get_le<std::uint32_t>(is);
  spec.total_buckets = binio::get_le<std::uint32_t>(is);
  spec.prev_r = binio::get_le<std::uint32_t>(is);
  auto l = std::make_unique<MarkovTableLearner>(spec);
  l->table_ = KtTable::load(is);
  return l;
}

}  // namespace epimeter
