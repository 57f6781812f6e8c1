#include "epimeter/kt.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "epimeter/binio.hpp"

namespace epimeter {

std::vector<double> KtTable::predict(std::uint64_t key) const {
  std::vector<double> p(vocab, 1.0 / vocab);
  auto it = counts.find(key);
  if (it == counts.end()) return p;
  double tot = 0;
  for (double c : it->second) tot += c;
  const double denom = tot + 0.5 * vocab;
  for (std::uint32_t v = 0; v < vocab; ++v) p[v] = (it->second[v] + 0.5) / denom;
  return p;
}

void KtTable::observe(std::uint64_t key, Token t) {
  if (t >= vocab) throw std::invalid_argument("token out of range for count table");
  auto& row = counts[key];
  if (row.empty()) row.assign(vocab, 0.0);
  row[t] += 1.0;
}

void KtTable::blend(const KtTable& prev, const KtTable& raw, double w) {
  if (prev.vocab != vocab || raw.vocab != vocab)
    throw std::invalid_argument("blend requires matching vocabularies");
  std::unordered_map<std::uint64_t, std::vector<double>> out;
  out.reserve(std::max(prev.counts.size(), raw.counts.size()));
  for (const auto& [k, row] : prev.counts) {
    auto& o = out[k];
    o.assign(vocab, 0.0);
    for (std::uint32_t v = 0; v < vocab; ++v) o[v] = w * row[v];
  }
  for (const auto& [k, row] : raw.counts) {
    auto& o = out[k];
    if (o.empty()) o.assign(vocab, 0.0);
    for (std::uint32_t v = 0; v < vocab; ++v) o[v] += (1.0 - w) * row[v];
  }
  counts = std::move(out);
}

void KtTable::save(std::ostream& os) const {
  binio::put_le<std::uint32_t>(os, vocab);
  binio::put_le<std::uint64_t>(os, counts.size());
  std::vector<std::uint64_t> keys;
  keys.reserve(counts.size());
  for (const auto& [k, row] : counts) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (std::uint64_t k : keys) {
    binio::put_le<std::uint64_t>(os, k);
    for (double c : counts.at(k)) binio::put_double(os, c);
  }
}

KtTable KtTable::load(std::istream& is) {
  KtTable t;
  t.vocab = binio::get_le<std::uint32_t>(is);
  if (t.vocab == 0) throw IoError("count table with zero vocab");
  const std::uint64_t n = binio::get_le<std::uint64_t>(is);
  t.counts.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::uint64_t k = binio::get_le<std::uint64_t>(is);
    std::vector<double> row(t.vocab);
    for (auto& c : row) c = binio::get_double(is);
    t.counts.emplace(k, std::move(row));
  }
  return t;
}

void check_key_capacity(std::size_t slot_count, std::uint32_t radix) {
  if (radix < 2) throw std::invalid_argument("key radix must be >= 2");
  std::uint64_t cap = 1;
  for (std::size_t i = 0; i < slot_count; ++i) {
    if (cap > (~0ull) / radix)
      throw std::invalid_argument("context key space exceeds 64 bits: " +
                                  std::to_string(slot_count) + " slots of radix " +
                                  std::to_string(radix));
    cap *= radix;
  }
}

std::uint64_t pack_slots(const std::vector<std::uint32_t>& slots, std::uint32_t radix) {
  std::uint64_t key = 0;
  for (std::size_t i = slots.size(); i-- > 0;) key = key * radix + slots[i];
  return key;
}

KtContext::KtContext(std::uint32_t vocab, std::uint32_t order) : order_(order) {
  if (vocab == 0) throw std::invalid_argument("vocab must be positive");
  check_key_capacity(order, vocab + 1);
  table_.vocab = vocab;
  ctx_.assign(order_, vocab);
}

std::uint64_t KtContext::key() const {
  return pack_slots(ctx_, table_.vocab + 1);
}

void KtContext::begin_record(const RecordView&) {
  ctx_.assign(order_, table_.vocab);
}

std::vector<double> KtContext::predict(const RecordView&, std::size_t) const {
  return table_.predict(key());
}

void KtContext::advance(const RecordView& rec, std::size_t pos) {
  if (order_ == 0) return;
  const Token t = rec.tokens[pos];
  if (t >= table_.vocab) throw std::invalid_argument("token out of range");
  ctx_.erase(ctx_.begin());
  ctx_.push_back(t);
}

void KtContext::update(const RecordView& rec, std::size_t pos) {
  table_.observe(key(), rec.tokens[pos]);
  advance(rec, pos);
}

std::unique_ptr<Learner> KtContext::clone() const {
  return std::make_unique<KtContext>(*this);
}

void KtContext::blend_from(const Learner& prev, const Learner& raw, double w) {
  const auto* p = dynamic_cast<const KtContext*>(&prev);
  const auto* r = dynamic_cast<const KtContext*>(&raw);
  if (!p || !r || p->order_ != order_ || r->order_ != order_)
    throw std::invalid_argument("blend requires same-shape kt learners");
  table_.blend(p->table_, r->table_, w);
}

void KtContext::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, order_);
  table_.save(os);
  binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(ctx_.size()));
  for (auto c : ctx_) binio::put_le<std::uint32_t>(os, c);
}

std::unique_ptr<Learner> KtContext::load_payload(std::istream& is) {
  const std::uint32_t order = binio::get_le<std::uint32_t>(is);
  KtTable table = KtTable::load(is);
  auto l = std::make_unique<KtContext>(table.vocab, order);
  l->table_ = std::move(table);
  const std::uint32_t n = binio::get_le<std::uint32_t>(is);
  l->ctx_.resize(n);
  for (auto& c : l->ctx_) c = binio::get_le<std::uint32_t>(is);
  return l;
}

}  // namespace epimeter
