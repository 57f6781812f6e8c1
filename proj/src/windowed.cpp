#include "epimeter/windowed.hpp"

#include <stdexcept>

#include "epimeter/binio.hpp"

namespace epimeter {

void WindowedSpec::validate() const {
  if (vocab == 0) throw std::invalid_argument("vocab must be positive");
  if (offsets.empty() && prev_r == 0)
    throw std::invalid_argument("windowed learner needs offsets or prev_r > 0");
  check_key_capacity(offsets.size() + prev_r, vocab + 1);
}

WindowedConditional::WindowedConditional(const WindowedSpec& spec) : spec_(spec) {
  spec_.validate();
  table_.vocab = spec_.vocab;
  prev_.assign(spec_.prev_r, spec_.vocab);
}

void WindowedConditional::begin_record(const RecordView&) {
  prev_.assign(spec_.prev_r, spec_.vocab);
}

std::uint64_t WindowedConditional::key(const RecordView& rec, std::size_t pos) const {
  const std::size_t il = rec.input_len;
  const std::size_t tl = rec.size() - il;
  if (pos < il || tl == 0)
    throw std::invalid_argument("windowed predict needs a target position");
  const long long align =
      static_cast<long long>(pos - il) - static_cast<long long>(tl - il);
  const std::uint32_t sentinel = spec_.vocab;
  std::vector<std::uint32_t> slots;
  slots.reserve(spec_.offsets.size() + prev_.size());
  for (int o : spec_.offsets) {
    long long idx = align + o;
    if (spec_.wrap && il > 0) {
      idx %= static_cast<long long>(il);
      if (idx < 0) idx += static_cast<long long>(il);
    }
    if (idx < 0 || idx >= static_cast<long long>(il))
      slots.push_back(sentinel);
    else
      slots.push_back(rec.tokens[static_cast<std::size_t>(idx)]);
  }
  for (auto t : prev_) slots.push_back(t);
  return pack_slots(slots, spec_.vocab + 1);
}

std::vector<double> WindowedConditional::predict(const RecordView& rec,
                                                 std::size_t pos) const {
  return table_.predict(key(rec, pos));
}

void WindowedConditional::advance(const RecordView& rec, std::size_t pos) {
  if (pos < rec.input_len || spec_.prev_r == 0) return;
  const Token t = rec.tokens[pos];
  if (t >= spec_.vocab) throw std::invalid_argument("token out of range");
  prev_.erase(prev_.begin());
  prev_.push_back(t);
}

void WindowedConditional::update(const RecordView& rec, std::size_t pos) {
  table_.observe(key(rec, pos), rec.tokens[pos]);
  advance(rec, pos);
}

std::unique_ptr<Learner> WindowedConditional::clone() const {
  return std::make_unique<WindowedConditional>(*this);
}

void WindowedConditional::blend_from(const Learner& prev, const Learner& raw, double w) {
  const auto* p = dynamic_cast<const WindowedConditional*>(&prev);
  const auto* r = dynamic_cast<const WindowedConditional*>(&raw);
  if (!p || !r || p->spec_.offsets != spec_.offsets || r->spec_.offsets != spec_.offsets ||
      p->spec_.prev_r != spec_.prev_r || r->spec_.prev_r != spec_.prev_r)
    throw std::invalid_argument("blend requires same-shape windowed learners");
  table_.blend(p->table_, r->table_, w);
}

void WindowedConditional::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, spec_.vocab);
  binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(spec_.offsets.size()));
  for (int o : spec_.offsets) binio::put_le<std::int32_t>(os, o);
  binio::put_le<std::uint32_t>(os, spec_.prev_r);
  binio::put_le<std::uint8_t>(os, spec_.wrap ? 1 : 0);
  table_.save(os);
  binio::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(prev_.size()));
  for (auto t : prev_) binio::put_le<std::uint32_t>(os, t);
}

std::unique_ptr<Learner> WindowedConditional::load_payload(std::istream& is) {
  WindowedSpec spec;
  spec.vocab = binio::get_le<std::uint32_t>(is);
  const std::uint32_t n = binio::get_le<std::uint32_t>(is);
  spec.offsets.resize(n);
  for (auto& o : spec.offsets) o = binio::get_le<std::int32_t>(is);
  spec.prev_r = binio::get_le<std::uint32_t>(is);
  spec.wrap = binio::get_le<std::uint8_t>(is) != 0;
  auto l = std::make_unique<WindowedConditional>(spec);
  l->table_ = KtTable::load(is);
  const std::uint32_t m = binio::get_le<std::uint32_t>(is);
  l->prev_.resize(m);
  for (auto& t : l->prev_) t = binio::get_le<std::uint32_t>(is);
  return l;
}

}  // namespace epimeter
