#include "epimeter/uniform_learner.hpp"

#include <stdexcept>

#include "epimeter/binio.hpp"

namespace epimeter {

UniformBaseline::UniformBaseline(std::uint32_t vocab) : vocab_(vocab) {
  if (vocab == 0) throw std::invalid_argument("vocab must be positive");
}

std::vector<double> UniformBaseline::predict(const RecordView&, std::size_t) const {
  return std::vector<double>(vocab_, 1.0 / vocab_);
}

std::unique_ptr<Learner> UniformBaseline::clone() const {
  return std::make_unique<UniformBaseline>(*this);
}

void UniformBaseline::blend_from(const Learner& prev, const Learner& raw, double) {
  if (prev.kind() != kind() || raw.kind() != kind() || prev.vocab_size() != vocab_ ||
      raw.vocab_size() != vocab_)
    throw std::invalid_argument("blend requires same-shape uniform learners");
}

void UniformBaseline::save(std::ostream& os) const {
  binio::put_bytes(os, "EPLS", 4);
  binio::put_le<std::uint8_t>(os, 1);
  binio::put_string(os, kind());
  binio::put_le<std::uint32_t>(os, vocab_);
}

std::unique_ptr<Learner> UniformBaseline::load_payload(std::istream& is) {
  return std::make_unique<UniformBaseline>(binio::get_le<std::uint32_t>(is));
}

}  // namespace epimeter
