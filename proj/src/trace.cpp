#include "epimeter/trace.hpp"

#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "epimeter/binio.hpp"
#include "epimeter/dataset.hpp"

namespace epimeter {

std::uint64_t compute_trace_digest(const CodingTrace& trace) {
  std::ostringstream os(std::ios::binary);
  binio::put_string(os, trace.mode);
  binio::put_string(os, trace.learner_kind);
  binio::put_string(os, trace.hyperparams);
  binio::put_le<std::uint64_t>(os, trace.seed);
  binio::put_double(os, trace.prob_floor);
  binio::put_le<std::uint64_t>(os, trace.steps.size());
  for (const auto& s : trace.steps) {
    binio::put_le<std::uint64_t>(os, s.step);
    binio::put_double(os, s.bits);
    binio::put_double(os, s.overhead_bits);
    binio::put_le<std::uint64_t>(os, s.tokens);
    binio::put_le<std::uint64_t>(os, s.cum_ops);
  }
  binio::put_double(os, trace.final_loss_bits_per_token);
  binio::put_double(os, trace.model_bits);
  binio::put_double(os, trace.model_bits_raw);
  binio::put_double(os, trace.model_bits_with_overhead);
  binio::put_double(os, trace.data_bits);
  binio::put_le<std::uint64_t>(os, trace.data_tokens);
  binio::put_le<std::uint64_t>(os, trace.train_tokens);
  binio::put_le<std::uint64_t>(os, trace.test_total_tokens);
  binio::put_le<std::uint8_t>(os, trace.truncated ? 1 : 0);
  const std::string bytes = os.str();
  return fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

void trace_to_csv(const CodingTrace& trace, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "step,bits,cumulative_ops\n";
  for (const auto& s : trace.steps)
    os << s.step << ',' << s.bits << ',' << s.cum_ops << '\n';
}

nlohmann::json trace_summary_json(const CodingTrace& trace) {
  nlohmann::json j;
  j["mode"] = trace.mode;
  j["learner_kind"] = trace.learner_kind;
  j["hyperparams"] = trace.hyperparams;
  j["seed"] = trace.seed;
  j["prob_floor"] = trace.prob_floor;
  j["steps"] = trace.steps.size();
  j["final_loss_bits_per_token"] = trace.final_loss_bits_per_token;
  j["model_bits"] = trace.model_bits;
  j["model_bits_raw"] = trace.model_bits_raw;
  j["model_bits_with_overhead"] = trace.model_bits_with_overhead;
  j["data_bits"] = trace.data_bits;
  j["data_tokens"] = trace.data_tokens;
  j["train_tokens"] = trace.train_tokens;
  j["test_total_tokens"] = trace.test_total_tokens;
  j["truncated"] = trace.truncated;
  j["digest"] = compute_trace_digest(trace);
  return j;
}

EstimatePoint two_part(const CodingTrace& trace, const CostModel& cost) {
  EstimatePoint p;
  p.t_ops = cost.total();
  p.model_bits = trace.model_bits;
  p.data_bits = trace.data_bits;
  p.total_bits = trace.model_bits + trace.data_bits;
  p.data_bits_per_token =
      trace.data_tokens ? trace.data_bits / trace.data_tokens : 0.0;
  p.train_tokens = trace.train_tokens;
  p.hyperparams = trace.hyperparams;
  p.seed = trace.seed;
  p.trace_digest = compute_trace_digest(trace);
  return p;
}

}  // namespace epimeter
