#include "epimeter/controls.hpp"

#include <stdexcept>

#include "epimeter/rng.hpp"

namespace epimeter {

void ControlConfig::validate() const {
  if (length < 1) throw std::invalid_argument("length must be >= 1");
  if (vocab < 2) throw std::invalid_argument("vocab must be >= 2");
  if (record_len < 1) throw std::invalid_argument("record_len must be >= 1");
  if (kind == ControlKind::periodic) {
    if (pattern.empty()) throw std::invalid_argument("periodic pattern must be nonempty");
    for (Token t : pattern)
      if (t >= vocab) throw std::invalid_argument("pattern token out of vocab range");
  }
}

ControlKind control_kind_from_string(const std::string& s) {
  if (s == "uniform") return ControlKind::uniform;
  if (s == "periodic") return ControlKind::periodic;
  if (s == "prg") return ControlKind::prg;
  throw std::invalid_argument("unknown control kind: " + s);
}

std::string to_string(ControlKind k) {
  switch (k) {
    case ControlKind::uniform: return "uniform";
    case ControlKind::periodic: return "periodic";
    case ControlKind::prg: return "prg";
  }
  return "?";
}

namespace {

// token index -> token, deterministic and order-free so records can be filled
// in parallel
Token stream_token(const ControlConfig& cfg, std::uint64_t seed, std::uint64_t i) {
  switch (cfg.kind) {
    case ControlKind::periodic:
      return cfg.pattern[i % cfg.pattern.size()];
    case ControlKind::uniform: {
      // one mixed word per token, high bits first; rejection for non-power-of-2
      std::uint64_t ctr = i;
      for (;;) {
        const std::uint64_t w = arx_mix(seed ^ 0x756e69666f726dull, ctr);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % cfg.vocab;
        if (w < limit) return static_cast<Token>(w % cfg.vocab);
        ctr += 0x10000000000ull;  // disjoint retry counters per token
      }
    }
    case ControlKind::prg: {
      if (cfg.vocab == 2) {
        // counter-mode bits: word = arx(key, block), bit picked by low index
        const std::uint64_t w = arx_mix(seed, i >> 6);
        return static_cast<Token>((w >> (i & 63)) & 1);
      }
      std::uint64_t ctr = i;
      for (;;) {
        const std::uint64_t w = arx_mix(seed, ctr);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % cfg.vocab;
        if (w < limit) return static_cast<Token>(w % cfg.vocab);
        ctr += 0x10000000000ull;
      }
    }
  }
  return 0;
}

}  // namespace

Dataset control_generate(const ControlConfig& cfg, std::uint64_t seed, bool parallel) {
  cfg.validate();
  Dataset ds;
  ds.vocab_size = cfg.vocab;
  ds.provenance = "control:" + to_string(cfg.kind) + ",len=" + std::to_string(cfg.length) +
                  ",vocab=" + std::to_string(cfg.vocab) + ":seed=" + std::to_string(seed);
  const std::uint64_t n = cfg.length;
  ds.tokens.resize(n);
  ds.mask.assign(n, 1);
  ds.roles.assign(n, kRoleTarget);
  const std::uint64_t records = (n + cfg.record_len - 1) / cfg.record_len;
  ds.offsets.resize(records + 1);
  for (std::uint64_t r = 0; r <= records; ++r)
    ds.offsets[r] = std::min<std::uint64_t>(r * cfg.record_len, n);

#ifdef EPIMETER_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i)
    ds.tokens[static_cast<std::size_t>(i)] =
        stream_token(cfg, seed, static_cast<std::uint64_t>(i));
  (void)parallel;
  return ds;
}

}  // namespace epimeter
