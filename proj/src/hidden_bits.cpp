#include "epimeter/hidden_bits.hpp"

#include <stdexcept>
#include <string>

#include "epimeter/eca.hpp"
#include "epimeter/rng.hpp"

namespace epimeter {

void HiddenBitsConfig::validate() const {
  if (state_size < 3) throw std::invalid_argument("state_size must be >= 3");
  if (hidden > state_size) throw std::invalid_argument("hidden must be <= state_size");
  if (fwd_steps < 1) throw std::invalid_argument("fwd_steps must be >= 1");
  if (rule < 0 || rule > 255) throw std::invalid_argument("rule out of range [0,255]");
}

namespace {

void make_record(const HiddenBitsConfig& cfg, std::uint64_t rec_seed, Token* toks,
                 std::uint8_t* msk, std::uint8_t* rls) {
  const std::size_t n = cfg.state_size;
  const std::size_t h = cfg.hidden;
  SplitMix64 rng(rec_seed);
  std::vector<std::uint8_t> z(n);
  for (auto& c : z) c = static_cast<std::uint8_t>(rng.next() & 1);
  // input block: visible suffix z[h..n)
  for (std::size_t i = h; i < n; ++i) {
    toks[i - h] = z[i];
    msk[i - h] = 0;
    rls[i - h] = kRoleInput;
  }
  std::vector<std::uint8_t> y = z;
  for (std::uint32_t i = 0; i < cfg.fwd_steps; ++i) y = eca_next(y, cfg.rule);
  const std::size_t in_len = n - h;
  for (std::size_t i = 0; i < n; ++i) {
    toks[in_len + i] = y[i];
    msk[in_len + i] = 1;
    rls[in_len + i] = kRoleTarget;
  }
}

}  // namespace

Dataset hidden_bits_generate(const HiddenBitsConfig& cfg, std::size_t count,
                             std::uint64_t seed, bool parallel) {
  cfg.validate();
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const std::size_t rec_len = 2 * cfg.state_size - cfg.hidden;
  Dataset ds;
  ds.vocab_size = 2;
  ds.provenance = "hidden_bits:n=" + std::to_string(cfg.state_size) +
                  ",h=" + std::to_string(cfg.hidden) +
                  ",fwd=" + std::to_string(cfg.fwd_steps) +
                  ",rule=" + std::to_string(cfg.rule) + ":seed=" + std::to_string(seed);
  ds.tokens.resize(count * rec_len);
  ds.mask.resize(count * rec_len);
  ds.roles.resize(count * rec_len);
  ds.offsets.resize(count + 1);
  for (std::size_t r = 0; r <= count; ++r) ds.offsets[r] = r * rec_len;

#ifdef EPIMETER_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long long r = 0; r < static_cast<long long>(count); ++r) {
    const std::size_t base = static_cast<std::size_t>(r) * rec_len;
    make_record(cfg, derive_seed(seed, static_cast<std::uint64_t>(r)),
                ds.tokens.data() + base, ds.mask.data() + base, ds.roles.data() + base);
  }
  (void)parallel;
  return ds;
}

}  // namespace epimeter
