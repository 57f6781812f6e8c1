#include "epimeter/eca.hpp"

#include <stdexcept>
#include <string>

#include "epimeter/rng.hpp"

namespace epimeter {

void EcaConfig::validate() const {
  if (rule < 0 || rule > 255) throw std::invalid_argument("rule out of range [0,255]");
  if (width < 3) throw std::invalid_argument("width must be >= 3");
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("burn_in must be >= 0");
}

std::vector<std::uint8_t> eca_next(const std::vector<std::uint8_t>& state, int rule) {
  if (rule < 0 || rule > 255) throw std::invalid_argument("rule out of range [0,255]");
  if (state.size() < 3) throw std::invalid_argument("state must have >= 3 cells");
  const std::size_t n = state.size();
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int l = state[(i + n - 1) % n];
    const int c = state[i];
    const int r = state[(i + 1) % n];
    out[i] = static_cast<std::uint8_t>((rule >> ((l << 2) | (c << 1) | r)) & 1);
  }
  return out;
}

namespace {

void make_record(const EcaConfig& cfg, std::uint64_t rec_seed, Token* toks,
                 std::uint8_t* msk, std::uint8_t* rls) {
  const std::size_t w = static_cast<std::size_t>(cfg.width);
  SplitMix64 rng(rec_seed);
  std::vector<std::uint8_t> s(w);
  for (auto& c : s) c = static_cast<std::uint8_t>(rng.next() & 1);
  for (int i = 0; i < cfg.burn_in; ++i) s = eca_next(s, cfg.rule);
  for (std::size_t i = 0; i < w; ++i) {
    toks[i] = s[i];
    msk[i] = 0;
    rls[i] = kRoleInput;
  }
  for (int i = 0; i < cfg.steps; ++i) s = eca_next(s, cfg.rule);
  for (std::size_t i = 0; i < w; ++i) {
    toks[w + i] = s[i];
    msk[w + i] = 1;
    rls[w + i] = kRoleTarget;
  }
}

}  // namespace

Dataset eca_generate(const EcaConfig& cfg, std::size_t count, std::uint64_t seed,
                     bool parallel) {
  cfg.validate();
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const std::size_t w = static_cast<std::size_t>(cfg.width);
  const std::size_t rec_len = 2 * w;
  Dataset ds;
  ds.vocab_size = 2;
  ds.provenance = "eca:rule=" + std::to_string(cfg.rule) +
                  ",width=" + std::to_string(cfg.width) +
                  ",steps=" + std::to_string(cfg.steps) +
                  ",burn_in=" + std::to_string(cfg.burn_in) +
                  ":seed=" + std::to_string(seed);
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
