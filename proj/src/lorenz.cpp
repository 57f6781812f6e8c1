#include "epimeter/lorenz.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "epimeter/error.hpp"
#include "epimeter/rng.hpp"

namespace epimeter {

void LorenzConfig::validate() const {
  if (!(dt > 0) || dt > 0.05)
    throw std::invalid_argument("dt must be in (0, 0.05] for a stable fixed-step run");
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  if (quant_bits < 1 || quant_bits > 16)
    throw std::invalid_argument("quant_bits must be in [1,16]");
}

namespace {

std::array<double, 3> deriv(const std::array<double, 3>& s, double sigma, double rho,
                            double beta) {
  return {sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]};
}

}  // namespace

std::array<double, 3> lorenz_rk4_step(const std::array<double, 3>& s, double dt,
                                      double sigma, double rho, double beta) {
  const auto k1 = deriv(s, sigma, rho, beta);
  std::array<double, 3> t;
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * dt * k1[i];
  const auto k2 = deriv(t, sigma, rho, beta);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + 0.5 * dt * k2[i];
  const auto k3 = deriv(t, sigma, rho, beta);
  for (int i = 0; i < 3; ++i) t[i] = s[i] + dt * k3[i];
  const auto k4 = deriv(t, sigma, rho, beta);
  std::array<double, 3> out;
  for (int i = 0; i < 3; ++i)
    out[i] = s[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

Token lorenz_quantize(double v, std::uint32_t bits) {
  const double lo = -30.0, hi = 30.0;
  const std::uint32_t bins = 1u << bits;
  double u = (v - lo) / (hi - lo);
  if (u < 0) u = 0;
  long long b = static_cast<long long>(u * bins);
  if (b >= static_cast<long long>(bins)) b = bins - 1;
  return static_cast<Token>(b);
}

Dataset lorenz_generate(const LorenzConfig& cfg, std::size_t count, std::uint64_t seed,
                        bool parallel) {
  cfg.validate();
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  const std::size_t rec_len = 6;  // 3 input + 3 target tokens
  const std::uint64_t steps = static_cast<std::uint64_t>(std::llround(cfg.horizon / cfg.dt));
  Dataset ds;
  ds.vocab_size = 1u << cfg.quant_bits;
  ds.provenance = "lorenz:horizon=" + std::to_string(cfg.horizon) +
                  ",B=" + std::to_string(cfg.quant_bits) + ":seed=" + std::to_string(seed);
  ds.tokens.resize(count * rec_len);
  ds.mask.resize(count * rec_len);
  ds.roles.resize(count * rec_len);
  ds.offsets.resize(count + 1);
  for (std::size_t r = 0; r <= count; ++r) ds.offsets[r] = r * rec_len;

  long long bad_record = -1;
#ifdef EPIMETER_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
  for (long long r = 0; r < static_cast<long long>(count); ++r) {
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    std::array<double, 3> s{rng.next_double() * 40.0 - 20.0,
                            rng.next_double() * 40.0 - 20.0,
                            rng.next_double() * 40.0};
    const std::size_t base = static_cast<std::size_t>(r) * rec_len;
    for (int i = 0; i < 3; ++i) {
      ds.tokens[base + i] = lorenz_quantize(s[i], cfg.quant_bits);
      ds.mask[base + i] = 0;
      ds.roles[base + i] = kRoleInput;
    }
    for (std::uint64_t k = 0; k < steps; ++k)
      s = lorenz_rk4_step(s, cfg.dt, cfg.sigma, cfg.rho, cfg.beta);
    bool finite = std::isfinite(s[0]) && std::isfinite(s[1]) && std::isfinite(s[2]);
    if (!finite) {
#ifdef EPIMETER_HAVE_OPENMP
#pragma omp critical
#endif
      bad_record = r;
    }
    for (int i = 0; i < 3; ++i) {
      ds.tokens[base + 3 + i] = finite ? lorenz_quantize(s[i], cfg.quant_bits) : Token{0};
      ds.mask[base + 3 + i] = 1;
      ds.roles[base + 3 + i] = kRoleTarget;
    }
  }
  (void)parallel;
  if (bad_record >= 0)
    throw NumericError("lorenz trajectory became non-finite at record " +
                       std::to_string(bad_record));
  return ds;
}

}  // namespace epimeter
