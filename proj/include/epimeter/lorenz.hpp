#pragma once
#include <array>
#include <cstdint>

#include "epimeter/dataset.hpp"

namespace epimeter {

// Lorenz flow records: the input block is the quantized initial state, the
// target block the quantized state after `horizon` time units of classical
// fixed-step RK4. Coordinates are binned uniformly over [-30,30] into 2^B
// bins (clipped), one token per coordinate.
struct LorenzConfig {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
  double dt = 0.005;
  double horizon = 30.0 / 0.9;  // 30 Lyapunov times at lambda_1 ~ 0.9
  std::uint32_t quant_bits = 10;  // B, vocab = 2^B
  // init box: x,y ~ U[-20,20], z ~ U[0,40] (U[-20,20]^3 shifted +20 in z)
  void validate() const;
};

std::array<double, 3> lorenz_rk4_step(const std::array<double, 3>& s, double dt,
                                      double sigma, double rho, double beta);

// bin a coordinate value into [0, 2^B): uniform over [-30,30], clipped
Token lorenz_quantize(double v, std::uint32_t bits);

Dataset lorenz_generate(const LorenzConfig& cfg, std::size_t count, std::uint64_t seed,
                        bool parallel = true);

}  // namespace epimeter
