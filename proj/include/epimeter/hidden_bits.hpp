#pragma once
#include <cstdint>
#include <vector>

#include "epimeter/dataset.hpp"

namespace epimeter {

// Hidden-bit records: Z uniform over {0,1}^n; the input block is m(Z) = Z with
// its h leading bits removed; the target block is f(Z) = Z evolved fwd_steps
// ECA iterations on the n-cell ring. Loss is computed on f(Z) only.
struct HiddenBitsConfig {
  std::uint32_t state_size = 32;  // n
  std::uint32_t hidden = 0;       // h leading bits removed
  std::uint32_t fwd_steps = 4;
  int rule = 30;
  void validate() const;
};

Dataset hidden_bits_generate(const HiddenBitsConfig& cfg, std::size_t count,
                             std::uint64_t seed, bool parallel = true);

}  // namespace epimeter
