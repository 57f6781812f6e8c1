#pragma once
#include <cstdint>
#include <vector>

#include "epimeter/dataset.hpp"

namespace epimeter {

// Elementary cellular automaton on a periodic ring. Records pair the state X
// after burn_in iterations (input block) with X evolved `steps` further
// (target block, loss-masked).
struct EcaConfig {
  int rule = 30;       // 0..255
  int width = 32;      // ring size, >= 3
  int steps = 8;       // iterations between X and Y, >= 1
  int burn_in = 0;     // iterations before X is read off
  void validate() const;
};

// one synchronous step; next cell = bit (l<<2 | c<<1 | r) of the rule byte
std::vector<std::uint8_t> eca_next(const std::vector<std::uint8_t>& state, int rule);

// parallel=true uses OpenMP across records; output is bit-identical either way
Dataset eca_generate(const EcaConfig& cfg, std::size_t count, std::uint64_t seed,
                     bool parallel = true);

}  // namespace epimeter
