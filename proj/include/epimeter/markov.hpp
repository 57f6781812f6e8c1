#pragma once
#include <cstdint>
#include <vector>

#include "epimeter/dataset.hpp"

namespace epimeter {

// Hidden-row Markov chains: each record serializes the visible rows of a
// freshly sampled transition matrix, then a chain sampled from it. Rows
// 0..hidden_rows-1 are hidden (omitted from the serialization).
//
// Rows are sampled Dirichlet(1,...,1) and quantized to an 8-bit fixed-point
// grid (largest-remainder, denominator 255) before anything else uses them:
// the chain itself is sampled from the quantized matrix, so the serialized
// rows carry the exact chain parameters.
struct MarkovSpec {
  std::uint32_t vocab = 4;        // V symbols
  std::uint32_t hidden_rows = 0;  // h: rows 0..h-1 hidden
  std::uint32_t seq_len = 512;    // chain tokens per record
  void validate() const;
};

inline constexpr int kMarkovQuantDenominator = 255;  // 8-bit fixed point

// base-V digits needed to hold one quantized entry (smallest d: V^d >= 256)
std::uint32_t markov_digits_per_entry(std::uint32_t vocab);

// quantize a probability row to integers summing to kMarkovQuantDenominator
std::vector<int> quantize_row(const std::vector<double>& row);
std::vector<double> dequantize_row(const std::vector<int>& q);

// serialization layout per record:
//   [visible rows h..V-1, each V entries x digits_per_entry base-V digits]
//   [separator token (=V)] [chain tokens]
// vocab_size = V + 1 (separator). Loss mask covers the chain only.
Dataset markov_generate(const MarkovSpec& spec, std::size_t count, std::uint64_t seed,
                        bool parallel = true);

// decode row `sym` (must be visible) from a record's input block
std::vector<double> decode_visible_row(const MarkovSpec& spec, const RecordView& rec,
                                       std::uint32_t sym);

}  // namespace epimeter
