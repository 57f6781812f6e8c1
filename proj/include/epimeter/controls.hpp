#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "epimeter/dataset.hpp"

namespace epimeter {

// Control sources: i.i.d. uniform tokens, a tiled periodic pattern, and a
// counter-mode ARX pseudorandom stream (statistical stand-in, not a CSPRNG).
// The stream is chunked into unconditional records of record_len tokens (the
// last record may be shorter).
enum class ControlKind { uniform, periodic, prg };

struct ControlConfig {
  ControlKind kind = ControlKind::uniform;
  std::uint64_t length = 0;          // total tokens
  std::uint32_t vocab = 2;
  std::vector<Token> pattern;        // periodic only
  std::uint64_t record_len = 512;    // chunking for record-based estimators
  void validate() const;
};

Dataset control_generate(const ControlConfig& cfg, std::uint64_t seed,
                         bool parallel = true);

ControlKind control_kind_from_string(const std::string& s);
std::string to_string(ControlKind k);

}  // namespace epimeter
