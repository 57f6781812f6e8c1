#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace epimeter {

using Token = std::uint16_t;

// per-position role tags
inline constexpr std::uint8_t kRoleInput = 0;
inline constexpr std::uint8_t kRoleTarget = 1;

// One record, viewed in place. Records are laid out as an input block
// (role=input, never loss-masked) followed by a target block (role=target).
// Unconditional data is a single all-target block.
struct RecordView {
  std::span<const Token> tokens;
  std::span<const std::uint8_t> mask;   // 1 = contributes to the loss
  std::span<const std::uint8_t> roles;  // kRoleInput / kRoleTarget
  std::size_t input_len = 0;            // length of the input prefix

  std::size_t size() const { return tokens.size(); }
  std::size_t target_len() const { return tokens.size() - input_len; }
};

// Tokenized records with masks and roles, flattened for locality.
struct Dataset {
  std::uint32_t vocab_size = 0;
  std::string provenance;  // "<generator>:<params>:<seed>" id string
  std::vector<Token> tokens;
  std::vector<std::uint8_t> mask;
  std::vector<std::uint8_t> roles;
  std::vector<std::uint64_t> offsets{0};  // record r = [offsets[r], offsets[r+1])

  std::size_t record_count() const { return offsets.size() - 1; }
  RecordView record(std::size_t r) const;

  // appends one record; mask/roles spans must match tokens length
  void append(std::span<const Token> toks, std::span<const std::uint8_t> msk,
              std::span<const std::uint8_t> rls);

  std::uint64_t total_tokens() const { return tokens.size(); }
  std::uint64_t masked_tokens() const;
  bool conditional() const;  // any input-role position present

  // checks token range, mask/role shape, block structure
  void validate() const;

  bool operator==(const Dataset&) const = default;
};

// binary container (magic "EPDS") and JSON-lines form; both round-trip
// bit-exactly
void save_epds(const Dataset& ds, const std::string& path);
Dataset load_epds(const std::string& path);
void save_jsonl(const Dataset& ds, const std::string& path);
Dataset load_jsonl(const std::string& path);

std::vector<std::uint8_t> to_epds_bytes(const Dataset& ds);
Dataset from_epds_bytes(std::span<const std::uint8_t> bytes);

// 64-bit FNV-1a over a canonical serialization; provenance digests
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t dataset_digest(const Dataset& ds);

}  // namespace epimeter
