#include "epimeter/dataset.hpp"

#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "epimeter/error.hpp"

namespace epimeter {

RecordView Dataset::record(std::size_t r) const {
  const std::size_t b = offsets[r], e = offsets[r + 1];
  RecordView v;
  v.tokens = {tokens.data() + b, e - b};
  v.mask = {mask.data() + b, e - b};
  v.roles = {roles.data() + b, e - b};
  std::size_t in = 0;
  while (in < v.roles.size() && v.roles[in] == kRoleInput) ++in;
  v.input_len = in;
  return v;
}

void Dataset::append(std::span<const Token> toks, std::span<const std::uint8_t> msk,
                     std::span<const std::uint8_t> rls) {
  if (msk.size() != toks.size() || rls.size() != toks.size())
    throw std::invalid_argument("record mask/roles length mismatch");
  tokens.insert(tokens.end(), toks.begin(), toks.end());
  mask.insert(mask.end(), msk.begin(), msk.end());
  roles.insert(roles.end(), rls.begin(), rls.end());
  offsets.push_back(tokens.size());
}

std::uint64_t Dataset::masked_tokens() const {
  std::uint64_t n = 0;
  for (auto m : mask) n += m ? 1 : 0;
  return n;
}

bool Dataset::conditional() const {
  for (auto r : roles)
    if (r == kRoleInput) return true;
  return false;
}

void Dataset::validate() const {
  if (vocab_size == 0) throw std::invalid_argument("vocab_size must be positive");
  if (mask.size() != tokens.size() || roles.size() != tokens.size())
    throw std::invalid_argument("mask/roles arrays must match token count");
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != tokens.size())
    throw std::invalid_argument("record offsets inconsistent");
  for (auto t : tokens)
    if (t >= vocab_size) throw std::invalid_argument("token out of vocab range");
  for (std::size_t r = 0; r < record_count(); ++r) {
    RecordView v = record(r);
    bool any_masked = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v.roles[i] != kRoleInput && v.roles[i] != kRoleTarget)
        throw std::invalid_argument("unknown role tag");
      // block structure: inputs form a prefix
      if (i >= v.input_len && v.roles[i] == kRoleInput)
        throw std::invalid_argument("input positions must form a record prefix");
      if (v.mask[i] && v.roles[i] == kRoleInput)
        throw std::invalid_argument("input positions cannot be loss-masked in");
      any_masked |= v.mask[i] != 0;
    }
    if (v.input_len > 0 && !any_masked)
      throw std::invalid_argument("conditional record has no masked-in position");
  }
}

// --- binary container ----------------------------------------------------
// magic "EPDS" | u8 version | u8 token_width | u32le vocab | u64le records |
// u64le total_tokens | u32le prov_len | prov | per record: u32le len,
// len*width token bytes, len mask bytes, len role bytes

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

struct ByteReader {
  std::span<const std::uint8_t> b;
  std::size_t pos = 0;
  std::uint8_t u8() {
    if (pos + 1 > b.size()) throw IoError("truncated dataset container");
    return b[pos++];
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(u8()) << (8 * i);
    return v;
  }
};

}  // namespace

std::vector<std::uint8_t> to_epds_bytes(const Dataset& ds) {
  const std::uint8_t width = ds.vocab_size <= 256 ? 1 : 2;
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'E', 'P', 'D', 'S'});
  out.push_back(1);  // version
  out.push_back(width);
  put_u32(out, ds.vocab_size);
  put_u64(out, ds.record_count());
  put_u64(out, ds.total_tokens());
  put_u32(out, static_cast<std::uint32_t>(ds.provenance.size()));
  out.insert(out.end(), ds.provenance.begin(), ds.provenance.end());
  for (std::size_t r = 0; r < ds.record_count(); ++r) {
    RecordView v = ds.record(r);
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    for (Token t : v.tokens) {
      out.push_back(static_cast<std::uint8_t>(t & 0xff));
      if (width == 2) out.push_back(static_cast<std::uint8_t>(t >> 8));
    }
    out.insert(out.end(), v.mask.begin(), v.mask.end());
    out.insert(out.end(), v.roles.begin(), v.roles.end());
  }
  return out;
}

Dataset from_epds_bytes(std::span<const std::uint8_t> bytes) {
  ByteReader rd{bytes};
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "EPDS", 4) != 0)
    throw IoError("bad dataset magic");
  rd.pos = 4;
  if (rd.u8() != 1) throw IoError("unsupported dataset container version");
  const std::uint8_t width = rd.u8();
  if (width != 1 && width != 2) throw IoError("bad token width");
  Dataset ds;
  ds.vocab_size = rd.u32();
  const std::uint64_t records = rd.u64();
  const std::uint64_t total = rd.u64();
  const std::uint32_t plen = rd.u32();
  ds.provenance.resize(plen);
  for (auto& c : ds.provenance) c = static_cast<char>(rd.u8());
  ds.tokens.reserve(total);
  ds.mask.reserve(total);
  ds.roles.reserve(total);
  for (std::uint64_t r = 0; r < records; ++r) {
    const std::uint32_t len = rd.u32();
    for (std::uint32_t i = 0; i < len; ++i) {
      Token t = rd.u8();
      if (width == 2) t |= static_cast<Token>(rd.u8()) << 8;
      ds.tokens.push_back(t);
    }
    for (std::uint32_t i = 0; i < len; ++i) ds.mask.push_back(rd.u8());
    for (std::uint32_t i = 0; i < len; ++i) ds.roles.push_back(rd.u8());
    ds.offsets.push_back(ds.tokens.size());
  }
  if (ds.total_tokens() != total) throw IoError("dataset token count mismatch");
  return ds;
}

void save_epds(const Dataset& ds, const std::string& path) {
  auto bytes = to_epds_bytes(ds);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path);
}

Dataset load_epds(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return from_epds_bytes(bytes);
}

// --- JSON-lines form ------------------------------------------------------

void save_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for write: " + path);
  nlohmann::json header{{"format", "epds-jsonl"},
                        {"version", 1},
                        {"vocab_size", ds.vocab_size},
                        {"provenance", ds.provenance}};
  f << header.dump() << "\n";
  for (std::size_t r = 0; r < ds.record_count(); ++r) {
    RecordView v = ds.record(r);
    nlohmann::json rec{{"tokens", std::vector<int>(v.tokens.begin(), v.tokens.end())},
                       {"mask", std::vector<int>(v.mask.begin(), v.mask.end())},
                       {"roles", std::vector<int>(v.roles.begin(), v.roles.end())}};
    f << rec.dump() << "\n";
  }
  if (!f) throw IoError("write failed: " + path);
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line)) throw IoError("empty jsonl dataset: " + path);
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("format", "") != "epds-jsonl")
    throw IoError("not an epds-jsonl file: " + path);
  Dataset ds;
  ds.vocab_size = header.at("vocab_size").get<std::uint32_t>();
  ds.provenance = header.value("provenance", "");
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    std::vector<Token> toks;
    for (auto& t : rec.at("tokens")) toks.push_back(t.get<Token>());
    std::vector<std::uint8_t> msk, rls;
    for (auto& m : rec.at("mask")) msk.push_back(m.get<std::uint8_t>());
    for (auto& rr : rec.at("roles")) rls.push_back(rr.get<std::uint8_t>());
    ds.append(toks, msk, rls);
  }
  return ds;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t dataset_digest(const Dataset& ds) {
  auto bytes = to_epds_bytes(ds);
  return fnv1a64(bytes);
}

}  // namespace epimeter
