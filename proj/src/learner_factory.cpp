#include "epimeter/learner_factory.hpp"

#include <set>
#include <stdexcept>

#include "epimeter/binio.hpp"
#include "epimeter/error.hpp"
#include "epimeter/kt.hpp"
#include "epimeter/markov_table.hpp"
#include "epimeter/oracle.hpp"
#include "epimeter/uniform_learner.hpp"
#include "epimeter/windowed.hpp"

namespace epimeter {

namespace {

using nlohmann::json;

void reject_unknown(const json& spec, const std::set<std::string>& allowed) {
  for (auto it = spec.begin(); it != spec.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown learner spec key \"" + it.key() + "\"");
}

template <class T>
T take(const json& spec, const std::string& key, T fallback) {
  if (!spec.contains(key)) return fallback;
  try {
    return spec.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("learner spec key \"" + key + "\": " + e.what());
  }
}

std::uint32_t take_vocab(const json& spec, const std::string& key, std::uint32_t fallback) {
  std::uint32_t v = take<std::uint32_t>(spec, key, fallback);
  if (v < 2 || v > 65536)
    throw ConfigError("learner spec key \"" + key + "\": out of range [2,65536]");
  return v;
}

}  // namespace

nlohmann::json normalize_learner_spec(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("kind"))
    throw ConfigError("learner spec must be an object with a \"kind\" key");
  const std::string kind = spec.at("kind").get<std::string>();
  json out;
  out["kind"] = kind;
  if (kind == "uniform") {
    reject_unknown(spec, {"kind", "vocab"});
    out["vocab"] = take_vocab(spec, "vocab", 2);
  } else if (kind == "kt") {
    reject_unknown(spec, {"kind", "vocab", "order"});
    out["vocab"] = take_vocab(spec, "vocab", 2);
    out["order"] = take<std::uint32_t>(spec, "order", 0);
  } else if (kind == "windowed") {
    reject_unknown(spec, {"kind", "vocab", "offsets", "prev_r", "wrap"});
    out["vocab"] = take_vocab(spec, "vocab", 2);
    out["offsets"] = take<std::vector<int>>(spec, "offsets", {0});
    out["prev_r"] = take<std::uint32_t>(spec, "prev_r", 0);
    out["wrap"] = take<bool>(spec, "wrap", true);
  } else if (kind == "markov_table") {
    reject_unknown(spec, {"kind", "chain_vocab", "use_digits", "digits_used", "use_ctx",
                          "ratio_buckets", "total_buckets", "prev_r"});
    out["chain_vocab"] = take_vocab(spec, "chain_vocab", 4);
    out["use_digits"] = take<bool>(spec, "use_digits", true);
    out["digits_used"] = take<std::uint32_t>(spec, "digits_used", 1);
    out["use_ctx"] = take<bool>(spec, "use_ctx", false);
    out["ratio_buckets"] = take<std::uint32_t>(spec, "ratio_buckets", 4);
    out["total_buckets"] = take<std::uint32_t>(spec, "total_buckets", 4);
    out["prev_r"] = take<std::uint32_t>(spec, "prev_r", 0);
  } else if (kind == "oracle_hidden_bits") {
    reject_unknown(spec, {"kind", "state_size", "hidden", "fwd_steps", "rule", "reversed",
                          "max_candidates"});
    out["state_size"] = take<std::uint32_t>(spec, "state_size", 32);
    out["hidden"] = take<std::uint32_t>(spec, "hidden", 0);
    out["fwd_steps"] = take<std::uint32_t>(spec, "fwd_steps", 4);
    out["rule"] = take<int>(spec, "rule", 30);
    out["reversed"] = take<bool>(spec, "reversed", false);
    out["max_candidates"] = take<std::uint64_t>(spec, "max_candidates", 1ull << 20);
  } else if (kind == "oracle_markov") {
    reject_unknown(spec, {"kind", "vocab", "hidden_rows", "seq_len"});
    out["vocab"] = take_vocab(spec, "vocab", 4);
    out["hidden_rows"] = take<std::uint32_t>(spec, "hidden_rows", 0);
    out["seq_len"] = take<std::uint32_t>(spec, "seq_len", 512);
  } else {
    throw ConfigError("unknown learner kind \"" + kind + "\"");
  }
  return out;
}

std::string learner_spec_id(const nlohmann::json& spec) {
  return normalize_learner_spec(spec).dump();
}

std::unique_ptr<Learner> make_learner(const nlohmann::json& spec) {
  const json s = normalize_learner_spec(spec);
  const std::string kind = s.at("kind").get<std::string>();
  try {
    if (kind == "uniform") return std::make_unique<UniformBaseline>(s.at("vocab").get<std::uint32_t>());
    if (kind == "kt")
      return std::make_unique<KtContext>(s.at("vocab").get<std::uint32_t>(),
                                         s.at("order").get<std::uint32_t>());
    if (kind == "windowed") {
      WindowedSpec w;
      w.vocab = s.at("vocab").get<std::uint32_t>();
      w.offsets = s.at("offsets").get<std::vector<int>>();
      w.prev_r = s.at("prev_r").get<std::uint32_t>();
      w.wrap = s.at("wrap").get<bool>();
      return std::make_unique<WindowedConditional>(w);
    }
    if (kind == "markov_table") {
      MarkovTableSpec m;
      m.chain_vocab = s.at("chain_vocab").get<std::uint32_t>();
      m.digits_per_entry = markov_digits_per_entry(m.chain_vocab);
      m.use_digits = s.at("use_digits").get<bool>();
      m.digits_used = s.at("digits_used").get<std::uint32_t>();
      m.use_ctx = s.at("use_ctx").get<bool>();
      m.ratio_buckets = s.at("ratio_buckets").get<std::uint32_t>();
      m.total_buckets = s.at("total_buckets").get<std::uint32_t>();
      m.prev_r = s.at("prev_r").get<std::uint32_t>();
      return std::make_unique<MarkovTableLearner>(m);
    }
    if (kind == "oracle_hidden_bits") {
      HiddenBitsConfig h;
      h.state_size = s.at("state_size").get<std::uint32_t>();
      h.hidden = s.at("hidden").get<std::uint32_t>();
      h.fwd_steps = s.at("fwd_steps").get<std::uint32_t>();
      h.rule = s.at("rule").get<int>();
      return std::make_unique<HiddenBitsOracle>(h, s.at("reversed").get<bool>(),
                                                s.at("max_candidates").get<std::uint64_t>());
    }
    MarkovSpec m;
    m.vocab = s.at("vocab").get<std::uint32_t>();
    m.hidden_rows = s.at("hidden_rows").get<std::uint32_t>();
    m.seq_len = s.at("seq_len").get<std::uint32_t>();
    return std::make_unique<MarkovOracle>(m);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("learner spec invalid: ") + e.what());
  }
}

std::unique_ptr<Learner> load_learner(std::istream& is) {
  char magic[4];
  binio::get_bytes(is, magic, 4);
  if (std::string(magic, 4) != "EPLS") throw IoError("bad learner snapshot magic");
  const auto version = binio::get_le<std::uint8_t>(is);
  if (version != 1) throw IoError("unsupported learner snapshot version");
  const std::string kind = binio::get_string(is);
  if (kind == "uniform") return UniformBaseline::load_payload(is);
  if (kind == "kt") return KtContext::load_payload(is);
  if (kind == "windowed") return WindowedConditional::load_payload(is);
  if (kind == "markov_table") return MarkovTableLearner::load_payload(is);
  if (kind == "oracle_hidden_bits") return HiddenBitsOracle::load_payload(is);
  if (kind == "oracle_markov") return MarkovOracle::load_payload(is);
  throw IoError("unknown learner kind in snapshot: " + kind);
}

}  // namespace epimeter
