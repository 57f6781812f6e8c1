#include "epimeter/config.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <string>

#include "epimeter/error.hpp"
#include "epimeter/learner_factory.hpp"
#include "epimeter/scalinglaw.hpp"

namespace epimeter {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& path) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) fail(path, "unknown key '" + it.key() + "'");
}

void need_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
}

bool get_bool(const json& j, const char* key, bool def, const std::string& path) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) fail(path + '.' + key, "must be a boolean");
  return j.at(key).get<bool>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t def,
                      const std::string& path, std::uint64_t lo,
                      std::uint64_t hi = std::numeric_limits<std::uint64_t>::max()) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  const std::string p = path + '.' + key;
  if (!v.is_number_integer() && !v.is_number_unsigned())
    fail(p, "must be a nonnegative integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < 0)
    fail(p, "must be a nonnegative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < lo || x > hi)
    fail(p, "out of range [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
  return x;
}

double get_double(const json& j, const char* key, double def, const std::string& path,
                  double lo, double hi = std::numeric_limits<double>::infinity(),
                  bool lo_strict = false) {
  if (!j.contains(key)) return def;
  const json& v = j.at(key);
  const std::string p = path + '.' + key;
  if (!v.is_number()) fail(p, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x) || x < lo || (lo_strict && x == lo) || x > hi)
    fail(p, "out of range");
  return x;
}

std::string get_string(const json& j, const char* key, const std::string& def,
                       const std::string& path) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) fail(path + '.' + key, "must be a string");
  return j.at(key).get<std::string>();
}

std::string type_name(const json& j) { return j.type_name(); }

}  // namespace

nlohmann::json normalize_generator_spec(const nlohmann::json& spec, const std::string& path) {
  need_object(spec, path);
  const std::string kind = get_string(spec, "kind", "", path);
  if (kind.empty()) fail(path + ".kind", "generator kind is required");
  json out;
  out["kind"] = kind;
  out["reverse"] = get_bool(spec, "reverse", false, path);
  if (kind == "uniform" || kind == "prg" || kind == "periodic") {
    reject_unknown(spec, {"kind", "reverse", "vocab", "record_len", "pattern"}, path);
    const auto vocab = get_u64(spec, "vocab", 2, path, 2, 65536);
    out["vocab"] = vocab;
    out["record_len"] = get_u64(spec, "record_len", 512, path, 1, 1u << 24);
    if (kind == "periodic") {
      if (!spec.contains("pattern")) fail(path + ".pattern", "periodic data needs a pattern");
      const json& pat = spec.at("pattern");
      if (!pat.is_array() || pat.empty())
        fail(path + ".pattern", "must be a nonempty array of tokens");
      for (const auto& t : pat) {
        if (!t.is_number_integer() && !t.is_number_unsigned())
          fail(path + ".pattern", "tokens must be integers");
        if (t.get<std::int64_t>() < 0 || t.get<std::uint64_t>() >= vocab)
          fail(path + ".pattern", "token out of range [0," + std::to_string(vocab - 1) + "]");
      }
      out["pattern"] = pat;
    } else if (spec.contains("pattern")) {
      fail(path + ".pattern", "only periodic data takes a pattern");
    }
  } else if (kind == "eca") {
    reject_unknown(spec, {"kind", "reverse", "rule", "width", "steps", "burn_in"}, path);
    out["rule"] = get_u64(spec, "rule", 30, path, 0, 255);
    out["width"] = get_u64(spec, "width", 32, path, 3, 1u << 20);
    out["steps"] = get_u64(spec, "steps", 8, path, 1, 1u << 20);
    out["burn_in"] = get_u64(spec, "burn_in", 0, path, 0, 1u << 20);
  } else if (kind == "markov") {
    reject_unknown(spec, {"kind", "reverse", "vocab", "hidden_rows", "seq_len"}, path);
    const auto vocab = get_u64(spec, "vocab", 4, path, 2, 255);
    out["vocab"] = vocab;
    out["hidden_rows"] = get_u64(spec, "hidden_rows", 0, path, 0, vocab);
    out["seq_len"] = get_u64(spec, "seq_len", 512, path, 1, 1u << 24);
  } else if (kind == "hidden_bits") {
    reject_unknown(spec, {"kind", "reverse", "state_size", "hidden", "fwd_steps", "rule"},
                   path);
    const auto n = get_u64(spec, "state_size", 16, path, 1, 63);
    out["state_size"] = n;
    out["hidden"] = get_u64(spec, "hidden", 0, path, 0, n);
    out["fwd_steps"] = get_u64(spec, "fwd_steps", 4, path, 1, 1u << 16);
    out["rule"] = get_u64(spec, "rule", 30, path, 0, 255);
  } else if (kind == "lorenz") {
    reject_unknown(spec,
                   {"kind", "reverse", "dt", "horizon", "quant_bits", "sigma", "rho", "beta"},
                   path);
    out["dt"] = get_double(spec, "dt", 0.005, path, 0.0, 0.05, true);
    out["horizon"] = get_double(spec, "horizon", 30.0 / 0.9, path, 0.0);
    out["quant_bits"] = get_u64(spec, "quant_bits", 10, path, 1, 16);
    out["sigma"] = get_double(spec, "sigma", 10.0, path, 0.0, 1e6, true);
    out["rho"] = get_double(spec, "rho", 28.0, path, 0.0, 1e6, true);
    out["beta"] = get_double(spec, "beta", 8.0 / 3.0, path, 0.0, 1e6, true);
  } else {
    fail(path + ".kind",
         "unknown generator '" + kind +
             "' (expected uniform, periodic, prg, eca, markov, hidden_bits, lorenz)");
  }
  return out;
}

nlohmann::json normalize_requential_spec(const nlohmann::json& spec, const std::string& path) {
  need_object(spec, path);
  reject_unknown(spec,
                 {"teacher", "ema_tau", "max_kl", "static_teacher", "pretrain_passes",
                  "bridge_real_data", "lockstep"},
                 path);
  json out;
  out["ema_tau"] = get_double(spec, "ema_tau", 0.0, path, 0.0);
  out["static_teacher"] = get_bool(spec, "static_teacher", false, path);
  out["pretrain_passes"] = get_u64(spec, "pretrain_passes", 1, path, 1, 1u << 16);
  out["bridge_real_data"] = get_bool(spec, "bridge_real_data", false, path);
  out["lockstep"] = get_bool(spec, "lockstep", false, path);
  if (spec.contains("max_kl"))
    out["max_kl"] = get_double(spec, "max_kl", 0.0, path, 0.0,
                               std::numeric_limits<double>::infinity(), true);
  if (spec.contains("teacher") && !spec.at("teacher").is_null()) {
    try {
      out["teacher"] = normalize_learner_spec(spec.at("teacher"));
    } catch (const ConfigError& e) {
      fail(path + ".teacher", e.what());
    }
  }
  if (out["bridge_real_data"].get<bool>() && !out["static_teacher"].get<bool>())
    fail(path + ".bridge_real_data", "the bridge needs static_teacher=true");
  return out;
}

nlohmann::json normalize_scaling_spec(const nlohmann::json& spec, const std::string& path) {
  need_object(spec, path);
  reject_unknown(spec, {"row", "params", "delta", "test_tokens", "t_grid"}, path);
  json out;
  const bool has_row = spec.contains("row");
  const bool has_params = spec.contains("params");
  if (has_row && has_params) fail(path, "give either row or params, not both");
  if (has_params) {
    const json& pj = spec.at("params");
    need_object(pj, path + ".params");
    reject_unknown(pj, {"E", "alpha", "beta", "N0", "D0"}, path + ".params");
    ScalingLawParams p;
    for (const char* k : {"E", "alpha", "beta", "N0", "D0"})
      if (!pj.contains(k)) fail(path + ".params", std::string("missing key '") + k + "'");
    p.E = get_double(pj, "E", 0, path + ".params", 0.0, 1e308, true);
    p.alpha = get_double(pj, "alpha", 0, path + ".params", 0.0, 1.0, true);
    p.beta = get_double(pj, "beta", 0, path + ".params", 0.0, 1.0, true);
    p.N0 = get_double(pj, "N0", 0, path + ".params", 0.0, 1e308, true);
    p.D0 = get_double(pj, "D0", 0, path + ".params", 0.0, 1e308, true);
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      fail(path + ".params", e.what());
    }
    out["params"] = {{"E", p.E}, {"alpha", p.alpha}, {"beta", p.beta}, {"N0", p.N0},
                     {"D0", p.D0}};
  } else {
    const std::string row = get_string(spec, "row", "language_chinchilla", path);
    try {
      table_row(row);
    } catch (const ConfigError& e) {
      fail(path + ".row", e.what());
    }
    out["row"] = row;
  }
  const bool has_delta = spec.contains("delta");
  const bool has_test = spec.contains("test_tokens");
  if (has_delta && has_test) fail(path, "give either delta or test_tokens, not both");
  if (has_test)
    out["test_tokens"] = get_double(spec, "test_tokens", 0, path, 0.0, 1e308, true);
  else
    out["delta"] = get_double(spec, "delta", 100.0, path, 0.0, 1e308, true);
  json grid;
  if (spec.contains("t_grid")) {
    const json& g = spec.at("t_grid");
    need_object(g, path + ".t_grid");
    reject_unknown(g, {"min", "max", "points"}, path + ".t_grid");
    grid["min"] = get_double(g, "min", 1e-2, path + ".t_grid", 0.0, 1e308, true);
    grid["max"] = get_double(g, "max", 1e6, path + ".t_grid", 0.0, 1e308, true);
    grid["points"] = get_u64(g, "points", 33, path + ".t_grid", 2, 100000);
    if (!(grid["max"].get<double>() > grid["min"].get<double>()))
      fail(path + ".t_grid.max", "must exceed t_grid.min");
  } else {
    grid = {{"min", 1e-2}, {"max", 1e6}, {"points", 33}};
  }
  out["t_grid"] = grid;
  return out;
}

RunConfig parse_config_json(const nlohmann::json& doc) {
  if (!doc.is_object())
    throw ConfigError("config: document must be a JSON object, got " + type_name(doc));
  reject_unknown(doc,
                 {"seed", "units", "output_dir", "generator", "train_records", "test_records",
                  "learners", "budgets", "heldout_records", "exact_rescore", "seeds", "mode",
                  "requential", "scaling"},
                 "config");
  RunConfig c;
  c.seed = get_u64(doc, "seed", 1, "config", 0);
  c.units = get_string(doc, "units", "bits", "config");
  if (c.units != "bits" && c.units != "nats")
    fail("config.units", "must be \"bits\" or \"nats\"");
  c.output_dir = get_string(doc, "output_dir", "out", "config");
  if (c.output_dir.empty()) fail("config.output_dir", "must be nonempty");
  if (doc.contains("generator") && !doc.at("generator").is_null())
    c.generator = normalize_generator_spec(doc.at("generator"));
  c.train_records = get_u64(doc, "train_records", 1024, "config", 1);
  c.test_records = get_u64(doc, "test_records", 256, "config", 1);
  if (doc.contains("learners")) {
    const json& ls = doc.at("learners");
    if (!ls.is_array()) fail("config.learners", "must be an array of learner specs");
    for (std::size_t i = 0; i < ls.size(); ++i) {
      try {
        c.learners.push_back(normalize_learner_spec(ls[i]));
      } catch (const ConfigError& e) {
        fail("config.learners[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  if (doc.contains("budgets")) {
    const json& bs = doc.at("budgets");
    if (!bs.is_array()) fail("config.budgets", "must be an array of token counts");
    for (std::size_t i = 0; i < bs.size(); ++i) {
      const json& b = bs[i];
      const std::string p = "config.budgets[" + std::to_string(i) + "]";
      if ((!b.is_number_integer() && !b.is_number_unsigned()) ||
          (b.is_number_integer() && b.get<std::int64_t>() <= 0))
        fail(p, "must be a positive integer");
      const auto v = b.get<std::uint64_t>();
      if (!c.budgets.empty() && v <= c.budgets.back())
        fail(p, "budgets must be strictly increasing");
      c.budgets.push_back(v);
    }
  }
  c.heldout_records = get_u64(doc, "heldout_records", 0, "config", 0);
  c.exact_rescore = get_bool(doc, "exact_rescore", false, "config");
  if (doc.contains("seeds")) {
    const json& ss = doc.at("seeds");
    if (!ss.is_array() || ss.empty()) fail("config.seeds", "must be a nonempty array");
    for (std::size_t i = 0; i < ss.size(); ++i) {
      const json& s = ss[i];
      if ((!s.is_number_integer() && !s.is_number_unsigned()) ||
          (s.is_number_integer() && s.get<std::int64_t>() < 0))
        fail("config.seeds[" + std::to_string(i) + "]", "must be a nonnegative integer");
      c.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    c.seeds = {c.seed};
  }
  c.mode = get_string(doc, "mode", "prequential", "config");
  if (c.mode != "prequential" && c.mode != "requential")
    fail("config.mode", "must be \"prequential\" or \"requential\"");
  if (doc.contains("requential") && !doc.at("requential").is_null())
    c.requential = normalize_requential_spec(doc.at("requential"));
  else if (c.mode == "requential")
    c.requential = normalize_requential_spec(json::object());
  if (doc.contains("scaling") && !doc.at("scaling").is_null())
    c.scaling = normalize_scaling_spec(doc.at("scaling"));
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config_json(doc);
}

nlohmann::json config_to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["units"] = c.units;
  j["output_dir"] = c.output_dir;
  j["generator"] = c.generator;
  j["train_records"] = c.train_records;
  j["test_records"] = c.test_records;
  j["learners"] = c.learners;
  j["budgets"] = c.budgets;
  j["heldout_records"] = c.heldout_records;
  j["exact_rescore"] = c.exact_rescore;
  j["seeds"] = c.seeds;
  j["mode"] = c.mode;
  j["requential"] = c.requential;
  j["scaling"] = c.scaling;
  return j;
}

void save_config(const RunConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file '" + path + "'");
  out << config_to_json(c).dump(2) << '\n';
  if (!out) throw IoError("failed writing config file '" + path + "'");
}

namespace {

bool type_matches(const json& doc, const std::string& t) {
  if (t == "object") return doc.is_object();
  if (t == "array") return doc.is_array();
  if (t == "string") return doc.is_string();
  if (t == "boolean") return doc.is_boolean();
  if (t == "null") return doc.is_null();
  if (t == "integer") return doc.is_number_integer() || doc.is_number_unsigned();
  if (t == "number") return doc.is_number();
  return false;
}

}  // namespace

void validate_with_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                          const std::string& path) {
  if (schema.contains("type")) {
    const json& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || type_matches(doc, alt.get<std::string>());
    }
    if (!ok) fail(path, "expected type " + t.dump() + ", got " + type_name(doc));
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& v : schema.at("enum")) ok = ok || (doc == v);
    if (!ok) fail(path, "value " + doc.dump() + " not in enum " + schema.at("enum").dump());
  }
  if (doc.is_number()) {
    if (schema.contains("minimum") && doc.get<double>() < schema.at("minimum").get<double>())
      fail(path, "below minimum " + schema.at("minimum").dump());
    if (schema.contains("exclusiveMinimum") &&
        doc.get<double>() <= schema.at("exclusiveMinimum").get<double>())
      fail(path, "not above exclusiveMinimum " + schema.at("exclusiveMinimum").dump());
  }
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& k : schema.at("required"))
        if (!doc.contains(k.get<std::string>()))
          fail(path, "missing required key '" + k.get<std::string>() + "'");
    const json props =
        schema.contains("properties") ? schema.at("properties") : json::object();
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const std::string sub = path + '.' + it.key();
      if (props.contains(it.key())) {
        validate_with_schema(it.value(), props.at(it.key()), sub);
      } else if (schema.contains("additionalProperties")) {
        const json& ap = schema.at("additionalProperties");
        if (ap.is_boolean() && !ap.get<bool>()) fail(path, "unknown key '" + it.key() + "'");
        if (ap.is_object()) validate_with_schema(it.value(), ap, sub);
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema.at("minItems").get<std::size_t>())
      fail(path, "fewer than minItems " + schema.at("minItems").dump());
    if (schema.contains("items")) {
      const json& items = schema.at("items");
      for (std::size_t i = 0; i < doc.size(); ++i)
        validate_with_schema(doc[i], items, path + '[' + std::to_string(i) + ']');
    }
  }
}

}  // namespace epimeter
