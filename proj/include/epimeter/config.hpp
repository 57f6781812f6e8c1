#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace epimeter {

// Validated run configuration shared by all CLI commands. Sub-specs
// (generator, learners, requential, scaling) are stored normalized: defaults
// filled, keys checked, so serialize -> parse round-trips to an equal config.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string units = "bits";  // output units: "bits" | "nats"
  std::string output_dir = "out";
  nlohmann::json generator;  // normalized generator spec, or null
  std::uint64_t train_records = 1024;
  std::uint64_t test_records = 256;
  std::vector<nlohmann::json> learners;  // normalized learner grid
  std::vector<std::uint64_t> budgets;    // masked-token checkpoints; empty = one pass
  std::uint64_t heldout_records = 0;     // 0 = score on the whole test set
  bool exact_rescore = false;
  std::vector<std::uint64_t> seeds;  // sweep replication seeds; defaults to {seed}
  std::string mode = "prequential";  // estimate mode: "prequential" | "requential"
  nlohmann::json requential;         // normalized requential options, or null
  nlohmann::json scaling;            // normalized analytic-model spec, or null

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::string& path);         // load + validate
RunConfig parse_config_json(const nlohmann::json& doc);  // validation core
nlohmann::json config_to_json(const RunConfig& cfg);     // canonical form
void save_config(const RunConfig& cfg, const std::string& path);

// Normalized sub-specs with path-qualified diagnostics.
nlohmann::json normalize_generator_spec(const nlohmann::json& spec,
                                        const std::string& path = "generator");
nlohmann::json normalize_requential_spec(const nlohmann::json& spec,
                                         const std::string& path = "requential");
nlohmann::json normalize_scaling_spec(const nlohmann::json& spec,
                                      const std::string& path = "scaling");

// Minimal JSON-Schema subset validator (type, properties, required, items,
// enum, additionalProperties, minimum/exclusiveMinimum, minItems); throws
// ConfigError naming the failing path. Covers the schemas shipped in
// schemas/.
void validate_with_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                          const std::string& path = "$");

}  // namespace epimeter
