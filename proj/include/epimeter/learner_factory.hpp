#pragma once

#include <memory>
#include <string>

#include "json.hpp"

#include "epimeter/learner.hpp"

namespace epimeter {

// Build a learner from a JSON spec, e.g. {"kind":"kt","vocab":2,"order":3}.
// Unknown kinds or keys and invalid values raise ConfigError with the
// offending key named.
std::unique_ptr<Learner> make_learner(const nlohmann::json& spec);

// Spec with defaults filled and keys checked; dump of this is the canonical
// hyperparameter id used in sweep outputs.
nlohmann::json normalize_learner_spec(const nlohmann::json& spec);
std::string learner_spec_id(const nlohmann::json& spec);

}  // namespace epimeter
