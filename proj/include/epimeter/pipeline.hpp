#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "epimeter/coding.hpp"
#include "epimeter/config.hpp"
#include "epimeter/dataset.hpp"
#include "epimeter/frontier.hpp"
#include "epimeter/trace.hpp"

namespace epimeter {

// Unit conversion at the reporting boundary (internal bits resp. nats).
double bits_as(double bits, const std::string& units);
double nats_as(double nats, const std::string& units);

std::vector<double> log_spaced(double lo, double hi, std::size_t points);

// Dispatch a normalized generator spec. `records` chunks control sources as
// records * record_len tokens; a "reverse": true spec swaps input/target.
Dataset generate_dataset(const nlohmann::json& gen_spec, std::uint64_t records,
                         std::uint64_t seed, bool parallel = true);

// Train/test pair; the test stream uses an independently derived seed.
struct SplitData {
  Dataset train;
  Dataset test;
};
SplitData generate_split(const RunConfig& cfg, std::uint64_t seed, bool parallel = true);

// Single estimation run (cfg.mode selects prequential or requential).
struct EstimateOutput {
  CodingTrace trace;
  std::vector<EstimatePoint> points;
};
EstimateOutput run_estimate(const RunConfig& cfg, bool parallel = false);

// Sweep across cfg.seeds with per-seed datasets, plus dataset provenance
// stamps carried into reports.
struct DatasetStamp {
  std::uint64_t seed = 0;
  std::string train_provenance;
  std::string test_provenance;
  std::uint64_t train_digest = 0;
  std::uint64_t test_digest = 0;
};
struct SweepArtifact {
  std::vector<DatasetStamp> datasets;
  SweepResult result;
};
SweepArtifact run_sweep(const RunConfig& cfg, int jobs = 0);

// gen -> sweep -> frontier -> report in one call.
struct ReportBundle {
  SweepArtifact artifact;
  Frontier frontier;
  nlohmann::json report;
};
ReportBundle run_pipeline(const RunConfig& cfg, int jobs = 0);

// Staged-pipeline artifacts (raw bits; units apply only in reports).
nlohmann::json sweep_artifact_to_json(const SweepArtifact& a);
SweepArtifact sweep_artifact_from_json(const nlohmann::json& j);
nlohmann::json frontier_to_json(const Frontier& f);
Frontier frontier_from_json(const nlohmann::json& j);

// Full report document, values converted to cfg.units.
nlohmann::json pipeline_report_json(const RunConfig& cfg, const SweepArtifact& a,
                                    const Frontier& f);
// Frontier rows in cfg.units: "t_ops,total,model,data,hyperparams".
void report_to_csv(const RunConfig& cfg, const Frontier& f, std::ostream& os);

// Analytic-model output per cfg.scaling, values converted to cfg.units.
nlohmann::json scaling_output_json(const RunConfig& cfg);
void scaling_output_csv(const nlohmann::json& scaling_output, std::ostream& os);

}  // namespace epimeter
