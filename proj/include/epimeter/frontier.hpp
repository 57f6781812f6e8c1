#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "epimeter/coding.hpp"
#include "epimeter/dataset.hpp"
#include "epimeter/trace.hpp"

namespace epimeter {

// Grid of prequential runs: every learner spec crosses every provided
// (seed, train, test) triple, each run sampled at the shared budgets.
struct SweepPlan {
  std::vector<nlohmann::json> learner_grid;
  std::vector<std::uint64_t> budgets;
  std::size_t heldout_records = 0;
  bool exact_rescore = false;
  void validate() const;
};

struct SweepData {
  std::uint64_t seed = 0;
  const Dataset* train = nullptr;
  const Dataset* test = nullptr;
};

struct RunFailure {
  std::uint64_t run_id = 0;
  std::string hyperparams;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::vector<EstimatePoint> points;
  std::vector<RunFailure> failures;
};

// jobs: 1 = serial reference, 0 = library default thread count. Results are
// identical for any jobs value.
SweepResult sweep(const SweepPlan& plan, const std::vector<SweepData>& data, int jobs = 0);

// Indices (into pts, in x order) of the lower convex hull; collinear points
// are retained, same-x points above the lowest are not.
std::vector<std::size_t> lower_hull_indices(
    const std::vector<std::pair<double, double>>& pts);

struct FrontierEntry {
  std::uint64_t t_ops = 0;
  double total_bits = 0;
  double model_bits = 0;  // S_T
  double data_bits = 0;   // H_T
  std::string hyperparams;
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
};

struct Frontier {
  std::vector<FrontierEntry> entries;  // T strictly increasing, total nonincreasing
  bool log_t = true;                   // hull computed on (log2 T, total_bits)
};

// lower hull (log-T by default) -> per-run median point -> Pareto prune
Frontier build_frontier(const std::vector<EstimatePoint>& points, bool log_t = true);

// per-run median filter exposed for testing: keeps, for each run, the
// hull point with median T (lower middle on even counts)
std::vector<EstimatePoint> median_filter(const std::vector<EstimatePoint>& hull_points);

// split of the largest frontier T' <= T; throws std::out_of_range below range
std::pair<double, double> decompose(const Frontier& f, std::uint64_t t_ops);

// RFC-4180 quoting: wraps in quotes and doubles embedded quotes
std::string csv_quote(const std::string& field);

void frontier_to_csv(const Frontier& f, std::ostream& os);
nlohmann::json frontier_report_json(const Frontier& f, const SweepResult& sweep_result);

}  // namespace epimeter
