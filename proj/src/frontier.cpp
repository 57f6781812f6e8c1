#include "epimeter/frontier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#ifdef EPIMETER_HAVE_OPENMP
#include <omp.h>
#endif

#include "epimeter/error.hpp"

namespace epimeter {

void SweepPlan::validate() const {
  if (learner_grid.empty()) throw std::invalid_argument("sweep grid must be nonempty");
  if (budgets.empty()) throw std::invalid_argument("sweep needs at least one budget");
  for (std::size_t i = 0; i < budgets.size(); ++i) {
    if (budgets[i] == 0) throw std::invalid_argument("budgets must be positive");
    if (i && budgets[i] <= budgets[i - 1])
      throw std::invalid_argument("budgets must be strictly increasing");
  }
}

SweepResult sweep(const SweepPlan& plan, const std::vector<SweepData>& data, int jobs) {
  plan.validate();
  if (data.empty()) throw std::invalid_argument("sweep needs at least one dataset");
  for (const auto& d : data)
    if (!d.train || !d.test) throw std::invalid_argument("sweep data entry missing dataset");

  struct Run {
    std::size_t cell;
    std::size_t dat;
  };
  std::vector<Run> runs;
  for (std::size_t d = 0; d < data.size(); ++d)
    for (std::size_t c = 0; c < plan.learner_grid.size(); ++c) runs.push_back({c, d});

  std::vector<std::vector<EstimatePoint>> per_run(runs.size());
  std::vector<RunFailure> failures(runs.size());
  std::vector<std::uint8_t> failed(runs.size(), 0);

  const long long n = static_cast<long long>(runs.size());
#ifdef EPIMETER_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads()) if (jobs != 1)
#endif
  for (long long i = 0; i < n; ++i) {
    const Run& run = runs[static_cast<std::size_t>(i)];
    const SweepData& d = data[run.dat];
    PrequentialOptions opt;
    opt.budgets = plan.budgets;
    opt.heldout_records = plan.heldout_records;
    opt.exact_rescore = plan.exact_rescore;
    opt.seed = d.seed;
    try {
      PrequentialResult res =
          prequential_run(plan.learner_grid[run.cell], *d.train, *d.test, opt);
      for (auto& p : res.points) p.run_id = static_cast<std::uint64_t>(i);
      per_run[static_cast<std::size_t>(i)] = std::move(res.points);
    } catch (const std::exception& e) {
      failed[static_cast<std::size_t>(i)] = 1;
      failures[static_cast<std::size_t>(i)] = {
          static_cast<std::uint64_t>(i),
          plan.learner_grid[run.cell].dump(),
          d.seed,
          e.what()};
    }
  }

  SweepResult out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (failed[i]) {
      out.failures.push_back(std::move(failures[i]));
      continue;
    }
    for (auto& p : per_run[i]) out.points.push_back(std::move(p));
  }
  return out;
}

std::vector<std::size_t> lower_hull_indices(
    const std::vector<std::pair<double, double>>& pts) {
  if (pts.empty()) return {};
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].first != pts[b].first) return pts[a].first < pts[b].first;
    if (pts[a].second != pts[b].second) return pts[a].second < pts[b].second;
    return a < b;
  });
  // same-x: only the lowest y (with duplicates of it) can lie on a lower hull
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && pts[order[j]].first == pts[order[i]].first) ++j;
    const double ymin = pts[order[i]].second;
    for (std::size_t k = i; k < j; ++k)
      if (pts[order[k]].second == ymin) cand.push_back(order[k]);
    i = j;
  }
  auto cross = [&](std::size_t o, std::size_t a, std::size_t b) {
    return (pts[a].first - pts[o].first) * (pts[b].second - pts[o].second) -
           (pts[a].second - pts[o].second) * (pts[b].first - pts[o].first);
  };
  std::vector<std::size_t> hull;
  for (std::size_t idx : cand) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), idx) < 0)
      hull.pop_back();
    hull.push_back(idx);
  }
  return hull;
}

std::vector<EstimatePoint> median_filter(const std::vector<EstimatePoint>& hull_points) {
  std::map<std::uint64_t, std::vector<EstimatePoint>> by_run;
  for (const auto& p : hull_points) by_run[p.run_id].push_back(p);
  std::vector<EstimatePoint> out;
  for (auto& [run, pts] : by_run) {
    std::sort(pts.begin(), pts.end(), [](const EstimatePoint& a, const EstimatePoint& b) {
      if (a.t_ops != b.t_ops) return a.t_ops < b.t_ops;
      return a.total_bits < b.total_bits;
    });
    out.push_back(pts[(pts.size() - 1) / 2]);
  }
  return out;
}

Frontier build_frontier(const std::vector<EstimatePoint>& points, bool log_t) {
  Frontier f;
  f.log_t = log_t;
  if (points.empty()) return f;
  // canonical order first, so the result is independent of arrival order
  std::vector<EstimatePoint> pts = points;
  std::sort(pts.begin(), pts.end(), [](const EstimatePoint& a, const EstimatePoint& b) {
    if (a.t_ops != b.t_ops) return a.t_ops < b.t_ops;
    if (a.total_bits != b.total_bits) return a.total_bits < b.total_bits;
    if (a.hyperparams != b.hyperparams) return a.hyperparams < b.hyperparams;
    if (a.run_id != b.run_id) return a.run_id < b.run_id;
    return a.seed < b.seed;
  });
  std::vector<std::pair<double, double>> xy;
  xy.reserve(pts.size());
  for (const auto& p : pts) {
    if (p.t_ops == 0) throw std::invalid_argument("estimate point with zero compute");
    const double x = log_t ? std::log2(static_cast<double>(p.t_ops))
                           : static_cast<double>(p.t_ops);
    xy.emplace_back(x, p.total_bits);
  }
  std::vector<EstimatePoint> hull;
  for (std::size_t idx : lower_hull_indices(xy)) hull.push_back(pts[idx]);
  std::vector<EstimatePoint> med = median_filter(hull);
  std::sort(med.begin(), med.end(), [](const EstimatePoint& a, const EstimatePoint& b) {
    if (a.t_ops != b.t_ops) return a.t_ops < b.t_ops;
    return a.total_bits < b.total_bits;
  });
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : med) {
    if (!f.entries.empty() && f.entries.back().t_ops == p.t_ops) continue;
    if (p.total_bits > best) continue;
    best = p.total_bits;
    f.entries.push_back(
        {p.t_ops, p.total_bits, p.model_bits, p.data_bits, p.hyperparams, p.run_id, p.seed});
  }
  return f;
}

std::pair<double, double> decompose(const Frontier& f, std::uint64_t t_ops) {
  if (f.entries.empty() || t_ops < f.entries.front().t_ops)
    throw std::out_of_range("budget below the smallest frontier point");
  const FrontierEntry* best = &f.entries.front();
  for (const auto& e : f.entries) {
    if (e.t_ops > t_ops) break;
    best = &e;
  }
  return {best->model_bits, best->data_bits};
}

std::string csv_quote(const std::string& field) {
  std::string out = "\"";
  for (char c : field) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

void frontier_to_csv(const Frontier& f, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t_ops,total_bits,model_bits,data_bits,hyperparams\n";
  for (const auto& e : f.entries)
    os << e.t_ops << ',' << e.total_bits << ',' << e.model_bits << ',' << e.data_bits << ','
       << csv_quote(e.hyperparams) << '\n';
}

nlohmann::json frontier_report_json(const Frontier& f, const SweepResult& sweep_result) {
  nlohmann::json j;
  j["log_t"] = f.log_t;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : f.entries) {
    nlohmann::json je;
    je["t_ops"] = e.t_ops;
    je["total_bits"] = e.total_bits;
    je["model_bits"] = e.model_bits;
    je["data_bits"] = e.data_bits;
    je["hyperparams"] = e.hyperparams;
    je["run_id"] = e.run_id;
    je["seed"] = e.seed;
    j["entries"].push_back(je);
  }
  j["points_total"] = sweep_result.points.size();
  j["failures"] = nlohmann::json::array();
  for (const auto& fr : sweep_result.failures) {
    nlohmann::json jf;
    jf["run_id"] = fr.run_id;
    jf["hyperparams"] = fr.hyperparams;
    jf["seed"] = fr.seed;
    jf["message"] = fr.message;
    j["failures"].push_back(jf);
  }
  return j;
}

}  // namespace epimeter
