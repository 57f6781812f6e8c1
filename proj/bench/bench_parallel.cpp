// Wall-clock comparison of the serial reference paths and the OpenMP kernels
// (per-record generation, per-run sweep). Outputs must match bit for bit; the
// speedup column is informational.
#include <chrono>
#include <cstdio>
#include <functional>

#include "epimeter/controls.hpp"
#include "epimeter/eca.hpp"
#include "epimeter/frontier.hpp"
#include "epimeter/markov.hpp"

using namespace epimeter;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void row(const char* name, double serial, double parallel, bool identical) {
  std::printf("%-22s %9.3fs %9.3fs %6.2fx  %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
  std::printf("%-22s %10s %10s %7s  %s\n", "kernel", "serial", "parallel", "speedup",
              "outputs");

  {
    EcaConfig cfg;
    cfg.rule = 30;
    cfg.width = 64;
    cfg.steps = 16;
    Dataset a, b;
    const double ts = seconds([&] { a = eca_generate(cfg, 20000, 7, false); });
    const double tp = seconds([&] { b = eca_generate(cfg, 20000, 7, true); });
    row("eca_generate", ts, tp, a == b);
  }
  {
    MarkovSpec spec;
    spec.vocab = 4;
    spec.hidden_rows = 2;
    spec.seq_len = 256;
    Dataset a, b;
    const double ts = seconds([&] { a = markov_generate(spec, 20000, 11, false); });
    const double tp = seconds([&] { b = markov_generate(spec, 20000, 11, true); });
    row("markov_generate", ts, tp, a == b);
  }
  {
    ControlConfig cfg;
    cfg.kind = ControlKind::prg;
    cfg.length = 4'000'000;
    Dataset a, b;
    const double ts = seconds([&] { a = control_generate(cfg, 13, false); });
    const double tp = seconds([&] { b = control_generate(cfg, 13, true); });
    row("control_generate", ts, tp, a == b);
  }
  {
    EcaConfig cfg;
    cfg.rule = 54;
    cfg.width = 32;
    cfg.steps = 8;
    const Dataset train = eca_generate(cfg, 3000, 17);
    const Dataset test = eca_generate(cfg, 300, 18);
    SweepPlan plan;
    for (int order : {0, 1, 2, 3})
      plan.learner_grid.push_back({{"kind", "kt"}, {"vocab", 2}, {"order", order}});
    plan.budgets = {8000, 16000, 32000, 64000};
    std::vector<SweepData> data;
    for (std::uint64_t s : {1ull, 2ull, 3ull}) data.push_back({s, &train, &test});
    SweepResult a, b;
    const double ts = seconds([&] { a = sweep(plan, data, 1); });
    const double tp = seconds([&] { b = sweep(plan, data, 0); });
    bool same = a.points.size() == b.points.size();
    for (std::size_t i = 0; same && i < a.points.size(); ++i)
      same = a.points[i].trace_digest == b.points[i].trace_digest &&
             a.points[i].total_bits == b.points[i].total_bits;
    row("sweep", ts, tp, same);
  }
  return 0;
}
