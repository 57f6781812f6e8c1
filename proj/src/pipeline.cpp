#include "epimeter/pipeline.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "epimeter/controls.hpp"
#include "epimeter/eca.hpp"
#include "epimeter/error.hpp"
#include "epimeter/hidden_bits.hpp"
#include "epimeter/lorenz.hpp"
#include "epimeter/markov.hpp"
#include "epimeter/reorder.hpp"
#include "epimeter/requential.hpp"
#include "epimeter/rng.hpp"
#include "epimeter/scalinglaw.hpp"

namespace epimeter {
namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr std::uint64_t kTestStreamSalt = 0x74657374;  // "test"

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

double bits_as(double bits, const std::string& units) {
  return units == "nats" ? bits * kLn2 : bits;
}

double nats_as(double nats, const std::string& units) {
  return units == "bits" ? nats / kLn2 : nats;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw std::invalid_argument("log grid needs 0 < lo < hi and at least 2 points");
  std::vector<double> out(points);
  const double span = std::log(hi / lo);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = lo * std::exp(span * static_cast<double>(i) / (points - 1));
  out.back() = hi;
  return out;
}

Dataset generate_dataset(const nlohmann::json& gen_spec, std::uint64_t records,
                         std::uint64_t seed, bool parallel) {
  if (!gen_spec.is_object()) throw ConfigError("generator spec is missing");
  const auto kind = gen_spec.at("kind").get<std::string>();
  Dataset ds;
  if (kind == "uniform" || kind == "periodic" || kind == "prg") {
    ControlConfig cc;
    cc.kind = control_kind_from_string(kind);
    cc.vocab = gen_spec.at("vocab").get<std::uint32_t>();
    cc.record_len = gen_spec.at("record_len").get<std::uint64_t>();
    cc.length = records * cc.record_len;
    if (gen_spec.contains("pattern"))
      for (const auto& t : gen_spec.at("pattern"))
        cc.pattern.push_back(static_cast<Token>(t.get<std::uint32_t>()));
    ds = control_generate(cc, seed, parallel);
  } else if (kind == "eca") {
    EcaConfig ec;
    ec.rule = gen_spec.at("rule").get<int>();
    ec.width = gen_spec.at("width").get<int>();
    ec.steps = gen_spec.at("steps").get<int>();
    ec.burn_in = gen_spec.at("burn_in").get<int>();
    ds = eca_generate(ec, records, seed, parallel);
  } else if (kind == "markov") {
    MarkovSpec ms;
    ms.vocab = gen_spec.at("vocab").get<std::uint32_t>();
    ms.hidden_rows = gen_spec.at("hidden_rows").get<std::uint32_t>();
    ms.seq_len = gen_spec.at("seq_len").get<std::uint32_t>();
    ds = markov_generate(ms, records, seed, parallel);
  } else if (kind == "hidden_bits") {
    HiddenBitsConfig hc;
    hc.state_size = gen_spec.at("state_size").get<std::uint32_t>();
    hc.hidden = gen_spec.at("hidden").get<std::uint32_t>();
    hc.fwd_steps = gen_spec.at("fwd_steps").get<std::uint32_t>();
    hc.rule = gen_spec.at("rule").get<int>();
    ds = hidden_bits_generate(hc, records, seed, parallel);
  } else if (kind == "lorenz") {
    LorenzConfig lc;
    lc.dt = gen_spec.at("dt").get<double>();
    lc.horizon = gen_spec.at("horizon").get<double>();
    lc.quant_bits = gen_spec.at("quant_bits").get<std::uint32_t>();
    lc.sigma = gen_spec.at("sigma").get<double>();
    lc.rho = gen_spec.at("rho").get<double>();
    lc.beta = gen_spec.at("beta").get<double>();
    ds = lorenz_generate(lc, records, seed, parallel);
  } else {
    throw ConfigError("unknown generator kind '" + kind + "'");
  }
  if (gen_spec.value("reverse", false)) ds = reorder(ds, Direction::reverse);
  return ds;
}

SplitData generate_split(const RunConfig& cfg, std::uint64_t seed, bool parallel) {
  if (!cfg.generator.is_object())
    throw ConfigError("config.generator: required for data-driven commands");
  SplitData s;
  s.train = generate_dataset(cfg.generator, cfg.train_records, seed, parallel);
  s.test = generate_dataset(cfg.generator, cfg.test_records,
                            derive_seed(seed, kTestStreamSalt), parallel);
  return s;
}

EstimateOutput run_estimate(const RunConfig& cfg, bool parallel) {
  if (cfg.learners.empty())
    throw ConfigError("config.learners: estimate needs at least one learner");
  const SplitData data = generate_split(cfg, cfg.seed, parallel);
  EstimateOutput out;
  if (cfg.mode == "prequential") {
    PrequentialOptions opt;
    opt.budgets = cfg.budgets;
    opt.heldout_records = cfg.heldout_records;
    opt.exact_rescore = cfg.exact_rescore;
    opt.seed = cfg.seed;
    PrequentialResult r = prequential_run(cfg.learners.front(), data.train, data.test, opt);
    out.trace = std::move(r.trace);
    out.points = std::move(r.points);
  } else {
    const nlohmann::json req =
        cfg.requential.is_object() ? cfg.requential : nlohmann::json::object();
    RequentialOptions opt;
    opt.student_spec = cfg.learners.front();
    if (req.contains("teacher")) opt.teacher_spec = req.at("teacher");
    opt.ema_tau = req.value("ema_tau", 0.0);
    if (req.contains("max_kl")) opt.max_kl = req.at("max_kl").get<double>();
    opt.static_teacher = req.value("static_teacher", false);
    opt.pretrain_passes = req.value("pretrain_passes", std::size_t{1});
    opt.bridge_real_data = req.value("bridge_real_data", false);
    opt.lockstep = req.value("lockstep", false);
    opt.budgets = cfg.budgets;
    opt.heldout_records = cfg.heldout_records;
    opt.seed = cfg.seed;
    RequentialResult r = requential_run(opt, data.train, data.test);
    out.trace = std::move(r.trace);
    out.points = std::move(r.points);
  }
  return out;
}

SweepArtifact run_sweep(const RunConfig& cfg, int jobs) {
  if (cfg.learners.empty())
    throw ConfigError("config.learners: sweep needs at least one learner");
  if (cfg.budgets.empty())
    throw ConfigError("config.budgets: sweep needs at least one budget");
  const bool parallel = jobs != 1;
  SweepArtifact art;
  std::deque<SplitData> splits;
  std::vector<SweepData> data;
  for (std::uint64_t s : cfg.seeds) {
    splits.push_back(generate_split(cfg, s, parallel));
    const SplitData& sp = splits.back();
    art.datasets.push_back({s, sp.train.provenance, sp.test.provenance,
                            dataset_digest(sp.train), dataset_digest(sp.test)});
    data.push_back({s, &sp.train, &sp.test});
  }
  SweepPlan plan;
  plan.learner_grid = cfg.learners;
  plan.budgets = cfg.budgets;
  plan.heldout_records = cfg.heldout_records;
  plan.exact_rescore = cfg.exact_rescore;
  art.result = sweep(plan, data, jobs);
  return art;
}

ReportBundle run_pipeline(const RunConfig& cfg, int jobs) {
  ReportBundle b;
  b.artifact = run_sweep(cfg, jobs);
  b.frontier = build_frontier(b.artifact.result.points);
  b.report = pipeline_report_json(cfg, b.artifact, b.frontier);
  return b;
}

nlohmann::json sweep_artifact_to_json(const SweepArtifact& a) {
  nlohmann::json j;
  j["schema"] = "epimeter-sweep/1";
  auto& ds = j["datasets"] = nlohmann::json::array();
  for (const auto& st : a.datasets)
    ds.push_back({{"seed", st.seed},
                  {"train_provenance", st.train_provenance},
                  {"test_provenance", st.test_provenance},
                  {"train_digest", st.train_digest},
                  {"test_digest", st.test_digest}});
  auto& pts = j["points"] = nlohmann::json::array();
  for (const auto& p : a.result.points)
    pts.push_back({{"t_ops", p.t_ops},
                   {"model_bits", p.model_bits},
                   {"data_bits", p.data_bits},
                   {"total_bits", p.total_bits},
                   {"data_bits_per_token", p.data_bits_per_token},
                   {"train_tokens", p.train_tokens},
                   {"hyperparams", p.hyperparams},
                   {"run_id", p.run_id},
                   {"seed", p.seed},
                   {"trace_digest", p.trace_digest}});
  auto& fs = j["failures"] = nlohmann::json::array();
  for (const auto& f : a.result.failures)
    fs.push_back({{"run_id", f.run_id},
                  {"hyperparams", f.hyperparams},
                  {"seed", f.seed},
                  {"message", f.message}});
  return j;
}

SweepArtifact sweep_artifact_from_json(const nlohmann::json& j) {
  SweepArtifact a;
  try {
    for (const auto& d : j.at("datasets"))
      a.datasets.push_back({d.at("seed").get<std::uint64_t>(),
                            d.at("train_provenance").get<std::string>(),
                            d.at("test_provenance").get<std::string>(),
                            d.at("train_digest").get<std::uint64_t>(),
                            d.at("test_digest").get<std::uint64_t>()});
    for (const auto& p : j.at("points")) {
      EstimatePoint pt;
      pt.t_ops = p.at("t_ops").get<std::uint64_t>();
      pt.model_bits = p.at("model_bits").get<double>();
      pt.data_bits = p.at("data_bits").get<double>();
      pt.total_bits = p.at("total_bits").get<double>();
      pt.data_bits_per_token = p.at("data_bits_per_token").get<double>();
      pt.train_tokens = p.at("train_tokens").get<std::uint64_t>();
      pt.hyperparams = p.at("hyperparams").get<std::string>();
      pt.run_id = p.at("run_id").get<std::uint64_t>();
      pt.seed = p.at("seed").get<std::uint64_t>();
      pt.trace_digest = p.at("trace_digest").get<std::uint64_t>();
      a.result.points.push_back(std::move(pt));
    }
    for (const auto& f : j.at("failures"))
      a.result.failures.push_back({f.at("run_id").get<std::uint64_t>(),
                                   f.at("hyperparams").get<std::string>(),
                                   f.at("seed").get<std::uint64_t>(),
                                   f.at("message").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("sweep artifact is malformed: ") + e.what());
  }
  return a;
}

nlohmann::json frontier_to_json(const Frontier& f) {
  nlohmann::json j;
  j["schema"] = "epimeter-frontier/1";
  j["log_t"] = f.log_t;
  auto& es = j["entries"] = nlohmann::json::array();
  for (const auto& e : f.entries)
    es.push_back({{"t_ops", e.t_ops},
                  {"total_bits", e.total_bits},
                  {"model_bits", e.model_bits},
                  {"data_bits", e.data_bits},
                  {"hyperparams", e.hyperparams},
                  {"run_id", e.run_id},
                  {"seed", e.seed}});
  return j;
}

Frontier frontier_from_json(const nlohmann::json& j) {
  Frontier f;
  try {
    f.log_t = j.at("log_t").get<bool>();
    for (const auto& e : j.at("entries")) {
      FrontierEntry fe;
      fe.t_ops = e.at("t_ops").get<std::uint64_t>();
      fe.total_bits = e.at("total_bits").get<double>();
      fe.model_bits = e.at("model_bits").get<double>();
      fe.data_bits = e.at("data_bits").get<double>();
      fe.hyperparams = e.at("hyperparams").get<std::string>();
      fe.run_id = e.at("run_id").get<std::uint64_t>();
      fe.seed = e.at("seed").get<std::uint64_t>();
      f.entries.push_back(std::move(fe));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("frontier artifact is malformed: ") + e.what());
  }
  return f;
}

nlohmann::json pipeline_report_json(const RunConfig& cfg, const SweepArtifact& a,
                                    const Frontier& f) {
  nlohmann::json rep;
  rep["schema"] = "epimeter-report/1";
  rep["units"] = cfg.units;
  rep["config"] = config_to_json(cfg);
  auto& ds = rep["datasets"] = nlohmann::json::array();
  for (const auto& st : a.datasets)
    ds.push_back({{"seed", st.seed},
                  {"train_provenance", st.train_provenance},
                  {"test_provenance", st.test_provenance},
                  {"train_digest", hex64(st.train_digest)},
                  {"test_digest", hex64(st.test_digest)}});
  rep["sweep"] = {{"points", a.result.points.size()},
                  {"failures", a.result.failures.size()}};
  auto& fails = rep["failures"] = nlohmann::json::array();
  for (const auto& fl : a.result.failures)
    fails.push_back({{"run_id", fl.run_id},
                     {"hyperparams", fl.hyperparams},
                     {"seed", fl.seed},
                     {"message", fl.message}});
  auto& ent = rep["frontier"] = nlohmann::json::array();
  for (const auto& e : f.entries)
    ent.push_back({{"t_ops", e.t_ops},
                   {"total", bits_as(e.total_bits, cfg.units)},
                   {"model", bits_as(e.model_bits, cfg.units)},
                   {"data", bits_as(e.data_bits, cfg.units)},
                   {"hyperparams", e.hyperparams},
                   {"run_id", e.run_id},
                   {"seed", e.seed}});
  return rep;
}

void report_to_csv(const RunConfig& cfg, const Frontier& f, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t_ops,total,model,data,hyperparams\n";
  for (const auto& e : f.entries)
    os << e.t_ops << ',' << bits_as(e.total_bits, cfg.units) << ','
       << bits_as(e.model_bits, cfg.units) << ',' << bits_as(e.data_bits, cfg.units) << ','
       << csv_quote(e.hyperparams) << '\n';
}

nlohmann::json scaling_output_json(const RunConfig& cfg) {
  if (!cfg.scaling.is_object())
    throw ConfigError("config.scaling: required for the scaling command");
  ScalingLawParams p;
  if (cfg.scaling.contains("row")) {
    p = table_row(cfg.scaling.at("row").get<std::string>());
  } else {
    const auto& pj = cfg.scaling.at("params");
    p = {pj.at("E").get<double>(), pj.at("alpha").get<double>(),
         pj.at("beta").get<double>(), pj.at("N0").get<double>(),
         pj.at("D0").get<double>()};
  }
  const double delta = cfg.scaling.contains("delta")
                           ? cfg.scaling.at("delta").get<double>()
                           : cfg.scaling.at("test_tokens").get<double>() / p.D0;
  const auto& g = cfg.scaling.at("t_grid");
  const std::vector<double> grid = log_spaced(g.at("min").get<double>(),
                                              g.at("max").get<double>(),
                                              g.at("points").get<std::size_t>());
  const Asymptotics a = asymptotics(p, delta * p.D0);
  auto conv = [&cfg](double nats) { return nats_as(nats, cfg.units); };
  nlohmann::json out;
  out["schema"] = "epimeter-scaling/1";
  out["units"] = cfg.units;
  out["params"] = {{"E", p.E}, {"alpha", p.alpha}, {"beta", p.beta}, {"N0", p.N0},
                   {"D0", p.D0}};
  out["delta"] = delta;
  out["test_tokens"] = delta * p.D0;
  out["asymptotics"] = {{"S_inf", conv(a.S_inf)},
                        {"H_inf", conv(a.H_inf)},
                        {"epiplexity_exponent", a.epiplexity_exponent},
                        {"entropy_excess_exponent", a.entropy_excess_exponent}};
  auto& path = out["path"] = nlohmann::json::array();
  for (const PathPoint& pt : optimal_path(p, delta, grid))
    path.push_back({{"t", pt.t},
                    {"ops", pt.ops},
                    {"d_star", pt.d_star},
                    {"n_star", pt.n_star},
                    {"model", conv(pt.model_nats)},
                    {"data", conv(pt.data_nats)},
                    {"total", conv(pt.total_nats)}});
  return out;
}

void scaling_output_csv(const nlohmann::json& scaling_output, std::ostream& os) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "t,ops,d_star,n_star,model,data,total\n";
  for (const auto& pt : scaling_output.at("path"))
    os << pt.at("t").get<double>() << ',' << pt.at("ops").get<double>() << ','
       << pt.at("d_star").get<double>() << ',' << pt.at("n_star").get<double>() << ','
       << pt.at("model").get<double>() << ',' << pt.at("data").get<double>() << ','
       << pt.at("total").get<double>() << '\n';
}

}  // namespace epimeter
