#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "epimeter/config.hpp"
#include "epimeter/dataset.hpp"
#include "epimeter/error.hpp"
#include "epimeter/frontier.hpp"
#include "epimeter/pipeline.hpp"
#include "epimeter/trace.hpp"

namespace fs = std::filesystem;
using namespace epimeter;

namespace {

struct CliOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string units;       // "" = keep config value
  std::string output_dir;  // "" = keep config value
  int jobs = 0;
  std::string format = "epds";  // gen: epds | jsonl
  std::string mode;             // estimate: override
  std::string row;              // scaling: override
  double delta = 0.0;           // scaling: override
  bool delta_given = false;
};

std::uint64_t parse_seed_text(const std::string& text, const std::string& origin) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used, 10);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin + ": '" + text + "' is not a valid seed");
  }
}

RunConfig load_config(const CliOpts& o) {
  RunConfig cfg = parse_config(o.config_path);
  const std::uint64_t default_seed = cfg.seed;
  bool override_seed = false;
  std::uint64_t seed = cfg.seed;
  if (const char* env = std::getenv("EPIMETER_SEED")) {
    seed = parse_seed_text(env, "EPIMETER_SEED");
    override_seed = true;
  }
  if (o.seed_given) {
    seed = o.seed;
    override_seed = true;
  }
  if (override_seed) {
    cfg.seed = seed;
    // a defaulted seed list follows the override; explicit lists stay
    if (cfg.seeds == std::vector<std::uint64_t>{default_seed}) cfg.seeds = {seed};
  }
  if (!o.units.empty()) {
    if (o.units != "bits" && o.units != "nats")
      throw ConfigError("--units: must be \"bits\" or \"nats\"");
    cfg.units = o.units;
  }
  if (!o.output_dir.empty()) cfg.output_dir = o.output_dir;
  if (!o.mode.empty()) {
    if (o.mode != "prequential" && o.mode != "requential")
      throw ConfigError("--mode: must be \"prequential\" or \"requential\"");
    cfg.mode = o.mode;
    if (cfg.mode == "requential" && cfg.requential.is_null())
      cfg.requential = normalize_requential_spec(nlohmann::json::object());
  }
  if (!o.row.empty() || o.delta_given) {
    nlohmann::json s = cfg.scaling.is_object() ? cfg.scaling : nlohmann::json::object();
    if (!o.row.empty()) {
      s.erase("params");
      s["row"] = o.row;
    }
    if (o.delta_given) {
      s.erase("test_tokens");
      s["delta"] = o.delta;
    }
    cfg.scaling = normalize_scaling_spec(s);
  }
  return cfg;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

nlohmann::json dataset_stats_json(const Dataset& ds, const std::string& path) {
  return {{"path", path},
          {"provenance", ds.provenance},
          {"digest", dataset_digest(ds)},
          {"records", ds.record_count()},
          {"tokens", ds.total_tokens()},
          {"masked_tokens", ds.masked_tokens()},
          {"vocab", ds.vocab_size}};
}

nlohmann::json points_json(const RunConfig& cfg, const std::vector<EstimatePoint>& pts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : pts)
    arr.push_back({{"t_ops", p.t_ops},
                   {"model", bits_as(p.model_bits, cfg.units)},
                   {"data", bits_as(p.data_bits, cfg.units)},
                   {"total", bits_as(p.total_bits, cfg.units)},
                   {"data_per_token", bits_as(p.data_bits_per_token, cfg.units)},
                   {"train_tokens", p.train_tokens},
                   {"hyperparams", p.hyperparams},
                   {"run_id", p.run_id},
                   {"seed", p.seed}});
  return arr;
}

int run_gen(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const SplitData d = generate_split(cfg, cfg.seed, /*parallel=*/false);
  const std::string ext = o.format == "jsonl" ? ".jsonl" : ".epds";
  const std::string train_path = cfg.output_dir + "/train" + ext;
  const std::string test_path = cfg.output_dir + "/test" + ext;
  if (o.format == "jsonl") {
    save_jsonl(d.train, train_path);
    save_jsonl(d.test, test_path);
  } else {
    save_epds(d.train, train_path);
    save_epds(d.test, test_path);
  }
  nlohmann::json out;
  out["schema"] = "epimeter-gen/1";
  out["seed"] = cfg.seed;
  out["train"] = dataset_stats_json(d.train, train_path);
  out["test"] = dataset_stats_json(d.test, test_path);
  std::cerr << "wrote " << train_path << " (" << d.train.record_count() << " records), "
            << test_path << " (" << d.test.record_count() << " records)\n";
  std::cout << dump(out);
  return 0;
}

int run_estimate_cmd(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const EstimateOutput r = run_estimate(cfg, /*parallel=*/false);
  std::ostringstream csv;
  trace_to_csv(r.trace, csv);
  write_file(cfg.output_dir + "/trace.csv", csv.str());
  nlohmann::json out;
  out["schema"] = "epimeter-estimate/1";
  out["units"] = cfg.units;
  out["trace"] = trace_summary_json(r.trace);  // raw internal bits
  out["points"] = points_json(cfg, r.points);
  write_file(cfg.output_dir + "/estimate.json", dump(out));
  std::cerr << "wrote " << cfg.output_dir << "/estimate.json and trace.csv ("
            << r.trace.steps.size() << " steps)\n";
  std::cout << dump(out);
  return 0;
}

int run_sweep_cmd(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const SweepArtifact art = run_sweep(cfg, o.jobs);
  const nlohmann::json out = sweep_artifact_to_json(art);
  write_file(cfg.output_dir + "/sweep.json", dump(out));
  std::cerr << "wrote " << cfg.output_dir << "/sweep.json (" << art.result.points.size()
            << " points, " << art.result.failures.size() << " failures)\n";
  for (const auto& f : art.result.failures)
    std::cerr << "warning: run " << f.run_id << " failed: " << f.message << '\n';
  std::cout << dump(out);
  return 0;
}

int run_frontier_cmd(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const SweepArtifact art =
      sweep_artifact_from_json(read_json_file(cfg.output_dir + "/sweep.json"));
  const Frontier f = build_frontier(art.result.points);
  const nlohmann::json out = frontier_to_json(f);
  write_file(cfg.output_dir + "/frontier.json", dump(out));
  std::ostringstream csv;
  frontier_to_csv(f, csv);
  write_file(cfg.output_dir + "/frontier.csv", csv.str());
  std::cerr << "wrote " << cfg.output_dir << "/frontier.{json,csv} (" << f.entries.size()
            << " entries)\n";
  std::cout << dump(out);
  return 0;
}

int run_report_cmd(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const SweepArtifact art =
      sweep_artifact_from_json(read_json_file(cfg.output_dir + "/sweep.json"));
  const Frontier f = frontier_from_json(read_json_file(cfg.output_dir + "/frontier.json"));
  const nlohmann::json rep = pipeline_report_json(cfg, art, f);
  write_file(cfg.output_dir + "/report.json", dump(rep));
  std::ostringstream csv;
  report_to_csv(cfg, f, csv);
  write_file(cfg.output_dir + "/report.csv", csv.str());
  std::cerr << "wrote " << cfg.output_dir << "/report.{json,csv}\n";
  std::cout << dump(rep);
  return 0;
}

int run_scaling_cmd(const CliOpts& o) {
  const RunConfig cfg = load_config(o);
  ensure_dir(cfg.output_dir);
  const nlohmann::json out = scaling_output_json(cfg);
  write_file(cfg.output_dir + "/scaling.json", dump(out));
  std::ostringstream csv;
  scaling_output_csv(out, csv);
  write_file(cfg.output_dir + "/scaling.csv", csv.str());
  std::cerr << "wrote " << cfg.output_dir << "/scaling.{json,csv} ("
            << out.at("path").size() << " grid points)\n";
  std::cout << dump(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epiplexity meter: compute-accounted two-part codes for data sources"};
  app.require_subcommand(1);

  CliOpts o;
  app.add_option("-c,--config", o.config_path, "run configuration (JSON)")
      ->required()
      ->type_name("FILE");
  app.add_option("--seed", o.seed, "seed override (beats EPIMETER_SEED)")
      ->each([&o](const std::string&) { o.seed_given = true; });
  app.add_option("--units", o.units, "output units: bits | nats");
  app.add_option("-o,--output-dir", o.output_dir, "output directory override");

  auto* gen = app.add_subcommand("gen", "generate the train/test datasets");
  gen->add_option("--format", o.format, "dataset container: epds | jsonl")
      ->check(CLI::IsMember({"epds", "jsonl"}));
  auto* estimate = app.add_subcommand("estimate", "single coding run on one learner");
  estimate->add_option("--mode", o.mode, "prequential | requential");
  auto* sweep_cmd = app.add_subcommand("sweep", "grid of prequential runs");
  sweep_cmd->add_option("--jobs", o.jobs, "worker threads (0 = library default, 1 = serial)");
  auto* frontier_cmd =
      app.add_subcommand("frontier", "extract the compute frontier from sweep.json");
  auto* report_cmd = app.add_subcommand("report", "render report.{json,csv} from artifacts");
  auto* scaling_cmd = app.add_subcommand("scaling", "evaluate the analytic model");
  scaling_cmd->add_option("--row", o.row, "built-in parameter table row");
  scaling_cmd->add_option("--delta", o.delta, "test tokens / D0")
      ->each([&o](const std::string&) { o.delta_given = true; });
  for (auto* sub : {gen, estimate, sweep_cmd, frontier_cmd, report_cmd, scaling_cmd})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
    if (*gen) return run_gen(o);
    if (*estimate) return run_estimate_cmd(o);
    if (*sweep_cmd) return run_sweep_cmd(o);
    if (*frontier_cmd) return run_frontier_cmd(o);
    if (*report_cmd) return run_report_cmd(o);
    if (*scaling_cmd) return run_scaling_cmd(o);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
}
