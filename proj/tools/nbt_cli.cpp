// nbt: run scenarios, benchmark the IG engine, recompute run metrics.
#include "nbt/config.hpp"
#include "nbt/sim.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nbt::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::optional<std::int64_t> seed;
  std::optional<int> workers;
  std::string out = "runs";
  std::vector<std::string> overrides;
};

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

// Short hex id from the resolved config and the wall clock.
std::string make_run_id(const Json& resolved) {
  const auto ns = std::chrono::system_clock::now().time_since_epoch().count();
  const std::size_t h = std::hash<std::string>{}(resolved.dump() + std::to_string(ns));
  std::ostringstream os;
  os << std::hex << std::setw(12) << std::setfill('0') << (h & 0xffffffffffffULL);
  return os.str();
}

fs::path unique_dir(const fs::path& out, const std::string& prefix, std::string& id, const Json& resolved) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    const fs::path dir = out / (prefix + id);
    if (!fs::exists(dir)) {
      fs::create_directories(dir);
      return dir;
    }
    id = make_run_id(resolved);
  }
  throw nbt::RuntimeError("cannot allocate a unique output directory in " + out.string());
}

void write_json(const fs::path& path, const Json& j) {
  std::ofstream f(path);
  if (!f) throw nbt::RuntimeError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void apply_common(Json& doc, const CommonOptions& opt) {
  if (opt.seed) doc["seed"] = *opt.seed;
  if (opt.workers) doc["workers"] = *opt.workers;
}

// A manifest reproduces the run it describes; anything else is a scenario file.
Json resolve_run_config(const std::string& path, const CommonOptions& opt, std::vector<std::string>& sources) {
  Json raw = nbt::load_json(path);
  Json doc;
  if (raw.is_object() && raw.contains("run_id") && raw.contains("config")) {
    doc = raw.at("config");
    for (const std::string& o : opt.overrides) nbt::apply_override(doc, o);
    sources = raw.value("config_paths", std::vector<std::string>{});
    sources.push_back(fs::absolute(path).string());
  } else {
    doc = nbt::resolve_scenario(path, opt.overrides);
    sources = {fs::absolute(path).string()};
  }
  apply_common(doc, opt);
  return doc;
}

int cmd_validate(const std::string& path, const CommonOptions& opt) {
  Json raw = nbt::load_json(path);
  if (raw.contains("n_p")) {
    Json doc = nbt::resolve_bench(path, opt.overrides);
    apply_common(doc, opt);
    const nbt::BenchConfig b = nbt::bench_from_json(doc);
    std::cout << "valid bench config: " << b.grid.size() << " cells, " << b.iterations << " iterations\n";
  } else {
    std::vector<std::string> sources;
    Json doc = resolve_run_config(path, opt, sources);
    const nbt::ScenarioConfig c = nbt::scenario_from_json(doc);
    std::cout << "valid scenario: " << c.robot.dof() << " joints, duration " << c.duration << " s\n";
  }
  return kExitOk;
}

Json summary_json(const nbt::RunMetrics& m, std::size_t buffer_size) {
  Json s;
  s["auc"] = m.auc;
  s["travel_time"] = m.travel_time;
  s["remaining_ig"] = m.remaining_ig;
  s["remaining_ig_first_full"] = std::isnan(m.remaining_ig_first_full) ? Json(nullptr) : Json(m.remaining_ig_first_full);
  s["final_v_r"] = m.final_v_r;
  s["max_v_r"] = m.max_v_r;
  s["goal_reached"] = m.goal_reached;
  s["planner_warnings"] = m.planner_warnings;
  s["planner_failures"] = m.planner_failures;
  s["sensor_frames"] = m.sensor_frames;
  s["buffer_size"] = buffer_size;
  s["rows"] = m.series.size();
  return s;
}

int cmd_run(const std::string& path, const CommonOptions& opt) {
  std::vector<std::string> sources;
  const Json doc = resolve_run_config(path, opt, sources);
  const nbt::ScenarioConfig cfg = nbt::scenario_from_json(doc);

  std::string id = make_run_id(doc);
  const fs::path dir = unique_dir(opt.out, "run-", id, doc);
  Json manifest;
  manifest["run_id"] = id;
  manifest["config_paths"] = sources;
  manifest["overrides"] = opt.overrides;
  manifest["seed"] = cfg.seed;
  manifest["output_dir"] = fs::absolute(dir).string();
  manifest["created_at"] = iso_now();
  manifest["status"] = "running";
  manifest["config"] = doc;
  write_json(dir / "manifest.json", manifest);

  const nbt::RunArtifacts art = nbt::run_scenario(cfg, dir);
  {
    std::ofstream f(dir / "metrics.csv");
    nbt::write_metrics_csv(f, art.metrics);
  }
  nbt::save_map((dir / "final_map.txt").string(), art.map);
  nbt::save_map((dir / "reference_map.txt").string(), art.reference);
  write_json(dir / "summary.json", summary_json(art.metrics, cfg.buffer_size));

  manifest["status"] = "complete";
  manifest["finished_at"] = iso_now();
  write_json(dir / "manifest.json", manifest);

  const nbt::RunMetrics& m = art.metrics;
  std::cout << "run " << id << " -> " << dir.string() << '\n'
            << std::setprecision(10) << "auc " << m.auc << "\ntravel_time " << m.travel_time << "\nremaining_ig "
            << m.remaining_ig << "\nfinal_v_r " << m.final_v_r << '\n';
  return kExitOk;
}

int cmd_bench(const std::string& path, const CommonOptions& opt) {
  Json doc = nbt::resolve_bench(path, opt.overrides);
  apply_common(doc, opt);
  const nbt::BenchConfig b = nbt::bench_from_json(doc);
  const int workers = doc.value("workers", 0);

  std::string id = make_run_id(doc);
  const fs::path dir = unique_dir(opt.out, "bench-", id, doc);
  Json manifest;
  manifest["run_id"] = id;
  manifest["config_paths"] = {fs::absolute(path).string()};
  manifest["overrides"] = opt.overrides;
  manifest["seed"] = b.ig.seed;
  manifest["output_dir"] = fs::absolute(dir).string();
  manifest["created_at"] = iso_now();
  manifest["occupied_voxels"] = b.map.observed_count();
  manifest["workers"] = workers == 0 ? nbt::available_workers() : workers;
  manifest["config"] = doc;
  write_json(dir / "manifest.json", manifest);

  const auto rows = nbt::benchmark(b.map, b.camera, b.ig, b.grid, b.iterations, workers);
  {
    std::ofstream f(dir / "bench.csv");
    nbt::write_bench_csv(f, rows);
  }
  fs::create_directories(dir / "id");
  for (const nbt::BenchCell& cell : b.grid) {
    nbt::IgConfig ig = b.ig;
    ig.num_perspectives = cell.num_perspectives;
    ig.grid_scale = cell.grid_scale;
    const auto dist = nbt::compute_distribution(b.map, ig, b.camera, nbt::ExecutionMode::Sequential);
    std::ostringstream name;
    name << "np" << cell.num_perspectives << "_sg" << cell.grid_scale << ".txt";
    std::ofstream f(dir / "id" / name.str());
    nbt::write_distribution(f, dist);
  }
  manifest["finished_at"] = iso_now();
  write_json(dir / "manifest.json", manifest);
  nbt::write_bench_csv(std::cout, rows);
  return kExitOk;
}

bool matches(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

int cmd_metrics(const std::string& run_dir) {
  const fs::path dir(run_dir);
  for (const char* f : {"manifest.json", "summary.json", "metrics.csv", "final_map.txt", "reference_map.txt"}) {
    if (!fs::exists(dir / f)) throw nbt::RuntimeError(std::string("incomplete run: missing ") + f);
  }
  const Json manifest = nbt::load_json(dir / "manifest.json");
  const Json summary = nbt::load_json(dir / "summary.json");
  if (manifest.value("status", "") != "complete") throw nbt::RuntimeError("incomplete run: manifest not finalized");

  std::vector<nbt::MetricSample> series;
  {
    std::ifstream f(dir / "metrics.csv");
    try {
      series = nbt::read_metrics_csv(f);
    } catch (const nbt::ValidationError& e) {
      throw nbt::RuntimeError(std::string("corrupt metrics log: ") + e.what());
    }
  }
  if (series.size() != summary.at("rows").get<std::size_t>()) {
    throw nbt::RuntimeError("metrics log has " + std::to_string(series.size()) + " rows, summary expects " +
                            std::to_string(summary.at("rows").get<std::size_t>()));
  }
  std::vector<std::pair<double, double>> og;
  for (const auto& s : series) og.emplace_back(s.t, s.product);
  const double auc = nbt::auc(og);
  const double travel = series.back().t;

  const std::size_t frames = summary.at("sensor_frames").get<std::size_t>();
  const std::size_t nb = summary.at("buffer_size").get<std::size_t>();
  double ig_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = frames > nb ? frames - nb : 0; i < frames; ++i) {
    std::ostringstream name;
    name << "ig_" << std::setw(5) << std::setfill('0') << i << ".txt";
    std::ifstream f(dir / "id" / name.str());
    if (!f) throw nbt::RuntimeError("incomplete run: missing distribution " + name.str());
    ig_sum += nbt::DistributionEntry(nbt::read_distribution(f)).mean_gain();
    ++used;
  }
  if (used == 0) throw nbt::RuntimeError("incomplete run: no distributions");
  const double remaining = ig_sum / static_cast<double>(used);

  const nbt::Aabb box = nbt::scene_from_json(manifest.at("config").at("scene")).roi;
  const double vr = nbt::v_r(nbt::load_map((dir / "final_map.txt").string()), nbt::load_map((dir / "reference_map.txt").string()), box);

  std::cout << std::setprecision(17) << "auc " << auc << "\ntravel_time " << travel << "\nremaining_ig " << remaining
            << "\nfinal_v_r " << vr << '\n';
  bool ok = true;
  auto check = [&](const char* name, double got, double stored) {
    if (!matches(got, stored)) {
      std::cerr << "mismatch in " << name << ": recomputed " << got << ", stored " << stored << '\n';
      ok = false;
    }
  };
  check("auc", auc, summary.at("auc").get<double>());
  check("travel_time", travel, summary.at("travel_time").get<double>());
  check("remaining_ig", remaining, summary.at("remaining_ig").get<double>());
  check("final_v_r", vr, summary.at("final_v_r").get<double>());
  return ok ? kExitOk : kExitRuntime;
}

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--seed", opt.seed, "RNG seed");
  cmd->add_option("--workers", opt.workers, "IG worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opt.out, "Output directory");
  cmd->add_option("--override", opt.overrides, "Dotted key=value override (repeatable)")->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Next-best-trajectory planning simulator"};
  app.require_subcommand(1);
  CommonOptions opt;
  std::string path;

  auto* run = app.add_subcommand("run", "Run a scenario (or replay a manifest)");
  run->add_option("config", path, "Scenario file or run manifest")->required();
  add_common(run, opt);

  auto* bench = app.add_subcommand("bench", "Benchmark sequential and parallel IG computation");
  bench->add_option("config", path, "Bench config file")->required();
  add_common(bench, opt);

  auto* metrics = app.add_subcommand("metrics", "Recompute and verify metrics of a completed run");
  metrics->add_option("run_dir", path, "Run directory")->required();

  auto* validate = app.add_subcommand("validate", "Check a scenario or bench config");
  validate->add_option("config", path, "Config file")->required();
  add_common(validate, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(path, opt);
    if (*bench) return cmd_bench(path, opt);
    if (*metrics) {
      try {
        return cmd_metrics(path);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
      }
    }
    if (*validate) return cmd_validate(path, opt);
  } catch (const nbt::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
