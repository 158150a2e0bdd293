// Command-line front end: assign, synth, eval, oracle, bench and ablate.
//
// Exit codes: 0 success, 1 internal error, 2 invalid input, 3 oracle budget
// refusal.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "greedypose/greedypose.hpp"

namespace fs = std::filesystem;
using gpose::io::json;
using gpose::io::ValidationError;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitBudget = 3;

// Failure to write an output file.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file in the same directory and renames it into
// place, so readers never observe a partial file.
void write_atomic(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError(tmp.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw OutputError(tmp.string() + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw OutputError(path.string() + ": cannot move output into place");
  }
}

void emit(const std::optional<fs::path>& path, const std::string& text) {
  if (path) {
    write_atomic(*path, text);
  } else {
    std::cout << text;
    std::cout.flush();
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Effective {
  gpose::AssignmentConfig config;
  gpose::Tables tables;
};

// Configuration precedence: defaults, then the config file (--config or the
// GREEDYPOSE_CONFIG environment variable), then --seed.
Effective load_effective(const std::string& config_path, const std::optional<std::uint64_t>& seed) {
  Effective e;
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("GREEDYPOSE_CONFIG"); env && *env) path = env;
  }
  if (!path.empty()) gpose::io::load_config(read_file(path), path, e.config, e.tables);
  if (seed) e.config.rng_seed = *seed;
  return e;
}

std::string version_string() {
  std::string s = std::string("greedypose ") + gpose::kVersion;
#if defined(__clang__)
  s += " (clang " __clang_version__;
#elif defined(__GNUC__)
  s += " (gcc " __VERSION__;
#else
  s += " (unknown compiler";
#endif
  s += ", C++" + std::to_string(__cplusplus / 100 % 100);
#ifdef NDEBUG
  s += ", release)";
#else
  s += ", debug)";
#endif
  return s;
}

// ---------------------------------------------------------------------------
// assign

struct AssignOptions {
  std::string input;
  std::string output;
  std::string config;
  std::optional<std::uint64_t> seed;
  bool trace = false;
  std::string trace_path;
  unsigned jobs = 0;
};

// Runs one detections file. Returns the poses document and the trace.
std::pair<std::string, std::string> assign_one(const std::string& text, const std::string& source,
                                               const Effective& eff, bool with_trace) {
  const gpose::io::DetectionsDocument doc = gpose::io::parse_detections(text, source);
  std::unique_ptr<gpose::AssociationProvider> assoc;
  try {
    assoc = gpose::io::make_association(doc, eff.tables);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(source + ": " + e.what());
  }
  const gpose::AssignmentResult r =
      gpose::assemble(doc.detections, *assoc, eff.config, eff.tables, with_trace);
  std::string trace;
  if (r.trace) {
    json t = gpose::io::to_json(*r.trace);
    t["seed"] = eff.config.rng_seed;
    trace = dump(t);
  }
  return {dump(gpose::io::to_json(r, eff.config, eff.tables)), trace};
}

int classify(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) {
    return kExitInvalid;
  }
  if (dynamic_cast<const gpose::BudgetExceeded*>(&e)) return kExitBudget;
  return kExitInternal;
}

int run_assign(const AssignOptions& o) {
  const Effective eff = load_effective(o.config, o.seed);
  const fs::path input(o.input);

  if (!fs::is_directory(input)) {
    const auto [poses, trace] = assign_one(read_file(input), input.string(), eff, o.trace);
    std::optional<fs::path> out;
    if (!o.output.empty()) out = o.output;
    emit(out, poses);
    if (o.trace) {
      fs::path tp = !o.trace_path.empty() ? fs::path(o.trace_path)
                    : out                 ? fs::path(out->string() + ".trace.json")
                                          : fs::path(input.string() + ".trace.json");
      write_atomic(tp, trace);
    }
    return kExitOk;
  }

  if (o.output.empty()) throw ValidationError("--output directory is required with a directory input");
  const fs::path out_dir(o.output);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) throw OutputError(out_dir.string() + ": not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(input)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{kExitOk};
  std::mutex err_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const fs::path& f = files[i];
      try {
        const auto [poses, trace] = assign_one(read_file(f), f.string(), eff, o.trace);
        const fs::path base = out_dir / f.stem();
        write_atomic(fs::path(base.string() + ".poses.json"), poses);
        if (o.trace) write_atomic(fs::path(base.string() + ".trace.json"), trace);
      } catch (const std::exception& e) {
        const int code = classify(e);
        {
          std::lock_guard<std::mutex> lock(err_mutex);
          std::cerr << "error: " << e.what() << "\n";
        }
        int cur = worst.load();
        while (code > cur && !worst.compare_exchange_weak(cur, code)) {
        }
      }
    }
  };
  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(files.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  return worst.load();
}

// ---------------------------------------------------------------------------
// synth

struct SynthOptions {
  std::size_t people = 0;
  std::string noise;
  std::uint64_t seed = 0;
  std::string out_detections;
  std::string out_gt;
};

void load_noise(const std::string& path, gpose::NoiseConfig& noise, gpose::SceneConfig& scene) {
  if (path.empty()) return;
  const std::string text = read_file(path);
  gpose::io::apply_noise(gpose::io::detail::parse_text(text, path), noise, scene, text, path);
}

int run_synth(const SynthOptions& o) {
  gpose::NoiseConfig noise;
  gpose::SceneConfig scene;
  load_noise(o.noise, noise, scene);
  const gpose::SceneGroundTruth gt = gpose::generate_scene(o.people, noise, o.seed, scene);
  const gpose::GeometricAssociation assoc = gpose::geometric_association(gt, noise);

  gpose::io::DetectionsDocument doc;
  doc.width = gt.width;
  doc.height = gt.height;
  doc.detections = gpose::render_detections(gt, noise, o.seed);
  doc.association = gpose::io::GeometricSpec{assoc.head_length(), assoc.pairwise_sigma()};
  doc.seed = o.seed;

  std::optional<fs::path> det_out;
  if (!o.out_detections.empty()) det_out = o.out_detections;
  emit(det_out, dump(gpose::io::to_json(doc)));
  if (!o.out_gt.empty()) write_atomic(o.out_gt, dump(gpose::io::to_json(gt, o.seed)));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOptions {
  std::string pred;
  std::string gt;
  double tau = 0.5;
  std::string output;
};

int run_eval(const EvalOptions& o) {
  if (!(o.tau > 0.0)) throw ValidationError("--tau must be positive");
  const gpose::io::PosesDocument pred = gpose::io::parse_poses(read_file(o.pred), o.pred);
  const gpose::SceneGroundTruth gt = gpose::io::parse_ground_truth(read_file(o.gt), o.gt);
  json report = gpose::io::to_json(gpose::pckh(pred.result.clusters, gt, o.tau));
  report["seed"] = pred.config.rng_seed;
  std::optional<fs::path> out;
  if (!o.output.empty()) out = o.output;
  emit(out, dump(report));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// oracle

struct OracleOptions {
  std::string input;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string output;
};

json clusters_json(const std::vector<gpose::PersonCluster>& clusters) {
  json out = json::array();
  for (const gpose::PersonCluster& c : clusters) {
    json parts = json::object();
    for (const auto& p : c.parts) {
      if (p) parts[std::string(gpose::name(p->candidate.part))] = p->candidate.id;
    }
    out.push_back({{"id", c.id}, {"parts", parts}});
  }
  return out;
}

int run_oracle(const OracleOptions& o) {
  const Effective eff = load_effective(o.config, o.seed);
  const gpose::io::DetectionsDocument doc = gpose::io::parse_detections(read_file(o.input), o.input);
  std::unique_ptr<gpose::AssociationProvider> assoc = gpose::io::make_association(doc, eff.tables);

  gpose::OracleInstance inst;
  inst.assoc = assoc.get();
  inst.seeds = doc.detections[gpose::PartClass::Head];
  for (gpose::PartClass c : gpose::chain_order()) {
    if (c == gpose::PartClass::Head) {
      inst.classes.push_back(c);
      continue;
    }
    if (doc.detections[c].empty()) continue;
    inst.classes.push_back(c);
    inst.parts[gpose::slot(c)] = doc.detections[c];
  }
  gpose::normalize(inst, eff.tables.predecessors);

  const gpose::OracleSolution best = gpose::exhaustive_assign(inst, eff.tables.predecessors);
  const gpose::AssignmentResult greedy = gpose::greedy_on_instance(inst, eff.tables, eff.config);
  const gpose::OracleEncoding greedy_enc = gpose::encode(inst, greedy.clusters);
  const double greedy_score =
      gpose::score_clusters(greedy.clusters, eff.tables.predecessors, *inst.assoc);

  json out = {{"seed", eff.config.rng_seed},
              {"oracle",
               {{"score", best.score},
                {"encoding", best.encoding},
                {"clusters", clusters_json(gpose::decode(inst, best.encoding))}}},
              {"greedy",
               {{"score", greedy_score},
                {"encoding", greedy_enc},
                {"clusters", clusters_json(gpose::decode(inst, greedy_enc))}}},
              {"identical", greedy_enc == best.encoding},
              {"assignments_enumerated", best.assignments_enumerated}};
  std::optional<fs::path> path;
  if (!o.output.empty()) path = o.output;
  emit(path, dump(out));
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench and ablate

struct BenchOptions {
  std::vector<std::size_t> grid{100, 200, 400, 800, 1600, 3200};
  std::size_t people = 8;
  std::size_t trials = 5;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
  std::string csv;
  std::string summary;
};

int run_bench(const BenchOptions& o) {
  if (o.grid.size() < 3) throw ValidationError("--grid needs at least 3 points");
  if (o.trials < 1 || o.repeats < 1) throw ValidationError("--trials and --repeats must be at least 1");
  const gpose::ScalingReport rep = gpose::scaling_benchmark(o.grid, o.people, o.trials, o.seed,
                                                            gpose::best_of_timer(o.repeats));
  std::ostringstream csv;
  csv << "seed,candidates_per_class,median_seconds\n";
  json rows = json::array();
  for (const gpose::ScalingRow& r : rep.rows) {
    csv << o.seed << "," << r.candidates_per_class << "," << r.median_seconds << "\n";
    rows.push_back({{"candidates_per_class", r.candidates_per_class}, {"median_seconds", r.median_seconds}});
  }
  const json summary = {{"seed", o.seed}, {"people", o.people}, {"trials", o.trials},
                        {"repeats", o.repeats}, {"rows", rows}, {"slope", rep.slope}};
  std::optional<fs::path> csv_path;
  if (!o.csv.empty()) csv_path = o.csv;
  emit(csv_path, csv.str());
  if (!o.summary.empty()) {
    write_atomic(o.summary, dump(summary));
  } else {
    std::cerr << summary.dump() << "\n";
  }
  return kExitOk;
}

struct AblateOptions {
  std::size_t scenes = 200;
  std::size_t min_people = 2;
  std::size_t max_people = 8;
  std::string noise;
  std::string config;
  std::uint64_t seed = 0;
  double tau = 0.5;
  std::size_t repeats = 3;
  std::string csv;
  std::string summary;
};

int run_ablate(const AblateOptions& o) {
  if (!(o.tau > 0.0)) throw ValidationError("--tau must be positive");
  if (o.min_people > o.max_people) throw ValidationError("--min-people exceeds --max-people");
  gpose::DatasetSpec spec;
  spec.scenes = o.scenes;
  spec.min_people = o.min_people;
  spec.max_people = o.max_people;
  spec.seed = o.seed;
  load_noise(o.noise, spec.noise, spec.scene);
  const Effective eff = load_effective(o.config, std::nullopt);
  const auto dataset = gpose::make_dataset(spec);
  const auto rows = gpose::ablation_suite(dataset, eff.config, o.tau, o.repeats);

  std::ostringstream csv;
  csv << "seed,configuration,mean_pckh,median_seconds,precision,recall\n";
  json jrows = json::array();
  for (const gpose::AblationRow& r : rows) {
    csv << o.seed << "," << r.name << "," << r.mean_pckh << "," << r.median_seconds << ","
        << r.precision << "," << r.recall << "\n";
    jrows.push_back({{"configuration", r.name},
                     {"mean_pckh", r.mean_pckh},
                     {"median_seconds", r.median_seconds},
                     {"precision", r.precision},
                     {"recall", r.recall}});
  }
  const json summary = {{"seed", o.seed}, {"scenes", o.scenes}, {"tau", o.tau}, {"rows", jrows}};
  std::optional<fs::path> csv_path;
  if (!o.csv.empty()) csv_path = o.csv;
  emit(csv_path, csv.str());
  if (!o.summary.empty()) {
    write_atomic(o.summary, dump(summary));
  } else {
    std::cerr << summary.dump() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Greedy multi-person pose assembly from part candidates"};
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print build information and exit");

  AssignOptions assign;
  std::uint64_t assign_seed = 0;
  auto* cmd_assign = app.add_subcommand("assign", "Assemble poses from a detections file or directory");
  cmd_assign->add_option("--input", assign.input, "Detections file, or a directory of them")->required();
  cmd_assign->add_option("--output", assign.output, "Poses file (default stdout), or output directory");
  cmd_assign->add_option("--config", assign.config, "Configuration file (default $GREEDYPOSE_CONFIG)");
  auto* assign_seed_opt = cmd_assign->add_option("--seed", assign_seed, "RNG seed override");
  cmd_assign->add_flag("--trace", assign.trace, "Write per-stage diagnostics to a sidecar file");
  cmd_assign->add_option("--trace-file", assign.trace_path, "Sidecar path for --trace");
  cmd_assign->add_option("--jobs", assign.jobs, "Worker threads for directory input (default: all cores)");

  SynthOptions synth;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic scene");
  cmd_synth->add_option("--people", synth.people, "Number of people")->required();
  cmd_synth->add_option("--noise", synth.noise, "Noise and layout overrides (JSON)");
  cmd_synth->add_option("--seed", synth.seed, "RNG seed");
  cmd_synth->add_option("--out-detections", synth.out_detections, "Detections file (default stdout)");
  cmd_synth->add_option("--out-gt", synth.out_gt, "Ground-truth file");

  EvalOptions eval;
  auto* cmd_eval = app.add_subcommand("eval", "Score poses against ground truth (PCKh)");
  cmd_eval->add_option("--pred", eval.pred, "Poses file")->required();
  cmd_eval->add_option("--gt", eval.gt, "Ground-truth file")->required();
  cmd_eval->add_option("--tau", eval.tau, "Threshold as a fraction of head length");
  cmd_eval->add_option("--output", eval.output, "Report file (default stdout)");

  OracleOptions oracle;
  std::uint64_t oracle_seed = 0;
  auto* cmd_oracle = app.add_subcommand("oracle", "Exhaustive assignment of a small instance");
  cmd_oracle->add_option("--input", oracle.input, "Detections file")->required();
  cmd_oracle->add_option("--config", oracle.config, "Configuration file (default $GREEDYPOSE_CONFIG)");
  auto* oracle_seed_opt = cmd_oracle->add_option("--seed", oracle_seed, "RNG seed override");
  cmd_oracle->add_option("--output", oracle.output, "Result file (default stdout)");

  BenchOptions bench;
  auto* cmd_bench = app.add_subcommand("bench", "Runtime scaling against candidates per class");
  cmd_bench->add_option("--grid", bench.grid, "Candidates per class, comma separated")->delimiter(',');
  cmd_bench->add_option("--people", bench.people, "People per scene");
  cmd_bench->add_option("--trials", bench.trials, "Scenes per grid point");
  cmd_bench->add_option("--repeats", bench.repeats, "Timed runs per scene; the fastest is kept");
  cmd_bench->add_option("--seed", bench.seed, "RNG seed");
  cmd_bench->add_option("--csv", bench.csv, "CSV file (default stdout)");
  cmd_bench->add_option("--summary", bench.summary, "JSON summary file (default stderr)");

  AblateOptions ablate;
  auto* cmd_ablate = app.add_subcommand("ablate", "Accuracy and runtime across the feature ladder");
  cmd_ablate->add_option("--scenes", ablate.scenes, "Number of scenes");
  cmd_ablate->add_option("--min-people", ablate.min_people, "Fewest people per scene");
  cmd_ablate->add_option("--max-people", ablate.max_people, "Most people per scene");
  cmd_ablate->add_option("--noise", ablate.noise, "Noise and layout overrides (JSON)");
  cmd_ablate->add_option("--config", ablate.config, "Base configuration file");
  cmd_ablate->add_option("--seed", ablate.seed, "RNG seed");
  cmd_ablate->add_option("--tau", ablate.tau, "PCKh threshold");
  cmd_ablate->add_option("--repeats", ablate.repeats, "Timed runs per scene; the fastest is kept");
  cmd_ablate->add_option("--csv", ablate.csv, "CSV file (default stdout)");
  cmd_ablate->add_option("--summary", ablate.summary, "JSON summary file (default stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  if (show_version) {
    std::cout << version_string() << "\n";
    return kExitOk;
  }

  try {
    if (cmd_assign->parsed()) {
      if (*assign_seed_opt) assign.seed = assign_seed;
      return run_assign(assign);
    }
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_eval->parsed()) return run_eval(eval);
    if (cmd_oracle->parsed()) {
      if (*oracle_seed_opt) oracle.seed = oracle_seed;
      return run_oracle(oracle);
    }
    if (cmd_bench->parsed()) return run_bench(bench);
    if (cmd_ablate->parsed()) return run_ablate(ablate);
    std::cerr << app.help();
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return classify(e);
  }
}
