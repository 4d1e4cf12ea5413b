#include "rlemmo/cli.hpp"

#include "rlemmo/benchmark.hpp"
#include "rlemmo/config.hpp"
#include "rlemmo/errors.hpp"
#include "rlemmo/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#ifndef RLEMMO_GIT_REVISION
#define RLEMMO_GIT_REVISION "unknown"
#endif

namespace rlemmo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Overrides = std::vector<std::pair<std::string, std::string>>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<int> parse_problem_list(const std::string& text, const std::vector<int>& fallback) {
  if (text.empty()) return fallback;
  if (text == "train") return {bench::kTrainProblems.begin(), bench::kTrainProblems.end()};
  if (text == "test") return {bench::kTestProblems.begin(), bench::kTestProblems.end()};
  std::vector<int> ids;
  if (text == "all") {
    for (int i = 1; i <= bench::kNumProblems; ++i) ids.push_back(i);
    return ids;
  }
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    ids.push_back(bench::parse_problem_id(tok));
  }
  if (ids.empty()) throw ParseError("problems", "empty problem list");
  return ids;
}

std::vector<double> parse_accuracies(const std::string& text) {
  if (text.empty() || text == "all") return {metrics::kAccuracyLevels.begin(), metrics::kAccuracyLevels.end()};
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || !(v > 0.0)) throw ParseError("accuracy", "expected a positive real, got '" + tok + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ParseError("accuracy", "empty accuracy list");
  return out;
}

struct Resolved {
  TrainConfig config;
  std::map<std::string, std::string> source;  // key -> default | env | file | cli
};

Resolved resolve_config(const std::string& config_path, const Overrides& overrides) {
  Resolved r;
  for (const auto& [k, v] : r.config.entries()) r.source[k] = "default";
  const auto mark_changed = [&r](const std::vector<std::pair<std::string, std::string>>& before, const char* tag) {
    const auto after = r.config.entries();
    for (std::size_t i = 0; i < after.size(); ++i)
      if (after[i].second != before[i].second) r.source[after[i].first] = tag;
  };
  if (const char* env = std::getenv("RLEMMO_DATA_DIR"); env != nullptr && *env != '\0') {
    const auto before = r.config.entries();
    r.config.set("data_dir", env);
    mark_changed(before, "env");
  }
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw ParseError("config", "file not found: " + config_path);
    const auto before = r.config.entries();
    apply_config_file(r.config, config_path);
    mark_changed(before, "file");
  }
  for (const auto& [k, v] : overrides) {
    r.config.set(k, v);
    r.source[k] = "cli";
  }
  r.config.validate();
  return r;
}

void print_config(std::ostream& os, const Resolved& r) {
  os << "resolved configuration (cli > file > defaults):\n";
  for (const auto& [k, v] : r.config.entries()) {
    const auto it = r.source.find(k);
    os << "  " << k << " = " << v << "  [" << (it == r.source.end() ? "default" : it->second) << "]\n";
  }
}

json config_json(const Resolved& r) {
  json cfg = json::object();
  json src = json::object();
  for (const auto& [k, v] : r.config.entries()) {
    cfg[k] = v;
    src[k] = r.source.count(k) ? r.source.at(k) : "default";
  }
  return {{"values", cfg}, {"sources", src}};
}

fs::path make_run_dir(const fs::path& root, const std::string& name) {
  fs::create_directories(root);
  for (int n = 1;; ++n) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "-%03d", n);
    const fs::path dir = root / (name + suffix);
    if (fs::create_directory(dir)) {
      write_file(root / "latest", dir.filename().string() + "\n");
      return dir;
    }
  }
}

json base_manifest(const std::string& command, const std::vector<std::string>& args) {
  return {{"tool", "rlemmo"}, {"version", kToolVersion}, {"git_revision", RLEMMO_GIT_REVISION},
          {"command", command}, {"args", args},
          {"started", utc_now()}};
}

void finish_manifest(json& manifest, const fs::path& dir) {
  manifest["finished"] = utc_now();
  write_file(dir / "run_manifest.json", manifest.dump(2) + "\n");
}

json problem_info(const bench::Problem& p) {
  return {{"id", "F" + std::to_string(p.id)},
          {"function", p.base_function},
          {"dim", p.dimension},
          {"r", p.niche_radius},
          {"peak", p.tabulated_peak},
          {"peak_exact", p.peak_height},
          {"optima", p.n_global_optima},
          {"lower", std::vector<double>(p.lower.data(), p.lower.data() + p.lower.size())},
          {"upper", std::vector<double>(p.upper.data(), p.upper.data() + p.upper.size())}};
}

/// Resolves --policy into a controller; `storage` keeps loaded parameters alive.
train::Controller make_controller(const std::string& spec, const std::string& mode, policy::PolicyParams& storage,
                                  fs::path& checkpoint) {
  if (spec == "random") return train::Controller::random();
  if (spec.rfind("fixed:", 0) == 0) {
    const std::string a = spec.substr(6);
    if (a.size() == 2 && a[0] == 'A' && a[1] >= '1' && a[1] <= '5') return train::Controller::fixed(a[1] - '0');
    throw ParseError("policy", "expected fixed:A1 .. fixed:A5, got '" + spec + "'");
  }
  fs::path path = spec;
  if (fs::is_directory(path)) {
    std::ifstream in(path / "latest");
    std::string name;
    if (!std::getline(in, name)) throw ParseError("policy", "no checkpoint pointer in " + path.string());
    path /= name;
  }
  if (!fs::exists(path)) throw ParseError("policy", "checkpoint not found: " + path.string());
  storage = policy::load(path);
  checkpoint = path;
  if (mode == "greedy") return train::Controller::greedy(storage);
  if (mode == "sample") return train::Controller::sampling(storage);
  throw ParseError("mode", "expected greedy or sample, got '" + mode + "'");
}

struct EvalOptions {
  std::vector<int> problems;
  int runs = 50;
  std::vector<double> accuracies;
  bool trace = false;
  bool dump_features = false;
};

/// Runs the evaluation and writes report.csv, runs.csv and report.json into dir.
json run_evaluation(const train::Controller& controller, const TrainConfig& config, const EvalOptions& opt,
                    const fs::path& dir) {
  train::EpisodeHook hook;
  if (opt.trace || opt.dump_features) {
    if (opt.trace) fs::create_directories(dir / "trace");
    if (opt.dump_features) fs::create_directories(dir / "features");
    hook = [&opt, &dir](int pid, int run) -> train::TraceObserver {
      const std::string stem = "F" + std::to_string(pid) + "_run" + std::to_string(run) + ".csv";
      std::shared_ptr<std::ofstream> trace, feats;
      if (opt.trace) {
        trace = std::make_shared<std::ofstream>(dir / "trace" / stem);
        *trace << "generation,best_objective,A1,A2,A3,A4,A5,clusters,reward\n";
      }
      if (opt.dump_features) {
        feats = std::make_shared<std::ofstream>(dir / "features" / stem);
        *feats << "generation,individual";
        for (int f = 1; f <= features::kTotalFeatures; ++f) *feats << ",f" << f;
        *feats << '\n';
      }
      return [trace, feats](const train::GenerationTrace& g) {
        if (trace) {
          *trace << g.generation << ',' << num(g.best_objective);
          for (int c : g.action_histogram) *trace << ',' << c;
          *trace << ',' << g.clusters << ',' << num(g.reward) << '\n';
        }
        if (feats && g.state != nullptr) {
          const auto& s = *g.state;
          for (Eigen::Index i = 0; i < s.population.rows(); ++i) {
            *feats << g.generation << ',' << i;
            for (Eigen::Index c = 0; c < s.population.cols(); ++c) *feats << ',' << num(s.population(i, c));
            for (Eigen::Index c = 0; c < s.individual.cols(); ++c) *feats << ',' << num(s.individual(i, c));
            *feats << '\n';
          }
        }
      };
    };
  }

  const auto report = train::evaluate_policy(controller, opt.problems, opt.runs, opt.accuracies, config, config.seed, hook);

  std::ostringstream csv;
  csv << "problem,accuracy,PR,SR,NR\n";
  for (const auto& row : report.rows)
    csv << 'F' << row.problem << ',' << num(row.accuracy) << ',' << num(row.peak_ratio) << ','
        << num(row.success_rate) << ',' << row.runs << '\n';
  write_file(dir / "report.csv", csv.str());

  std::ostringstream runs;
  runs << "problem,run,seed,accuracy,found,evaluations\n";
  for (std::size_t i = 0; i < report.runs.size(); ++i) {
    const auto& r = report.runs[i];
    for (std::size_t a = 0; a < r.accuracies.size(); ++a)
      runs << 'F' << r.problem_id << ',' << (i % opt.runs) << ',' << r.seed << ',' << num(r.accuracies[a]) << ','
           << r.found[a] << ',' << r.evaluations << '\n';
  }
  write_file(dir / "runs.csv", runs.str());

  json rows = json::array();
  for (const auto& row : report.rows)
    rows.push_back({{"problem", "F" + std::to_string(row.problem)},
                    {"accuracy", row.accuracy},
                    {"PR", row.peak_ratio},
                    {"SR", row.success_rate},
                    {"NR", row.runs}});
  json averages = json::array();
  for (double acc : opt.accuracies) {
    double pr = 0.0, sr = 0.0;
    int n = 0;
    for (const auto& row : report.rows)
      if (row.accuracy == acc) pr += row.peak_ratio, sr += row.success_rate, ++n;
    averages.push_back({{"accuracy", acc}, {"PR", n ? pr / n : 0.0}, {"SR", n ? sr / n : 0.0}});
  }
  json rewards = json::object();
  for (std::size_t i = 0; i < opt.problems.size(); ++i)
    rewards["F" + std::to_string(opt.problems[i])] = report.mean_episode_reward[i];
  const json out = {{"controller", controller.name()},
                    {"rows", rows},
                    {"averages", averages},
                    {"mean_episode_reward", rewards}};
  write_file(dir / "report.json", out.dump(2) + "\n");

  std::cout << csv.str();
  return out;
}

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> sets;
  std::string seed, jobs, data_dir;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value configuration file");
    cmd->add_option("--set", sets, "override one setting, key=value (repeatable)");
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--jobs", jobs, "worker threads");
    cmd->add_option("--data-dir", data_dir, "directory with official benchmark data files");
  }

  Overrides overrides(const Overrides& extra = {}) const {
    Overrides out = extra;
    if (!seed.empty()) out.emplace_back("seed", seed);
    if (!jobs.empty()) out.emplace_back("jobs", jobs);
    if (!data_dir.empty()) out.emplace_back("data_dir", data_dir);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError("set", "expected key=value, got '" + s + "'");
      out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
  }
};

struct TrainFlags {
  std::string problems, epochs, batch_size, algo, reward;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--problems", problems, "training problems: F1,F4,... | train | all (default train)");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch-size", batch_size, "episodes per problem per epoch");
    cmd->add_option("--algo", algo, "ppo | a2c");
    cmd->add_option("--reward", reward, "clb | b | c");
  }

  Overrides overrides() const {
    Overrides out;
    if (!epochs.empty()) out.emplace_back("epochs", epochs);
    if (!batch_size.empty()) out.emplace_back("batch_size", batch_size);
    if (!algo.empty()) out.emplace_back("algo", algo);
    if (!reward.empty()) out.emplace_back("reward", reward);
    return out;
  }
};

const std::vector<int> kTrainDefault(bench::kTrainProblems.begin(), bench::kTrainProblems.end());
const std::vector<int> kTestDefault(bench::kTestProblems.begin(), bench::kTestProblems.end());

train::Logger stderr_logger() {
  return [](const std::string& line) { std::cerr << line << '\n'; };
}

int cmd_train(const ConfigFlags& cf, const TrainFlags& tf, const std::string& output, const std::string& resume,
              const std::vector<std::string>& args) {
  const auto resolved = resolve_config(cf.config_path, cf.overrides(tf.overrides()));
  const auto ids = parse_problem_list(tf.problems, kTrainDefault);
  print_config(std::cerr, resolved);

  fs::path dir;
  if (!resume.empty()) {
    dir = resume;
    if (!fs::is_directory(dir)) throw ParseError("resume", "no such run directory: " + resume);
  } else {
    dir = make_run_dir(output, "train");
  }
  json manifest = base_manifest("train", args);
  manifest["config"] = config_json(resolved);
  manifest["seed"] = resolved.config.seed;
  manifest["problems"] = ids;
  manifest["run_dir"] = dir.string();
  if (!resume.empty()) manifest["resumed"] = true;

  const fs::path ckpt = train::train(resolved.config, ids, dir, stderr_logger());
  manifest["checkpoint"] = ckpt.filename().string();
  manifest["checkpoint_sha256"] = sha256_file(ckpt);
  manifest["outputs"] = {"curve.csv", ckpt.filename().string(), "latest"};
  finish_manifest(manifest, dir);
  std::cout << dir.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const ConfigFlags& cf, const std::string& policy_spec, const std::string& mode,
                 const std::string& problems, int runs, const std::string& accuracy, bool trace, bool dump,
                 const std::string& output, const std::vector<std::string>& args) {
  auto resolved = resolve_config(cf.config_path, cf.overrides());
  EvalOptions opt{parse_problem_list(problems, kTestDefault), runs, parse_accuracies(accuracy), trace, dump};
  if (runs < 1) throw ParseError("runs", "must be at least 1");

  policy::PolicyParams params;
  fs::path checkpoint;
  const auto controller = make_controller(policy_spec, mode, params, checkpoint);
  if (!checkpoint.empty()) {
    resolved.config.attn_residual = params.attn_residual;
    resolved.source["attn_residual"] = "checkpoint";
  }
  print_config(std::cerr, resolved);

  const fs::path dir = make_run_dir(output, "evaluate");
  json manifest = base_manifest("evaluate", args);
  manifest["config"] = config_json(resolved);
  manifest["seed"] = resolved.config.seed;
  manifest["problems"] = opt.problems;
  manifest["runs"] = runs;
  manifest["accuracies"] = opt.accuracies;
  manifest["controller"] = controller.name();
  if (!checkpoint.empty()) {
    manifest["checkpoint"] = fs::absolute(checkpoint).string();
    manifest["checkpoint_sha256"] = sha256_file(checkpoint);
  }
  run_evaluation(controller, resolved.config, opt, dir);
  manifest["outputs"] = {"report.csv", "report.json", "runs.csv"};
  finish_manifest(manifest, dir);
  std::cerr << "wrote " << dir.string() << '\n';
  return kExitOk;
}

int cmd_bench_info(const std::vector<std::string>& ids, const std::string& data_dir_flag, const std::string& output,
                   const std::vector<std::string>& args) {
  std::optional<fs::path> data_dir;
  if (!data_dir_flag.empty()) data_dir = data_dir_flag;
  else if (const char* env = std::getenv("RLEMMO_DATA_DIR"); env != nullptr && *env != '\0') data_dir = env;

  std::vector<int> problems;
  bool all = false;
  for (const auto& s : ids) {
    if (s == "all") {
      all = true;
      for (int i = 1; i <= bench::kNumProblems; ++i) problems.push_back(i);
    } else {
      problems.push_back(bench::parse_problem_id(s));
    }
  }
  if (problems.empty()) throw ParseError("problems", "no problem given");
  json out = json::array();
  for (int id : problems) out.push_back(problem_info(bench::make_problem(id, data_dir)));
  const json printed = (!all && out.size() == 1) ? out[0] : out;
  std::cout << printed.dump() << '\n';

  const fs::path dir = make_run_dir(output, "bench-info");
  write_file(dir / "bench_info.json", printed.dump(2) + "\n");
  json manifest = base_manifest("bench-info", args);
  manifest["problems"] = problems;
  manifest["data_dir"] = data_dir ? data_dir->string() : "";
  manifest["outputs"] = {"bench_info.json"};
  finish_manifest(manifest, dir);
  return kExitOk;
}

/// Maps an ablation variant onto configuration overrides.
Overrides variant_overrides(const std::string& variant) {
  static const std::map<std::string, Overrides> table = {
      {"state:fg", {{"state", "fg"}}},      {"state:fn", {{"state", "fn"}}},
      {"state:null", {{"state", "null"}}},  {"action:An", {{"actions", "An"}}},
      {"action:Ag", {{"actions", "Ag"}}},   {"action:null", {{"actions", "null"}}},
      {"reward:b", {{"reward", "b"}}},      {"reward:c", {{"reward", "c"}}},
  };
  const auto it = table.find(variant);
  if (it == table.end())
    throw ParseError("variant", "unknown ablation '" + variant +
                                    "' (expected state:fg|fn|null, action:An|Ag|null, reward:b|c)");
  return it->second;
}

int cmd_ablate(const std::string& variant, const ConfigFlags& cf, const TrainFlags& tf,
               const std::string& eval_problems, int runs, const std::string& accuracy, const std::string& output,
               const std::vector<std::string>& args) {
  Overrides ov = variant_overrides(variant);
  for (auto& kv : tf.overrides()) ov.push_back(kv);
  const auto resolved = resolve_config(cf.config_path, cf.overrides(ov));
  const auto train_ids = parse_problem_list(tf.problems, kTrainDefault);
  EvalOptions opt{parse_problem_list(eval_problems, kTestDefault), runs, parse_accuracies(accuracy), false, false};
  if (runs < 1) throw ParseError("runs", "must be at least 1");
  print_config(std::cerr, resolved);

  std::string tag = variant;
  std::replace(tag.begin(), tag.end(), ':', '_');
  const fs::path dir = make_run_dir(output, "ablate-" + tag);
  json manifest = base_manifest("ablate", args);
  manifest["variant"] = variant;
  manifest["config"] = config_json(resolved);
  manifest["seed"] = resolved.config.seed;
  manifest["train_problems"] = train_ids;
  manifest["eval_problems"] = opt.problems;
  manifest["runs"] = runs;

  const fs::path ckpt = train::train(resolved.config, train_ids, dir / "train", stderr_logger());
  manifest["checkpoint"] = ("train" / ckpt.filename()).string();
  manifest["checkpoint_sha256"] = sha256_file(ckpt);

  const auto params = policy::load(ckpt);
  fs::create_directories(dir / "eval");
  auto report = run_evaluation(train::Controller::greedy(params), resolved.config, opt, dir / "eval");
  report["variant"] = variant;
  write_file(dir / "eval" / "report.json", report.dump(2) + "\n");
  manifest["outputs"] = {"train/curve.csv", "eval/report.csv", "eval/report.json", "eval/runs.csv"};
  finish_manifest(manifest, dir);
  std::cerr << "wrote " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"rlemmo: meta-learned strategy selection for multimodal optimization"};
  app.require_subcommand(1);
  std::string output = "runs";
  app.add_option("--output", output, "root directory for run outputs")->capture_default_str();

  auto* train_cmd = app.add_subcommand("train", "train the strategy-selection policy");
  ConfigFlags train_cf;
  TrainFlags train_tf;
  std::string resume;
  train_cf.add_to(train_cmd);
  train_tf.add_to(train_cmd);
  train_cmd->add_option("--resume", resume, "continue an interrupted run directory");

  auto* eval_cmd = app.add_subcommand("evaluate", "PR/SR report for a policy");
  ConfigFlags eval_cf;
  std::string policy_spec, mode = "greedy", eval_problems, accuracy;
  int runs = 50;
  bool trace = false, dump = false;
  eval_cf.add_to(eval_cmd);
  eval_cmd->add_option("--policy", policy_spec, "checkpoint file or run directory | random | fixed:A1..A5")->required();
  eval_cmd->add_option("--mode", mode, "greedy | sample (checkpoint policies)")->capture_default_str();
  eval_cmd->add_option("--problems", eval_problems, "F2,F5,... | test | all (default test)");
  eval_cmd->add_option("--runs", runs, "independent runs per problem")->capture_default_str();
  eval_cmd->add_option("--accuracy", accuracy, "accuracy levels, comma separated (default 1e-1..1e-5)");
  eval_cmd->add_flag("--trace", trace, "per-generation best objective, action histogram and clusters");
  eval_cmd->add_flag("--dump-features", dump, "per-generation NP x 22 state matrix");

  auto* info_cmd = app.add_subcommand("bench-info", "print benchmark problem metadata as JSON");
  std::vector<std::string> info_ids;
  std::string info_data_dir;
  info_cmd->add_option("problems", info_ids, "F1 .. F20 or all")->required();
  info_cmd->add_option("--data-dir", info_data_dir, "directory with official benchmark data files");

  auto* ablate_cmd = app.add_subcommand("ablate", "train and evaluate one ablation variant");
  std::string variant, ablate_problems, ablate_accuracy;
  int ablate_runs = 50;
  ConfigFlags ablate_cf;
  TrainFlags ablate_tf;
  ablate_cmd->add_option("variant", variant, "state:fg|fn|null, action:An|Ag|null, reward:b|c")->required();
  ablate_cf.add_to(ablate_cmd);
  ablate_tf.add_to(ablate_cmd);
  ablate_cmd->add_option("--eval-problems", ablate_problems, "evaluation problems (default test)");
  ablate_cmd->add_option("--runs", ablate_runs, "evaluation runs per problem")->capture_default_str();
  ablate_cmd->add_option("--accuracy", ablate_accuracy, "accuracy levels (default 1e-1..1e-5)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (*train_cmd) return cmd_train(train_cf, train_tf, output, resume, args);
    if (*eval_cmd)
      return cmd_evaluate(eval_cf, policy_spec, mode, eval_problems, runs, accuracy, trace, dump, output, args);
    if (*info_cmd) return cmd_bench_info(info_ids, info_data_dir, output, args);
    if (*ablate_cmd)
      return cmd_ablate(variant, ablate_cf, ablate_tf, ablate_problems, ablate_runs, ablate_accuracy, output, args);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitBadInput;
}

}  // namespace rlemmo
