#include "rlemmo/config.hpp"

#include "rlemmo/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rlemmo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ParseError(key, "expected a real number, got '" + v + "'");
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ParseError(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) { return static_cast<int>(to_long(key, v)); }

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ParseError(key, "expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ParseError(key, "expected on/off, got '" + v + "'");
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string onoff(bool b) { return b ? "on" : "off"; }

}  // namespace

evo::ActionSet parse_action_set(const std::string& text) {
  if (text == "all" || text == "AgAn") return evo::ActionSet::all();
  if (text == "An") return evo::ActionSet::only({1, 2, 3});
  if (text == "Ag") return evo::ActionSet::only({1, 4, 5});
  if (text == "null") return evo::ActionSet::only({1});
  evo::ActionSet set;
  set.allowed.fill(false);
  std::stringstream ss(text);
  std::string tok;
  bool any = false;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty() && (tok[0] == 'A' || tok[0] == 'a')) tok.erase(0, 1);
    if (tok.size() != 1 || tok[0] < '1' || tok[0] > '5') throw ParseError("actions", "unknown action set '" + text + "'");
    set.allowed[tok[0] - '1'] = true;
    any = true;
  }
  if (!any) throw ParseError("actions", "empty action set");
  return set;
}

std::string action_set_name(const evo::ActionSet& set) {
  std::string out;
  for (int a = 1; a <= evo::kNumActions; ++a)
    if (set.contains(a)) out += (out.empty() ? "" : ",") + std::to_string(a);
  return out;
}

double TrainConfig::learning_rate(int epoch) const {
  if (epochs <= 1) return lr_start;
  return lr_start + (lr_end - lr_start) * static_cast<double>(epoch) / static_cast<double>(epochs - 1);
}

void TrainConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto& ev = evolution;
  if (key == "epochs") epochs = to_int(key, v);
  else if (key == "batch_size") batch_size = to_int(key, v);
  else if (key == "lr_start") lr_start = to_double(key, v);
  else if (key == "lr_end") lr_end = to_double(key, v);
  else if (key == "gamma") gamma = to_double(key, v);
  else if (key == "gae_lambda") gae_lambda = to_double(key, v);
  else if (key == "clip_eps") clip_eps = to_double(key, v);
  else if (key == "ppo_epochs") ppo_epochs = to_int(key, v);
  else if (key == "value_coef") value_coef = to_double(key, v);
  else if (key == "entropy_coef") entropy_coef = to_double(key, v);
  else if (key == "max_grad_norm") max_grad_norm = to_double(key, v);
  else if (key == "normalize_advantages") normalize_advantages = to_bool(key, v);
  else if (key == "algo") {
    if (v == "ppo") algo = Algo::Ppo;
    else if (v == "a2c") algo = Algo::A2c;
    else throw ParseError(key, "expected ppo or a2c, got '" + v + "'");
  } else if (key == "attn_residual") attn_residual = to_bool(key, v);
  else if (key == "shuffle_problems") shuffle_problems = to_bool(key, v);
  else if (key == "population_size") ev.population_size = to_int(key, v);
  else if (key == "max_fes") ev.max_fes = to_long(key, v);
  else if (key == "F") ev.F = to_double(key, v);
  else if (key == "Cr") ev.Cr = to_double(key, v);
  else if (key == "k") ev.k = to_int(key, v);
  else if (key == "sigma_fraction") ev.sigma_fraction = to_double(key, v);
  else if (key == "crossover") ev.crossover = to_bool(key, v);
  else if (key == "actions") ev.actions = parse_action_set(v);
  else if (key == "dbscan_eps") dbscan_eps = to_double(key, v);
  else if (key == "dbscan_min_samples") dbscan_min_samples = to_int(key, v);
  else if (key == "reward") {
    if (v == "clb") reward = RewardVariant::Clb;
    else if (v == "b") reward = RewardVariant::Best;
    else if (v == "c") reward = RewardVariant::Count;
    else throw ParseError(key, "expected clb, b or c, got '" + v + "'");
  } else if (key == "noise") {
    if (v == "singleton") reward_options.noise = cluster::NoisePolicy::Singleton;
    else if (v == "exclude") reward_options.noise = cluster::NoisePolicy::Exclude;
    else throw ParseError(key, "expected singleton or exclude, got '" + v + "'");
  } else if (key == "reward_norm") {
    if (v == "raw") reward_options.scale = cluster::RewardScale::Raw;
    else if (v == "minmax") reward_options.scale = cluster::RewardScale::EpisodeMinMax;
    else throw ParseError(key, "expected raw or minmax, got '" + v + "'");
  } else if (key == "state") {
    if (v == "full") state = {true, true};
    else if (v == "fg") state = {true, false};
    else if (v == "fn") state = {false, true};
    else if (v == "null") state = {false, false};
    else throw ParseError(key, "expected full, fg, fn or null, got '" + v + "'");
  } else if (key == "count_from") {
    if (v == "archive") count_from = CountFrom::Archive;
    else if (v == "final_pop") count_from = CountFrom::FinalPopulation;
    else throw ParseError(key, "expected archive or final_pop, got '" + v + "'");
  } else if (key == "data_dir") {
    if (v.empty()) data_dir.reset();
    else data_dir = v;
  } else if (key == "seed") seed = to_u64(key, v);
  else if (key == "jobs") jobs = to_int(key, v);
  else throw ParseError(key, "unknown configuration key");
}

std::vector<std::pair<std::string, std::string>> TrainConfig::entries() const {
  const auto& ev = evolution;
  const char* algo_name = algo == Algo::Ppo ? "ppo" : "a2c";
  const char* reward_name = reward == RewardVariant::Clb ? "clb" : reward == RewardVariant::Best ? "b" : "c";
  const char* state_name = state.global ? (state.neighborhood ? "full" : "fg") : (state.neighborhood ? "fn" : "null");
  return {
      {"epochs", std::to_string(epochs)},
      {"batch_size", std::to_string(batch_size)},
      {"lr_start", fmt(lr_start)},
      {"lr_end", fmt(lr_end)},
      {"gamma", fmt(gamma)},
      {"gae_lambda", fmt(gae_lambda)},
      {"clip_eps", fmt(clip_eps)},
      {"ppo_epochs", std::to_string(ppo_epochs)},
      {"value_coef", fmt(value_coef)},
      {"entropy_coef", fmt(entropy_coef)},
      {"max_grad_norm", fmt(max_grad_norm)},
      {"normalize_advantages", onoff(normalize_advantages)},
      {"algo", algo_name},
      {"attn_residual", onoff(attn_residual)},
      {"shuffle_problems", onoff(shuffle_problems)},
      {"population_size", std::to_string(ev.population_size)},
      {"max_fes", std::to_string(ev.max_fes)},
      {"F", fmt(ev.F)},
      {"Cr", fmt(ev.Cr)},
      {"k", std::to_string(ev.k)},
      {"sigma_fraction", fmt(ev.sigma_fraction)},
      {"crossover", onoff(ev.crossover)},
      {"actions", action_set_name(ev.actions)},
      {"dbscan_eps", fmt(dbscan_eps)},
      {"dbscan_min_samples", std::to_string(dbscan_min_samples)},
      {"reward", reward_name},
      {"noise", reward_options.noise == cluster::NoisePolicy::Singleton ? "singleton" : "exclude"},
      {"reward_norm", reward_options.scale == cluster::RewardScale::Raw ? "raw" : "minmax"},
      {"state", state_name},
      {"count_from", count_from == CountFrom::Archive ? "archive" : "final_pop"},
      {"data_dir", data_dir ? data_dir->string() : ""},
      {"seed", std::to_string(seed)},
      {"jobs", std::to_string(jobs)},
  };
}

void TrainConfig::validate() const {
  const auto bad = [](const char* key, const char* what) { throw ParseError(key, what); };
  if (epochs < 1) bad("epochs", "must be at least 1");
  if (batch_size < 1) bad("batch_size", "must be at least 1");
  if (!(lr_start > 0.0)) bad("lr_start", "must be positive");
  if (!(lr_end > 0.0)) bad("lr_end", "must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) bad("gamma", "must lie in [0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) bad("gae_lambda", "must lie in [0, 1]");
  if (!(clip_eps > 0.0)) bad("clip_eps", "must be positive");
  if (ppo_epochs < 1) bad("ppo_epochs", "must be at least 1");
  if (!(max_grad_norm > 0.0)) bad("max_grad_norm", "must be positive");
  if (!(dbscan_eps > 0.0)) bad("dbscan_eps", "must be positive");
  if (dbscan_min_samples < 1) bad("dbscan_min_samples", "must be at least 1");
  if (jobs < 1) bad("jobs", "must be at least 1");
  try {
    evolution.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError("evolution", e.what());
  }
}

void apply_config_file(TrainConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config", "cannot open " + path.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no), "expected 'key = value'");
    config.set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

}  // namespace rlemmo
