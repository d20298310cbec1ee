#include "vcell/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <utility>

#include "vcell/environment.hpp"
#include "vcell/units.hpp"

namespace vcell::harness {

using nlohmann::json;

namespace {

template <class E>
using NameTable = std::vector<std::pair<const char*, E>>;

const NameTable<Solver>& solver_names() {
  static const NameTable<Solver> names{{"sarl", Solver::Sarl},     {"marl", Solver::Marl},
                                       {"sarl_marl", Solver::SarlMarl}, {"genie", Solver::Genie},
                                       {"random", Solver::Random}, {"equal", Solver::Equal}};
  return names;
}

const NameTable<mobility::DropMode> drop_modes{{"common_x", mobility::DropMode::CommonX},
                                               {"safety_distance", mobility::DropMode::SafetyDistance}};
const NameTable<mobility::StartMode> start_modes{{"origin", mobility::StartMode::Origin},
                                                 {"uniform_bin", mobility::StartMode::UniformBin}};
const NameTable<channel::FadingMode> fading_modes{{"frozen", channel::FadingMode::Frozen},
                                                  {"stochastic", channel::FadingMode::Stochastic}};
const NameTable<ActionMode> action_modes{{"per_pair", ActionMode::PerPair},
                                         {"per_ap_uniform", ActionMode::PerApUniform}};
const NameTable<baselines::RandomGrid> random_grids{{"verbatim", baselines::RandomGrid::Verbatim},
                                                    {"corrected", baselines::RandomGrid::Corrected}};

template <class E>
const char* name_of(const NameTable<E>& table, E value) {
  for (const auto& [name, v] : table)
    if (v == value) return name;
  throw std::logic_error("unnamed enum value");
}

// Walks one JSON object, filling fields in place and collecting errors under
// a dotted path.
class Reader {
 public:
  Reader(const json* node, std::string path, FieldErrors& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_->is_object()) {
      errors_.add(path_.empty() ? "<root>" : path_, "must be an object");
      node_ = nullptr;
    }
  }

  template <class T>
  void number(const char* key, T& out) {
    const json* v = find(key);
    if (!v) return;
    if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) return fail(key, "must be a number");
      out = v->get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v->is_number_unsigned()) return fail(key, "must be a non-negative integer");
      out = v->get<T>();
    } else {
      if (!v->is_number_integer()) return fail(key, "must be an integer");
      out = v->get<T>();
    }
  }

  void boolean(const char* key, bool& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_boolean()) return fail(key, "must be true or false");
    out = v->get<bool>();
  }

  template <class T>
  void numbers(const char* key, std::vector<T>& out) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_array()) return fail(key, "must be an array");
    std::vector<T> values;
    for (const auto& item : *v) {
      const bool ok = std::is_floating_point_v<T> ? item.is_number() : item.is_number_unsigned();
      if (!ok) return fail(key, "has an element of the wrong type");
      values.push_back(item.get<T>());
    }
    out = std::move(values);
  }

  template <class E>
  void choice(const char* key, E& out, const NameTable<E>& table) {
    const json* v = find(key);
    if (!v) return;
    if (v->is_string()) {
      for (const auto& [name, value] : table)
        if (*v == name) {
          out = value;
          return;
        }
    }
    std::string allowed;
    for (const auto& [name, value] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    fail(key, "must be one of: " + allowed);
  }

  Reader child(const char* key) { return Reader(find(key), join(key), errors_); }

  // Reports keys that no accessor asked for.
  void finish() {
    if (!node_) return;
    for (const auto& [key, value] : node_->items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) errors_.add(join(key), "unknown key");
  }

 private:
  const json* find(const char* key) {
    seen_.emplace_back(key);
    if (!node_) return nullptr;
    auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void fail(const char* key, const std::string& message) { errors_.add(join(key), message); }

  const json* node_;
  std::string path_;
  FieldErrors& errors_;
  std::vector<std::string> seen_;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::string_view solver_name(Solver solver) { return name_of(solver_names(), solver); }

std::optional<Solver> parse_solver(std::string_view name) {
  for (const auto& [n, s] : solver_names())
    if (name == n) return s;
  return std::nullopt;
}

bool is_learning(Solver solver) {
  return solver == Solver::Sarl || solver == Solver::Marl || solver == Solver::SarlMarl;
}

void ExperimentConfig::validate(FieldErrors& errors) const {
  FieldErrors inner;
  scenario.validate(inner);
  inner.require(scenario.drop.mode == mobility::DropMode::CommonX, "drop.mode",
                "the tabular environment needs common_x");
  errors.append(inner, "scenario.");
  learning.validate(errors);
  errors.require(!seeds.empty(), "seeds", "must list at least one seed");
  errors.require(test_episodes >= 1, "test_episodes", "must be >= 1");
  errors.require(genie_mc_draws >= 1, "genie_mc_draws", "must be >= 1");
}

void ExperimentConfig::validate() const {
  FieldErrors errors;
  validate(errors);
  errors.throw_if_any();
}

json to_json(const ExperimentConfig& c) {
  const auto& s = c.scenario;
  json j;
  j["scenario"]["road"] = {{"roi_length_m", s.road.roi_length_m},
                           {"lane_count", s.road.lane_count},
                           {"lane_width_m", s.road.lane_width_m},
                           {"vu_speed_kmh", s.road.vu_speed_kmh},
                           {"timestep_s", s.road.timestep_s}};
  j["scenario"]["drop"] = {{"vu_count", s.drop.vu_count},
                           {"mode", name_of(drop_modes, s.drop.mode)},
                           {"start", name_of(start_modes, s.drop.start)},
                           {"headway_s", s.drop.headway_s}};
  j["scenario"]["aps"] = {{"x_m", s.aps.x_m},
                          {"y_m", s.aps.y_m},
                          {"coverage_radius_m", s.aps.coverage_radius_m},
                          {"antennas_per_ap", s.aps.antennas_per_ap}};
  j["scenario"]["channel"] = {{"pathloss_intercept_db", s.channel.pathloss_intercept_db},
                              {"pathloss_slope_db", s.channel.pathloss_slope_db},
                              {"reference_distance_m", s.channel.reference_distance_m},
                              {"shadowing_std_db", s.channel.shadowing_std_db},
                              {"noise_variance_mw", s.channel.noise_variance_mw},
                              {"fading", name_of(fading_modes, s.channel.fading)}};
  j["scenario"]["phy"] = {{"kappa", s.phy.kappa},
                          {"gamma_min_db", s.phy.gamma_min_db},
                          {"p_max_dbm", s.phy.p_max_dbm},
                          {"zeta", s.phy.zeta}};
  j["scenario"]["actions"] = {{"levels_dbm", s.actions.levels_dbm},
                              {"mode", name_of(action_modes, s.actions.mode)},
                              {"association_search", s.actions.association_search}};
  const auto& l = c.learning;
  j["learning"] = {{"discount", l.discount},           {"alpha_start", l.alpha_start},
                   {"alpha_end", l.alpha_end},         {"epsilon_start", l.epsilon_start},
                   {"epsilon_end", l.epsilon_end},     {"episodes", l.episodes},
                   {"agents", l.agents},               {"curve_interval", l.curve_interval}};
  j["solver"] = std::string(solver_name(c.solver));
  j["seeds"] = c.seeds;
  j["test_episodes"] = c.test_episodes;
  j["genie_mc_draws"] = c.genie_mc_draws;
  j["random_grid"] = name_of(random_grids, c.random_grid);
  j["record_updates"] = c.record_updates;
  return j;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  FieldErrors errors;
  Reader root(&doc, "", errors);

  Reader scenario = root.child("scenario");
  auto& s = c.scenario;
  {
    Reader r = scenario.child("road");
    r.number("roi_length_m", s.road.roi_length_m);
    r.number("lane_count", s.road.lane_count);
    r.number("lane_width_m", s.road.lane_width_m);
    r.number("vu_speed_kmh", s.road.vu_speed_kmh);
    r.number("timestep_s", s.road.timestep_s);
    r.finish();
  }
  {
    Reader r = scenario.child("drop");
    r.number("vu_count", s.drop.vu_count);
    r.choice("mode", s.drop.mode, drop_modes);
    r.choice("start", s.drop.start, start_modes);
    r.number("headway_s", s.drop.headway_s);
    r.finish();
  }
  {
    Reader r = scenario.child("aps");
    r.numbers("x_m", s.aps.x_m);
    r.number("y_m", s.aps.y_m);
    r.number("coverage_radius_m", s.aps.coverage_radius_m);
    r.number("antennas_per_ap", s.aps.antennas_per_ap);
    r.finish();
  }
  {
    Reader r = scenario.child("channel");
    r.number("pathloss_intercept_db", s.channel.pathloss_intercept_db);
    r.number("pathloss_slope_db", s.channel.pathloss_slope_db);
    r.number("reference_distance_m", s.channel.reference_distance_m);
    r.number("shadowing_std_db", s.channel.shadowing_std_db);
    r.number("noise_variance_mw", s.channel.noise_variance_mw);
    r.choice("fading", s.channel.fading, fading_modes);
    r.finish();
  }
  {
    Reader r = scenario.child("phy");
    r.number("kappa", s.phy.kappa);
    r.numbers("gamma_min_db", s.phy.gamma_min_db);
    r.numbers("p_max_dbm", s.phy.p_max_dbm);
    r.numbers("zeta", s.phy.zeta);
    r.finish();
  }
  {
    Reader r = scenario.child("actions");
    r.numbers("levels_dbm", s.actions.levels_dbm);
    r.choice("mode", s.actions.mode, action_modes);
    r.boolean("association_search", s.actions.association_search);
    r.finish();
  }
  scenario.finish();

  {
    Reader r = root.child("learning");
    auto& l = c.learning;
    r.number("discount", l.discount);
    r.number("alpha_start", l.alpha_start);
    r.number("alpha_end", l.alpha_end);
    r.number("epsilon_start", l.epsilon_start);
    r.number("epsilon_end", l.epsilon_end);
    r.number("episodes", l.episodes);
    r.number("agents", l.agents);
    r.number("curve_interval", l.curve_interval);
    r.finish();
  }
  root.choice("solver", c.solver, solver_names());
  root.numbers("seeds", c.seeds);
  root.number("test_episodes", c.test_episodes);
  root.number("genie_mc_draws", c.genie_mc_draws);
  root.choice("random_grid", c.random_grid, random_grids);
  root.boolean("record_updates", c.record_updates);
  root.finish();

  // Fields that failed to parse keep their defaults, so validating now only
  // adds range errors for the ones that did parse.
  c.validate(errors);
  errors.throw_if_any();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(to_json(config).dump()));
  return buf;
}

void write_log(std::ostream& out, const EpisodeLog& log) {
  const std::size_t u = log.vu_count;
  out << "# config_hash=" << log.config_hash << '\n';
  out << "# seed=" << log.seed << '\n';
  out << "# solver=" << log.solver << '\n';
  out << "# action_space=" << log.action_space << '\n';
  out << "episode,step,state,action";
  for (const char* col : {"sinr_db_", "rate_", "serving_"})
    for (std::size_t i = 0; i < u; ++i) out << ',' << col << i;
  out << ",reward,feasible,violation\n";
  for (const auto& r : log.steps) {
    out << r.episode << ',' << r.step << ',' << r.state << ',' << r.action;
    for (double v : r.sinr_db) out << ',' << format_double(v);
    for (double v : r.rate) out << ',' << format_double(v);
    for (std::size_t v : r.serving) out << ',' << v;
    out << ',' << format_double(r.reward) << ',' << (r.feasible ? 1 : 0) << ','
        << (r.violation ? 1 : 0) << '\n';
  }
}

EpisodeLog read_log(std::istream& in) {
  EpisodeLog log;
  std::string line;
  bool header = false;
  std::size_t line_no = 0;
  auto bad = [&](const std::string& why) {
    return std::invalid_argument("read_log: line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "config_hash") log.config_hash = value;
      else if (key == "seed") log.seed = std::stoull(value);
      else if (key == "solver") log.solver = value;
      else if (key == "action_space") log.action_space = value;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (!header) {
      header = true;
      log.vu_count = static_cast<std::size_t>(
          std::count_if(cells.begin(), cells.end(),
                        [](const std::string& c) { return c.rfind("sinr_db_", 0) == 0; }));
      if (cells.size() != 7 + 3 * log.vu_count) throw bad("unexpected header");
      continue;
    }
    const std::size_t u = log.vu_count;
    if (cells.size() != 7 + 3 * u) throw bad("wrong column count");
    StepRecord r;
    r.episode = std::stoull(cells[0]);
    r.step = std::stoull(cells[1]);
    r.state = std::stoull(cells[2]);
    r.action = std::stoll(cells[3]);
    for (std::size_t i = 0; i < u; ++i) {
      r.sinr_db.push_back(std::stod(cells[4 + i]));
      r.rate.push_back(std::stod(cells[4 + u + i]));
      r.serving.push_back(std::stoull(cells[4 + 2 * u + i]));
    }
    r.reward = std::stod(cells[4 + 3 * u]);
    r.feasible = cells[5 + 3 * u] == "1";
    r.violation = cells[6 + 3 * u] == "1";
    log.steps.push_back(std::move(r));
  }
  if (!header) throw std::invalid_argument("read_log: missing header");
  return log;
}

SummaryMetrics summarize(const EpisodeLog& log) {
  SummaryMetrics m;
  m.steps = log.steps.size();
  m.vu_count = log.vu_count;
  m.rate_means.assign(log.vu_count, 0.0);
  if (m.steps == 0) return m;
  double total = 0.0;
  std::size_t successes = 0;
  for (const auto& r : log.steps) {
    total += r.reward;
    if (!r.violation) ++successes;
    for (std::size_t i = 0; i < log.vu_count; ++i) m.rate_means[i] += r.rate[i];
  }
  const double n = static_cast<double>(m.steps);
  for (auto& v : m.rate_means) v /= n;
  m.wsr = total / n;
  m.avg_per_vu_reward = log.vu_count ? total / (n * static_cast<double>(log.vu_count)) : 0.0;
  m.success_probability = static_cast<double>(successes) / n;
  return m;
}

double recompute_reward(const StepRecord& step, const phy::PhyConfig& phy) {
  if (!step.feasible) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < step.sinr_db.size(); ++i) {
    const double sinr = db_to_linear(step.sinr_db[i]);
    if (!(sinr >= phy.gamma_min_linear(i))) return 0.0;
    total += phy.weight(i) * phy::backhaul_consumption(step.serving[i], phy::rate(sinr, phy.kappa));
  }
  return total;
}

std::optional<std::size_t> episodes_to_threshold(const std::vector<agents::GreedyPoint>& curve,
                                                 double reference, double fraction,
                                                 std::size_t window) {
  const double target = fraction * reference;
  std::size_t first = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    sum += curve[k].per_vu_reward;
    while (curve[first].episode + window <= curve[k].episode) sum -= curve[first++].per_vu_reward;
    if (curve[k].episode + 1 < window) continue;
    const double mean = sum / static_cast<double>(k - first + 1);
    if (mean >= target) return curve[k].episode + 1;
  }
  return std::nullopt;
}

namespace {

StepRecord record_of(std::size_t episode, std::size_t step, std::size_t state, std::int64_t action,
                     const Evaluation& eval) {
  StepRecord r;
  r.episode = episode;
  r.step = step;
  r.state = state;
  r.action = action;
  for (double s : eval.metrics.sinr) r.sinr_db.push_back(linear_to_db(s));
  r.rate = eval.metrics.rate;
  r.serving = eval.metrics.serving;
  r.reward = eval.reward;
  r.feasible = eval.feasible;
  r.violation = !eval.success;
  return r;
}

}  // namespace

RunResult run_once(const ExperimentConfig& config, std::uint64_t seed,
                   const agents::UpdateSink& sink) {
  config.validate();
  Environment env(config.scenario, seed);
  const auto& actions = env.actions();

  RunResult out;
  out.solver = config.solver;
  out.seed = seed;
  out.log.config_hash = config_hash(config);
  out.log.seed = seed;
  out.log.solver = std::string(solver_name(config.solver));
  out.log.action_space = actions.descriptor();
  out.log.vu_count = config.scenario.vu_count();

  std::vector<std::size_t> dense_policy;
  std::vector<std::uint64_t> raw_policy;
  std::optional<baselines::GenieTable> genie;
  auto genie_table = [&]() -> const baselines::GenieTable& {
    if (!genie) genie = baselines::genie_table(env, config.genie_mc_draws);
    return *genie;
  };

  TrainingInfo info;
  info.episodes = config.learning.episodes;
  switch (config.solver) {
    case Solver::Sarl: {
      auto r = agents::train_sarl(env, config.learning, seed, sink);
      dense_policy = agents::greedy_policy(r.table);
      info.curve = std::move(r.curve);
      break;
    }
    case Solver::Marl: {
      auto r = agents::train_marl(env, config.learning, seed, sink);
      raw_policy = agents::marl_greedy_codes(r.tables, actions);
      info.curve = std::move(r.curve);
      break;
    }
    case Solver::SarlMarl: {
      auto r = agents::train_sarl_marl(env, config.learning, seed, sink);
      dense_policy = r.central.policy();
      info.curve = std::move(r.curve);
      break;
    }
    case Solver::Genie:
      genie_table();
      break;
    case Solver::Random:
    case Solver::Equal:
      break;
  }
  if (is_learning(config.solver)) {
    if (!info.curve.greedy.empty()) {
      info.genie_per_vu_reward = baselines::genie_policy(env, genie_table()).per_vu_reward;
      info.episodes_to_threshold = episodes_to_threshold(info.curve.greedy, *info.genie_per_vu_reward);
    }
    out.training = std::move(info);
  }

  Rng rng = make_rng(seed, Stream::Baseline);
  const phy::PowerPlan equal = baselines::equal_power_policy(config.scenario);
  const phy::PowerPlan silent(config.scenario.ap_count(), config.scenario.vu_count());
  env.set_next_draw(kTestDrawBase);
  for (std::size_t k = 0; k < config.test_episodes; ++k) {
    const std::size_t episode = config.learning.episodes + k;
    env.reset(episode);
    std::size_t step = 0;
    while (!env.done()) {
      const std::size_t s = env.state().bin;
      std::int64_t action = -1;
      Evaluation eval;
      switch (config.solver) {
        case Solver::Sarl:
        case Solver::SarlMarl:
          action = static_cast<std::int64_t>(dense_policy[s]);
          eval = env.evaluate(dense_policy[s]);
          break;
        case Solver::Marl:
          if (auto d = actions.dense_index(raw_policy[s])) {
            action = static_cast<std::int64_t>(*d);
            eval = env.evaluate(*d);
          } else {
            eval = env.evaluate(actions.plan_from_raw(raw_policy[s]));
          }
          break;
        case Solver::Genie:
          if (const auto& g = genie_table()[s]) {
            action = static_cast<std::int64_t>(g->action);
            eval = env.evaluate(g->action);
          } else {
            eval = env.evaluate(silent);
          }
          break;
        case Solver::Random:
          eval = env.evaluate(baselines::random_power_policy(config.scenario.ap_count(),
                                                             config.scenario.vu_count(), rng,
                                                             config.random_grid));
          break;
        case Solver::Equal:
          eval = env.evaluate(equal);
          break;
      }
      out.log.steps.push_back(record_of(episode, step++, s, action, eval));
      env.transition();
    }
  }
  out.summary = summarize(out.log);
  return out;
}

void write_update_header(std::ostream& out) {
  out << "episode,step,agent,state,action,reward,max_next,q_old,q_new,epsilon,alpha,discount,"
         "terminal\n";
}

void write_update(std::ostream& out, const agents::UpdateRecord& r) {
  out << r.episode << ',' << r.step << ',' << r.agent << ',' << r.state << ',' << r.action;
  for (double v : {r.reward, r.max_next, r.q_old, r.q_new, r.epsilon, r.alpha, r.discount})
    out << ',' << format_double(v);
  out << ',' << (r.terminal ? 1 : 0) << '\n';
}

std::vector<agents::UpdateRecord> read_updates(std::istream& in) {
  std::vector<agents::UpdateRecord> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
    if (c.size() != 13) throw std::invalid_argument("read_updates: wrong column count");
    agents::UpdateRecord r;
    r.episode = std::stoull(c[0]);
    r.step = std::stoull(c[1]);
    r.agent = std::stoull(c[2]);
    r.state = std::stoull(c[3]);
    r.action = std::stoull(c[4]);
    r.reward = std::stod(c[5]);
    r.max_next = std::stod(c[6]);
    r.q_old = std::stod(c[7]);
    r.q_new = std::stod(c[8]);
    r.epsilon = std::stod(c[9]);
    r.alpha = std::stod(c[10]);
    r.discount = std::stod(c[11]);
    r.terminal = c[12] == "1";
    out.push_back(r);
  }
  return out;
}

namespace {

json metrics_json(const SummaryMetrics& m) {
  return {{"steps", m.steps},
          {"vu_count", m.vu_count},
          {"wsr", m.wsr},
          {"avg_per_vu_reward", m.avg_per_vu_reward},
          {"rate_means", m.rate_means},
          {"success_probability", m.success_probability}};
}

json optional_json(const auto& v) { return v ? json(*v) : json(nullptr); }

void write_curve(std::ostream& out, const TrainingInfo& info) {
  out << "episode,behaviour_per_vu_reward,greedy_per_vu_reward\n";
  std::size_t g = 0;
  for (std::size_t e = 0; e < info.curve.behaviour.size(); ++e) {
    out << e << ',' << format_double(info.curve.behaviour[e]) << ',';
    if (g < info.curve.greedy.size() && info.curve.greedy[g].episode == e)
      out << format_double(info.curve.greedy[g++].per_vu_reward);
    out << '\n';
  }
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

json summary_json(const RunResult& r) {
  json j;
  j["solver"] = r.log.solver;
  j["seed"] = r.seed;
  j["config_hash"] = r.log.config_hash;
  j["action_space"] = r.log.action_space;
  j["metrics"] = metrics_json(r.summary);
  if (r.training) {
    const auto& t = *r.training;
    j["training"] = {{"episodes", t.episodes},
                     {"genie_per_vu_reward", optional_json(t.genie_per_vu_reward)},
                     {"episodes_to_threshold", optional_json(t.episodes_to_threshold)},
                     {"final_behaviour_per_vu_reward",
                      t.curve.behaviour.empty() ? json(nullptr) : json(t.curve.behaviour.back())}};
  }
  return j;
}

std::vector<RunResult> run(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::filesystem::create_directories(out_dir);
  const std::string name(solver_name(config.solver));
  std::vector<RunResult> results;
  SummaryMetrics mean;
  mean.vu_count = config.scenario.vu_count();
  mean.rate_means.assign(mean.vu_count, 0.0);
  json per_seed = json::array();
  for (std::uint64_t seed : config.seeds) {
    const std::string stem = name + "_seed" + std::to_string(seed);
    std::ofstream updates;
    agents::UpdateSink sink;
    if (config.record_updates && is_learning(config.solver)) {
      updates = open_out(out_dir / (stem + "_updates.csv"));
      write_update_header(updates);
      sink = [&updates](const agents::UpdateRecord& rec) { write_update(updates, rec); };
    }
    RunResult r = run_once(config, seed, sink);
    {
      auto f = open_out(out_dir / (stem + ".csv"));
      write_log(f, r.log);
    }
    {
      auto f = open_out(out_dir / (stem + ".json"));
      f << summary_json(r).dump(2) << '\n';
    }
    if (r.training) {
      auto f = open_out(out_dir / (stem + "_curve.csv"));
      write_curve(f, *r.training);
    }
    mean.steps += r.summary.steps;
    mean.wsr += r.summary.wsr;
    mean.avg_per_vu_reward += r.summary.avg_per_vu_reward;
    mean.success_probability += r.summary.success_probability;
    for (std::size_t i = 0; i < mean.vu_count; ++i) mean.rate_means[i] += r.summary.rate_means[i];
    per_seed.push_back(summary_json(r));
    results.push_back(std::move(r));
  }
  const double n = static_cast<double>(config.seeds.size());
  mean.wsr /= n;
  mean.avg_per_vu_reward /= n;
  mean.success_probability /= n;
  for (auto& v : mean.rate_means) v /= n;

  json j;
  j["solver"] = name;
  j["config_hash"] = config_hash(config);
  j["config"] = to_json(config);
  j["mean_over_seeds"] = metrics_json(mean);
  j["runs"] = std::move(per_seed);
  auto f = open_out(out_dir / (name + "_summary.json"));
  f << j.dump(2) << '\n';
  return results;
}

namespace {

template <class Apply>
std::vector<SweepRow> sweep(const ExperimentConfig& config, const std::vector<double>& points,
                            const std::vector<Solver>& solvers, Apply apply) {
  if (!std::is_sorted(points.begin(), points.end()))
    throw std::invalid_argument("sweep: points must be ascending");
  std::vector<SweepRow> rows;
  for (double p : points) {
    ExperimentConfig c = config;
    apply(c, p);
    for (Solver s : solvers) {
      c.solver = s;
      SweepRow row{p, s, 0.0, 0.0, 0.0};
      for (std::uint64_t seed : c.seeds) {
        const RunResult r = run_once(c, seed);
        row.wsr += r.summary.wsr;
        row.avg_per_vu_reward += r.summary.avg_per_vu_reward;
        row.success_probability += r.summary.success_probability;
      }
      const double n = static_cast<double>(c.seeds.size());
      row.wsr /= n;
      row.avg_per_vu_reward /= n;
      row.success_probability /= n;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> sweep_sinr_threshold(const ExperimentConfig& config,
                                           const std::vector<double>& thresholds_db,
                                           const std::vector<Solver>& solvers) {
  return sweep(config, thresholds_db, solvers,
               [](ExperimentConfig& c, double t) { c.scenario.phy.gamma_min_db = {t}; });
}

std::vector<SweepRow> sweep_coverage_radius(const ExperimentConfig& config,
                                            const std::vector<double>& radii_m,
                                            const std::vector<Solver>& solvers) {
  return sweep(config, radii_m, solvers,
               [](ExperimentConfig& c, double r) { c.scenario.aps.coverage_radius_m = r; });
}

void write_sweep(std::ostream& out, std::string_view parameter, const ExperimentConfig& config,
                 const std::vector<SweepRow>& rows) {
  out << "# config_hash=" << config_hash(config) << '\n';
  out << parameter << ",solver,wsr,avg_per_vu_reward,success_probability\n";
  for (const auto& r : rows)
    out << format_double(r.parameter) << ',' << solver_name(r.solver) << ',' << format_double(r.wsr)
        << ',' << format_double(r.avg_per_vu_reward) << ',' << format_double(r.success_probability)
        << '\n';
}

FairnessReport fairness_report(const EpisodeLog& log) {
  if (log.steps.empty()) throw std::invalid_argument("fairness_report: empty log");
  FairnessReport rep;
  rep.rate_mean.assign(log.vu_count, 0.0);
  rep.rate_min.assign(log.vu_count, 0.0);
  for (const auto& r : log.steps) {
    if (!(r.reward > 0.0)) continue;
    for (std::size_t i = 0; i < log.vu_count; ++i) {
      rep.rate_mean[i] += r.rate[i];
      rep.rate_min[i] = rep.qualifying_steps == 0 ? r.rate[i] : std::min(rep.rate_min[i], r.rate[i]);
    }
    ++rep.qualifying_steps;
  }
  if (rep.qualifying_steps == 0)
    throw std::invalid_argument("fairness_report: no step with nonzero reward");
  for (auto& v : rep.rate_mean) v /= static_cast<double>(rep.qualifying_steps);
  return rep;
}

json to_json(const FairnessReport& report) {
  return {{"qualifying_steps", report.qualifying_steps},
          {"rate_mean", report.rate_mean},
          {"rate_min", report.rate_min}};
}

}  // namespace vcell::harness
