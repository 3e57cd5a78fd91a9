#include "handover/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "handover/cost_model.hpp"
#include "handover/delay_dist.hpp"
#include "handover/mc_sim.hpp"
#include "handover/optimizer.hpp"
#include "handover/render.hpp"
#include "handover/sweep.hpp"

namespace handover {

namespace {

using ordered_json = nlohmann::ordered_json;

struct DomainFlags {
  std::optional<double> t_lo, t_hi, A_lo, A_hi, refine_tol;
  std::optional<int> n_t, n_A;

  void attach(CLI::App* cmd) {
    cmd->add_option("--t-lo", t_lo, "search lower bound for t");
    cmd->add_option("--t-hi", t_hi, "search upper bound for t");
    cmd->add_option("--a-lo", A_lo, "search lower bound for A");
    cmd->add_option("--a-hi", A_hi, "search upper bound for A");
    cmd->add_option("--grid-t", n_t, "grid nodes along t (default 400)");
    cmd->add_option("--grid-a", n_A, "grid nodes along A (default 400)");
    cmd->add_option("--refine-tol", refine_tol, "refinement tolerance (default 1e-6)");
  }

  SearchDomain resolve(const DelayDistribution& delay) const {
    SearchDomain d = default_domain(delay);
    if (t_lo) d.t_lo = *t_lo;
    if (t_hi) d.t_hi = *t_hi;
    if (A_lo) d.A_lo = *A_lo;
    if (A_hi) d.A_hi = *A_hi;
    if (n_t) d.n_t = *n_t;
    if (n_A) d.n_A = *n_A;
    if (refine_tol) d.refine_tol = *refine_tol;
    validate(d);
    return d;
  }
};

std::vector<double> parse_ch_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad ch value '" + item + "'");
    }
    if (pos != item.size()) throw std::invalid_argument("bad ch value '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("--ch-values must list at least one value");
  return values;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = text.find_last_not_of(" \t\r");
  return text.substr(first, last - first + 1);
}

// Plain key=value config, keys named like the flags; options given on the
// command line keep their values.
void apply_config(CLI::App* cmd, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string entry = trim(line);
    if (entry.empty() || entry[0] == '#') continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    const std::string key = trim(entry.substr(0, eq));
    const std::string value = trim(entry.substr(eq + 1));
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config")
      throw std::invalid_argument("config key '" + key + "' does not name a flag of " +
                                  cmd->get_name());
    if (opt->count() > 0) continue;  // flags win
    opt->add_result(value);
    opt->run_callback();
  }
}

ordered_json report_json(const SimReport& r) {
  ordered_json j;
  j["mean_cost"] = round12(r.mean_cost);
  j["se_cost"] = round12(r.se_cost);
  j["mean_waiting"] = round12(r.mean_waiting);
  j["mean_visits"] = round12(r.mean_visits);
  ordered_json hist = ordered_json::object();
  for (const auto& [visits, count] : r.hist_visits) hist[std::to_string(visits)] = count;
  j["hist_visits"] = hist;
  j["recalibrations"] = r.recalibrations;
  j["cycles_run"] = r.cycles_run;
  return j;
}

ordered_json sweep_json(const std::vector<SweepRow>& rows) {
  ordered_json arr = ordered_json::array();
  for (const SweepRow& r : rows) {
    ordered_json j;
    j["ch"] = round12(r.ch);
    j["cr"] = round12(r.cr);
    j["t_star"] = round12(r.t_star);
    j["a_star"] = round12(r.a_star);
    j["cost_star"] = round12(r.cost_star);
    j["expected_waiting"] = round12(r.expected_waiting);
    j["expected_visits"] = round12(r.expected_visits);
    arr.push_back(j);
  }
  return arr;
}

struct CliOptions {
  // shared
  std::string dist;
  std::string config;
  double t = 0.0;
  double A = std::numeric_limits<double>::quiet_NaN();
  double ch = 1.0;
  double cr = 1.0;
  double tol = kDefaultTol;
  std::string out = "-";
  std::string format = "csv";
  std::uint64_t seed = 12345;
  std::int64_t cycles = 100000;
  std::string protocol = "never-waits";
  double robot_wait_rate = -1.0;
  std::optional<double> recal_threshold;
  std::string ch_values_text;
  DomainFlags domain;
};

int cmd_eval(const CliOptions& o) {
  const DelayDistribution delay = parse_dist_spec(o.dist);
  const ScheduleParams params{o.t, o.A};
  validate(params);
  const CostRates rates{o.ch, o.cr};
  const CostBreakdown bd = expected_cost(ArrivalLaw{delay, params.t}, params.A, rates, o.tol);
  ordered_json j;
  j["expected_waiting"] = round12(bd.expected_waiting);
  j["expected_visits"] = round12(bd.expected_visits);
  j["total_cost"] = round12(bd.total_cost);
  j["method"] = to_string(bd.method);
  j["est_error"] = round12(bd.est_error);
  emit(j);
  return 0;
}

int cmd_optimize(const CliOptions& o) {
  const DelayDistribution delay = parse_dist_spec(o.dist);
  const CostRates rates{o.ch, o.cr};
  validate(rates);
  const SearchDomain domain = o.domain.resolve(delay);
  const OptimizationResult res = optimize(delay, rates, domain, o.tol);
  ordered_json j;
  j["t_star"] = round12(res.t_star);
  j["A_star"] = round12(res.A_star);
  j["cost_star"] = round12(res.cost_star);
  j["evaluations"] = res.evaluations;
  j["at_bound_t"] = res.at_bound_t;
  j["at_bound_A"] = res.at_bound_A;
  emit(j);
  return 0;
}

int cmd_sweep(const CliOptions& o) {
  SweepSpec spec;
  spec.delay = parse_dist_spec(o.dist);
  spec.cr = o.cr;
  spec.ch_values = o.ch_values_text.empty() ? default_ch_values() : parse_ch_list(o.ch_values_text);
  spec.domain = o.domain.resolve(spec.delay);
  spec.tol = o.tol;
  const std::vector<SweepRow> rows = run_sweep(spec);

  std::ostringstream body;
  if (o.format == "json")
    body << sweep_json(rows).dump(2) << "\n";
  else
    write_sweep_csv(body, rows);

  if (o.out == "-") {
    std::cout << body.str();
    return 0;
  }
  std::ofstream file(o.out, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot open '" << o.out << "' for writing\n";
    return 3;
  }
  file << body.str();
  file.flush();
  if (!file) {
    std::cerr << "error: failed writing '" << o.out << "'\n";
    return 3;
  }
  return 0;
}

int cmd_simulate(const CliOptions& o) {
  SimConfig cfg;
  cfg.law = ArrivalLaw{parse_dist_spec(o.dist), o.t};
  cfg.A = o.A;
  cfg.rates = CostRates{o.ch, o.cr};
  if (o.protocol == "never-waits")
    cfg.protocol = Protocol::RobotNeverWaits;
  else if (o.protocol == "first-waits")
    cfg.protocol = Protocol::FirstArrivalWaits;
  else
    throw std::invalid_argument("protocol must be never-waits or first-waits");
  cfg.cycles = o.cycles;
  cfg.seed = o.seed;
  cfg.robot_wait_rate = o.robot_wait_rate;
  cfg.recalibration_threshold = o.recal_threshold;
  emit(report_json(simulate(cfg)));
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Expected-cost analysis of a periodic robot meeting a randomly delayed human"};
  app.require_subcommand(1);

  CliOptions o;

  const auto add_dist = [&](CLI::App* cmd) {
    cmd->add_option("--dist", o.dist,
                    "delay law: uniform | exp | uniform:a,b | exp:rate | det:c | empirical:<path>");
    cmd->add_option("--config", o.config, "key=value file with the same keys as the flags");
  };
  const auto require_dist = [&]() {
    if (o.dist.empty()) throw std::invalid_argument("--dist is required");
  };
  const auto require_A = [&]() {
    if (std::isnan(o.A)) throw std::invalid_argument("--A is required");
  };
  const auto add_rates = [&](CLI::App* cmd) {
    cmd->add_option("--ch", o.ch, "human waiting cost per time unit (default 1)");
    cmd->add_option("--cr", o.cr, "cost per robot visit (default 1)");
  };

  CLI::App* eval = app.add_subcommand("eval", "expected cost of a schedule (t, A)");
  add_dist(eval);
  eval->add_option("--t", o.t, "aimed human arrival time (default 0)");
  eval->add_option("--A", o.A, "robot cycle period");
  add_rates(eval);
  eval->add_option("--tol", o.tol, "relative evaluation tolerance (default 1e-10)");

  CLI::App* opt = app.add_subcommand("optimize", "minimize cost over (t, A)");
  add_dist(opt);
  add_rates(opt);
  opt->add_option("--tol", o.tol, "relative evaluation tolerance (default 1e-10)");
  o.domain.attach(opt);

  CLI::App* sweep = app.add_subcommand("sweep", "optimal schedule as ch varies");
  add_dist(sweep);
  sweep->add_option("--cr", o.cr, "cost per robot visit (default 1)");
  sweep->add_option("--ch-values", o.ch_values_text,
                    "comma-separated ch values (default: 40 log-spaced in [0.1, 20])");
  sweep->add_option("--tol", o.tol, "relative evaluation tolerance (default 1e-10)");
  sweep->add_option("--out", o.out, "output path, '-' for stdout (default '-')");
  sweep->add_option("--format", o.format, "csv or json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  o.domain.attach(sweep);

  CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo simulation of repeated cycles");
  add_dist(sim);
  sim->add_option("--t", o.t, "aimed human arrival time (default 0)");
  sim->add_option("--A", o.A, "robot cycle period");
  add_rates(sim);
  sim->add_option("--protocol", o.protocol, "never-waits or first-waits (default never-waits)")
      ->check(CLI::IsMember({"never-waits", "first-waits"}));
  sim->add_option("--cycles", o.cycles, "number of cycles (default 100000)");
  sim->add_option("--seed", o.seed, "rng seed (default 12345)");
  sim->add_option("--robot-wait-rate", o.robot_wait_rate,
                  "protocol first-waits: robot waiting cost per time unit (default cr/A)");
  sim->add_option("--recal-threshold", o.recal_threshold,
                  "count cycles whose waiting exceeds this threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    CLI::App* active = eval->parsed() ? eval : opt->parsed() ? opt : sweep->parsed() ? sweep : sim;
    if (!o.config.empty()) apply_config(active, o.config);
    require_dist();
    if (eval->parsed()) {
      require_A();
      return cmd_eval(o);
    }
    if (opt->parsed()) return cmd_optimize(o);
    if (sweep->parsed()) return cmd_sweep(o);
    if (sim->parsed()) {
      require_A();
      return cmd_simulate(o);
    }
  } catch (const NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace handover
