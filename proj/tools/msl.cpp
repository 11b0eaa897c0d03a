// msl: command-line front end for the simulation, training and reporting pipeline.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "msl/config.hpp"
#include "msl/harness.hpp"
#include "msl/replicator.hpp"
#include "msl/report.hpp"

namespace fs = std::filesystem;
using namespace msl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr const char* kRunSchema = "msl-run/1";

struct Common {
  std::string env = "reversal_low";
  std::uint64_t seed = 1;
  std::size_t replicates = 24;
  std::string config;
  std::size_t m = 0;  // 0 keeps the configured value
  double mr = -1.0;
  double s = -1.0;
  unsigned threads = 1;
  std::string out = "out";
  std::vector<std::string> controllers;
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--env", c.env, "environment file (msl-env/1) or preset name")->capture_default_str();
  app->add_option("--seed", c.seed, "base seed")->capture_default_str();
  app->add_option("--replicates", c.replicates, "independent runs")->capture_default_str();
  app->add_option("--config", c.config, "parameter file (msl-config/1)");
  app->add_option("--m", c.m, "population size override");
  app->add_option("--mr", c.mr, "mutation rate override");
  app->add_option("--s", c.s, "selection strength override");
  app->add_option("--threads", c.threads, "worker threads")->capture_default_str();
  app->add_option("--controller", c.controllers, "controller file (repeatable)");
  if (with_out) app->add_option("--out", c.out, "output directory")->capture_default_str();
}

EvoParams resolve_params(const Common& c) {
  EvoParams p = c.config.empty() ? EvoParams{} : load_params(c.config);
  if (c.m) p.m = c.m;
  if (c.mr >= 0.0) p.mr = c.mr;
  if (c.s >= 0.0) p.s = c.s;
  p.validate();
  return p;
}

ControllerSet resolve_controllers(const Common& c, const std::vector<MetaKind>& kinds) {
  ControllerSet ctl;
  bool need_ql = std::find(kinds.begin(), kinds.end(), MetaKind::SLQL) != kinds.end();
  bool have_ql = false;
  for (const auto& path : c.controllers) {
    auto f = ControllerFile::load(path);
    if (f.kind == "SL-GA") ctl.rule_table = rule_table_from_file(f);
    else if (f.kind == "SL-NE") ctl.fcn = fcn_from_file(f);
    else if (f.kind == "SL-QL") {
      ctl.ql_init = ql_table_from_file(f);
      have_ql = true;
    } else throw ConfigError("controller file " + path + " has unsupported kind '" + f.kind + "'");
  }
  if (need_ql && !have_ql) ctl.ql_init = default_controllers().ql_init;
  return ctl;
}

std::vector<MetaKind> parse_kinds(const std::string& list) {
  if (list == "all") return all_meta_kinds();
  std::vector<MetaKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(meta_from_string(item));
  if (out.empty()) throw ConfigError("empty meta-strategy list");
  return out;
}

Json seeds_json(const std::vector<std::uint64_t>& seeds) {
  Json j = Json::array();
  for (auto s : seeds) j.push_back(s);
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  write_file(path.string(), [&](std::ostream& os) { os << std::setw(2) << j << '\n'; });
}

std::string run_file_name(std::size_t i) {
  std::ostringstream os;
  os << "run_" << std::setw(3) << std::setfill('0') << i << ".csv";
  return os.str();
}

// ---- report: a pure function of the saved run directory ----

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

RunResult read_run_csv(const fs::path& path, double epsilon, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open run file " + path.string());
  std::string line;
  std::getline(in, line);
  auto head = split_csv(line);
  RunResult r;
  r.seed = seed;
  r.epsilon = epsilon;
  std::vector<std::size_t> ratio_cols, age_cols;
  std::size_t psi = 0, ec = 0, conf = 0, unc = 0, odpu = 0, cost = 0;
  for (std::size_t i = 0; i < head.size(); ++i) {
    const auto& h = head[i];
    if (h.rfind("ratio_", 0) == 0) {
      ratio_cols.push_back(i);
      r.labels.push_back(h.substr(6));
    } else if (h.rfind("age_", 0) == 0) age_cols.push_back(i);
    else if (h == "psi") psi = i;
    else if (h == "ec") ec = i;
    else if (h == "conf") conf = i;
    else if (h == "unc") unc = i;
    else if (h == "odpu") odpu = i;
    else if (h == "cost") cost = i;
  }
  if (!psi || !cost) throw ConfigError("run file " + path.string() + " lacks psi/cost columns");
  double prev_cost = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto c = split_csv(line);
    if (c.size() != head.size()) throw ConfigError("ragged row in " + path.string());
    r.psi.push_back(std::stod(c[psi]));
    std::vector<double> ratio, age;
    for (auto i : ratio_cols) ratio.push_back(std::stod(c[i]));
    for (auto i : age_cols) age.push_back(std::stod(c[i]));
    r.ratio.push_back(ratio);
    r.mean_age.push_back(age);
    r.ec.push_back(std::stoi(c[ec]));
    r.conf.push_back(std::stoi(c[conf]));
    r.unc.push_back(std::stoi(c[unc]));
    r.odpu.push_back(std::stod(c[odpu]));
    double now = std::stod(c[cost]);
    r.il_steps.push_back(epsilon > 0.0 ? static_cast<std::size_t>(std::llround((now - prev_cost) / epsilon)) : 0);
    prev_cost = now;
  }
  return r;
}

void emit_report(const fs::path& dir) {
  Json man = read_json_file((dir / "manifest.json").string());
  require_schema(man, kRunSchema);
  std::vector<std::string> groups = man.at("groups").get<std::vector<std::string>>();
  std::vector<std::uint64_t> seeds = man.at("seeds").get<std::vector<std::uint64_t>>();
  std::vector<std::size_t> change_points = man.at("change_points").get<std::vector<std::size_t>>();
  double epsilon = man.at("params").at("epsilon").get<double>();
  std::vector<std::pair<std::size_t, std::size_t>> windows;
  for (const auto& w : man.at("windows")) windows.emplace_back(w.at(0).get<std::size_t>(), w.at(1).get<std::size_t>());
  SvgMeta meta{man.value("title", std::string("msl")), seeds, man.at("config_hash").get<std::string>()};

  std::vector<std::vector<RunResult>> all;
  std::vector<PsiBand> bands;
  Json agg = {{"schema", "msl-aggregate/1"}, {"config_hash", meta.config_hash}, {"groups", Json::object()}};
  for (const auto& g : groups) {
    std::vector<RunResult> runs;
    for (std::size_t i = 0; i < seeds.size(); ++i) runs.push_back(read_run_csv(dir / g / run_file_name(i), epsilon, seeds[i]));
    agg["groups"][g] = aggregate_json(runs, windows);
    bands.push_back(psi_band(runs));
    all.push_back(std::move(runs));
  }
  write_json(dir / "aggregate.json", agg);
  write_file((dir / "psi_band.csv").string(), [&](std::ostream& os) { write_band_csv(os, groups, bands); });

  std::vector<Series> series;
  for (std::size_t g = 0; g < groups.size(); ++g) series.push_back({groups[g], bands[g].mean});
  meta.title = "mean psi";
  write_file((dir / "psi.svg").string(), [&](std::ostream& os) { svg_line_plot(os, series, meta, change_points); });

  // ratio trajectories of the first group when it holds more than one category (competition runs)
  const auto& first = all.front();
  if (first.front().labels.size() > 1) {
    std::vector<Series> rs;
    for (std::size_t c = 0; c < first.front().labels.size(); ++c) {
      std::vector<double> y(first.front().ratio.size(), 0.0);
      for (const auto& r : first)
        for (std::size_t t = 0; t < y.size(); ++t) y[t] += r.ratio[t][c] / static_cast<double>(first.size());
      rs.push_back({first.front().labels[c], y});
    }
    meta.title = "category ratio";
    write_file((dir / "ratios.svg").string(), [&](std::ostream& os) { svg_line_plot(os, rs, meta, change_points, "ratio"); });
  }

  if (groups.size() >= 2 && seeds.size() >= 2) {
    std::vector<std::vector<double>> score(seeds.size(), std::vector<double>(groups.size()));
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (std::size_t r = 0; r < seeds.size(); ++r) score[r][g] = all[g][r].cumulative_psi();
    auto rep = stats::friedman_nemenyi(score);
    Json ranks = rank_json(groups, rep, "cumulative_psi");
    ranks["config_hash"] = meta.config_hash;
    write_json(dir / "ranks.json", ranks);
    meta.title = "critical difference (cumulative psi)";
    write_file((dir / "cd.svg").string(), [&](std::ostream& os) { svg_cd_diagram(os, groups, rep, meta); });
  }
}

// ---- run / evolve-meta ----

struct RunPlan {
  std::string mode = "lifetime";
  std::string meta = "SL-EC-Conf-Unc";
  std::string sls = "success";
  double initial_sl = 0.5;
  std::vector<std::size_t> windows;  // flattened pairs
};

int execute_run(const Common& c, const RunPlan& plan, const std::string& title) {
  auto env = load_env(c.env, c.seed);
  auto params = resolve_params(c);
  if (c.replicates < 1) throw ConfigError("--replicates must be >= 1");
  if (plan.windows.size() % 2) throw ConfigError("--window takes FROM TO pairs");
  auto seeds = replicate_seeds(c.seed, c.replicates);
  std::vector<std::pair<std::string, std::vector<RunResult>>> groups;
  std::vector<MetaKind> kinds;
  if (plan.mode == "alg1") {
    CopyRule rule = copy_rule_from_string(plan.sls);
    groups.emplace_back(plan.sls, run_alg1(env, rule, params, seeds, plan.initial_sl, c.threads));
  } else if (plan.mode == "lifetime") {
    kinds = parse_kinds(plan.meta);
    auto ctl = resolve_controllers(c, kinds);
    auto suite = run_meta_suite(env, kinds, params, ctl, seeds, c.threads);
    for (std::size_t k = 0; k < kinds.size(); ++k) groups.emplace_back(to_string(kinds[k]), std::move(suite.runs[k]));
  } else if (plan.mode == "competition") {
    kinds = parse_kinds(plan.meta);
    auto ctl = resolve_controllers(c, kinds);
    groups.emplace_back("competition", run_competition(env, kinds, params, ctl, seeds, c.threads));
  } else {
    throw ConfigError("unknown --mode '" + plan.mode + "' (lifetime, competition, alg1)");
  }

  Json windows = Json::array();
  for (std::size_t i = 0; i + 1 < plan.windows.size(); i += 2) {
    if (plan.windows[i + 1] > env.horizon() || plan.windows[i] >= plan.windows[i + 1])
      throw ConfigError("evaluation window outside the run horizon");
    windows.push_back({plan.windows[i], plan.windows[i + 1]});
  }
  Json kinds_json = Json::array();
  for (auto k : kinds) kinds_json.push_back(to_string(k));
  Json identity = {{"env", env_to_json(env)}, {"params", params_to_json(params)}, {"mode", plan.mode},
                   {"kinds", kinds_json}, {"sls", plan.sls}, {"initial_sl", plan.initial_sl},
                   {"seeds", seeds_json(seeds)}, {"controllers", c.controllers}};
  std::string hash = config_hash(identity);

  fs::path dir(c.out);
  fs::create_directories(dir);
  Json groups_json = Json::array();
  for (const auto& [name, runs] : groups) {
    groups_json.push_back(name);
    fs::create_directories(dir / name);
    for (std::size_t i = 0; i < runs.size(); ++i)
      write_file((dir / name / run_file_name(i)).string(), [&](std::ostream& os) { write_run_csv(os, runs[i]); });
  }
  Json man = {{"schema", kRunSchema},   {"title", title},           {"config_hash", hash},
              {"seeds", seeds_json(seeds)}, {"groups", groups_json}, {"windows", windows},
              {"change_points", env.change_log().change_points},     {"params", params_to_json(params)},
              {"env", env_to_json(env)}, {"mode", plan.mode}};
  write_json(dir / "manifest.json", man);
  emit_report(dir);

  std::cout << "config-hash " << hash << "\nseeds";
  for (auto s : seeds) std::cout << ' ' << s;
  std::cout << '\n';
  for (const auto& [name, runs] : groups) {
    std::vector<double> cum, cost;
    for (const auto& r : runs) {
      cum.push_back(r.cumulative_psi());
      cost.push_back(r.exploration_cost());
    }
    std::cout << name << " cumulative_psi " << fixed6(stats::mean(cum)) << " +- "
              << fixed6(cum.size() > 1 ? stats::stddev(cum) : 0.0) << " cost " << fixed6(stats::mean(cost)) << '\n';
    if (plan.mode == "competition") {
      std::vector<double> term(runs.front().labels.size(), 0.0);
      for (const auto& r : runs) {
        auto t = terminal_ratios(r, 50);
        for (std::size_t i = 0; i < t.size(); ++i) term[i] += t[i] / static_cast<double>(runs.size());
      }
      for (auto i : top_categories(term, term.size()))
        std::cout << "  " << runs.front().labels[i] << " terminal_ratio " << fixed6(term[i]) << '\n';
    }
  }
  std::cout << "wrote " << dir.string() << '\n';
  return kExitOk;
}

// ---- sweep ----

struct SweepPlan {
  std::string param = "mr";
  std::vector<double> values;
  std::string mode = "competition";
  std::string meta = "all";
};

int execute_sweep(const Common& c, const SweepPlan& plan) {
  if (plan.values.empty()) throw ConfigError("--values is required");
  auto base = resolve_params(c);
  auto seeds = replicate_seeds(c.seed, c.replicates);
  fs::path dir(c.out);
  fs::create_directories(dir);
  std::ostringstream csv;
  std::vector<double> xs, ys;
  Json identity = {{"param", plan.param}, {"values", plan.values}, {"params", params_to_json(base)},
                   {"seeds", seeds_json(seeds)}, {"mode", plan.mode}, {"meta", plan.meta}, {"env", c.env}};

  if (plan.param == "sigma_sub") {
    // conformist minus success-based end-of-run psi against the ODPU of each reversal pair
    identity["env"] = "reversal(1, 0.05 / 0.4, sigma)";
    csv << "sigma_sub,odpu,conformist_psi,success_psi,difference\n";
    for (double sg : plan.values) {
      auto env = make_reversal_schedule(1.0, 0.05, 0.4, sg, 400);
      double od = odpu_quadrature({{{1.0, 0.05, base.m / 2}, {0.4, sg, base.m - base.m / 2}}});
      double conf = stats::mean(window_means(run_alg1(env, CopyRule::Conformist, base, seeds, 0.5, c.threads), 350, 400));
      double succ = stats::mean(window_means(run_alg1(env, CopyRule::Success, base, seeds, 0.5, c.threads), 350, 400));
      csv << fixed6(sg) << ',' << fixed6(od) << ',' << fixed6(conf) << ',' << fixed6(succ) << ',' << fixed6(conf - succ) << '\n';
      xs.push_back(od);
      ys.push_back(conf - succ);
    }
  } else if (plan.param == "mr" || plan.param == "s") {
    auto env = load_env(c.env, c.seed);
    identity["env"] = env_to_json(env);
    auto kinds = parse_kinds(plan.meta);
    auto ctl = resolve_controllers(c, kinds);
    csv << plan.param << ",psi_mean,psi_std,cost_mean,dominant_age_mean\n";
    for (double v : plan.values) {
      EvoParams p = base;
      (plan.param == "mr" ? p.mr : p.s) = v;
      p.validate();
      std::vector<RunResult> runs;
      if (plan.mode == "competition") runs = run_competition(env, kinds, p, ctl, seeds, c.threads);
      else if (plan.mode == "alg1") runs = run_alg1(env, CopyRule::Conformist, p, seeds, 0.5, c.threads);
      else throw ConfigError("sweep --mode must be competition or alg1");
      std::vector<double> psi, cost, age;
      for (const auto& r : runs) {
        psi.push_back(r.cumulative_psi() / static_cast<double>(r.horizon()));
        cost.push_back(r.exploration_cost());
        age.push_back(dominant_mean_age(r, 50));
      }
      csv << fixed6(v) << ',' << fixed6(stats::mean(psi)) << ',' << fixed6(stats::stddev(psi)) << ','
          << fixed6(stats::mean(cost)) << ',' << fixed6(stats::mean(age)) << '\n';
      xs.push_back(v);
      ys.push_back(stats::mean(psi));
    }
  } else {
    throw ConfigError("unknown sweep parameter '" + plan.param + "' (mr, s, sigma_sub)");
  }
  std::string hash = config_hash(identity);
  write_file((dir / "sweep.csv").string(), [&](std::ostream& os) { os << csv.str(); });
  std::string xl = plan.param == "sigma_sub" ? "ODPU" : plan.param;
  std::string yl = plan.param == "sigma_sub" ? "conformist - success psi" : "mean psi";
  write_file((dir / "sweep.svg").string(),
             [&](std::ostream& os) { svg_scatter(os, xs, ys, {"sweep " + plan.param, seeds, hash}, xl, yl); });
  Json meta = {{"schema", "msl-sweep/1"}, {"config_hash", hash}, {"seeds", seeds_json(seeds)}};
  if (xs.size() >= 3) {
    auto r = stats::pearson(xs, ys);
    auto rs = stats::spearman(xs, ys);
    meta["pearson"] = {{"r", r.r}, {"p", r.p}};
    meta["spearman"] = {{"rho", rs.r}, {"p", rs.p}};
    std::cout << "pearson_r " << fixed6(r.r) << " spearman_rho " << fixed6(rs.r) << '\n';
  }
  write_json(dir / "sweep.json", meta);
  std::cout << csv.str() << "config-hash " << hash << "\nwrote " << dir.string() << '\n';
  return kExitOk;
}

// ---- train ----

struct TrainPlan {
  std::string space = "rule";
  std::string algo = "ga";
  std::size_t runs = 10;
  std::size_t pop = 50;
  std::size_t max_generations = 200;
};

int execute_train(Common c, const TrainPlan& plan) {
  GeneSpace space;
  if (plan.space == "rule") space = GeneSpace::RuleTable;
  else if (plan.space == "fcn") space = GeneSpace::FCN;
  else throw ConfigError("--space must be rule or fcn");
  TrainAlgo algo;
  if (plan.algo == "ga") algo = TrainAlgo::GA;
  else if (plan.algo == "de") algo = TrainAlgo::DE;
  else throw ConfigError("--algo must be ga or de");
  TrainSetup setup;
  setup.env = load_env(c.env, c.seed);
  setup.params = resolve_params(c);
  setup.replicates = c.replicates;
  setup.seed = c.seed;
  setup.threads = c.threads;
  GaConfig ga = space == GeneSpace::RuleTable ? GaConfig::rule_defaults() : GaConfig::fcn_defaults();
  ga.pop = plan.pop;
  ga.max_generations = plan.max_generations;
  DeConfig de;
  de.pop = plan.pop;
  de.max_generations = plan.max_generations;
  auto fitness = make_controller_fitness(space, setup, resolve_controllers(c, {}));
  auto res = train_controller(space, algo, fitness, plan.runs, c.seed, ga, de, [](std::size_t r, const TrainResult& t) {
    std::cout << "run " << r << " generations " << t.generations << " evaluations " << t.evaluations << " best "
              << fixed6(t.best_fitness) << std::endl;
  });

  Json identity = {{"space", plan.space}, {"algo", plan.algo}, {"runs", plan.runs}, {"pop", plan.pop},
                   {"max_generations", plan.max_generations}, {"env", env_to_json(setup.env)},
                   {"params", params_to_json(setup.params)}, {"replicates", setup.replicates}, {"seed", c.seed}};
  std::string hash = config_hash(identity);
  fs::path dir(c.out);
  fs::create_directories(dir);
  ControllerFile f = space == GeneSpace::RuleTable ? to_file(decode_rule_table(res.best().best))
                                                   : to_file(decode_fcn(res.best().best, setup.env.arms()));
  f.fields["fitness"] = fixed6(res.best().best_fitness);
  f.fields["config_hash"] = hash;
  f.save((dir / "best.ctl").string());
  write_file((dir / "trace.csv").string(), [&](std::ostream& os) {
    os << "run,generation,best_fitness\n";
    for (std::size_t r = 0; r < res.runs.size(); ++r)
      for (std::size_t g = 0; g < res.runs[r].trace.size(); ++g) os << r << ',' << g << ',' << fixed6(res.runs[r].trace[g]) << '\n';
  });
  std::vector<std::uint64_t> seeds = replicate_seeds(setup.seed, setup.replicates);
  write_json(dir / "train.json", {{"schema", "msl-train/1"}, {"config_hash", hash}, {"seeds", seeds_json(seeds)},
                                  {"best_run", res.best_run}, {"best_fitness", res.best().best_fitness}});
  if (space == GeneSpace::RuleTable) {
    auto t = decode_rule_table(res.best().best);
    std::cout << "matching states vs SL-EC-Conf-Unc: " << count_matching_states(t, msl_ec_conf_unc) << "/8\n";
  }
  std::cout << "best fitness " << fixed6(res.best().best_fitness) << "\nconfig-hash " << hash << "\nwrote "
            << (dir / "best.ctl").string() << '\n';
  return kExitOk;
}

// ---- replicator / odpu ----

struct OdePlan {
  std::string sls = "success";
  double tau = 1.0;
  double epsilon = 0.1;
  double dt = 0.1;
  double horizon = 0.0;
  double initial_sl = -1.0;
  std::string out;
};

int execute_replicator(const Common& c, const OdePlan& plan) {
  ReplicatorConfig cfg;
  if (plan.sls == "success") cfg.sls = SocialRule::Success;
  else if (plan.sls == "conformist") cfg.sls = SocialRule::Conformist;
  else throw ConfigError("--sls must be success or conformist");
  auto env = load_env(c.env, c.seed);
  cfg.payoff = payoff_from_schedule(env);
  cfg.tau = plan.tau;
  cfg.epsilon = plan.epsilon;
  cfg.dt = plan.dt;
  cfg.horizon = plan.horizon > 0.0 ? plan.horizon : static_cast<double>(env.horizon());
  if (plan.initial_sl >= 0.0) {
    if (plan.initial_sl > 1.0) throw ConfigError("--initial-sl must lie in [0, 1]");
    double rest = 0.5 * (1.0 - plan.initial_sl);
    cfg.initial = {rest, rest, plan.initial_sl};
  }
  auto tr = integrate(cfg);
  Json identity = {{"sls", plan.sls}, {"tau", plan.tau}, {"epsilon", plan.epsilon}, {"dt", plan.dt},
                   {"horizon", cfg.horizon}, {"initial", cfg.initial}, {"env", env_to_json(env)}};
  std::string hash = config_hash(identity);
  if (plan.out.empty()) {
    tr.write_csv(std::cout);
  } else {
    write_file(plan.out, [&](std::ostream& os) { tr.write_csv(os); });
    write_json(plan.out + ".meta.json", {{"schema", "msl-trajectory/1"}, {"config_hash", hash}, {"seeds", Json::array()},
                                         {"max_simplex_error", tr.max_simplex_error}, {"dt_halvings", tr.dt_halvings}});
  }
  std::cerr << "config-hash " << hash << " max_simplex_error " << tr.max_simplex_error << '\n';
  return kExitOk;
}

struct OdpuPlan {
  std::vector<double> mu, sigma;
  std::vector<std::size_t> n;
  std::size_t mc = 0;
  std::size_t grid = 0;
  double grid_max = 0.6;
};

int execute_odpu(const Common& c, const OdpuPlan& plan) {
  if (plan.mu.size() != plan.sigma.size() || plan.mu.size() != plan.n.size())
    throw ConfigError("--mu, --sigma and --n need the same number of groups");
  GroupSpec spec;
  for (std::size_t i = 0; i < plan.mu.size(); ++i) spec.groups.push_back({plan.mu[i], plan.sigma[i], plan.n[i]});
  spec.validate();
  if (plan.grid > 0) {
    // heat-map data over (sigma of group 0, sigma of group 1)
    std::cout << "sigma_opt,sigma_sub,odpu\n";
    for (std::size_t i = 0; i < plan.grid; ++i)
      for (std::size_t j = 0; j < plan.grid; ++j) {
        double so = plan.grid_max * static_cast<double>(i + 1) / static_cast<double>(plan.grid);
        double ss = plan.grid_max * static_cast<double>(j + 1) / static_cast<double>(plan.grid);
        GroupSpec g = spec;
        g.groups[0].sigma = so;
        g.groups[1].sigma = ss;
        std::cout << fixed6(so) << ',' << fixed6(ss) << ',' << fixed6(odpu_quadrature(g)) << '\n';
      }
    return kExitOk;
  }
  std::cout << "odpu " << fixed6(odpu_quadrature(spec)) << '\n';
  if (plan.mc > 0) {
    Rng rng(c.seed);
    double p = odpu_monte_carlo(spec, plan.mc, rng);
    std::cout << "monte_carlo " << fixed6(p) << " se " << fixed6(std::sqrt(p * (1 - p) / static_cast<double>(plan.mc)))
              << " seed " << c.seed << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-control of social learning strategies on non-stationary bandits"};
  app.require_subcommand(1);
  Common common;
  RunPlan run_plan, evo_plan;
  evo_plan.mode = "competition";
  evo_plan.meta = "all";
  SweepPlan sweep_plan;
  TrainPlan train_plan;
  OdePlan ode_plan;
  OdpuPlan odpu_plan;
  std::string report_dir;

  auto* run = app.add_subcommand("run", "simulate replicates and write run CSVs, aggregates and plots");
  add_common(run, common);
  run->add_option("--mode", run_plan.mode, "lifetime, competition or alg1")->capture_default_str();
  run->add_option("--meta", run_plan.meta, "meta-strategy kind, comma list or 'all'")->capture_default_str();
  run->add_option("--sls", run_plan.sls, "alg1 social learning strategy")->capture_default_str();
  run->add_option("--initial-sl", run_plan.initial_sl, "alg1 initial social-learner share")->capture_default_str();
  run->add_option("--window", run_plan.windows, "evaluation window FROM TO (repeatable)");

  auto* evo = app.add_subcommand("evolve-meta", "evolutionary competition among meta-strategies");
  add_common(evo, common);
  evo->add_option("--meta", evo_plan.meta, "competing kinds, comma list or 'all'")->capture_default_str();
  evo->add_option("--window", evo_plan.windows, "evaluation window FROM TO (repeatable)");

  auto* sweep = app.add_subcommand("sweep", "parameter sweep (mr, s, sigma_sub)");
  add_common(sweep, common);
  sweep->add_option("--param", sweep_plan.param, "mr, s or sigma_sub")->capture_default_str();
  sweep->add_option("--values", sweep_plan.values, "values to sweep")->required();
  sweep->add_option("--mode", sweep_plan.mode, "competition or alg1")->capture_default_str();
  sweep->add_option("--meta", sweep_plan.meta, "kinds for competition sweeps")->capture_default_str();

  auto* train = app.add_subcommand("train", "train an SL-GA rule table or SL-NE network");
  add_common(train, common);
  train->add_option("--space", train_plan.space, "rule or fcn")->capture_default_str();
  train->add_option("--algo", train_plan.algo, "ga or de")->capture_default_str();
  train->add_option("--runs", train_plan.runs, "independent training runs")->capture_default_str();
  train->add_option("--pop", train_plan.pop, "population size")->capture_default_str();
  train->add_option("--max-generations", train_plan.max_generations, "generation cap")->capture_default_str();

  auto* rep = app.add_subcommand("replicator", "integrate the replicator-mutator model");
  add_common(rep, common, false);
  rep->add_option("--sls", ode_plan.sls, "success or conformist")->capture_default_str();
  rep->add_option("--tau", ode_plan.tau, "social latency")->capture_default_str();
  rep->add_option("--epsilon", ode_plan.epsilon, "individual learner exploration rate")->capture_default_str();
  rep->add_option("--dt", ode_plan.dt, "RK4 step")->capture_default_str();
  rep->add_option("--horizon", ode_plan.horizon, "end time (default: environment horizon)");
  rep->add_option("--initial-sl", ode_plan.initial_sl, "initial SL share (rest split evenly)");
  rep->add_option("--out", ode_plan.out, "trajectory CSV path (default: stdout)");

  auto* od = app.add_subcommand("odpu", "optimum distribution prediction uncertainty");
  od->add_option("--mu", odpu_plan.mu, "group means, optimal group first")->required();
  od->add_option("--sigma", odpu_plan.sigma, "group standard deviations")->required();
  od->add_option("--n", odpu_plan.n, "group sizes")->required();
  od->add_option("--mc", odpu_plan.mc, "Monte Carlo trials for a cross-check");
  od->add_option("--seed", common.seed, "Monte Carlo seed")->capture_default_str();
  od->add_option("--grid", odpu_plan.grid, "emit a GRIDxGRID sigma heat-map CSV for the first two groups");
  od->add_option("--grid-max", odpu_plan.grid_max, "largest sigma on the grid")->capture_default_str();

  auto* report = app.add_subcommand("report", "regenerate aggregates and plots from a run directory");
  report->add_option("dir", report_dir, "directory written by run or evolve-meta")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return execute_run(common, run_plan, "run");
    if (*evo) return execute_run(common, evo_plan, "evolve-meta");
    if (*sweep) return execute_sweep(common, sweep_plan);
    if (*train) return execute_train(common, train_plan);
    if (*rep) return execute_replicator(common, ode_plan);
    if (*od) return execute_odpu(common, odpu_plan);
    if (*report) {
      emit_report(report_dir);
      std::cout << "wrote " << report_dir << '\n';
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Json::exception& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
