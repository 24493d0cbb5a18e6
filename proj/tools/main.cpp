// Command line front end: instance generation, single solves, policy
// benchmarks, round sweeps, ES training, and scatter export.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "cutstop/bench.hpp"
#include "cutstop/es.hpp"
#include "cutstop/generators.hpp"
#include "cutstop/io.hpp"
#include "cutstop/policy.hpp"
#include "cutstop/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cutstop;

namespace {

EsConfig::Metric metric_from_string(const std::string& name) {
  if (name == "logical_rounds" || name == "logical") return EsConfig::Metric::LogicalRounds;
  if (name == "pdi") return EsConfig::Metric::Pdi;
  if (name == "time" || name == "wall_time") return EsConfig::Metric::WallTime;
  throw MilpError("unknown metric '" + name + "'");
}

std::vector<MilpInstance> load_directory(const std::string& dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string p = entry.path().string();
    if (p.ends_with(".json") || p.ends_with(".mps")) paths.push_back(p);
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw MilpError("no .json or .mps instances under " + dir);
  std::vector<MilpInstance> instances;
  instances.reserve(paths.size());
  for (const auto& p : paths) {
    MilpInstance inst = read_instance(p);
    if (inst.name.empty() || inst.name == p) inst.name = fs::path(p).stem().string();
    instances.push_back(std::move(inst));
  }
  return instances;
}

json stats_to_json(const MilpInstance& inst, const SolveStats& stats) {
  json doc;
  doc["status"] = std::string(to_string(stats.status));
  doc["objective"] = stats.has_incumbent() ? json(inst.original_objective(stats.best_objective))
                                           : json(nullptr);
  doc["objective_minimize_form"] =
      stats.has_incumbent() ? json(stats.best_objective) : json(nullptr);
  doc["dual_bound"] = std::isfinite(stats.dual_bound) ? json(stats.dual_bound) : json(nullptr);
  doc["nodes"] = stats.nodes_processed;
  doc["lp_solves"] = stats.lp_solves;
  doc["cut_rounds"] = stats.total_cut_rounds;
  doc["cuts_added"] = stats.total_cuts_added;
  doc["wall_time_seconds"] = stats.wall_time_seconds;
  doc["pdi"] = stats.pdi;
  doc["clip_warnings"] = stats.clip_warnings;
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw MilpError("cannot write " + path);
  out << text;
}

int cmd_generate(const GeneratorConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  for (int i = 0; i < config.count; ++i) {
    MilpInstance inst = generate(config, i);
    const std::string name = std::string(to_string(config.family)) + "_" +
                             std::to_string(config.seed + static_cast<std::uint64_t>(i));
    inst.name = name;
    const std::string path = (fs::path(out_dir) / (name + ".json")).string();
    write_instance_json(inst, path);
    std::cout << path << "\n";
  }
  return 0;
}

struct SolveOptions {
  std::string file;
  std::string policy = "default";
  double time_limit = 300.0;
  long node_limit = std::numeric_limits<long>::max();
  int depth_limit = 0;
  std::uint64_t seed = 0;
  bool trace = false;
  bool wall_pdi = false;
  std::string json_out;
};

int cmd_solve(const SolveOptions& opt) {
  const MilpInstance inst = read_instance(opt.file);
  SolveConfig config;
  config.time_limit_seconds = opt.time_limit;
  config.node_limit = opt.node_limit;
  config.policy_depth_limit = opt.depth_limit;
  config.seed = opt.seed;
  config.logical_clock_pdi = !opt.wall_pdi;
  if (opt.trace) {
    config.trace = &std::cerr;
    config.cut_trace = &std::cerr;
  }
  const auto policy = make_policy(opt.policy, opt.seed);
  const SolveStats stats = solve(inst, *policy, config);

  const json doc = stats_to_json(inst, stats);
  std::cout << doc.dump(2) << "\n";
  if (!opt.json_out.empty()) write_text(opt.json_out, doc.dump(2) + "\n");
  return 0;
}

struct BenchOptions {
  std::string dir;
  std::vector<std::string> policies;
  std::string reference = "default";
  std::string metric = "time";
  std::string out_csv = "results.csv";
  std::string summary_json;
  double time_limit = 300.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  int depth_limit = 0;
};

int cmd_bench(const BenchOptions& opt) {
  const auto instances = load_directory(opt.dir);
  SolveConfig config;
  config.time_limit_seconds = opt.time_limit;
  config.seed = opt.seed;
  config.policy_depth_limit = opt.depth_limit;
  const auto metric = metric_from_string(opt.metric);
  const BenchResult result =
      run_benchmark(instances, opt.policies, config, opt.reference, metric, opt.jobs);

  std::ostringstream csv;
  csv << "instance,policy,status,metric,time_seconds,pdi,nodes,lp_solves,cuts_added,error\n";
  for (const auto& row : result.rows) {
    csv << row.instance << ',' << row.policy << ',';
    if (row.failed) {
      csv << "failed,,,,,,," << '"' << row.error << '"' << "\n";
      continue;
    }
    csv << to_string(row.stats.status) << ',' << metric_value(row.stats, metric) << ','
        << row.stats.wall_time_seconds << ',' << row.stats.pdi << ','
        << row.stats.nodes_processed << ',' << row.stats.lp_solves << ','
        << row.stats.total_cuts_added << ",\n";
  }
  write_text(opt.out_csv, csv.str());

  json summary;
  summary["reference"] = result.reference;
  summary["metric"] = opt.metric;
  json per_policy = json::array();
  std::cout << "policy                 mean(std) metric        mean(std) time   mean(std) pdi    imprv%\n";
  for (const auto& agg : result.aggregates) {
    json ja;
    ja["policy"] = agg.policy;
    ja["solved"] = agg.solved;
    ja["failures"] = agg.failures;
    ja["metric_mean"] = agg.mean_metric;
    ja["metric_std"] = agg.std_metric;
    ja["time_mean"] = agg.mean_time;
    ja["time_std"] = agg.std_time;
    ja["pdi_mean"] = agg.mean_pdi;
    ja["pdi_std"] = agg.std_pdi;
    ja["improvement_pct"] = agg.improvement;
    per_policy.push_back(std::move(ja));
    char line[256];
    std::snprintf(line, sizeof(line), "%-22s %10.2f(%.2f) %14.3f(%.3f) %10.2f(%.2f) %8.2f\n",
                  agg.policy.c_str(), agg.mean_metric, agg.std_metric, agg.mean_time,
                  agg.std_time, agg.mean_pdi, agg.std_pdi, agg.improvement);
    std::cout << line;
  }
  summary["policies"] = std::move(per_policy);
  if (!opt.summary_json.empty()) write_text(opt.summary_json, summary.dump(2) + "\n");
  std::cout << "wrote " << opt.out_csv << "\n";
  return 0;
}

struct SweepOptions {
  std::string dir;
  int max_rounds = 100;
  std::string metric = "logical_rounds";
  std::string out_csv = "sweep.csv";
  double time_limit = 300.0;
  std::uint64_t seed = 0;
  int jobs = 0;
  bool normalize = false;
};

int cmd_sweep(const SweepOptions& opt) {
  const auto instances = load_directory(opt.dir);
  SolveConfig config;
  config.time_limit_seconds = opt.time_limit;
  config.seed = opt.seed;
  const auto curves = sweep_rounds(instances, opt.max_rounds, config,
                                   metric_from_string(opt.metric), opt.jobs);
  std::ostringstream csv;
  csv << "instance,round,metric\n";
  for (const auto& curve : curves) {
    double lo = *std::min_element(curve.metric_by_rounds.begin(), curve.metric_by_rounds.end());
    double hi = *std::max_element(curve.metric_by_rounds.begin(), curve.metric_by_rounds.end());
    const double span = hi > lo ? hi - lo : 1.0;
    for (std::size_t j = 0; j < curve.metric_by_rounds.size(); ++j) {
      const double value =
          opt.normalize ? (curve.metric_by_rounds[j] - lo) / span : curve.metric_by_rounds[j];
      csv << curve.instance << ',' << (j + 1) << ',' << value << "\n";
    }
    std::cout << curve.instance << " argmin round " << curve.argmin_round << "\n";
  }
  write_text(opt.out_csv, csv.str());
  std::cout << "wrote " << opt.out_csv << "\n";
  return 0;
}

struct TrainOptions {
  std::string config_file;
};

int cmd_train(const TrainOptions& opt) {
  std::ifstream in(opt.config_file);
  if (!in) throw MilpError("cannot open " + opt.config_file);
  json doc;
  in >> doc;

  const std::string dir = doc.at("instances_dir").get<std::string>();
  const std::string checkpoint = doc.value("output_checkpoint", std::string("hygro.ckpt"));
  const std::string history_log = doc.value("history_log", std::string("train_history.csv"));

  EsConfig es;
  es.iterations = doc.value("iterations", es.iterations);
  es.perturbations = doc.value("perturbations", es.perturbations);
  es.sigma = doc.value("sigma", es.sigma);
  es.learning_rate = doc.value("learning_rate", es.learning_rate);
  es.beta1 = doc.value("beta1", es.beta1);
  es.beta2 = doc.value("beta2", es.beta2);
  es.adam_eps = doc.value("adam_eps", es.adam_eps);
  es.mirrored = doc.value("mirrored", es.mirrored);
  es.metric = metric_from_string(doc.value("metric", std::string("logical_rounds")));
  es.batch_size = doc.value("batch_size", es.batch_size);
  es.seed = doc.value("seed", std::uint64_t{0});
  es.threads = doc.value("threads", 0);

  SolveConfig solve_config;
  solve_config.time_limit_seconds = doc.value("time_limit", 10.0);
  solve_config.node_limit = doc.value("node_limit", long{2000});
  solve_config.policy_depth_limit = doc.value("depth_limit", 0);
  solve_config.seed = es.seed;

  HygroConfig net;
  net.embed_dim = doc.value("embed_dim", net.embed_dim);
  if (doc.contains("hidden")) net.hidden = doc["hidden"].get<std::vector<int>>();
  net.gamma = doc.value("gamma", net.gamma);
  net.action_space = doc.value("action_space", net.action_space);

  auto instances = load_directory(dir);
  // deterministic 75/25 split by hashed instance name
  const double train_fraction = doc.value("train_fraction", 0.75);
  std::sort(instances.begin(), instances.end(),
            [](const MilpInstance& a, const MilpInstance& b) {
              const std::hash<std::string> h;
              return h(a.name) < h(b.name);
            });
  const std::size_t n_train =
      std::max<std::size_t>(1, static_cast<std::size_t>(instances.size() * train_fraction));
  std::vector<MilpInstance> train_set(instances.begin(), instances.begin() + n_train);
  std::vector<MilpInstance> test_set(instances.begin() + n_train, instances.end());
  std::cout << "training on " << train_set.size() << " instances, holding out "
            << test_set.size() << "\n";

  Rng rng(es.seed);
  const HygroParams init = HygroParams::random(net, rng, 0.1);

  std::ofstream log(history_log);
  log << "iteration,mean_performance,best_performance,center_performance,reward_entropy\n";
  const auto result = train(es, train_set, init, solve_config, [&](const IterationRecord& rec) {
    log << rec.iteration << ',' << rec.mean_performance << ',' << rec.best_performance << ','
        << rec.center_performance << ',' << rec.reward_entropy << "\n";
    log.flush();
    std::cout << "iter " << rec.iteration << " mean " << rec.mean_performance << " center "
              << rec.center_performance << "\n";
  });

  HygroParams best;
  best.config = net;
  best.theta = result.best_theta;
  save_checkpoint(best, checkpoint);
  std::cout << "initial performance " << result.initial_performance << "\n";
  std::cout << "best performance " << result.best_performance << " at iteration "
            << result.best_iteration << "\n";
  std::cout << "wrote " << checkpoint << " and " << history_log << "\n";

  if (!test_set.empty()) {
    std::vector<const MilpInstance*> held;
    for (const auto& inst : test_set) held.push_back(&inst);
    const double test_perf =
        evaluate_candidate(best, held, solve_config, es.metric, 1e6);
    std::cout << "held-out performance " << test_perf << "\n";
  }
  return 0;
}

struct ScatterOptions {
  std::string results_csv;  // per-instance policy metrics (bench output)
  std::string sweep_csv;    // sweep curves
  std::string policy = "hygro";
  std::vector<int> thresholds = {25, 50, 75, 100};
  std::string out_csv = "scatter.csv";
};

int cmd_scatter(const ScatterOptions& opt) {
  // per-instance metric of the chosen policy from the bench csv
  std::ifstream results(opt.results_csv);
  if (!results) throw MilpError("cannot open " + opt.results_csv);
  std::map<std::string, double> policy_metric;
  std::string line;
  std::getline(results, line);  // header
  while (std::getline(results, line)) {
    std::stringstream row(line);
    std::string instance, policy, status, metric;
    std::getline(row, instance, ',');
    std::getline(row, policy, ',');
    std::getline(row, status, ',');
    std::getline(row, metric, ',');
    if (policy.rfind(opt.policy, 0) == 0 && status != "failed" && !metric.empty())
      policy_metric[instance] = std::stod(metric);
  }
  if (policy_metric.empty())
    throw MilpError("no rows for policy '" + opt.policy + "' in " + opt.results_csv);

  std::ifstream sweep(opt.sweep_csv);
  if (!sweep) throw MilpError("cannot open " + opt.sweep_csv);
  std::map<std::string, SweepCurve> curves;
  std::getline(sweep, line);
  while (std::getline(sweep, line)) {
    std::stringstream row(line);
    std::string instance, round, metric;
    std::getline(row, instance, ',');
    std::getline(row, round, ',');
    std::getline(row, metric, ',');
    auto& curve = curves[instance];
    curve.instance = instance;
    const std::size_t r = std::stoul(round);
    if (curve.metric_by_rounds.size() < r) curve.metric_by_rounds.resize(r);
    curve.metric_by_rounds[r - 1] = std::stod(metric);
  }
  std::vector<SweepCurve> curve_list;
  for (auto& [name, curve] : curves) {
    if (policy_metric.count(name)) curve_list.push_back(std::move(curve));
  }

  const auto records = export_scatter(policy_metric, curve_list, opt.thresholds);
  std::ostringstream csv;
  csv << "instance,threshold,policy_metric,sweep_best\n";
  for (const auto& rec : records)
    csv << rec.instance << ',' << rec.threshold << ',' << rec.policy_metric << ','
        << rec.sweep_best << "\n";
  write_text(opt.out_csv, csv.str());
  std::cout << "wrote " << records.size() << " records to " << opt.out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"branch-and-cut MILP solver with pluggable cut-generation stopping policies"};
  app.require_subcommand(1);

  GeneratorConfig gen_config;
  std::string gen_family = "set_cover", gen_out = "instances";
  auto* gen = app.add_subcommand("generate", "generate benchmark instances");
  gen->add_option("--family", gen_family, "set_cover | multi_knapsack | mis");
  gen->add_option("--count", gen_config.count);
  gen->add_option("--seed", gen_config.seed);
  gen->add_option("--rows", gen_config.rows, "set cover rows");
  gen->add_option("--cols", gen_config.cols, "set cover columns");
  gen->add_option("--density", gen_config.density);
  gen->add_option("--items", gen_config.items, "knapsack items");
  gen->add_option("--knapsacks", gen_config.knapsacks);
  gen->add_option("--nodes", gen_config.nodes, "mis graph nodes");
  gen->add_option("--affinity", gen_config.affinity);
  gen->add_option("--out", gen_out, "output directory");

  SolveOptions solve_opt;
  auto* sv = app.add_subcommand("solve", "solve one instance");
  sv->add_option("file", solve_opt.file)->required();
  sv->add_option("--policy", solve_opt.policy, "kind[:param=value,...]");
  sv->add_option("--time-limit", solve_opt.time_limit);
  sv->add_option("--node-limit", solve_opt.node_limit);
  sv->add_option("--depth-limit", solve_opt.depth_limit, "policy decision depth");
  sv->add_option("--seed", solve_opt.seed);
  sv->add_flag("--trace", solve_opt.trace, "per-node and per-round trace on stderr");
  sv->add_flag("--wall-pdi", solve_opt.wall_pdi, "integrate pdi over wall time");
  sv->add_option("--json-out", solve_opt.json_out);

  BenchOptions bench_opt;
  std::string bench_policies = "default,nocuts,always,fcn,fcr,immediate,random1,random2";
  auto* bench = app.add_subcommand("bench", "compare stopping policies over a directory");
  bench->add_option("dir", bench_opt.dir)->required();
  bench->add_option("--policies", bench_policies, "comma-separated policy specs");
  bench->add_option("--reference", bench_opt.reference);
  bench->add_option("--metric", bench_opt.metric, "time | pdi | logical_rounds");
  bench->add_option("--out", bench_opt.out_csv);
  bench->add_option("--summary", bench_opt.summary_json);
  bench->add_option("--time-limit", bench_opt.time_limit);
  bench->add_option("--seed", bench_opt.seed);
  bench->add_option("--jobs", bench_opt.jobs);
  bench->add_option("--depth-limit", bench_opt.depth_limit);

  SweepOptions sweep_opt;
  auto* sweep = app.add_subcommand("sweep", "fixed-round exhaustive search per instance");
  sweep->add_option("dir", sweep_opt.dir)->required();
  sweep->add_option("--max-rounds", sweep_opt.max_rounds);
  sweep->add_option("--metric", sweep_opt.metric);
  sweep->add_option("--out", sweep_opt.out_csv);
  sweep->add_option("--time-limit", sweep_opt.time_limit);
  sweep->add_option("--seed", sweep_opt.seed);
  sweep->add_option("--jobs", sweep_opt.jobs);
  sweep->add_flag("--normalize", sweep_opt.normalize, "min-max normalize each curve");

  TrainOptions train_opt;
  auto* tr = app.add_subcommand("train", "es training of the hygro policy");
  tr->add_option("--config", train_opt.config_file, "json training config")->required();

  ScatterOptions scatter_opt;
  std::string thresholds_arg = "25,50,75,100";
  auto* sc = app.add_subcommand("scatter", "policy metric vs best sweep value per threshold");
  sc->add_option("--hygro", scatter_opt.results_csv, "bench results csv")->required();
  sc->add_option("--sweep", scatter_opt.sweep_csv, "sweep curves csv")->required();
  sc->add_option("--policy", scatter_opt.policy, "policy name prefix to extract");
  sc->add_option("--thresholds", thresholds_arg);
  sc->add_option("--out", scatter_opt.out_csv);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      gen_config.family = family_from_string(gen_family);
      return cmd_generate(gen_config, gen_out);
    }
    if (sv->parsed()) return cmd_solve(solve_opt);
    if (bench->parsed()) {
      std::stringstream ss(bench_policies);
      std::string item;
      bench_opt.policies.clear();
      while (std::getline(ss, item, ','))
        if (!item.empty()) bench_opt.policies.push_back(item);
      return cmd_bench(bench_opt);
    }
    if (sweep->parsed()) return cmd_sweep(sweep_opt);
    if (tr->parsed()) return cmd_train(train_opt);
    if (sc->parsed()) {
      scatter_opt.thresholds.clear();
      std::stringstream ss(thresholds_arg);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) scatter_opt.thresholds.push_back(std::stoi(item));
      return cmd_scatter(scatter_opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
