#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mongoose/bench.hpp"
#include "mongoose/checkpoint.hpp"
#include "mongoose/config.hpp"
#include "mongoose/diffcore.hpp"
#include "mongoose/gp.hpp"
#include "mongoose/svg.hpp"
#include "mongoose/trainer.hpp"

namespace fs = std::filesystem;
using namespace mongoose;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MONGOOSE_SEED"))
    return std::stoull(env);
  return 0;
}

std::string csv_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

Checkpoint make_checkpoint(const PolicyParams& params, const AdamState& adam,
                           const TrainConfig& config, long step) {
  Checkpoint ckpt;
  ckpt.dimension = params.dimension;
  ckpt.hidden_size = params.hidden_size;
  ckpt.step = step;
  ckpt.seed = config.seed;
  ckpt.config_echo = train_config_to_map(config);
  ckpt.params = params;
  ckpt.has_adam = adam.m.size() > 0;
  ckpt.adam = adam;
  return ckpt;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              const std::string& resume_path, int workers_override,
              long seed_override) {
  TrainConfig config = train_config_from_map(parse_config_file(config_path));
  if (workers_override > 0) config.workers = workers_override;
  if (seed_override >= 0) config.seed = static_cast<std::uint64_t>(seed_override);

  fs::create_directories(out_dir);
  std::ofstream metrics(fs::path(out_dir) / "metrics.csv");
  metrics << "step,horizon,loss,mean_improvement,mean_cost,grad_norm,"
             "wall_time\n";

  auto on_step = [&](const TrainMetrics& m) {
    metrics << m.step << "," << m.horizon << "," << csv_num(m.loss) << ","
            << csv_num(m.mean_improvement) << "," << csv_num(m.mean_cost)
            << "," << csv_num(m.grad_norm) << "," << csv_num(m.wall_time)
            << "\n";
  };
  auto on_phase = [&](const PolicyParams& p, const AdamState& a, int horizon,
                      long step) {
    const std::string name = "ckpt_h" + std::to_string(horizon) + ".ckpt";
    save_checkpoint((fs::path(out_dir) / name).string(),
                    make_checkpoint(p, a, config, step));
  };

  TrainResult result;
  if (!resume_path.empty()) {
    Checkpoint ckpt = load_checkpoint(resume_path);
    if (ckpt.dimension != config.dimension ||
        ckpt.hidden_size != config.hidden_size) {
      std::cerr << "resume checkpoint does not match config dimensions\n";
      return 1;
    }
    result = curriculum_train(config, ckpt.params, ckpt.adam, ckpt.step,
                              on_step, on_phase);
  } else {
    result = curriculum_train(config, on_step, on_phase);
  }

  save_checkpoint(
      (fs::path(out_dir) / "final.ckpt").string(),
      make_checkpoint(result.params, result.adam, config,
                      result.steps_completed));
  if (result.aborted) {
    std::cerr << "training aborted: " << result.abort_reason
              << " (last good checkpoint written)\n";
    return 1;
  }
  std::cout << "trained " << result.steps_completed << " steps; final loss "
            << (result.metrics.empty() ? 0.0 : result.metrics.back().loss)
            << "\n";
  return 0;
}

int cmd_bench(const std::string& actor_spec, const std::string& fn_name,
              int dim, int horizon, int num_seeds, std::uint64_t seed,
              double gamma, double noise, const std::string& out_dir,
              bool svg, int workers) {
  Actor actor;
  if (actor_spec.rfind("checkpoint:", 0) == 0) {
    Checkpoint ckpt = load_checkpoint(actor_spec.substr(11));
    actor.kind = Actor::Kind::Policy;
    actor.params = ckpt.params;
    actor.label = "policy";
  } else {
    actor.kind = Actor::Kind::Baseline;
    actor.label = actor_spec;
    if (actor_spec == "ei") actor.baseline.method = BaselineMethod::EI;
    else if (actor_spec == "eipu") actor.baseline.method = BaselineMethod::EIpu;
    else if (actor_spec == "random")
      actor.baseline.method = BaselineMethod::Random;
    else {
      std::cerr << "unknown actor '" << actor_spec
                << "' (use checkpoint:<path>, ei, eipu or random)\n";
      return 2;
    }
    actor.baseline.gamma = gamma;
  }

  RngStream fn_rng = RngStream::child(seed, 0xBE9C);
  BenchmarkFn fn = make_benchmark(fn_name, dim, fn_rng);

  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < num_seeds; ++s)
    seeds.push_back(derive_seed(seed, static_cast<std::uint64_t>(s)));

  EvalReport report =
      run_eval(actor, fn, horizon, seeds, noise, CostNorm::L2, workers);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.csv");
    out << "# cumulative cost includes the x0->x1 hop; baseline warm-start "
           "design cost excluded\n";
    out << "actor,fn,seed,step,regret,cum_cost,wall_time\n";
    for (std::size_t s = 0; s < report.seeds.size(); ++s) {
      const SeedSeries& series = report.seeds[s];
      for (int t = 0; t <= horizon; ++t)
        out << report.actor << "," << report.fn << "," << s << "," << t << ","
            << csv_num(series.regret[t]) << "," << csv_num(series.cum_cost[t])
            << "," << csv_num(series.wall_time) << "\n";
    }
  }
  AggregateReport agg = aggregate_report({report});
  {
    std::ofstream out(fs::path(out_dir) / "summary.csv");
    out << "actor,step,mean_regret,regret_p5,regret_p95,mean_cost,cost_p5,"
           "cost_p95\n";
    for (const auto& a : agg.actors)
      for (int t = 0; t <= horizon; ++t)
        out << a.actor << "," << t << "," << csv_num(a.regret[t].mean) << ","
            << csv_num(a.regret[t].p5) << "," << csv_num(a.regret[t].p95)
            << "," << csv_num(a.cum_cost[t].mean) << ","
            << csv_num(a.cum_cost[t].p5) << "," << csv_num(a.cum_cost[t].p95)
            << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "matched.csv");
    out << "actor,regret_level,cost_at_regret,cost_budget,regret_at_cost\n";
    for (const auto& [name, costs] : agg.cost_at_regret) {
      const auto& regrets = agg.regret_at_cost.at(name);
      for (std::size_t i = 0; i < costs.size(); ++i)
        out << name << "," << csv_num(agg.regret_levels[i]) << ","
            << csv_num(costs[i]) << "," << csv_num(agg.cost_budgets[i]) << ","
            << csv_num(regrets[i]) << "\n";
    }
  }
  if (svg)
    write_text_file((fs::path(out_dir) / "regret_cost.svg").string(),
                    svg_regret_cost(agg.actors));
  std::cout << "wrote report.csv, summary.csv, matched.csv to " << out_dir
            << "\n";
  return 0;
}

int cmd_rollout(const std::string& ckpt_path, const std::string& fn_name,
                int dim, int horizon, std::uint64_t seed, double noise,
                const std::string& out_dir, bool svg) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  const int d = ckpt.dimension;

  Objective objective;
  std::function<double(double, double)> grid_eval;
  BenchmarkFn fn;
  ObjectiveInstance instance;
  bool use_benchmark = !fn_name.empty();
  if (use_benchmark) {
    if (dim > 0 && dim != d) {
      std::cerr << "checkpoint is for dimension " << d << ", not " << dim
                << "\n";
      return 1;
    }
    RngStream fn_rng = RngStream::child(seed, 0xBE9C);
    fn = make_benchmark(fn_name, d, fn_rng);
    objective = fn.objective(noise);
  } else {
    TrainConfig config;
    config.dimension = d;
    config.noise_variance = noise;
    LengthscalePrior prior = fit_inverse_gamma(0.1, 0.4, 0.99);
    RngStream rng = RngStream::child(seed, 0x51AB);
    instance = sample_training_instance(prior, config, rng);
    objective = Objective::from_instance(instance);
  }

  RngStream rng(seed);
  Trajectory traj = rollout(ckpt.params, objective, horizon, rng);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "trajectory.csv");
    out << "t";
    for (int j = 1; j <= d; ++j) out << ",x" << j;
    out << ",value,observed,step_cost\n";
    for (int t = 0; t <= horizon; ++t) {
      out << t;
      for (int j = 0; j < d; ++j) out << "," << csv_num(traj.points(t, j));
      out << "," << csv_num(traj.true_values[t]) << ","
          << csv_num(traj.observed_values[t]) << ","
          << csv_num(t > 0 ? traj.step_costs[t - 1] : 0.0) << "\n";
    }
  }
  if (svg && d == 2) {
    const int n = 96;
    Eigen::MatrixXd grid(n, n);
    Eigen::VectorXd x(2);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        x[0] = (i + 0.5) / n;
        x[1] = (j + 0.5) / n;
        grid(i, j) = objective.f(x, nullptr);
      }
    write_text_file((fs::path(out_dir) / "trajectory.svg").string(),
                    svg_trajectory(grid, traj.points));
  }
  std::cout << "wrote trajectory.csv to " << out_dir << "\n";
  return 0;
}

int cmd_sample_prior(int dim, std::uint64_t seed, int grid, int features,
                     bool bowl, const std::string& out_dir, bool svg) {
  TrainConfig config;
  config.dimension = dim;
  config.num_features = features;
  config.include_bowl = bowl;
  LengthscalePrior prior = fit_inverse_gamma(0.1, 0.4, 0.99);
  RngStream rng(seed);
  ObjectiveInstance instance = sample_training_instance(prior, config, rng);

  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "prior_sample.csv");
  for (int j = 1; j <= dim; ++j) out << (j > 1 ? "," : "") << "x" << j;
  out << ",value\n";

  Eigen::VectorXd x(dim);
  if (dim == 1) {
    for (int i = 0; i < grid; ++i) {
      x[0] = (i + 0.5) / grid;
      out << csv_num(x[0]) << "," << csv_num(eval_objective(instance, x))
          << "\n";
    }
  } else if (dim == 2) {
    Eigen::MatrixXd values(grid, grid);
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        x[0] = (i + 0.5) / grid;
        x[1] = (j + 0.5) / grid;
        values(i, j) = eval_objective(instance, x);
        out << csv_num(x[0]) << "," << csv_num(x[1]) << ","
            << csv_num(values(i, j)) << "\n";
      }
    if (svg)
      write_text_file((fs::path(out_dir) / "prior_sample.svg").string(),
                      svg_heatmap(values));
  } else {
    // higher dimensions: random probes instead of a dense grid
    for (int i = 0; i < grid * grid; ++i) {
      for (int j = 0; j < dim; ++j) x[j] = rng.uniform();
      for (int j = 0; j < dim; ++j) out << (j > 0 ? "," : "") << csv_num(x[j]);
      out << "," << csv_num(eval_objective(instance, x)) << "\n";
    }
  }
  std::cout << "wrote prior_sample.csv to " << out_dir << "\n";
  return 0;
}

int cmd_grad_check(int hidden, int dim, int horizon, int batch, int coords,
                   double h, double threshold, std::uint64_t seed,
                   double alpha, const std::string& loss_form, bool detach,
                   double noise) {
  TrainConfig config;
  config.dimension = dim;
  config.hidden_size = hidden;
  config.alpha = alpha;
  config.noise_variance = noise;
  config.myopic_detach = detach;
  config.loss_form = loss_form == "add" ? LossForm::Add : LossForm::Divide;

  LengthscalePrior prior = fit_inverse_gamma(0.1, 0.4, 0.99);
  std::vector<ObjectiveInstance> instances;
  for (int b = 0; b < batch; ++b) {
    RngStream rng = RngStream::child(seed, static_cast<std::uint64_t>(b));
    instances.push_back(sample_training_instance(prior, config, rng));
  }
  RngStream init_rng = RngStream::child(seed, 0xFFFFFFFFULL);
  PolicyParams params = init_params(dim, hidden, init_rng);

  RolloutLossConfig rollout_config;
  rollout_config.horizon = horizon;
  rollout_config.loss = config.loss_options();
  rollout_config.noise_seed = derive_seed(seed, 0xA5A5A5A5ULL);

  BackpropResult bp = backprop_rollout(params, instances, rollout_config);

  RngStream coord_rng = RngStream::child(seed, 0xC0);
  std::vector<int> coord_list;
  for (int c = 0; c < coords; ++c)
    coord_list.push_back(static_cast<int>(coord_rng.uniform() *
                                          params.total_size()) %
                         params.total_size());

  auto loss_fn = [&](const Eigen::VectorXd& flat) {
    PolicyParams p = params;
    p.flat = flat;
    return forward_loss(p, instances, rollout_config);
  };
  GradientReport report =
      finite_diff_gradient(loss_fn, params, bp.grad, coord_list, h);

  std::cout << "coordinates checked : " << report.num_checked << "\n";
  std::cout << "max relative error  : " << report.max_rel_err << "\n";
  std::cout << "worst coordinate    : " << report.worst_segment << "["
            << report.worst_index << "]\n";
  std::cout << "threshold           : " << threshold << "\n";
  const bool ok = report.max_rel_err < threshold;
  std::cout << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Meta-learnt movement-cost-aware black-box optimiser"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "meta-train a policy");
  std::string config_path, out_dir = "out", resume_path;
  int workers_override = 0;
  long seed_override = -1;
  train->add_option("--config", config_path, "flat key=value config file")
      ->required();
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--resume", resume_path, "checkpoint to resume from");
  train->add_option("--workers", workers_override, "worker thread cap");
  train->add_option("--seed", seed_override, "master seed override");

  // bench
  auto* bench = app.add_subcommand("bench", "regret-vs-cost evaluation");
  std::string actor_spec = "ei", fn_name = "sphere";
  int dim = 2, horizon = 50, num_seeds = 5;
  std::uint64_t seed = default_seed();
  double gamma = 1.0, noise = 0.0;
  bool svg = false;
  int workers = 1;
  bench->add_option("--actor", actor_spec,
                    "checkpoint:<path> | ei | eipu | random");
  bench->add_option("--fn", fn_name, "benchmark function name");
  bench->add_option("--dim", dim, "dimension");
  bench->add_option("--horizon", horizon, "steps T");
  bench->add_option("--seeds", num_seeds, "number of evaluation seeds");
  bench->add_option("--seed", seed, "master seed");
  bench->add_option("--gamma", gamma, "EIpu cost offset");
  bench->add_option("--noise", noise, "observation noise variance");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--workers", workers, "worker thread cap");
  bench->add_flag("--svg", svg, "emit regret-vs-cost SVG");

  // rollout
  auto* roll = app.add_subcommand("rollout", "roll a checkpoint out");
  std::string ckpt_path;
  std::string roll_fn;
  roll->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
  roll->add_option("--fn", roll_fn,
                   "benchmark name (omit for a sampled prior instance)");
  roll->add_option("--dim", dim, "dimension check");
  roll->add_option("--horizon", horizon, "steps T");
  roll->add_option("--seed", seed, "seed");
  roll->add_option("--noise", noise, "observation noise variance");
  roll->add_option("--out", out_dir, "output directory");
  roll->add_flag("--svg", svg, "emit 2-d path overlay SVG");

  // sample-prior
  auto* sample = app.add_subcommand("sample-prior",
                                    "grid-evaluate one prior instance");
  int grid = 64, features = 100;
  bool bowl = true;
  sample->add_option("--dim", dim, "dimension");
  sample->add_option("--seed", seed, "seed");
  sample->add_option("--grid", grid, "grid resolution per axis");
  sample->add_option("--features", features, "number of Fourier features");
  sample->add_option("--bowl", bowl, "include the quadratic bowl");
  sample->add_option("--out", out_dir, "output directory");
  sample->add_flag("--svg", svg, "emit heat map SVG (d=2)");

  // grad-check
  auto* gc = app.add_subcommand("grad-check",
                                "finite-difference gradient audit");
  int hidden = 8, gc_horizon = 5, batch = 2, coords = 50;
  double h = 1e-5, threshold = 1e-4, alpha = 0.05;
  std::string loss_form = "divide";
  bool detach = false;
  gc->add_option("--hidden", hidden, "hidden size");
  gc->add_option("--dim", dim, "dimension");
  gc->add_option("--horizon", gc_horizon, "rollout horizon");
  gc->add_option("--batch", batch, "batch size");
  gc->add_option("--coords", coords, "coordinates to check");
  gc->add_option("--fd-step", h, "finite-difference step");
  gc->add_option("--threshold", threshold, "max relative error to pass");
  gc->add_option("--seed", seed, "seed");
  gc->add_option("--alpha", alpha, "cost weight");
  gc->add_option("--loss-form", loss_form, "divide or add");
  gc->add_flag("--detach", detach, "myopic gradient detach");
  gc->add_option("--noise", noise, "observation noise variance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (train->parsed())
      return cmd_train(config_path, out_dir, resume_path, workers_override,
                       seed_override);
    if (bench->parsed())
      return cmd_bench(actor_spec, fn_name, dim, horizon, num_seeds, seed,
                       gamma, noise, out_dir, svg, workers);
    if (roll->parsed())
      return cmd_rollout(ckpt_path, roll_fn, dim, horizon, seed, noise,
                         out_dir, svg);
    if (sample->parsed())
      return cmd_sample_prior(dim, seed, grid, features, bowl, out_dir, svg);
    if (gc->parsed())
      return cmd_grad_check(hidden, dim, gc_horizon, batch, coords, h,
                            threshold, seed, alpha, loss_form, detach, noise);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
