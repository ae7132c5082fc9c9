#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sctl/errors.hpp"
#include "sctl/excitation.hpp"
#include "sctl/harness/config.hpp"
#include "sctl/harness/evaluate.hpp"
#include "sctl/harness/metrics.hpp"
#include "sctl/harness/run_io.hpp"
#include "sctl/harness/train.hpp"
#include "sctl/lqr.hpp"
#include "sctl/rng.hpp"
#include "sctl/text.hpp"

using namespace sctl;

namespace {

// Ranges for --randomize-assumed.
constexpr double kMassRange[2] = {0.5, 2.0};
constexpr double kDampingRange[2] = {-1.0, 1.0};
constexpr double kStiffnessRange[2] = {50.0, 250.0};

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> alpha;
  std::optional<std::size_t> episodes;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "master seed");
    app->add_option("--out", out, "output directory");
    app->add_option("--alpha", alpha, "LQR guidance weight in [0, 1]");
    app->add_option("--episodes", episodes, "training episodes");
    app->add_option("--set", overrides, "extra key=value settings (repeatable)");
  }

  RunConfig load() const {
    RunConfig cfg = config.empty() ? RunConfig{} : RunConfig::from_file(config);
    apply(cfg);
    return cfg;
  }

  void apply(RunConfig& cfg) const {
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed) cfg.seed = *seed;
    if (out) cfg.out_dir = *out;
    if (alpha) cfg.alpha = *alpha;
    if (episodes) cfg.episodes = *episodes;
    cfg.validate();
  }
};

void write_lqr(const fs::path& dir, const LqrPolicy& lqr) {
  auto os = open_output(dir / run_files::kLqr);
  write_lqr_record(os, lqr);
}

std::string label(PolicyKind kind, std::uint64_t seed) { return to_string(kind) + "_" + std::to_string(seed); }

/// Rollouts for each (policy, actor) pair; writes trajectories, metrics.csv and
/// summary.txt. Returns the number of policies whose rollouts all diverged.
int run_evaluation(const RunConfig& cfg, const LqrPolicy& lqr,
                   const std::vector<std::pair<PolicyKind, RawPolicy>>& policies, const fs::path& dir) {
  ensure_directory(dir);
  const auto seeds = evaluation_seeds(cfg);
  std::vector<PolicyRuns> groups;
  std::vector<std::string> labels;
  std::vector<RunMetrics> all;
  int all_diverged = 0;
  for (const auto& [kind, actor] : policies) {
    const auto runs = evaluate(kind, cfg, lqr, actor, seeds, true);
    std::size_t diverged = 0;
    for (const auto& r : runs) {
      auto os = open_output(dir / ("trajectory_" + label(kind, r.seed) + ".csv"));
      write_trajectory_csv(os, r.trajectory);
      labels.push_back(label(kind, r.seed));
      all.push_back(r.metrics);
      if (r.metrics.diverged) ++diverged;
    }
    if (diverged == runs.size()) ++all_diverged;
    groups.push_back({to_string(kind), metrics_of(runs)});
  }
  {
    auto os = open_output(dir / "metrics.csv");
    write_metrics_csv(os, labels, all);
  }
  const SummaryTable table = summarize(groups);
  write_text_file(dir / "summary.txt", table.to_text());
  write_text_file(dir / "summary.csv", table.to_csv());
  std::cout << table.to_text();
  return all_diverged;
}

void print_episode(const EpisodeLog& e) {
  std::fprintf(stderr, "episode %4zu  rms_x %.4g  rms_a %.4g  peak_a %.4g  return %.4g  beta %.3g  lambda %.3g%s\n",
               e.episode, e.metrics.rms_x, e.metrics.rms_a, e.metrics.peak_a, e.episode_return, e.beta, e.lambda,
               e.metrics.diverged ? "  DIVERGED" : "");
}

TrainedRun train_into(const RunConfig& cfg, bool guided, const fs::path& dir, bool quiet) {
  ensure_directory(dir);
  TrainOptions opt;
  opt.guided = guided;
  if (!quiet) opt.on_episode = print_episode;
  RunConfig snapshot = cfg;
  snapshot.out_dir = dir.string();
  return train_run(snapshot, opt, &dir);
}

int cmd_design_lqr(const Common& common, bool randomize) {
  RunConfig cfg = common.load();
  if (randomize) {
    Rng rng(derive_seed(cfg.seed, 0));
    auto pick = [&](const double (&r)[2]) { return r[0] + (r[1] - r[0]) * rng.uniform(); };
    cfg.assumed = {pick(kMassRange), pick(kDampingRange), pick(kStiffnessRange), 0.0};
  }
  const LqrPolicy lqr = design_guidance(cfg);
  write_lqr_record(std::cout, lqr);
  if (common.out) {
    const fs::path dir = *common.out;
    ensure_directory(dir);
    write_lqr(dir, lqr);
    write_text_file(dir / run_files::kConfig, cfg.to_text());
  }
  return 0;
}

int cmd_simulate(const Common& common, const std::vector<std::string>& names) {
  const RunConfig cfg = common.load();
  const fs::path dir = cfg.out_dir;
  const LqrPolicy lqr = design_guidance(cfg);
  ensure_directory(dir);
  write_text_file(dir / run_files::kConfig, cfg.to_text());
  write_lqr(dir, lqr);
  std::vector<std::pair<PolicyKind, RawPolicy>> policies;
  for (const auto& n : names) {
    const PolicyKind k = parse_policy(n);
    if (is_learned(k)) throw InputError("simulate covers uncontrolled and lqr; use evaluate for learned policies");
    policies.emplace_back(k, RawPolicy{});
  }
  return run_evaluation(cfg, lqr, policies, dir) == static_cast<int>(policies.size()) ? 2 : 0;
}

int cmd_train(const Common& common, bool naive, bool quiet) {
  const RunConfig cfg = common.load();
  const fs::path dir = cfg.out_dir;
  const TrainedRun run = train_into(cfg, !naive, dir, quiet);
  std::fprintf(stderr, "stored %zu transitions, %zu failed episodes\n", run.stored, run.failed);
  const PolicyKind kind = naive ? PolicyKind::Rl : PolicyKind::LqrGuidedRl;
  const int bad = run_evaluation(cfg, run.lqr, {{kind, run.policy}}, dir / "eval");
  return (run.failed == cfg.episodes || bad > 0) ? 2 : 0;
}

int cmd_evaluate(const Common& common, const std::string& run_dir, const std::string& naive_dir,
                 const std::vector<std::string>& names) {
  RunConfig cfg = RunConfig::from_file((fs::path(run_dir) / run_files::kConfig).string());
  if (!common.config.empty()) cfg = RunConfig::from_file(common.config);
  common.apply(cfg);
  const fs::path dir = common.out ? fs::path(*common.out) : fs::path(run_dir) / "eval";
  const LqrPolicy lqr = design_guidance(cfg);
  std::vector<std::pair<PolicyKind, RawPolicy>> policies;
  for (const auto& n : names) {
    const PolicyKind k = parse_policy(n);
    RawPolicy actor;
    if (k == PolicyKind::LqrGuidedRl) actor = load_policy(run_dir);
    if (k == PolicyKind::Rl) actor = load_policy(naive_dir.empty() ? run_dir : naive_dir);
    policies.emplace_back(k, std::move(actor));
  }
  return run_evaluation(cfg, lqr, policies, dir) == static_cast<int>(policies.size()) ? 2 : 0;
}

int cmd_compare(const Common& common, bool quiet) {
  const RunConfig cfg = common.load();
  const fs::path root = cfg.out_dir;
  ensure_directory(root);
  write_text_file(root / run_files::kConfig, cfg.to_text());
  std::fprintf(stderr, "training naive RL\n");
  const TrainedRun naive = train_into(cfg, false, root / "naive", quiet);
  std::fprintf(stderr, "training LQR-guided RL\n");
  const TrainedRun guided = train_into(cfg, true, root / "guided", quiet);
  write_lqr(root, guided.lqr);

  // Early-training acceleration peaks of both learners against the plant alone.
  {
    auto os = open_output(root / "training_peaks.csv");
    os << "episode,uncontrolled_peak_a,naive_peak_a,guided_peak_a\n";
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      const auto rec = generate_record(training_excitation_seed(cfg, e), cfg.excitation());
      const double unc = rollout(PolicyKind::Uncontrolled, cfg, guided.lqr, {}, rec, false).metrics.peak_a;
      os << e + 1 << ',' << format_real(unc) << ',' << format_real(naive.episodes[e].metrics.peak_a) << ','
         << format_real(guided.episodes[e].metrics.peak_a) << '\n';
    }
  }
  const int bad = run_evaluation(cfg, guided.lqr,
                                 {{PolicyKind::Uncontrolled, {}},
                                  {PolicyKind::Lqr, {}},
                                  {PolicyKind::Rl, naive.policy},
                                  {PolicyKind::LqrGuidedRl, guided.policy}},
                                 root / "eval");
  return bad == 4 ? 2 : 0;
}

int cmd_gen_excitation(const Common& common, std::size_t count, bool held_out) {
  const RunConfig cfg = common.load();
  const fs::path dir = cfg.out_dir;
  ensure_directory(dir);
  const KanaiTajimiParams kt = cfg.excitation();
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t seed = held_out ? derive_seed(cfg.seed, streams::kEvalExcitation, i)
                                        : training_excitation_seed(cfg, i);
    auto os = open_output(dir / ("excitation_" + std::to_string(seed) + ".csv"));
    write_record_csv(os, generate_record(seed, kt), kt.dt);
    std::cout << (dir / ("excitation_" + std::to_string(seed) + ".csv")).string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"Structural control with LQR-guided Lyapunov actor-critic learning"};
  app.require_subcommand(1);

  Common common;
  bool randomize = false, naive = false, guided = false, quiet = false, held_out = false;
  std::vector<std::string> sim_policies{"uncontrolled", "lqr"};
  std::vector<std::string> eval_policies{"uncontrolled", "lqr", "lqr-guided-rl"};
  std::string run_dir, naive_dir;
  std::size_t count = 1;

  auto* design = app.add_subcommand("design-lqr", "design the guidance LQR on the assumed model");
  common.attach(design);
  design->add_flag("--randomize-assumed", randomize, "draw m in [0.5, 2], c in [-1, 1], k in [50, 250] from --seed");

  auto* simulate = app.add_subcommand("simulate", "uncontrolled / LQR rollouts on held-out excitation");
  common.attach(simulate);
  simulate->add_option("--policy", sim_policies, "uncontrolled, lqr");

  auto* train = app.add_subcommand("train", "train the learner on the true plant");
  common.attach(train);
  auto* g = train->add_flag("--guided", guided, "LQR-guided training (default)");
  train->add_flag("--naive", naive, "naive RL: alpha = 0")->excludes(g);
  train->add_flag("--quiet", quiet, "no per-episode progress");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate policies from a run directory");
  common.attach(evaluate_cmd);
  evaluate_cmd->add_option("--run", run_dir, "run directory from train")->required()->check(CLI::ExistingDirectory);
  evaluate_cmd->add_option("--naive-run", naive_dir, "run directory used for the rl policy");
  evaluate_cmd->add_option("--policy", eval_policies, "uncontrolled, lqr, rl, lqr-guided-rl");

  auto* compare = app.add_subcommand("compare", "train both learners and evaluate all four policies");
  common.attach(compare);
  compare->add_flag("--quiet", quiet, "no per-episode progress");

  auto* gen = app.add_subcommand("gen-excitation", "write Kanai-Tajimi records as CSV");
  common.attach(gen);
  gen->add_option("--count", count, "number of records")->check(CLI::PositiveNumber);
  gen->add_flag("--held-out", held_out, "use the evaluation seed stream");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*design) return cmd_design_lqr(common, randomize);
    if (*simulate) return cmd_simulate(common, sim_policies);
    if (*train) return cmd_train(common, naive, quiet);
    if (*evaluate_cmd) return cmd_evaluate(common, run_dir, naive_dir, eval_policies);
    if (*compare) return cmd_compare(common, quiet);
    if (*gen) return cmd_gen_excitation(common, count, held_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
