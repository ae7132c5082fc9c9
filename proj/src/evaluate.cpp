#include "sctl/harness/evaluate.hpp"

#include "sctl/errors.hpp"
#include "sctl/excitation.hpp"
#include "sctl/harness/episode.hpp"

namespace sctl {

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Uncontrolled: return "uncontrolled";
    case PolicyKind::Lqr: return "lqr";
    case PolicyKind::Rl: return "rl";
    case PolicyKind::LqrGuidedRl: return "lqr-guided-rl";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& name) {
  if (name == "uncontrolled") return PolicyKind::Uncontrolled;
  if (name == "lqr") return PolicyKind::Lqr;
  if (name == "rl") return PolicyKind::Rl;
  if (name == "lqr-guided-rl") return PolicyKind::LqrGuidedRl;
  throw InputError("unknown policy '" + name + "' (uncontrolled | lqr | rl | lqr-guided-rl)");
}

bool is_learned(PolicyKind kind) { return kind == PolicyKind::Rl || kind == PolicyKind::LqrGuidedRl; }

EvalRun rollout(PolicyKind kind, const RunConfig& cfg, const LqrPolicy& lqr, const RawPolicy& actor,
                std::span<const double> record, bool keep_trajectory) {
  if (is_learned(kind) && !actor) {
    throw InputError("policy '" + to_string(kind) + "' needs a trained actor checkpoint");
  }
  RunConfig local = cfg;
  double alpha = 0.0;
  switch (kind) {
    case PolicyKind::Uncontrolled: local.u_max = 0.0; break;
    case PolicyKind::Lqr: local.u_max = 0.0; alpha = 1.0; break;
    case PolicyKind::Rl: break;
    case PolicyKind::LqrGuidedRl: alpha = cfg.alpha; break;
  }
  ControlEnv env(local, lqr);
  env.reset(record);
  EvalRun out;
  MetricsAccumulator acc;
  bool diverged = false;
  try {
    while (!env.done()) {
      const double raw = is_learned(kind) ? actor(env.observation()) : 0.0;
      const double t = static_cast<double>(env.step_index() + 1) * cfg.dt;
      const auto step = env.step(raw, alpha);
      acc.add(step.plant.x, step.accel, step.u);
      if (keep_trajectory) {
        out.trajectory.push_back({t, step.plant.x, step.plant.v, step.accel, step.u, step.ground});
      }
    }
  } catch (const DivergenceError&) {
    diverged = true;
  }
  out.metrics = acc.finish(diverged);
  return out;
}

std::vector<EvalRun> evaluate(PolicyKind kind, const RunConfig& cfg, const LqrPolicy& lqr,
                              const RawPolicy& actor, std::span<const std::uint64_t> seeds,
                              bool keep_trajectory) {
  if (is_learned(kind) && !actor) {
    throw InputError("policy '" + to_string(kind) + "' needs a trained actor checkpoint");
  }
  const KanaiTajimiParams kt = cfg.excitation();
  std::vector<EvalRun> runs;
  for (const auto seed : seeds) {
    const auto record = generate_record(seed, kt);
    EvalRun r = rollout(kind, cfg, lqr, actor, record, keep_trajectory);
    r.seed = seed;
    runs.push_back(std::move(r));
  }
  return runs;
}

std::vector<RunMetrics> metrics_of(const std::vector<EvalRun>& runs) {
  std::vector<RunMetrics> out;
  for (const auto& r : runs) out.push_back(r.metrics);
  return out;
}

}  // namespace sctl
