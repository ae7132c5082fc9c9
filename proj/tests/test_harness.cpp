#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "sctl/excitation.hpp"
#include "sctl/harness/config.hpp"
#include "sctl/harness/episode.hpp"
#include "sctl/harness/evaluate.hpp"
#include "sctl/harness/metrics.hpp"
#include "sctl/harness/run_io.hpp"
#include "sctl/harness/train.hpp"

using namespace sctl;

namespace {

RunConfig tiny_run() {
  RunConfig c;
  c.lac.hidden = {8, 8};
  c.lac.critic_features = 4;
  c.lac.batch_size = 8;
  c.lac.warmup = 4;
  c.episodes = 2;
  c.horizon = 0.4;
  c.precision = Precision::Float64;
  c.seed = 17;
  return c;
}

bool same_metrics(const RunMetrics& a, const RunMetrics& b) {
  return a.rms_x == b.rms_x && a.rms_a == b.rms_a && a.peak_a == b.peak_a && a.peak_x == b.peak_x &&
         a.rms_u == b.rms_u && a.diverged == b.diverged && a.steps == b.steps;
}

}  // namespace

TEST_CASE("reward") {
  const std::array<double, 3> w{1.0, 1e-2, 1e-3};
  CHECK(compute_reward(0, 0, 0, w) == 0.0);
  CHECK(compute_reward(1, 2, 3, w) == doctest::Approx(-1.023).epsilon(1e-15));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal(), a = 10 * rng.normal(), u = 50 * rng.normal();
    CHECK(compute_reward(x, a, u, w) == compute_reward(-x, -a, -u, w));
    CHECK(compute_reward(x, a, u, w) <= 0.0);
  }
}

TEST_CASE("hybrid action") {
  CHECK(hybrid_action(0.0, 100.0, 0.5, 10.0) == 5.0);
  CHECK(hybrid_action(0.2, 100.0, 0.5, 10.0) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(hybrid_action(0.2, 100.0, 0.0, 10.0) == doctest::Approx(20.0).epsilon(1e-15));
  CHECK(hybrid_action(1.0, 100.0, 0.5, 10.0, 30.0) == 30.0);
  CHECK(hybrid_action(-1.0, 100.0, 0.5, 10.0, 30.0) == -30.0);
}

TEST_CASE("state window") {
  HistoryWindow h(4);
  CHECK(build_state(h) == Eigen::VectorXd::Zero(16));

  HistoryWindow one(1);
  one.push(1.5, -2.0, 0.25, 7.0);
  Eigen::VectorXd expect(4);
  expect << 1.5, -2.0, 0.25, 7.0;
  CHECK(build_state(one) == expect);

  for (int i = 1; i <= 5; ++i) h.push(i, 10 * i, 100 * i, 1000 * i);
  const Eigen::VectorXd before = build_state(h);
  h.push(6, 60, 600, 6000);
  const Eigen::VectorXd after = build_state(h);
  for (int p = 0; p < 4; ++p) {
    CHECK(after.segment(4 * p, 3) == before.segment(4 * p + 1, 3));
  }
  CHECK(after(3) == 6.0);
  CHECK(after(15) == 6000.0);
  CHECK_THROWS_AS(HistoryWindow(0), InputError);
}

TEST_CASE("environment step accounting") {
  RunConfig cfg;
  cfg.horizon = 0.1;
  const LqrPolicy lqr = design_guidance(cfg);
  ControlEnv env(cfg, lqr);
  const auto record = generate_record(5, cfg.excitation());
  CHECK(record.size() == cfg.steps_per_episode());
  env.reset(record);
  CHECK(env.observation().size() == 16);
  std::size_t steps = 0;
  while (!env.done()) {
    const auto s = env.step(0.1, 0.5);
    CHECK(s.ground == record[steps]);
    CHECK(env.observation()(7) == s.ground);    // newest ground sample
    CHECK(env.observation()(11) == 0.1);        // newest raw action
    CHECK(env.observation()(15) == s.u_star);
    ++steps;
  }
  CHECK(steps == 5);
  CHECK_THROWS_AS(env.step(0.0, 0.5), InputError);

  RunConfig full;
  CHECK(full.steps_per_episode() == 1000);
}

TEST_CASE("training loop accounting and chain integrity") {
  RunConfig cfg = tiny_run();
  cfg.episodes = 1;
  cfg.horizon = 0.04;
  TrainOptions opt;
  opt.keep_transitions = true;
  const auto out = train<double>(cfg, opt);
  CHECK(out.episodes.size() == 1);
  CHECK(out.episodes[0].metrics.steps == 2);
  CHECK(out.stored == 2);
  CHECK(out.transitions.size() == 2);

  RunConfig longer = tiny_run();
  const auto run = train<double>(longer, opt);
  CHECK(run.stored == 40);
  CHECK(run.failed == 0);
  CHECK(run.agent.update_count() == 40 - 3);
  for (std::size_t i = 0; i + 1 < run.transitions.size(); ++i) {
    const auto& a = run.transitions[i];
    const auto& b = run.transitions[i + 1];
    CHECK(a.r <= 0.0);
    if (a.episode == b.episode) {
      CHECK(a.s_next == b.s);
      CHECK(a.a_next_hint == b.u_tilde);
      CHECK(b.step == a.step + 1);
    }
  }
  for (const auto& e : run.episodes) CHECK(e.episode_return <= 0.0);
}

TEST_CASE("training is deterministic in the master seed") {
  RunConfig cfg = tiny_run();
  const auto a = train<double>(cfg, {});
  const auto b = train<double>(cfg, {});
  std::ostringstream ca, cb;
  write_training_csv(ca, a.episodes);
  write_training_csv(cb, b.episodes);
  CHECK(ca.str() == cb.str());
  std::ostringstream ka, kb;
  write_checkpoint(ka, a.agent.actor().trunk(), &a.agent.actor_optimizer());
  write_checkpoint(kb, b.agent.actor().trunk(), &b.agent.actor_optimizer());
  CHECK(ka.str() == kb.str());

  cfg.seed = 18;
  const auto c = train<double>(cfg, {});
  CHECK(c.episodes[0].metrics.rms_x != a.episodes[0].metrics.rms_x);

  RunConfig f = tiny_run();
  f.precision = Precision::Float32;
  const auto fa = train<float>(f, {}), fb = train<float>(f, {});
  CHECK(fa.agent.critic().params() == fb.agent.critic().params());
}

TEST_CASE("disabled control path reproduces the uncontrolled response") {
  RunConfig cfg = tiny_run();
  cfg.u_max = 0.0;
  cfg.episodes = 1;
  TrainOptions naive;
  naive.guided = false;
  const auto out = train<double>(cfg, naive);
  const auto record = generate_record(training_excitation_seed(cfg, 0), cfg.excitation());
  const auto unc = rollout(PolicyKind::Uncontrolled, cfg, out.lqr, {}, record, false);
  CHECK(same_metrics(out.episodes[0].metrics, unc.metrics));
}

TEST_CASE("uncontrolled rollout equals a zero-force simulation") {
  RunConfig cfg;
  cfg.horizon = 2.0;
  const LqrPolicy lqr = design_guidance(cfg);
  const auto record = generate_record(3, cfg.excitation());
  const auto run = rollout(PolicyKind::Uncontrolled, cfg, lqr, {}, record, true);

  PlantState s{};
  const Integrator integ = cfg.integrator();
  double sx = 0, sa = 0, pa = 0;
  for (std::size_t k = 0; k < record.size(); ++k) {
    const auto r = advance(s, 0.0, record[k], cfg.plant, integ, k);
    s = r.state;
    CHECK(run.trajectory[k].x == s.x);
    CHECK(run.trajectory[k].a == r.acceleration);
    CHECK(run.trajectory[k].u == 0.0);
    sx += s.x * s.x;
    sa += r.acceleration * r.acceleration;
    pa = std::max(pa, std::abs(r.acceleration));
  }
  const double n = static_cast<double>(record.size());
  CHECK(run.metrics.rms_x == doctest::Approx(std::sqrt(sx / n)).epsilon(1e-14));
  CHECK(run.metrics.rms_a == doctest::Approx(std::sqrt(sa / n)).epsilon(1e-14));
  CHECK(run.metrics.peak_a == pa);
  CHECK(run.metrics.rms_u == 0.0);
  CHECK(run.trajectory[0].t == doctest::Approx(cfg.dt));
}

TEST_CASE("lqr evaluation") {
  RunConfig cfg;
  const LqrPolicy lqr = design_guidance(cfg);
  const std::vector<double> quiet(cfg.steps_per_episode(), 0.0);
  const auto still = rollout(PolicyKind::Lqr, cfg, lqr, {}, quiet, false);
  CHECK(still.metrics.rms_x == 0.0);
  CHECK(still.metrics.rms_a == 0.0);
  CHECK(still.metrics.peak_a == 0.0);
  CHECK(still.metrics.peak_x == 0.0);
  CHECK(still.metrics.rms_u == 0.0);

  cfg.eval_episodes = 3;
  const auto seeds = evaluation_seeds(cfg);
  const auto unc = evaluate(PolicyKind::Uncontrolled, cfg, lqr, {}, seeds);
  const auto ctl = evaluate(PolicyKind::Lqr, cfg, lqr, {}, seeds);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    CHECK(ctl[i].metrics.rms_x / unc[i].metrics.rms_x < 1.0);
  }
  CHECK_THROWS_AS(evaluate(PolicyKind::Rl, cfg, lqr, {}, seeds), InputError);
  for (std::size_t i = 0; i < seeds.size(); ++i) CHECK(seeds[i] != training_excitation_seed(cfg, i));
}

TEST_CASE("summaries") {
  RunMetrics m{0.1, 2.0, 5.0, 0.3, 4.0, false, 1000};
  const auto single = summarize({{"uncontrolled", {m}}});
  CHECK(single.rows[0].mean == std::vector<double>{0.1, 2.0, 5.0, 0.3, 4.0});
  CHECK(single.rows[0].ratio[1] == 1.0);

  const auto twin = summarize({{"uncontrolled", {m, m}}, {"lqr", {m, m}}});
  for (double s : twin.rows[1].stddev) CHECK(s == 0.0);
  for (std::size_t i = 0; i + 1 < twin.rows[0].ratio.size(); ++i) CHECK(twin.rows[0].ratio[i] == 1.0);

  RunMetrics half = m;
  half.rms_a = 1.0;
  const auto t = summarize({{"uncontrolled", {m}}, {"lqr", {half}}});
  CHECK(t.rows[1].ratio[1] == 0.5);
  CHECK(t.to_csv().rfind("policy,count,diverged,rms_x_mean", 0) == 0);
  CHECK(t.to_text().find("lqr") != std::string::npos);
  CHECK_THROWS_AS(summarize({{"x", {}}}), InputError);

  std::ostringstream traj;
  write_trajectory_csv(traj, {{0.02, 1, 2, 3, 4, 5}});
  CHECK(traj.str().rfind("t,x,v,a,u,xg_ddot\n", 0) == 0);
}

TEST_CASE("config text round-trips and rejects unknown keys") {
  RunConfig c;
  c.alpha = 0.25;
  c.lac.hidden = {32, 16};
  c.kt_intensity = 0.1234567890123;
  c.lac.stored_next_action = true;
  c.precision = Precision::Float64;
  const RunConfig back = RunConfig::from_text(c.to_text());
  CHECK(back.to_text() == c.to_text());
  CHECK(back.hash() == c.hash());
  CHECK(back.lac.hidden == c.lac.hidden);

  RunConfig d;
  CHECK(d.lac.gamma == 0.998);
  CHECK(d.history == 4);
  CHECK(d.episodes == 100);
  CHECK(d.alpha == 0.5);
  CHECK(d.reward_weights == std::array<double, 3>{1.0, 1e-2, 1e-3});
  CHECK_THROWS_AS(RunConfig::from_text("bogus = 1\n"), InputError);
  CHECK_THROWS_AS(RunConfig::from_text("alpha = 1.5\n"), InputError);
  CHECK_THROWS_AS(RunConfig::from_text("alpha = abc\n"), InputError);
  CHECK(RunConfig::from_text("# comment\n\nalpha = 0.1 # trailing\n").alpha == 0.1);
  for (const auto& [key, value] : c.to_map()) CHECK(RunConfig::schema().count(key) == 1);
}

TEST_CASE("agent save and load") {
  RunConfig cfg = tiny_run();
  const auto out = train<double>(cfg, {});
  const auto dir = std::filesystem::temp_directory_path() / "sctl_test_agent";
  std::filesystem::remove_all(dir);
  save_agent(dir, out.agent, cfg);
  write_text_file(dir / run_files::kConfig, cfg.to_text());
  const auto back = load_agent<double>(dir, cfg);
  CHECK(back.actor().trunk().params() == out.agent.actor().trunk().params());
  CHECK(back.critic().params() == out.agent.critic().params());
  CHECK(back.target_critic().params() == out.agent.target_critic().params());
  CHECK(back.critic_optimizer().v == out.agent.critic_optimizer().v);
  CHECK(back.beta().log_value == out.agent.beta().log_value);
  CHECK(back.lambda().opt.m == out.agent.lambda().opt.m);
  CHECK(back.update_count() == out.agent.update_count());

  const RawPolicy p = load_policy(dir);
  const Eigen::VectorXd s = Eigen::VectorXd::Constant(16, 0.3);
  CHECK(p(s) == static_cast<double>(out.agent.act_deterministic(s)));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_policy(dir), InputError);
}
