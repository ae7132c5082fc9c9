#include "sctl/harness/train.hpp"

#include <optional>
#if defined(__GLIBC__)
#include <malloc.h>
#endif
#include <ostream>

#include "sctl/errors.hpp"
#include "sctl/excitation.hpp"
#include "sctl/harness/episode.hpp"
#include "sctl/text.hpp"

namespace sctl {

std::uint64_t training_excitation_seed(const RunConfig& cfg, std::size_t episode) {
  return derive_seed(cfg.seed, streams::kTrainExcitation, episode);
}

std::vector<std::uint64_t> evaluation_seeds(const RunConfig& cfg) {
  std::vector<std::uint64_t> seeds(cfg.eval_episodes);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(cfg.seed, streams::kEvalExcitation, i);
  return seeds;
}

LqrPolicy design_guidance(const RunConfig& cfg) { return design_lqr(cfg.assumed, cfg.lqr_q, cfg.lqr_r); }

template <typename Scalar>
TrainOutcome<Scalar> train(const RunConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  using VectorT = Vector<Scalar>;

  TrainOutcome<Scalar> out;
  out.lqr = design_guidance(cfg);

  Rng init_rng(derive_seed(cfg.seed, streams::kInit));
  Rng act_rng(derive_seed(cfg.seed, streams::kActing));
  Rng learn_rng(derive_seed(cfg.seed, streams::kLearning));

  const auto state_dim = static_cast<Eigen::Index>(cfg.state_dim());
  out.agent = LacAgent<Scalar>(state_dim, cfg.lac, init_rng);
  ReplayBuffer<Scalar> replay(state_dim, cfg.lac.replay_capacity);
  ControlEnv env(cfg, out.lqr);
  const double alpha = options.guided ? cfg.alpha : 0.0;
  const KanaiTajimiParams kt = cfg.excitation();
  const std::size_t learn_after = std::max<std::size_t>(cfg.lac.warmup, 1);

  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    EpisodeLog log;
    log.episode = e + 1;
    log.excitation_seed = training_excitation_seed(cfg, e);
    const std::vector<double> record = generate_record(log.excitation_seed, kt);
    env.reset(record);

    MetricsAccumulator acc;
    std::optional<Transition<Scalar>> pending;
    std::size_t pending_step = 0;
    double critic_loss_sum = 0.0, actor_loss_sum = 0.0;
    bool diverged = false;

    // Store the previous transition once the action taken at its s_next is known,
    // then learn (one update per stored transition once warmed up).
    auto commit = [&](Scalar next_action) {
      pending->a_next_hint = next_action;
      if (options.keep_transitions) {
        out.transitions.push_back({e + 1, pending_step, pending->s.template cast<double>(),
                                   static_cast<double>(pending->u_tilde), static_cast<double>(pending->r),
                                   pending->s_next.template cast<double>(), static_cast<double>(next_action)});
      }
      replay.push(*pending);
      ++out.stored;
      pending.reset();
      if (replay.size() >= learn_after) {
        const Batch<Scalar> batch = replay.sample(cfg.lac.batch_size, learn_rng);
        const auto st = out.agent.update(batch, learn_rng);
        critic_loss_sum += st.critic_loss;
        actor_loss_sum += st.actor_loss;
        ++log.updates;
      }
    };

    try {
      while (!env.done()) {
        const VectorT s = env.observation().template cast<Scalar>();
        const Scalar u_tilde = out.agent.act(s, act_rng);
        if (pending) commit(u_tilde);
        const std::size_t k = env.step_index();
        const auto step = env.step(static_cast<double>(u_tilde), alpha);
        acc.add(step.plant.x, step.accel, step.u);
        log.episode_return += step.reward;
        pending = Transition<Scalar>{s, u_tilde, static_cast<Scalar>(step.reward),
                                     env.observation().template cast<Scalar>(), Scalar(0)};
        pending_step = k;
      }
      if (pending) commit(out.agent.act(pending->s_next, act_rng));
    } catch (const DivergenceError&) {
      diverged = true;
      ++out.failed;
    }

    log.metrics = acc.finish(diverged);
    if (log.updates > 0) {
      log.critic_loss = critic_loss_sum / static_cast<double>(log.updates);
      log.actor_loss = actor_loss_sum / static_cast<double>(log.updates);
    }
    log.beta = out.agent.beta().value();
    log.lambda = out.agent.lambda().value();
    if (options.on_episode) options.on_episode(log);
    out.episodes.push_back(log);
  }
  return out;
}

template TrainOutcome<float> train<float>(const RunConfig&, const TrainOptions&);
template TrainOutcome<double> train<double>(const RunConfig&, const TrainOptions&);

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 512 << 20);
#endif
}

void write_training_csv(std::ostream& os, const std::vector<EpisodeLog>& episodes) {
  os << "episode,excitation_seed,rms_x,rms_a,peak_a,peak_x,rms_u,diverged,steps,return,updates,"
        "critic_loss,actor_loss,beta,lambda\n";
  for (const auto& e : episodes) {
    const auto& m = e.metrics;
    os << e.episode << ',' << e.excitation_seed << ',' << format_real(m.rms_x) << ',' << format_real(m.rms_a)
       << ',' << format_real(m.peak_a) << ',' << format_real(m.peak_x) << ',' << format_real(m.rms_u) << ','
       << (m.diverged ? 1 : 0) << ',' << m.steps << ',' << format_real(e.episode_return) << ',' << e.updates
       << ',' << format_real(e.critic_loss) << ',' << format_real(e.actor_loss) << ','
       << format_real(e.beta) << ',' << format_real(e.lambda) << '\n';
  }
}

}  // namespace sctl
