#pragma once

#include "latmdp/agents/dqn.hpp"
#include "latmdp/agents/td3.hpp"
#include "latmdp/envs/env.hpp"
#include "latmdp/replay.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace latmdp::agents {

enum class AgentKind { TD3, DQN };

inline AgentKind agent_kind_from_string(const std::string& s) {
  if (s == "td3" || s == "TD3") return AgentKind::TD3;
  if (s == "dqn" || s == "DQN") return AgentKind::DQN;
  throw std::invalid_argument("unknown agent: " + s);
}

struct RunBudget {
  long total_steps = 30000;
  long max_episodes = 0;         // 0: step budget only
  int warmup_steps = 1000;       // uniform-random actions, no updates
  std::size_t replay_capacity = 100000;
  std::uint64_t run_seed = 0;
  bool encoder_memoization = true;
};

struct EpisodeRecord {
  int episode = 0;
  int steps = 0;
  double ret = 0;
  bool success = false;     // episode ended by reaching the goal
  long cum_env_steps = 0;   // environment steps consumed up to episode end
};

/// Frozen-encoder observation -> latent cache. The encoder is pure, so a
/// bitwise pixel key returns the exact same latent; bounded size keeps
/// distractor-rich runs (many distinct frames) in check.
template <typename Scalar>
class EncoderMemo {
 public:
  EncoderMemo(const nets::ModelBundle<Scalar>& bundle, bool enabled, std::size_t max_entries = 4096)
      : bundle_(bundle), enabled_(enabled), max_entries_(max_entries) {}

  Vec<Scalar> encode(const Observation& o) {
    if (!enabled_) return bundle_.encode(o);
    std::string key(reinterpret_cast<const char*>(o.pixels.data()), o.pixels.size());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Vec<Scalar> latent = bundle_.encode(o);
    if (cache_.size() < max_entries_) cache_.emplace(std::move(key), latent);
    return latent;
  }

 private:
  const nets::ModelBundle<Scalar>& bundle_;
  bool enabled_;
  std::size_t max_entries_;
  std::unordered_map<std::string, Vec<Scalar>> cache_;
};

template <typename Scalar>
struct Td3TrainOutput {
  std::vector<EpisodeRecord> episodes;
  Td3Agent<Scalar> agent;
};

/// Latent TD3 training against a frozen representation: encode, act, step,
/// store (s_bar, a_bar, r, s_bar', done), update. Timeout terminations are
/// stored with done=false so bootstrapping continues across the time limit.
template <typename Scalar>
Td3TrainOutput<Scalar> train_policy_td3(envs::Env& env, const nets::ModelBundle<Scalar>& bundle,
                                        TD3Config cfg, const RunBudget& budget) {
  cfg.seed = substream(budget.run_seed, 0xa6e1);
  Td3TrainOutput<Scalar> out{
      {}, Td3Agent<Scalar>(bundle.dims.dim_s, bundle.dims.dim_a, cfg, &bundle.action_decoder)};
  Td3Agent<Scalar>& agent = out.agent;
  ReplayBuffer<LatentTransition<Scalar>> replay(budget.replay_capacity,
                                                substream(budget.run_seed, 0xa6e2));
  env.reseed_episodes(substream(budget.run_seed, 0xa6e3));
  auto warmup_rng = make_rng(budget.run_seed, 0xa6e4);
  std::uniform_real_distribution<double> uniform_action(-1.0, 1.0);
  EncoderMemo<Scalar> memo(bundle, budget.encoder_memoization);

  Observation obs = env.reset();
  Vec<Scalar> s = memo.encode(obs);
  EpisodeRecord ep;
  for (long t = 0; t < budget.total_steps; ++t) {
    Vec<Scalar> abar;
    int a = 0;
    if (t < budget.warmup_steps) {
      abar.resize(bundle.dims.dim_a);
      for (Eigen::Index i = 0; i < abar.size(); ++i)
        abar[i] = static_cast<Scalar>(uniform_action(warmup_rng));
      a = nets::decode_argmax<Scalar>(bundle.action_decoder.forward(abar));
    } else {
      std::tie(abar, a) = agent.act(s, true);
    }
    envs::StepResult res = env.step({a, env.n_actions()});
    Vec<Scalar> s_next = memo.encode(res.obs);
    const bool bootstrap_done =
        res.event == envs::StepEvent::Goal || res.event == envs::StepEvent::Crash;
    replay.push({s, abar, static_cast<Scalar>(res.reward), s_next, bootstrap_done});

    ep.steps += 1;
    ep.ret += res.reward;
    if (t >= budget.warmup_steps &&
        replay.size() >= static_cast<std::size_t>(cfg.batch_size))
      agent.td3_update(replay.sample_batch(cfg.batch_size));

    if (res.done) {
      ep.success = res.event == envs::StepEvent::Goal;
      ep.cum_env_steps = t + 1;
      out.episodes.push_back(ep);
      if (budget.max_episodes > 0 &&
          static_cast<long>(out.episodes.size()) >= budget.max_episodes)
        break;
      ep = EpisodeRecord{ep.episode + 1};
      obs = env.reset();
      s = memo.encode(obs);
    } else {
      s = s_next;
    }
  }
  return out;
}

template <typename Scalar>
struct DqnTrainOutput {
  std::vector<EpisodeRecord> episodes;
  DqnAgent<Scalar> agent;
};

template <typename Scalar>
DqnTrainOutput<Scalar> train_policy_dqn(envs::Env& env, const nets::ModelBundle<Scalar>& bundle,
                                        DQNConfig cfg, const RunBudget& budget) {
  cfg.seed = substream(budget.run_seed, 0xd6e1);
  DqnTrainOutput<Scalar> out{{}, DqnAgent<Scalar>(bundle.dims.dim_s, env.n_actions(), cfg)};
  DqnAgent<Scalar>& agent = out.agent;
  ReplayBuffer<DiscreteLatentTransition<Scalar>> replay(budget.replay_capacity,
                                                        substream(budget.run_seed, 0xd6e2));
  env.reseed_episodes(substream(budget.run_seed, 0xd6e3));
  auto warmup_rng = make_rng(budget.run_seed, 0xd6e4);
  std::uniform_int_distribution<int> uniform_action(0, env.n_actions() - 1);
  EncoderMemo<Scalar> memo(bundle, budget.encoder_memoization);

  Observation obs = env.reset();
  Vec<Scalar> s = memo.encode(obs);
  EpisodeRecord ep;
  for (long t = 0; t < budget.total_steps; ++t) {
    const int a = t < budget.warmup_steps ? uniform_action(warmup_rng) : agent.act(s, true);
    envs::StepResult res = env.step({a, env.n_actions()});
    Vec<Scalar> s_next = memo.encode(res.obs);
    const bool bootstrap_done =
        res.event == envs::StepEvent::Goal || res.event == envs::StepEvent::Crash;
    replay.push({s, a, static_cast<Scalar>(res.reward), s_next, bootstrap_done});

    ep.steps += 1;
    ep.ret += res.reward;
    if (t >= budget.warmup_steps &&
        replay.size() >= static_cast<std::size_t>(cfg.batch_size))
      agent.dqn_update(replay.sample_batch(cfg.batch_size));

    if (res.done) {
      ep.success = res.event == envs::StepEvent::Goal;
      ep.cum_env_steps = t + 1;
      out.episodes.push_back(ep);
      if (budget.max_episodes > 0 &&
          static_cast<long>(out.episodes.size()) >= budget.max_episodes)
        break;
      ep = EpisodeRecord{ep.episode + 1};
      obs = env.reset();
      s = memo.encode(obs);
    } else {
      s = s_next;
    }
  }
  return out;
}

/// Greedy (no-noise) evaluation episodes with a trained TD3 actor.
template <typename Scalar>
std::vector<EpisodeRecord> evaluate_policy_td3(envs::Env& env,
                                               const nets::ModelBundle<Scalar>& bundle,
                                               Td3Agent<Scalar>& agent, int episodes,
                                               std::uint64_t seed) {
  env.reseed_episodes(substream(seed, 0xe7a1));
  EncoderMemo<Scalar> memo(bundle, true);
  std::vector<EpisodeRecord> out;
  long cum = 0;
  for (int e = 0; e < episodes; ++e) {
    Observation obs = env.reset();
    EpisodeRecord ep{e};
    while (true) {
      auto [abar, a] = agent.act(memo.encode(obs), false);
      envs::StepResult res = env.step({a, env.n_actions()});
      ep.steps += 1;
      ep.ret += res.reward;
      ++cum;
      obs = res.obs;
      if (res.done) {
        ep.success = res.event == envs::StepEvent::Goal;
        ep.cum_env_steps = cum;
        break;
      }
    }
    out.push_back(ep);
  }
  return out;
}

}  // namespace latmdp::agents
