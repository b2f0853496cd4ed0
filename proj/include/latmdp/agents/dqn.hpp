#pragma once

#include "latmdp/nets/adam.hpp"
#include "latmdp/nets/models.hpp"
#include "latmdp/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace latmdp::agents {

struct DQNConfig {
  double epsilon_greedy = 0.25;
  double lr = 5e-4;
  double gamma = 0.99;
  int target_update_period = 1000;
  int batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(epsilon_greedy >= 0 && epsilon_greedy <= 1))
      throw std::invalid_argument("DQNConfig: epsilon in [0,1]");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("DQNConfig: gamma in (0,1)");
    if (target_update_period < 1)
      throw std::invalid_argument("DQNConfig: target_update_period >= 1");
  }
};

/// A latent-state experience with a discrete action.
template <typename Scalar>
struct DiscreteLatentTransition {
  Vec<Scalar> s;
  int a = 0;
  Scalar r = 0;
  Vec<Scalar> s_next;
  bool done = false;
};

/// Deep Q-network baseline mapping latent states directly to discrete
/// actions (epsilon-greedy, periodic hard target copy).
template <typename Scalar>
class DqnAgent {
 public:
  DqnAgent(int dim_s, int n_actions, const DQNConfig& cfg)
      : cfg_(cfg),
        dim_s_(dim_s),
        n_actions_(n_actions),
        q_("qnet", dim_s, n_actions),
        q_target_("qnet_target", dim_s, n_actions),
        rng_(make_rng(cfg.seed, 0xd47)),
        opt_(q_.params(), {cfg.lr}) {
    cfg_.validate();
    auto r = make_rng(cfg.seed, 0xd48);
    q_.init(r);
    nets::copy_params(q_target_.params(), q_.params());
  }

  int act(const Vec<Scalar>& s, bool explore) {
    if (explore && cfg_.epsilon_greedy > 0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng_) < cfg_.epsilon_greedy) {
        std::uniform_int_distribution<int> pick(0, n_actions_ - 1);
        return pick(rng_);
      }
    }
    Vec<Scalar> q = q_.forward(s);
    return nets::decode_argmax(q);
  }

  /// y = r + gamma (1-done) max_a Q^-(s', a); squared TD error.
  double dqn_update(const std::vector<const DiscreteLatentTransition<Scalar>*>& batch) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    Mat<Scalar> s(dim_s_, B), s_next(dim_s_, B);
    for (Eigen::Index j = 0; j < B; ++j) {
      s.col(j) = batch[j]->s;
      s_next.col(j) = batch[j]->s_next;
    }
    Mat<Scalar> q_next = q_target_.forward(s_next);
    nets::MlpCache<Scalar> cache;
    Mat<Scalar> q = q_.forward(s, &cache);

    Mat<Scalar> dq = Mat<Scalar>::Zero(n_actions_, B);
    double loss = 0;
    const Scalar invN = Scalar(1) / static_cast<Scalar>(B);
    for (Eigen::Index j = 0; j < B; ++j) {
      const Scalar bootstrap = batch[j]->done ? Scalar(0) : static_cast<Scalar>(cfg_.gamma);
      const Scalar y = batch[j]->r + bootstrap * q_next.col(j).maxCoeff();
      const Scalar err = q(batch[j]->a, j) - y;
      loss += static_cast<double>(err) * err;
      dq(batch[j]->a, j) = Scalar(2) * invN * err;
    }
    loss /= static_cast<double>(B);
    if (!std::isfinite(loss)) throw std::runtime_error("dqn_update: non-finite loss");

    q_.zero_grads();
    q_.backward(dq, cache);
    opt_.step();
    ++update_count_;
    if (update_count_ % cfg_.target_update_period == 0)
      nets::copy_params(q_target_.params(), q_.params());
    return loss;
  }

  nets::QNetwork<Scalar>& qnet() { return q_; }
  nets::QNetwork<Scalar>& qnet_target() { return q_target_; }
  const DQNConfig& config() const { return cfg_; }
  std::mt19937_64& rng() { return rng_; }

  std::vector<nets::ParamRef<Scalar>> policy_params() { return q_.params(); }

 private:
  DQNConfig cfg_;
  int dim_s_, n_actions_;
  nets::QNetwork<Scalar> q_, q_target_;
  std::mt19937_64 rng_;
  nets::Adam<Scalar> opt_;
  long update_count_ = 0;
};

}  // namespace latmdp::agents
