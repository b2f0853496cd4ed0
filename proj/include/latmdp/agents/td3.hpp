#pragma once

#include "latmdp/nets/adam.hpp"
#include "latmdp/nets/models.hpp"
#include "latmdp/rng.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace latmdp::agents {

struct TD3Config {
  double gamma = 0.99;
  double tau = 0.005;
  int policy_delay = 2;
  double sigma_explore = 0.35;  // exploration noise sigma
  double sigma_target = 0.2;    // target policy smoothing sigma
  double clip_c = 0.5;          // smoothing noise clip
  double lr_actor = 5e-4;
  double lr_critic = 5e-4;
  int batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("TD3Config: gamma in (0,1)");
    if (!(tau > 0 && tau <= 1)) throw std::invalid_argument("TD3Config: tau in (0,1]");
    if (clip_c <= 0) throw std::invalid_argument("TD3Config: clip_c > 0 required");
    if (policy_delay < 1) throw std::invalid_argument("TD3Config: policy_delay >= 1");
    if (batch_size < 1) throw std::invalid_argument("TD3Config: batch_size >= 1");
  }
};

/// One latent experience: (s_bar, a_bar, r, s_bar', done).
template <typename Scalar>
struct LatentTransition {
  Vec<Scalar> s;
  Vec<Scalar> a;
  Scalar r = 0;
  Vec<Scalar> s_next;
  bool done = false;
};

/// Twin delayed deep deterministic policy gradient on the latent spaces.
/// Decoding to the discrete action space goes through the frozen action
/// decoder (argmax of the softmax).
template <typename Scalar>
class Td3Agent {
 public:
  Td3Agent(int dim_s, int dim_a, const TD3Config& cfg,
           const nets::ActionDecoder<Scalar>* decoder)
      : cfg_(cfg),
        dim_s_(dim_s),
        dim_a_(dim_a),
        decoder_(decoder),
        actor_(dim_s, dim_a),
        actor_target_(dim_s, dim_a),
        q1_("critic1", dim_s, dim_a),
        q2_("critic2", dim_s, dim_a),
        q1_target_("critic1_target", dim_s, dim_a),
        q2_target_("critic2_target", dim_s, dim_a),
        noise_rng_(make_rng(cfg.seed, 0x7d31)),
        actor_opt_(actor_.params(), {cfg.lr_actor}),
        critic_opt_(critic_params(), {cfg.lr_critic}) {
    cfg_.validate();
    auto r0 = make_rng(cfg.seed, 0xac70);
    actor_.init(r0);
    auto r1 = make_rng(cfg.seed, 0xc111);
    q1_.init(r1);
    auto r2 = make_rng(cfg.seed, 0xc222);
    q2_.init(r2);
    nets::copy_params(actor_target_.params(), actor_.params());
    nets::copy_params(q1_target_.params(), q1_.params());
    nets::copy_params(q2_target_.params(), q2_.params());
  }

  /// a_bar = clip(pi(s) + [explore] N(0, sigma), -1, 1); a = argmax decoder.
  std::pair<Vec<Scalar>, int> act(const Vec<Scalar>& s, bool explore) {
    Vec<Scalar> abar = actor_.forward(s);
    if (explore && cfg_.sigma_explore > 0) {
      std::normal_distribution<double> noise(0.0, cfg_.sigma_explore);
      for (Eigen::Index i = 0; i < abar.size(); ++i)
        abar[i] += static_cast<Scalar>(noise(noise_rng_));
    }
    abar = abar.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
    const Vec<Scalar> probs = decoder_->forward(abar);
    return {abar, nets::decode_argmax(probs)};
  }

  /// TD targets y = r + gamma (1-done) min_i Q_i^-(s', a~) with smoothed
  /// target actions a~ = clip(pi^-(s') + clip(N(0,sigma~), -c, c), -1, 1).
  Vec<Scalar> td3_target(const std::vector<const LatentTransition<Scalar>*>& batch) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    Mat<Scalar> s_next(dim_s_, B);
    for (Eigen::Index j = 0; j < B; ++j) s_next.col(j) = batch[j]->s_next;
    Mat<Scalar> a_tilde = actor_target_.forward(s_next);
    if (cfg_.sigma_target > 0) {
      std::normal_distribution<double> noise(0.0, cfg_.sigma_target);
      const Scalar c = static_cast<Scalar>(cfg_.clip_c);
      for (Eigen::Index i = 0; i < a_tilde.size(); ++i) {
        Scalar eps = static_cast<Scalar>(noise(noise_rng_));
        a_tilde.data()[i] += std::clamp(eps, -c, c);
      }
    }
    a_tilde = a_tilde.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
    Mat<Scalar> q1 = q1_target_.forward(s_next, a_tilde);
    Mat<Scalar> q2 = q2_target_.forward(s_next, a_tilde);
    Vec<Scalar> y(B);
    for (Eigen::Index j = 0; j < B; ++j) {
      const Scalar bootstrap = batch[j]->done ? Scalar(0) : static_cast<Scalar>(cfg_.gamma);
      y[j] = batch[j]->r + bootstrap * std::min(q1(0, j), q2(0, j));
    }
    return y;
  }

  struct UpdateStats {
    double critic_loss = 0;
    double actor_objective = 0;  // mean Q1 at the actor's actions, when updated
    bool actor_updated = false;
  };

  /// One critic step; every policy_delay calls also one actor step followed
  /// by the soft target update.
  UpdateStats td3_update(const std::vector<const LatentTransition<Scalar>*>& batch) {
    const Eigen::Index B = static_cast<Eigen::Index>(batch.size());
    Mat<Scalar> s(dim_s_, B), a(dim_a_, B);
    Vec<Scalar> y = td3_target(batch);
    for (Eigen::Index j = 0; j < B; ++j) {
      s.col(j) = batch[j]->s;
      a.col(j) = batch[j]->a;
    }

    nets::MlpCache<Scalar> c1, c2;
    Mat<Scalar> q1 = q1_.forward(s, a, &c1);
    Mat<Scalar> q2 = q2_.forward(s, a, &c2);
    UpdateStats stats;
    stats.critic_loss = ((q1.row(0).transpose() - y).squaredNorm() +
                         (q2.row(0).transpose() - y).squaredNorm()) /
                        static_cast<double>(B);
    if (!std::isfinite(stats.critic_loss))
      throw std::runtime_error("td3_update: non-finite critic loss");

    const Scalar invN = Scalar(1) / static_cast<Scalar>(B);
    Mat<Scalar> dq1 = Scalar(2) * invN * (q1.row(0).transpose() - y).transpose();
    Mat<Scalar> dq2 = Scalar(2) * invN * (q2.row(0).transpose() - y).transpose();
    q1_.zero_grads();
    q2_.zero_grads();
    q1_.backward_action(dq1, c1, true);
    q2_.backward_action(dq2, c2, true);
    critic_opt_.step();

    ++update_count_;
    if (update_count_ % cfg_.policy_delay == 0) {
      nets::MlpCache<Scalar> actor_cache, critic_cache;
      Mat<Scalar> pi = actor_.forward(s, &actor_cache);
      Mat<Scalar> q = q1_.forward(s, pi, &critic_cache);
      stats.actor_objective = q.row(0).mean();
      stats.actor_updated = true;
      // Ascend mean Q1: backprop -1/N through the (fixed) critic into the
      // action input, then through the actor.
      Mat<Scalar> dq = Mat<Scalar>::Constant(1, B, -invN);
      Mat<Scalar> da = q1_.backward_action(dq, critic_cache, false);
      actor_.zero_grads();
      actor_.backward(da, actor_cache);
      actor_opt_.step();

      nets::soft_update(actor_target_.params(), actor_.params(), static_cast<Scalar>(cfg_.tau));
      nets::soft_update(q1_target_.params(), q1_.params(), static_cast<Scalar>(cfg_.tau));
      nets::soft_update(q2_target_.params(), q2_.params(), static_cast<Scalar>(cfg_.tau));
    }
    return stats;
  }

  nets::Actor<Scalar>& actor() { return actor_; }
  nets::Actor<Scalar>& actor_target() { return actor_target_; }
  nets::Critic<Scalar>& critic1() { return q1_; }
  nets::Critic<Scalar>& critic2() { return q2_; }
  nets::Critic<Scalar>& critic1_target() { return q1_target_; }
  nets::Critic<Scalar>& critic2_target() { return q2_target_; }
  const TD3Config& config() const { return cfg_; }
  std::mt19937_64& noise_rng() { return noise_rng_; }

  std::vector<nets::ParamRef<Scalar>> policy_params() {
    std::vector<nets::ParamRef<Scalar>> out;
    for (auto& p : actor_.params()) out.push_back(p);
    for (auto& p : q1_.params()) out.push_back(p);
    for (auto& p : q2_.params()) out.push_back(p);
    return out;
  }

 private:
  std::vector<nets::ParamRef<Scalar>> critic_params() {
    std::vector<nets::ParamRef<Scalar>> out;
    for (auto& p : q1_.params()) out.push_back(p);
    for (auto& p : q2_.params()) out.push_back(p);
    return out;
  }

  TD3Config cfg_;
  int dim_s_, dim_a_;
  const nets::ActionDecoder<Scalar>* decoder_;
  nets::Actor<Scalar> actor_, actor_target_;
  nets::Critic<Scalar> q1_, q2_, q1_target_, q2_target_;
  std::mt19937_64 noise_rng_;
  nets::Adam<Scalar> actor_opt_, critic_opt_;
  long update_count_ = 0;
};

}  // namespace latmdp::agents
