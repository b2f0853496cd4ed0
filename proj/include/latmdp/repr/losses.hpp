#pragma once

#include "latmdp/nets/models.hpp"
#include "latmdp/replay.hpp"
#include "latmdp/types.hpp"

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

namespace latmdp::repr {

/// Weights of the four loss terms plus the contrastive hinge parameter.
struct LossWeights {
  double w_T = 1.0;
  double w_R = 1.0;
  double w_c = 1.0;
  double w_delta = 1.0;
  double hinge_eps = 1.0;

  void validate() const {
    if (w_T < 0 || w_R < 0 || w_c < 0 || w_delta < 0)
      throw std::invalid_argument("LossWeights: weights must be non-negative");
    if (hinge_eps <= 0) throw std::invalid_argument("LossWeights: hinge_eps must be positive");
  }
};

constexpr double kLogClamp = 1e-12;  // softmax log guard

// ---------------------------------------------------------------------------
// Pure loss kernels on latent matrices (columns are samples). Each *_grad
// variant writes gradients w.r.t. its tensor arguments; a zero-norm guard
// assigns the zero subgradient.
// ---------------------------------------------------------------------------

/// Mean over columns of ||target - pred||_2.
template <typename Scalar>
Scalar transition_loss_value(const Mat<Scalar>& target, const Mat<Scalar>& pred) {
  return (target - pred).colwise().norm().mean();
}

template <typename Scalar>
void transition_loss_grad(const Mat<Scalar>& target, const Mat<Scalar>& pred,
                          Mat<Scalar>& dtarget, Mat<Scalar>& dpred) {
  const Scalar invN = Scalar(1) / static_cast<Scalar>(target.cols());
  dtarget.setZero(target.rows(), target.cols());
  dpred.setZero(target.rows(), target.cols());
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    Vec<Scalar> diff = target.col(j) - pred.col(j);
    const Scalar nrm = diff.norm();
    if (nrm <= Scalar(0)) continue;
    dtarget.col(j) = invN * diff / nrm;
    dpred.col(j) = -invN * diff / nrm;
  }
}

/// Mean over samples of |r - r_hat| (the 2-norm of a scalar residual).
template <typename Scalar>
Scalar reward_loss_value(const Vec<Scalar>& r, const Mat<Scalar>& r_hat) {
  return (r.transpose() - r_hat.row(0)).array().abs().mean();
}

template <typename Scalar>
void reward_loss_grad(const Vec<Scalar>& r, const Mat<Scalar>& r_hat, Mat<Scalar>& dr_hat) {
  const Scalar invN = Scalar(1) / static_cast<Scalar>(r.size());
  dr_hat.setZero(1, r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    const Scalar diff = r_hat(0, j) - r[j];
    if (diff > Scalar(0))
      dr_hat(0, j) = invN;
    else if (diff < Scalar(0))
      dr_hat(0, j) = -invN;
  }
}

/// Mean over columns of max(0, eps - ||neg - pred||_2).
template <typename Scalar>
Scalar contrastive_loss_value(const Mat<Scalar>& neg, const Mat<Scalar>& pred, Scalar eps) {
  Scalar total = 0;
  for (Eigen::Index j = 0; j < neg.cols(); ++j)
    total += std::max(Scalar(0), eps - (neg.col(j) - pred.col(j)).norm());
  return total / static_cast<Scalar>(neg.cols());
}

template <typename Scalar>
void contrastive_loss_grad(const Mat<Scalar>& neg, const Mat<Scalar>& pred, Scalar eps,
                           Mat<Scalar>& dneg, Mat<Scalar>& dpred) {
  const Scalar invN = Scalar(1) / static_cast<Scalar>(neg.cols());
  dneg.setZero(neg.rows(), neg.cols());
  dpred.setZero(neg.rows(), neg.cols());
  for (Eigen::Index j = 0; j < neg.cols(); ++j) {
    Vec<Scalar> diff = neg.col(j) - pred.col(j);
    const Scalar nrm = diff.norm();
    if (nrm <= Scalar(0) || eps - nrm <= Scalar(0)) continue;  // hinge inactive / flat point
    dneg.col(j) = -invN * diff / nrm;
    dpred.col(j) = invN * diff / nrm;
  }
}

/// Mean cross-entropy between one-hot actions and predicted distributions,
/// with the log clamped at kLogClamp.
template <typename Scalar>
Scalar decoder_loss_value(const Mat<Scalar>& probs, const std::vector<int>& actions) {
  Scalar total = 0;
  for (std::size_t j = 0; j < actions.size(); ++j)
    total += -std::log(std::max(probs(actions[j], static_cast<Eigen::Index>(j)),
                                static_cast<Scalar>(kLogClamp)));
  return total / static_cast<Scalar>(actions.size());
}

template <typename Scalar>
void decoder_loss_grad(const Mat<Scalar>& probs, const std::vector<int>& actions,
                       Mat<Scalar>& dprobs) {
  const Scalar invN = Scalar(1) / static_cast<Scalar>(actions.size());
  dprobs.setZero(probs.rows(), probs.cols());
  for (std::size_t j = 0; j < actions.size(); ++j) {
    const Scalar p = probs(actions[j], static_cast<Eigen::Index>(j));
    if (p > static_cast<Scalar>(kLogClamp))
      dprobs(actions[j], static_cast<Eigen::Index>(j)) = -invN / p;
  }
}

// ---------------------------------------------------------------------------
// Composite objective on a model bundle.
// ---------------------------------------------------------------------------

struct LossValues {
  double L_T = 0, L_R = 0, L_c = 0, L_delta = 0, total = 0;
};

/// A minibatch prepared for the composite objective. Observation columns are
/// deduplicated (bitwise) so the encoder runs once per distinct image; the
/// index vectors map batch slots back into the unique set. Deduplication is
/// exact: losses are means over batch columns and gathering/scattering
/// columns commutes with the encoder.
template <typename Scalar>
struct ReprBatch {
  Mat<Scalar> unique_obs;  // (3*H*W) x U
  std::vector<int> idx_o, idx_next, idx_neg;
  Mat<Scalar> onehot;  // K x B
  std::vector<int> actions;
  Vec<Scalar> rewards;
  bool has_negatives = false;
};

template <typename Scalar>
ReprBatch<Scalar> build_repr_batch(const std::vector<const Transition*>& batch,
                                   const std::vector<const Observation*>& negatives,
                                   int n_actions, bool dedupe) {
  ReprBatch<Scalar> rb;
  const std::size_t B = batch.size();
  rb.has_negatives = !negatives.empty();
  if (rb.has_negatives && negatives.size() != B)
    throw std::invalid_argument("build_repr_batch: one negative per batch element required");

  std::unordered_map<std::string, int> seen;
  std::vector<const Observation*> unique;
  auto intern = [&](const Observation& o) {
    if (!dedupe) {
      unique.push_back(&o);
      return static_cast<int>(unique.size()) - 1;
    }
    std::string key(reinterpret_cast<const char*>(o.pixels.data()), o.pixels.size());
    auto [it, inserted] = seen.emplace(std::move(key), static_cast<int>(unique.size()));
    if (inserted) unique.push_back(&o);
    return it->second;
  };

  rb.idx_o.reserve(B);
  rb.idx_next.reserve(B);
  rb.onehot = Mat<Scalar>::Zero(n_actions, B);
  rb.rewards.resize(B);
  rb.actions.reserve(B);
  for (std::size_t j = 0; j < B; ++j) {
    const Transition& t = *batch[j];
    rb.idx_o.push_back(intern(t.o));
    rb.idx_next.push_back(intern(t.o_next));
    if (rb.has_negatives) rb.idx_neg.push_back(intern(*negatives[j]));
    rb.onehot(t.a.index, static_cast<Eigen::Index>(j)) = Scalar(1);
    rb.actions.push_back(t.a.index);
    rb.rewards[j] = static_cast<Scalar>(t.r);
  }

  rb.unique_obs.resize(unique.front()->pixels.size(), static_cast<Eigen::Index>(unique.size()));
  for (std::size_t u = 0; u < unique.size(); ++u)
    rb.unique_obs.col(static_cast<Eigen::Index>(u)) = observation_to_column<Scalar>(*unique[u]);
  return rb;
}

struct ReprOptions {
  bool stop_target_gradient = false;  // block the phi_e(o') branch
};

namespace detail {

template <typename Scalar>
Mat<Scalar> gather(const Mat<Scalar>& src, const std::vector<int>& idx) {
  Mat<Scalar> out(src.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(j) = src.col(idx[j]);
  return out;
}

template <typename Scalar>
void scatter_add(Mat<Scalar>& dst, const Mat<Scalar>& grads, const std::vector<int>& idx) {
  for (std::size_t j = 0; j < idx.size(); ++j) dst.col(idx[j]) += grads.col(j);
}

}  // namespace detail

/// Evaluates the weighted objective on one batch; when compute_grads is set,
/// accumulates parameter gradients with exactly the flow the total loss
/// prescribes (the decoder only sees the cross-entropy term; the action
/// encoder sees all four).
template <typename Scalar>
LossValues repr_forward_backward(nets::ModelBundle<Scalar>& bundle, const ReprBatch<Scalar>& rb,
                                 const LossWeights& w, const ReprOptions& opts,
                                 bool compute_grads) {
  using nets::MlpCache;
  const bool use_psi = bundle.dims.use_psi;
  const bool want_T = w.w_T > 0;
  const bool want_R = w.w_R > 0;
  const bool want_c = w.w_c > 0 && rb.has_negatives;
  const bool want_delta = w.w_delta > 0 && use_psi;
  const Eigen::Index B = rb.onehot.cols();

  nets::EncoderCache<Scalar> enc_cache;
  Mat<Scalar> E = bundle.encoder.forward(rb.unique_obs, compute_grads ? &enc_cache : nullptr);
  Mat<Scalar> S = detail::gather(E, rb.idx_o);
  Mat<Scalar> S_next = detail::gather(E, rb.idx_next);
  Mat<Scalar> S_neg;
  if (want_c) S_neg = detail::gather(E, rb.idx_neg);

  MlpCache<Scalar> psi_cache, trans_cache, rew_cache, dec_cache;
  Mat<Scalar> abar;
  if (use_psi)
    abar = bundle.action_encoder.forward(S, rb.onehot, compute_grads ? &psi_cache : nullptr);
  else
    abar = rb.onehot;

  Mat<Scalar> delta =
      bundle.transition.forward(S, abar, compute_grads ? &trans_cache : nullptr);
  Mat<Scalar> pred = S + delta;
  Mat<Scalar> r_hat;
  if (want_R) r_hat = bundle.reward.forward(S, abar, compute_grads ? &rew_cache : nullptr);
  Mat<Scalar> probs;
  if (want_delta)
    probs = bundle.action_decoder.forward(abar, compute_grads ? &dec_cache : nullptr);

  LossValues out;
  if (want_T) out.L_T = transition_loss_value(S_next, pred);
  if (want_R) out.L_R = reward_loss_value(rb.rewards, r_hat);
  if (want_c) out.L_c = contrastive_loss_value(S_neg, pred, static_cast<Scalar>(w.hinge_eps));
  if (want_delta) out.L_delta = decoder_loss_value(probs, rb.actions);
  out.total = w.w_T * out.L_T + w.w_R * out.L_R + w.w_c * out.L_c + w.w_delta * out.L_delta;
  if (!compute_grads) return out;

  Mat<Scalar> dpred = Mat<Scalar>::Zero(pred.rows(), B);
  Mat<Scalar> dS_next = Mat<Scalar>::Zero(pred.rows(), B);
  Mat<Scalar> dS_neg;
  if (want_T) {
    Mat<Scalar> dt, dp;
    transition_loss_grad(S_next, pred, dt, dp);
    dS_next += static_cast<Scalar>(w.w_T) * dt;
    dpred += static_cast<Scalar>(w.w_T) * dp;
  }
  if (want_c) {
    Mat<Scalar> dn, dp;
    contrastive_loss_grad(S_neg, pred, static_cast<Scalar>(w.hinge_eps), dn, dp);
    dS_neg = static_cast<Scalar>(w.w_c) * dn;
    dpred += static_cast<Scalar>(w.w_c) * dp;
  }

  Mat<Scalar> dS = dpred;  // residual identity branch of T(s,a) = s + delta
  Mat<Scalar> dabar = Mat<Scalar>::Zero(abar.rows(), B);
  {
    auto [ds_t, da_t] = bundle.transition.backward(dpred, trans_cache);
    dS += ds_t;
    dabar += da_t;
  }
  if (want_R) {
    Mat<Scalar> dr_hat;
    reward_loss_grad(rb.rewards, r_hat, dr_hat);
    dr_hat *= static_cast<Scalar>(w.w_R);
    auto [ds_r, da_r] = bundle.reward.backward(dr_hat, rew_cache);
    dS += ds_r;
    dabar += da_r;
  }
  if (want_delta) {
    Mat<Scalar> dprobs;
    decoder_loss_grad(probs, rb.actions, dprobs);
    dprobs *= static_cast<Scalar>(w.w_delta);
    dabar += bundle.action_decoder.backward(dprobs, dec_cache);
  }
  if (use_psi) dS += bundle.action_encoder.backward(dabar, psi_cache);

  Mat<Scalar> dE = Mat<Scalar>::Zero(E.rows(), E.cols());
  detail::scatter_add(dE, dS, rb.idx_o);
  if (!opts.stop_target_gradient) detail::scatter_add(dE, dS_next, rb.idx_next);
  if (want_c) detail::scatter_add(dE, dS_neg, rb.idx_neg);
  bundle.encoder.backward(dE, enc_cache);
  return out;
}

}  // namespace latmdp::repr
