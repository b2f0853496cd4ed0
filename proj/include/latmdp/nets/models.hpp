#pragma once

#include "latmdp/nets/layers.hpp"
#include "latmdp/rng.hpp"
#include "latmdp/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::nets {

/// Dimension/wiring contract shared by the five representation models.
struct BundleDims {
  int image_h = 50;
  int image_w = 50;
  int n_actions = 4;   // K
  int dim_s = 10;      // latent state dimension
  int dim_a = 5;       // latent action dimension
  bool use_psi = true;          // false: transition/reward consume raw one-hot
  bool psi_state_free = false;  // action encoder ignores the latent state
  int conv1_filters = 32;
  int conv2_filters = 64;

  int action_input_dim() const { return use_psi ? dim_a : n_actions; }
};

template <typename Scalar>
struct EncoderCache {
  Mat<Scalar> input;
  Mat<Scalar> conv1_out;  // post-ReLU
  Mat<Scalar> conv2_out;  // post-ReLU
  MlpCache<Scalar> head;
};

/// Observation encoder: conv 3x3/32 -> conv 5x5/64 (stride 2, zero padding,
/// ReLU) -> FC 64 -> FC 32 -> linear latent state.
template <typename Scalar>
class ObservationEncoder {
 public:
  ObservationEncoder(const BundleDims& d)
      : conv1_("encoder.conv1", 3, d.image_h, d.image_w, d.conv1_filters, 3, 2, 1),
        conv2_("encoder.conv2", d.conv1_filters, (d.image_h + 2 * 1 - 3) / 2 + 1,
               (d.image_w + 2 * 1 - 3) / 2 + 1, d.conv2_filters, 5, 2, 2),
        head_("encoder.head", {conv2_.out_dim(), 64, 32, d.dim_s},
              {Activation::ReLU, Activation::ReLU, Activation::Linear}) {}

  void init(std::mt19937_64& rng) {
    conv1_.init(rng);
    conv2_.init(rng);
    head_.init(rng);
  }

  Mat<Scalar> forward(const Mat<Scalar>& obs, EncoderCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> a1 = apply_activation(Activation::ReLU, conv1_.forward(obs));
    Mat<Scalar> a2 = apply_activation(Activation::ReLU, conv2_.forward(a1));
    if (cache) {
      cache->input = obs;
      cache->conv1_out = a1;
      cache->conv2_out = a2;
      return head_.forward(a2, &cache->head);
    }
    return head_.forward(a2);
  }

  void backward(const Mat<Scalar>& dlatent, const EncoderCache<Scalar>& cache) {
    Mat<Scalar> d = head_.backward(dlatent, cache.head);
    d = activation_backward(Activation::ReLU, cache.conv2_out, d);
    d = conv2_.backward(d, cache.conv1_out);
    d = activation_backward(Activation::ReLU, cache.conv1_out, d);
    conv1_.backward(d, cache.input);  // input gradient discarded
  }

  void zero_grads() {
    conv1_.zero_grads();
    conv2_.zero_grads();
    head_.zero_grads();
  }

  std::vector<ParamRef<Scalar>> params() {
    std::vector<ParamRef<Scalar>> out;
    for (auto& p : conv1_.params()) out.push_back(p);
    for (auto& p : conv2_.params()) out.push_back(p);
    for (auto& p : head_.params()) out.push_back(p);
    return out;
  }

  int out_dim() const { return head_.out_dim(); }

 private:
  Conv2d<Scalar> conv1_, conv2_;
  Mlp<Scalar> head_;
};

/// Action encoder psi_e(s_bar, a): FC 64 -> FC 32 -> tanh latent action. The
/// state-free variant zeroes the latent-state slice of the input so the
/// embedding depends on the action alone.
template <typename Scalar>
class ActionEncoder {
 public:
  ActionEncoder(const BundleDims& d)
      : dim_s_(d.dim_s),
        state_free_(d.psi_state_free),
        net_("action_encoder", {d.dim_s + d.n_actions, 64, 32, d.dim_a},
             {Activation::ReLU, Activation::ReLU, Activation::Tanh}) {}

  void init(std::mt19937_64& rng) { net_.init(rng); }

  Mat<Scalar> forward(const Mat<Scalar>& s, const Mat<Scalar>& a_onehot,
                      MlpCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> x(s.rows() + a_onehot.rows(), s.cols());
    x.topRows(s.rows()) = state_free_ ? Mat<Scalar>::Zero(s.rows(), s.cols()).eval() : s;
    x.bottomRows(a_onehot.rows()) = a_onehot;
    return net_.forward(x, cache);
  }

  /// Returns the gradient w.r.t. the latent-state input (zero when
  /// state-free); the one-hot slice has no consumer.
  Mat<Scalar> backward(const Mat<Scalar>& dout, const MlpCache<Scalar>& cache) {
    Mat<Scalar> dx = net_.backward(dout, cache);
    if (state_free_) return Mat<Scalar>::Zero(dim_s_, dx.cols());
    return dx.topRows(dim_s_);
  }

  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }
  bool state_free() const { return state_free_; }

 private:
  int dim_s_;
  bool state_free_;
  Mlp<Scalar> net_;
};

template <typename Scalar>
class ActionDecoder {
 public:
  ActionDecoder(const BundleDims& d)
      : net_("action_decoder", {d.dim_a, 64, 32, d.n_actions},
             {Activation::ReLU, Activation::ReLU, Activation::Softmax}) {}

  void init(std::mt19937_64& rng) { net_.init(rng); }
  Mat<Scalar> forward(const Mat<Scalar>& abar, MlpCache<Scalar>* cache = nullptr) const {
    return net_.forward(abar, cache);
  }
  Mat<Scalar> backward(const Mat<Scalar>& dprobs, const MlpCache<Scalar>& cache) {
    return net_.backward(dprobs, cache);
  }
  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }

 private:
  Mlp<Scalar> net_;
};

/// Greedy decoding rule used at the environment boundary; ties break to the
/// lowest action index.
template <typename Scalar>
int decode_argmax(const Vec<Scalar>& probs) {
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

/// Latent dynamics head; the full transition model is the residual form
/// T(s, a) = s + delta(s, a).
template <typename Scalar>
class TransitionDelta {
 public:
  TransitionDelta(const BundleDims& d)
      : dim_s_(d.dim_s),
        net_("transition", {d.dim_s + d.action_input_dim(), 64, 32, d.dim_s},
             {Activation::ReLU, Activation::ReLU, Activation::Linear}) {}

  void init(std::mt19937_64& rng) { net_.init(rng); }

  Mat<Scalar> forward(const Mat<Scalar>& s, const Mat<Scalar>& a,
                      MlpCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> x(s.rows() + a.rows(), s.cols());
    x.topRows(s.rows()) = s;
    x.bottomRows(a.rows()) = a;
    return net_.forward(x, cache);
  }

  /// Gradients w.r.t. (s, a) inputs of the delta alone; the residual
  /// identity contribution is added by the caller.
  std::pair<Mat<Scalar>, Mat<Scalar>> backward(const Mat<Scalar>& ddelta,
                                               const MlpCache<Scalar>& cache) {
    Mat<Scalar> dx = net_.backward(ddelta, cache);
    return {dx.topRows(dim_s_), dx.bottomRows(dx.rows() - dim_s_)};
  }

  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }
  Mlp<Scalar>& net() { return net_; }

 private:
  int dim_s_;
  Mlp<Scalar> net_;
};

template <typename Scalar>
class RewardModel {
 public:
  RewardModel(const BundleDims& d)
      : dim_s_(d.dim_s),
        net_("reward", {d.dim_s + d.action_input_dim(), 64, 32, 1},
             {Activation::ReLU, Activation::ReLU, Activation::Linear}) {}

  void init(std::mt19937_64& rng) { net_.init(rng); }

  Mat<Scalar> forward(const Mat<Scalar>& s, const Mat<Scalar>& a,
                      MlpCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> x(s.rows() + a.rows(), s.cols());
    x.topRows(s.rows()) = s;
    x.bottomRows(a.rows()) = a;
    return net_.forward(x, cache);
  }

  std::pair<Mat<Scalar>, Mat<Scalar>> backward(const Mat<Scalar>& dout,
                                               const MlpCache<Scalar>& cache) {
    Mat<Scalar> dx = net_.backward(dout, cache);
    return {dx.topRows(dim_s_), dx.bottomRows(dx.rows() - dim_s_)};
  }

  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }
  Mlp<Scalar>& net() { return net_; }

 private:
  int dim_s_;
  Mlp<Scalar> net_;
};

/// The learned homomorphism: phi_e, psi_e, delta_d, T_bar, R_bar.
template <typename Scalar>
struct ModelBundle {
  BundleDims dims;
  ObservationEncoder<Scalar> encoder;
  ActionEncoder<Scalar> action_encoder;
  ActionDecoder<Scalar> action_decoder;
  TransitionDelta<Scalar> transition;
  RewardModel<Scalar> reward;
  std::uint64_t init_seed = 0;

  explicit ModelBundle(const BundleDims& d)
      : dims(d),
        encoder(d),
        action_encoder(d),
        action_decoder(d),
        transition(d),
        reward(d) {}

  void init(std::uint64_t seed) {
    init_seed = seed;
    auto r0 = make_rng(seed, 1);
    encoder.init(r0);
    auto r1 = make_rng(seed, 2);
    action_encoder.init(r1);
    auto r2 = make_rng(seed, 3);
    action_decoder.init(r2);
    auto r3 = make_rng(seed, 4);
    transition.init(r3);
    auto r4 = make_rng(seed, 5);
    reward.init(r4);
  }

  void zero_grads() {
    encoder.zero_grads();
    action_encoder.zero_grads();
    action_decoder.zero_grads();
    transition.zero_grads();
    reward.zero_grads();
  }

  std::vector<ParamRef<Scalar>> params() {
    std::vector<ParamRef<Scalar>> out;
    for (auto& p : encoder.params()) out.push_back(p);
    for (auto& p : action_encoder.params()) out.push_back(p);
    for (auto& p : action_decoder.params()) out.push_back(p);
    for (auto& p : transition.params()) out.push_back(p);
    for (auto& p : reward.params()) out.push_back(p);
    return out;
  }

  /// Parameters receiving gradients under the bundle's wiring (psi/decoder
  /// excluded when the baseline bypasses them).
  std::vector<ParamRef<Scalar>> trainable_params(bool train_decoder) {
    std::vector<ParamRef<Scalar>> out;
    for (auto& p : encoder.params()) out.push_back(p);
    if (dims.use_psi)
      for (auto& p : action_encoder.params()) out.push_back(p);
    if (train_decoder)
      for (auto& p : action_decoder.params()) out.push_back(p);
    for (auto& p : transition.params()) out.push_back(p);
    for (auto& p : reward.params()) out.push_back(p);
    return out;
  }

  Vec<Scalar> encode(const Observation& o) const {
    return encoder.forward(observation_to_column<Scalar>(o));
  }

  /// T_bar(s, a) = s + delta(s, a).
  Mat<Scalar> transition_forward(const Mat<Scalar>& s, const Mat<Scalar>& a) const {
    return s + transition.forward(s, a);
  }
};

template <typename Scalar>
class Actor {
 public:
  Actor(int dim_s, int dim_a, int hidden = 256)
      : net_("actor", {dim_s, hidden, hidden, dim_a},
             {Activation::ReLU, Activation::ReLU, Activation::Tanh}) {}
  void init(std::mt19937_64& rng) { net_.init(rng); }
  Mat<Scalar> forward(const Mat<Scalar>& s, MlpCache<Scalar>* cache = nullptr) const {
    return net_.forward(s, cache);
  }
  Mat<Scalar> backward(const Mat<Scalar>& da, const MlpCache<Scalar>& cache) {
    return net_.backward(da, cache);
  }
  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }

 private:
  Mlp<Scalar> net_;
};

template <typename Scalar>
class Critic {
 public:
  Critic(const std::string& name, int dim_s, int dim_a, int hidden = 256)
      : dim_s_(dim_s),
        net_(name, {dim_s + dim_a, hidden, hidden, 1},
             {Activation::ReLU, Activation::ReLU, Activation::Linear}) {}
  void init(std::mt19937_64& rng) { net_.init(rng); }

  Mat<Scalar> forward(const Mat<Scalar>& s, const Mat<Scalar>& a,
                      MlpCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> x(s.rows() + a.rows(), s.cols());
    x.topRows(s.rows()) = s;
    x.bottomRows(a.rows()) = a;
    return net_.forward(x, cache);
  }

  /// Backward returning the gradient w.r.t. the action slice; param grads
  /// optional so the actor update can differentiate through a fixed critic.
  Mat<Scalar> backward_action(const Mat<Scalar>& dq, const MlpCache<Scalar>& cache,
                              bool accumulate_param_grads) {
    Mat<Scalar> dx = net_.backward(dq, cache, accumulate_param_grads);
    return dx.bottomRows(dx.rows() - dim_s_);
  }

  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }

 private:
  int dim_s_;
  Mlp<Scalar> net_;
};

template <typename Scalar>
class QNetwork {
 public:
  QNetwork(const std::string& name, int dim_s, int n_actions, int hidden = 256)
      : net_(name, {dim_s, hidden, hidden, n_actions},
             {Activation::ReLU, Activation::ReLU, Activation::Linear}) {}
  void init(std::mt19937_64& rng) { net_.init(rng); }
  Mat<Scalar> forward(const Mat<Scalar>& s, MlpCache<Scalar>* cache = nullptr) const {
    return net_.forward(s, cache);
  }
  Mat<Scalar> backward(const Mat<Scalar>& dq, const MlpCache<Scalar>& cache) {
    return net_.backward(dq, cache);
  }
  void zero_grads() { net_.zero_grads(); }
  std::vector<ParamRef<Scalar>> params() { return net_.params(); }

 private:
  Mlp<Scalar> net_;
};

/// Elementwise soft update theta_target <- tau*theta + (1-tau)*theta_target.
template <typename Scalar>
void soft_update(std::vector<ParamRef<Scalar>> target, std::vector<ParamRef<Scalar>> online,
                 Scalar tau) {
  if (target.size() != online.size())
    throw std::invalid_argument("soft_update: parameter lists differ");
  for (std::size_t i = 0; i < target.size(); ++i)
    *target[i].value = tau * (*online[i].value) + (Scalar(1) - tau) * (*target[i].value);
}

template <typename Scalar>
void copy_params(std::vector<ParamRef<Scalar>> dst, std::vector<ParamRef<Scalar>> src) {
  if (dst.size() != src.size()) throw std::invalid_argument("copy_params: lists differ");
  for (std::size_t i = 0; i < dst.size(); ++i) *dst[i].value = *src[i].value;
}

}  // namespace latmdp::nets
