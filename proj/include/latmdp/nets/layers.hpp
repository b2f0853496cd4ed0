#pragma once

#include "latmdp/types.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp::nets {

/// Named view of one trainable tensor; optimizers and checkpoints iterate
/// these in a fixed order.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Mat<Scalar>* value;
  Mat<Scalar>* grad;
};

enum class Activation { Linear, ReLU, Tanh, Softmax };

template <typename Scalar>
Mat<Scalar> apply_activation(Activation act, const Mat<Scalar>& z) {
  switch (act) {
    case Activation::Linear:
      return z;
    case Activation::ReLU:
      return z.cwiseMax(Scalar(0));
    case Activation::Tanh:
      return z.array().tanh().matrix();
    case Activation::Softmax: {
      Mat<Scalar> y(z.rows(), z.cols());
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        Vec<Scalar> e = (z.col(c).array() - z.col(c).maxCoeff()).exp();
        y.col(c) = e / e.sum();
      }
      return y;
    }
  }
  throw std::logic_error("apply_activation: unknown activation");
}

/// Backward through an activation given its cached *output* y.
template <typename Scalar>
Mat<Scalar> activation_backward(Activation act, const Mat<Scalar>& y, const Mat<Scalar>& dy) {
  switch (act) {
    case Activation::Linear:
      return dy;
    case Activation::ReLU:
      return (y.array() > Scalar(0)).select(dy, Mat<Scalar>::Zero(dy.rows(), dy.cols()));
    case Activation::Tanh:
      return (dy.array() * (Scalar(1) - y.array().square())).matrix();
    case Activation::Softmax: {
      Mat<Scalar> dz(y.rows(), y.cols());
      for (Eigen::Index c = 0; c < y.cols(); ++c) {
        const Scalar dot = y.col(c).dot(dy.col(c));
        dz.col(c) = y.col(c).array() * (dy.col(c).array() - dot);
      }
      return dz;
    }
  }
  throw std::logic_error("activation_backward: unknown activation");
}

/// Fully connected layer, y = W x + b, columns are samples.
template <typename Scalar>
class Dense {
 public:
  Dense(std::string name, int in, int out)
      : name_(std::move(name)),
        W_(Mat<Scalar>::Zero(out, in)),
        b_(Mat<Scalar>::Zero(out, 1)),
        gW_(Mat<Scalar>::Zero(out, in)),
        gb_(Mat<Scalar>::Zero(out, 1)) {}

  void init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(W_.cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < W_.size(); ++i) W_.data()[i] = static_cast<Scalar>(u(rng));
    for (Eigen::Index i = 0; i < b_.size(); ++i) b_.data()[i] = static_cast<Scalar>(u(rng));
  }

  Mat<Scalar> forward(const Mat<Scalar>& x) const {
    return (W_ * x).colwise() + b_.col(0);
  }

  /// Returns dx; accumulates dW/db unless accumulate_param_grads is false.
  Mat<Scalar> backward(const Mat<Scalar>& dy, const Mat<Scalar>& x,
                       bool accumulate_param_grads = true) {
    if (accumulate_param_grads) {
      gW_.noalias() += dy * x.transpose();
      gb_.col(0) += dy.rowwise().sum();
    }
    return W_.transpose() * dy;
  }

  void zero_grads() {
    gW_.setZero();
    gb_.setZero();
  }

  std::vector<ParamRef<Scalar>> params() {
    return {{name_ + ".W", &W_, &gW_}, {name_ + ".b", &b_, &gb_}};
  }

  int in_dim() const { return static_cast<int>(W_.cols()); }
  int out_dim() const { return static_cast<int>(W_.rows()); }
  Mat<Scalar>& weight() { return W_; }
  Mat<Scalar>& bias() { return b_; }

 private:
  std::string name_;
  Mat<Scalar> W_, b_, gW_, gb_;
};

/// 2-D convolution over CHW-flattened columns, implemented as chunked
/// im2col + GEMM. Shapes are fixed at construction.
template <typename Scalar>
class Conv2d {
 public:
  Conv2d(std::string name, int in_c, int in_h, int in_w, int out_c, int k, int stride, int pad)
      : name_(std::move(name)),
        in_c_(in_c),
        in_h_(in_h),
        in_w_(in_w),
        out_c_(out_c),
        k_(k),
        stride_(stride),
        pad_(pad),
        out_h_((in_h + 2 * pad - k) / stride + 1),
        out_w_((in_w + 2 * pad - k) / stride + 1),
        W_(Mat<Scalar>::Zero(out_c, in_c * k * k)),
        b_(Mat<Scalar>::Zero(out_c, 1)),
        gW_(Mat<Scalar>::Zero(out_c, in_c * k * k)),
        gb_(Mat<Scalar>::Zero(out_c, 1)) {
    if (out_h_ < 1 || out_w_ < 1) throw std::invalid_argument("Conv2d: output collapses to zero");
  }

  void init(std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_c_ * k_ * k_));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < W_.size(); ++i) W_.data()[i] = static_cast<Scalar>(u(rng));
    for (Eigen::Index i = 0; i < b_.size(); ++i) b_.data()[i] = static_cast<Scalar>(u(rng));
  }

  int in_dim() const { return in_c_ * in_h_ * in_w_; }
  int out_dim() const { return out_c_ * out_h_ * out_w_; }
  int out_h() const { return out_h_; }
  int out_w() const { return out_w_; }

  Mat<Scalar> forward(const Mat<Scalar>& x) const {
    const Eigen::Index batch = x.cols();
    const int ohw = out_h_ * out_w_;
    Mat<Scalar> y(out_dim(), batch);
    Mat<Scalar> col(ohw, in_c_ * k_ * k_);
    for (Eigen::Index s = 0; s < batch; ++s) {
      im2col(x.col(s), col);
      // (ohw × ick²)·(ick² × out_c): column oc of the product is channel
      // plane oc, so the col-major storage is already the CHW flat layout.
      Eigen::Map<Mat<Scalar>>(y.col(s).data(), ohw, out_c_).noalias() = col * W_.transpose();
      for (int oc = 0; oc < out_c_; ++oc)
        y.col(s).segment(oc * ohw, ohw).array() += b_(oc, 0);
    }
    return y;
  }

  Mat<Scalar> backward(const Mat<Scalar>& dy, const Mat<Scalar>& x,
                       bool accumulate_param_grads = true) {
    const Eigen::Index batch = x.cols();
    const int ohw = out_h_ * out_w_;
    Mat<Scalar> dx = Mat<Scalar>::Zero(in_dim(), batch);
    Mat<Scalar> col(ohw, in_c_ * k_ * k_);
    Mat<Scalar> dcol(ohw, in_c_ * k_ * k_);
    for (Eigen::Index s = 0; s < batch; ++s) {
      Eigen::Map<const Mat<Scalar>> dy_s(dy.col(s).data(), ohw, out_c_);
      if (accumulate_param_grads) {
        im2col(x.col(s), col);
        gW_.noalias() += dy_s.transpose() * col;
        gb_.col(0) += dy_s.colwise().sum().transpose();
      }
      dcol.noalias() = dy_s * W_;
      col2im(dcol, dx.col(s));
    }
    return dx;
  }

  void zero_grads() {
    gW_.setZero();
    gb_.setZero();
  }

  std::vector<ParamRef<Scalar>> params() {
    return {{name_ + ".W", &W_, &gW_}, {name_ + ".b", &b_, &gb_}};
  }

 private:
  template <typename Col>
  void im2col(const Col& x, Mat<Scalar>& col) const {
    const int hw = in_h_ * in_w_;
    for (int c = 0; c < in_c_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const int ridx = (c * k_ + ky) * k_ + kx;
          Scalar* dst = col.data() + static_cast<std::ptrdiff_t>(ridx) * col.rows();
          for (int oy = 0; oy < out_h_; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= in_h_) {
              for (int ox = 0; ox < out_w_; ++ox) dst[oy * out_w_ + ox] = Scalar(0);
              continue;
            }
            for (int ox = 0; ox < out_w_; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              dst[oy * out_w_ + ox] =
                  (ix < 0 || ix >= in_w_) ? Scalar(0) : x[c * hw + iy * in_w_ + ix];
            }
          }
        }
  }

  template <typename ColRef>
  void col2im(const Mat<Scalar>& dcol, ColRef dx) const {
    const int hw = in_h_ * in_w_;
    for (int c = 0; c < in_c_; ++c)
      for (int ky = 0; ky < k_; ++ky)
        for (int kx = 0; kx < k_; ++kx) {
          const int ridx = (c * k_ + ky) * k_ + kx;
          const Scalar* src = dcol.data() + static_cast<std::ptrdiff_t>(ridx) * dcol.rows();
          for (int oy = 0; oy < out_h_; ++oy) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= in_h_) continue;
            for (int ox = 0; ox < out_w_; ++ox) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= in_w_) continue;
              dx[c * hw + iy * in_w_ + ix] += src[oy * out_w_ + ox];
            }
          }
        }
  }

  std::string name_;
  int in_c_, in_h_, in_w_, out_c_, k_, stride_, pad_, out_h_, out_w_;
  Mat<Scalar> W_, b_, gW_, gb_;
};

/// Forward record of one Mlp call: the input plus every activation output.
/// Callers own the cache, so the same network can appear several times in one
/// loss graph (e.g. the encoder on o, o' and the negative sample).
template <typename Scalar>
struct MlpCache {
  Mat<Scalar> input;
  std::vector<Mat<Scalar>> post;  // activation outputs per layer
};

/// Plain fully connected stack with per-layer activations.
template <typename Scalar>
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::string& name, const std::vector<int>& dims, const std::vector<Activation>& acts)
      : acts_(acts) {
    if (dims.size() < 2 || acts.size() != dims.size() - 1)
      throw std::invalid_argument("Mlp: dims/activations mismatch");
    for (std::size_t l = 0; l + 1 < dims.size(); ++l)
      layers_.emplace_back(name + ".fc" + std::to_string(l), dims[l], dims[l + 1]);
  }

  void init(std::mt19937_64& rng) {
    for (auto& l : layers_) l.init(rng);
  }

  Mat<Scalar> forward(const Mat<Scalar>& x, MlpCache<Scalar>* cache = nullptr) const {
    Mat<Scalar> h = x;
    if (cache) {
      cache->input = x;
      cache->post.clear();
      cache->post.reserve(layers_.size());
    }
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      h = apply_activation(acts_[l], layers_[l].forward(h));
      if (cache) cache->post.push_back(h);
    }
    return h;
  }

  Mat<Scalar> backward(const Mat<Scalar>& dy, const MlpCache<Scalar>& cache,
                       bool accumulate_param_grads = true) {
    Mat<Scalar> d = dy;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      d = activation_backward(acts_[l], cache.post[l], d);
      const Mat<Scalar>& in = l == 0 ? cache.input : cache.post[l - 1];
      d = layers_[l].backward(d, in, accumulate_param_grads);
    }
    return d;
  }

  void zero_grads() {
    for (auto& l : layers_) l.zero_grads();
  }

  std::vector<ParamRef<Scalar>> params() {
    std::vector<ParamRef<Scalar>> out;
    for (auto& l : layers_)
      for (auto& p : l.params()) out.push_back(p);
    return out;
  }

  int in_dim() const { return layers_.front().in_dim(); }
  int out_dim() const { return layers_.back().out_dim(); }
  Dense<Scalar>& layer(std::size_t i) { return layers_[i]; }
  std::size_t n_layers() const { return layers_.size(); }

 private:
  std::vector<Dense<Scalar>> layers_;
  std::vector<Activation> acts_;
};

}  // namespace latmdp::nets
