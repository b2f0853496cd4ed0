#pragma once

#include "latmdp/nets/layers.hpp"

#include <cmath>
#include <vector>

namespace latmdp::nets {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// ADAM bound to a fixed parameter list; moment buffers are aligned by index.
template <typename Scalar>
class Adam {
 public:
  Adam(std::vector<ParamRef<Scalar>> params, const AdamConfig& cfg = {})
      : params_(std::move(params)), cfg_(cfg) {
    m_.reserve(params_.size());
    v_.reserve(params_.size());
    for (auto& p : params_) {
      m_.push_back(Mat<Scalar>::Zero(p.value->rows(), p.value->cols()));
      v_.push_back(Mat<Scalar>::Zero(p.value->rows(), p.value->cols()));
    }
  }

  void step() {
    ++t_;
    const Scalar b1 = static_cast<Scalar>(cfg_.beta1);
    const Scalar b2 = static_cast<Scalar>(cfg_.beta2);
    const Scalar corr1 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta1, t_));
    const Scalar corr2 = static_cast<Scalar>(1.0 - std::pow(cfg_.beta2, t_));
    const Scalar lr = static_cast<Scalar>(cfg_.learning_rate);
    const Scalar eps = static_cast<Scalar>(cfg_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const Mat<Scalar>& g = *params_[i].grad;
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = (b2 * v_[i].array() + (Scalar(1) - b2) * g.array().square()).matrix();
      params_[i].value->array() -=
          lr * (m_[i].array() / corr1) / ((v_[i].array() / corr2).sqrt() + eps);
    }
  }

  void zero_grads() {
    for (auto& p : params_) p.grad->setZero();
  }

 private:
  std::vector<ParamRef<Scalar>> params_;
  AdamConfig cfg_;
  std::vector<Mat<Scalar>> m_, v_;
  long t_ = 0;
};

}  // namespace latmdp::nets
