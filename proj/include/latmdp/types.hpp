#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latmdp {

/// Default training scalar. Gradient-check tests instantiate the same
/// templates with double.
using Real = float;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatX = Mat<Real>;
using VecX = Vec<Real>;

/// An RGB observation as rendered by an environment. Pixels are kept as the
/// raw 8-bit values (row-major HWC) so datasets round-trip bit-exactly;
/// normalization to [0,1] happens at the nets boundary.
struct Observation {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // height*width*3, HWC

  bool same_shape(const Observation& o) const {
    return height == o.height && width == o.width;
  }
  bool operator==(const Observation& o) const {
    return height == o.height && width == o.width && pixels == o.pixels;
  }
  bool operator!=(const Observation& o) const { return !(*this == o); }

  std::uint8_t& at(int y, int x, int c) { return pixels[(y * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[(y * width + x) * 3 + c]; }
};

/// Flattens an observation to a normalized column in CHW order.
template <typename Scalar>
Vec<Scalar> observation_to_column(const Observation& o) {
  const int hw = o.height * o.width;
  Vec<Scalar> col(3 * hw);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < o.height; ++y)
      for (int x = 0; x < o.width; ++x)
        col[c * hw + y * o.width + x] =
            static_cast<Scalar>(o.at(y, x, c)) / Scalar(255);
  return col;
}

/// A discrete environment action: index into an action set of size K.
struct DiscreteAction {
  int index = 0;
  int K = 0;
};

template <typename Scalar>
Vec<Scalar> one_hot(const DiscreteAction& a) {
  if (a.index < 0 || a.index >= a.K)
    throw std::out_of_range("one_hot: action index " + std::to_string(a.index) +
                            " outside [0," + std::to_string(a.K) + ")");
  Vec<Scalar> v = Vec<Scalar>::Zero(a.K);
  v[a.index] = Scalar(1);
  return v;
}

/// One experience tuple (o, a, r, o', done) — the only training input.
struct Transition {
  Observation o;
  DiscreteAction a;
  double r = 0.0;
  Observation o_next;
  bool done = false;
};

}  // namespace latmdp
