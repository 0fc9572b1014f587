#pragma once

#include <span>
#include <string>
#include <vector>

#include "wavems/tensor.hpp"

namespace wavems {

/// A trainable tensor plus its momentum buffer.
template <Real T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> velocity;
  bool decay_exempt = false;  // biases skip weight decay

  Parameter() = default;
  Parameter(std::string name_, Tensor<T> value_, bool decay_exempt_)
      : name(std::move(name_)), value(std::move(value_)), velocity(value.numel(), T(0)), decay_exempt(decay_exempt_) {
    value.set_requires_grad(true);
  }
};

/// Momentum SGD with coupled L2 decay:
///   g <- grad + weight_decay * w   (decay skipped for exempt parameters)
///   v <- momentum * v + g
///   w <- w - lr * v
/// Throws StateError if any parameter has no gradient.
template <Real T>
void sgd_step(std::span<Parameter<T>> params, T lr, T momentum, T weight_decay);

template <Real T>
void zero_grads(std::span<Parameter<T>> params);

extern template void sgd_step<float>(std::span<Parameter<float>>, float, float, float);
extern template void sgd_step<double>(std::span<Parameter<double>>, double, double, double);
extern template void zero_grads<float>(std::span<Parameter<float>>);
extern template void zero_grads<double>(std::span<Parameter<double>>);

}  // namespace wavems
