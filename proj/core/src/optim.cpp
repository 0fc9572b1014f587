#include "wavems/optim.hpp"

#include "wavems/error.hpp"

namespace wavems {

template <Real T>
void sgd_step(std::span<Parameter<T>> params, T lr, T momentum, T weight_decay) {
  for (const auto& p : params) {
    if (!p.value.has_grad()) throw StateError("sgd_step: parameter '" + p.name + "' has no gradient");
    if (p.velocity.size() != p.value.numel()) throw StateError("sgd_step: velocity size mismatch for '" + p.name + "'");
  }
  for (auto& p : params) {
    auto w = p.value.mutable_data();
    auto g = p.value.grad();
    const T decay = p.decay_exempt ? T(0) : weight_decay;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const T step = g[i] + decay * w[i];
      p.velocity[i] = momentum * p.velocity[i] + step;
      w[i] -= lr * p.velocity[i];
    }
  }
}

template <Real T>
void zero_grads(std::span<Parameter<T>> params) {
  for (auto& p : params) p.value.zero_grad();
}

template void sgd_step<float>(std::span<Parameter<float>>, float, float, float);
template void sgd_step<double>(std::span<Parameter<double>>, double, double, double);
template void zero_grads<float>(std::span<Parameter<float>>);
template void zero_grads<double>(std::span<Parameter<double>>);

}  // namespace wavems
