#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wavems/tensor.hpp"

namespace wavems {

/// Valid (unpadded) strided 1-D convolution.
/// input [C_in x L], weight [C_out x C_in x k], bias [C_out] -> [C_out x L'],
/// L' = (L - k) / stride + 1. Accumulation order per output is bias, then
/// input channel, then tap.
template <Real T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride);

/// 3x3 cross-correlation with stride 1 and one row/column of zero padding on
/// every border, so H and W are preserved.
/// input [C x H x W], weight [F x C x 3 x 3], bias [F] -> [F x H x W].
template <Real T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

/// Non-overlapping max pooling over the last two axes of [C x H x W].
/// Rows and columns not covered by a full window are dropped. Backward routes
/// each gradient to the first (row-major) maximum of its window.
template <Real T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t window_h, std::size_t window_w);

/// Adaptive max pooling along one axis to exactly `target` bins.
/// Bin i covers [floor(i*L/T), floor((i+1)*L/T)); ties go to the lowest index.
template <Real T>
Tensor<T> adaptive_maxpool(const Tensor<T>& input, std::size_t target, std::size_t axis);

/// Adaptive pooling of [C x H x W] to [C x target_h x target_w]. Pools the
/// width first and the height second, which selects the same element as a
/// row-major first-occurrence scan over each 2-D bin.
template <Real T>
Tensor<T> adaptive_maxpool2d(const Tensor<T>& input, std::size_t target_h, std::size_t target_w);

template <Real T>
Tensor<T> relu(const Tensor<T>& input);

/// input [D], weight [O x D], bias [O] -> [O].
template <Real T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias);

/// Stacks tensors along `axis`; every other extent must agree.
template <Real T>
Tensor<T> concat(std::span<const Tensor<T>> tensors, std::size_t axis);

/// Same data, new shape with the same element count.
template <Real T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape);

template <Real T>
Tensor<T> flatten(const Tensor<T>& input);

template <Real T>
Tensor<T> sum(const Tensor<T>& input);

template <Real T>
Tensor<T> scale(const Tensor<T>& input, T factor);

/// Elementwise product of equally shaped tensors.
template <Real T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

/// Elementwise sum of equally shaped tensors.
template <Real T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

/// loss = log sum_j exp(z_j - m) - (z_label - m), m = max_j z_j.
/// Gradient with respect to the logits is softmax(z) - onehot(label).
template <Real T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::size_t label);

/// Numerically stable softmax, evaluated in double.
template <Real T>
std::vector<double> softmax(std::span<const T> logits);

/// Index of the largest element; lowest index on ties.
template <Real T>
std::size_t argmax(std::span<const T> values);

}  // namespace wavems
