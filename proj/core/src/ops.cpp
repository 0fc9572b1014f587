#include "wavems/ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <limits>
#include <numeric>

#include "wavems/error.hpp"
#include "wavems/parallel.hpp"

namespace wavems {

namespace {

template <Real T>
using NodeT = typename Tensor<T>::Node;

// Wraps freshly computed data into a tensor and records the backward closure
// when at least one input participates in differentiation.
template <Real T>
Tensor<T> make_result(Shape shape, std::vector<T> data, std::initializer_list<const Tensor<T>*> inputs,
                      std::function<void(NodeT<T>&)> backward_fn) {
  Tensor<T> out(std::move(shape), std::move(data), false);
  if (!grad_enabled()) return out;
  bool any = false;
  for (const Tensor<T>* in : inputs) any = any || in->requires_grad();
  if (!any) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  for (const Tensor<T>* in : inputs) node.parents.push_back(in->node());
  node.backward_fn = std::move(backward_fn);
  return out;
}

template <Real T>
void require_rank(const Tensor<T>& t, std::size_t rank, const char* op, const char* what) {
  if (!t.defined()) throw ArgumentError(std::string(op) + ": " + what + " is undefined");
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) + ", got " +
                     shape_str(t.shape()));
  }
}

// Gradient buffer of a parent, or nullptr when it does not need one.
template <Real T>
T* grad_target(NodeT<T>* parent) {
  return parent->requires_grad ? parent->ensure_grad().data() : nullptr;
}

}  // namespace

template <Real T>
Tensor<T> conv1d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride) {
  require_rank(input, 2, "conv1d", "input");
  require_rank(weight, 3, "conv1d", "weight");
  require_rank(bias, 1, "conv1d", "bias");
  if (stride == 0) throw ArgumentError("conv1d: stride must be positive");
  const std::size_t cin = input.extent(0), len = input.extent(1);
  const std::size_t cout = weight.extent(0), k = weight.extent(2);
  if (weight.extent(1) != cin) {
    throw ShapeError("conv1d: weight " + shape_str(weight.shape()) + " incompatible with input " +
                     shape_str(input.shape()));
  }
  if (bias.extent(0) != cout) throw ShapeError("conv1d: bias length does not match output channels");
  if (len < k) {
    throw ShapeError("conv1d: input length " + std::to_string(len) + " shorter than kernel " + std::to_string(k));
  }
  const std::size_t lout = (len - k) / stride + 1;

  std::vector<T> out(cout * lout);
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  parallel_for(cout, [&](std::size_t f0, std::size_t f1) {
    for (std::size_t f = f0; f < f1; ++f) {
      T* o = out.data() + f * lout;
      std::fill(o, o + lout, b[f]);
      for (std::size_t c = 0; c < cin; ++c) {
        for (std::size_t j = 0; j < k; ++j) {
          const T wv = w[(f * cin + c) * k + j];
          const T* xs = x + c * len + j;
          if (stride == 1) {
            for (std::size_t t = 0; t < lout; ++t) o[t] += wv * xs[t];
          } else {
            for (std::size_t t = 0; t < lout; ++t) o[t] += wv * xs[t * stride];
          }
        }
      }
    }
  });

  auto* xn = input.node().get();
  auto* wn = weight.node().get();
  auto* bn = bias.node().get();
  return make_result<T>({cout, lout}, std::move(out), {&input, &weight, &bias},
                        [=](NodeT<T>& self) {
                          const T* g = self.grad.data();
                          const T* xv = xn->data.data();
                          const T* wv = wn->data.data();
                          if (T* db = grad_target<T>(bn)) {
                            for (std::size_t f = 0; f < cout; ++f) {
                              T acc = 0;
                              for (std::size_t t = 0; t < lout; ++t) acc += g[f * lout + t];
                              db[f] += acc;
                            }
                          }
                          if (T* dw = grad_target<T>(wn)) {
                            parallel_for(cout, [&](std::size_t f0, std::size_t f1) {
                              for (std::size_t f = f0; f < f1; ++f) {
                                const T* gf = g + f * lout;
                                for (std::size_t c = 0; c < cin; ++c) {
                                  for (std::size_t j = 0; j < k; ++j) {
                                    const T* xs = xv + c * len + j;
                                    T acc = 0;
                                    for (std::size_t t = 0; t < lout; ++t) acc += gf[t] * xs[t * stride];
                                    dw[(f * cin + c) * k + j] += acc;
                                  }
                                }
                              }
                            });
                          }
                          if (T* dx = grad_target<T>(xn)) {
                            parallel_for(cin, [&](std::size_t c0, std::size_t c1) {
                              for (std::size_t c = c0; c < c1; ++c) {
                                for (std::size_t f = 0; f < cout; ++f) {
                                  const T* gf = g + f * lout;
                                  for (std::size_t j = 0; j < k; ++j) {
                                    const T w0 = wv[(f * cin + c) * k + j];
                                    T* dxs = dx + c * len + j;
                                    for (std::size_t t = 0; t < lout; ++t) dxs[t * stride] += gf[t] * w0;
                                  }
                                }
                              }
                            });
                          }
                        });
}

template <Real T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input, 3, "conv2d", "input");
  require_rank(weight, 4, "conv2d", "weight");
  require_rank(bias, 1, "conv2d", "bias");
  if (weight.extent(2) != 3 || weight.extent(3) != 3) {
    throw ArgumentError("conv2d: only 3x3 kernels are supported, got " + shape_str(weight.shape()));
  }
  const std::size_t cin = input.extent(0), h = input.extent(1), wd = input.extent(2);
  const std::size_t fout = weight.extent(0);
  if (weight.extent(1) != cin) {
    throw ShapeError("conv2d: weight " + shape_str(weight.shape()) + " incompatible with input " +
                     shape_str(input.shape()));
  }
  if (bias.extent(0) != fout) throw ShapeError("conv2d: bias length does not match output channels");
  const std::size_t plane = h * wd;

  std::vector<T> out(fout * plane);
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  // Output row y reads input row y + ky - 1; valid y lie in [ylo, yhi).
  auto range = [](std::size_t k, std::size_t n) {
    const std::size_t lo = k == 0 ? 1 : 0;
    const std::size_t hi = k == 2 ? n - 1 : n;
    return std::pair{lo, std::max(lo, hi)};
  };
  parallel_for(fout, [&](std::size_t f0, std::size_t f1) {
    for (std::size_t f = f0; f < f1; ++f) {
      T* o = out.data() + f * plane;
      std::fill(o, o + plane, b[f]);
      for (std::size_t c = 0; c < cin; ++c) {
        const T* xc = x + c * plane;
        for (std::size_t ky = 0; ky < 3; ++ky) {
          const auto [ylo, yhi] = range(ky, h);
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const auto [xlo, xhi] = range(kx, wd);
            const T wv = w[((f * cin + c) * 3 + ky) * 3 + kx];
            for (std::size_t y = ylo; y < yhi; ++y) {
              T* orow = o + y * wd;
              const T* irow = xc + (y + ky - 1) * wd;
              for (std::size_t xx = xlo; xx < xhi; ++xx) orow[xx] += wv * irow[xx + kx - 1];
            }
          }
        }
      }
    }
  });

  auto* xn = input.node().get();
  auto* wn = weight.node().get();
  auto* bn = bias.node().get();
  return make_result<T>(
      {fout, h, wd}, std::move(out), {&input, &weight, &bias}, [=](NodeT<T>& self) {
        const T* g = self.grad.data();
        const T* xv = xn->data.data();
        const T* wv = wn->data.data();
        if (T* db = grad_target<T>(bn)) {
          for (std::size_t f = 0; f < fout; ++f) {
            T acc = 0;
            for (std::size_t i = 0; i < plane; ++i) acc += g[f * plane + i];
            db[f] += acc;
          }
        }
        if (T* dw = grad_target<T>(wn)) {
          parallel_for(fout, [&](std::size_t f0, std::size_t f1) {
            for (std::size_t f = f0; f < f1; ++f) {
              const T* gf = g + f * plane;
              for (std::size_t c = 0; c < cin; ++c) {
                const T* xc = xv + c * plane;
                for (std::size_t ky = 0; ky < 3; ++ky) {
                  const auto [ylo, yhi] = range(ky, h);
                  for (std::size_t kx = 0; kx < 3; ++kx) {
                    const auto [xlo, xhi] = range(kx, wd);
                    T acc = 0;
                    for (std::size_t y = ylo; y < yhi; ++y) {
                      const T* grow = gf + y * wd;
                      const T* irow = xc + (y + ky - 1) * wd;
                      for (std::size_t xx = xlo; xx < xhi; ++xx) acc += grow[xx] * irow[xx + kx - 1];
                    }
                    dw[((f * cin + c) * 3 + ky) * 3 + kx] += acc;
                  }
                }
              }
            }
          });
        }
        if (T* dx = grad_target<T>(xn)) {
          parallel_for(cin, [&](std::size_t c0, std::size_t c1) {
            for (std::size_t c = c0; c < c1; ++c) {
              T* dxc = dx + c * plane;
              for (std::size_t f = 0; f < fout; ++f) {
                const T* gf = g + f * plane;
                for (std::size_t ky = 0; ky < 3; ++ky) {
                  const auto [ylo, yhi] = range(ky, h);
                  for (std::size_t kx = 0; kx < 3; ++kx) {
                    const auto [xlo, xhi] = range(kx, wd);
                    const T w0 = wv[((f * cin + c) * 3 + ky) * 3 + kx];
                    for (std::size_t y = ylo; y < yhi; ++y) {
                      const T* grow = gf + y * wd;
                      T* drow = dxc + (y + ky - 1) * wd;
                      for (std::size_t xx = xlo; xx < xhi; ++xx) drow[xx + kx - 1] += grow[xx] * w0;
                    }
                  }
                }
              }
            }
          });
        }
      });
}

template <Real T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t window_h, std::size_t window_w) {
  require_rank(input, 3, "maxpool2d", "input");
  if (window_h == 0 || window_w == 0) throw ArgumentError("maxpool2d: window extents must be positive");
  const std::size_t c = input.extent(0), h = input.extent(1), w = input.extent(2);
  if (window_h > h || window_w > w) {
    throw ShapeError("maxpool2d: window " + std::to_string(window_h) + "x" + std::to_string(window_w) +
                     " larger than input " + shape_str(input.shape()));
  }
  const std::size_t oh = h / window_h, ow = w / window_w;
  std::vector<T> out(c * oh * ow);
  std::vector<std::size_t> arg(out.size());
  const T* x = input.data().data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (ch * h + oy * window_h) * w + ox * window_w;
        for (std::size_t dy = 0; dy < window_h; ++dy) {
          for (std::size_t dx = 0; dx < window_w; ++dx) {
            const std::size_t idx = (ch * h + oy * window_h + dy) * w + ox * window_w + dx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        out[o] = x[best];
        arg[o] = best;
      }
    }
  }
  auto* xn = input.node().get();
  return make_result<T>({c, oh, ow}, std::move(out), {&input}, [xn, arg = std::move(arg)](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    for (std::size_t o = 0; o < arg.size(); ++o) dx[arg[o]] += self.grad[o];
  });
}

template <Real T>
Tensor<T> adaptive_maxpool(const Tensor<T>& input, std::size_t target, std::size_t axis) {
  if (!input.defined()) throw ArgumentError("adaptive_maxpool: input is undefined");
  if (axis >= input.rank()) throw ArgumentError("adaptive_maxpool: axis out of range");
  if (target == 0) throw ArgumentError("adaptive_maxpool: target must be positive");
  const Shape& shape = input.shape();
  const std::size_t len = shape[axis];
  if (len < target) {
    throw ShapeError("adaptive_maxpool: axis " + std::to_string(axis) + " of " + shape_str(shape) +
                     " shorter than target " + std::to_string(target));
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= shape[i];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= shape[i];

  Shape out_shape = shape;
  out_shape[axis] = target;
  std::vector<T> out(outer * target * inner);
  std::vector<std::size_t> arg(out.size());
  const T* x = input.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t bin = 0; bin < target; ++bin) {
      const std::size_t lo = bin * len / target;
      const std::size_t hi = (bin + 1) * len / target;
      for (std::size_t n = 0; n < inner; ++n) {
        std::size_t best = (o * len + lo) * inner + n;
        for (std::size_t l = lo + 1; l < hi; ++l) {
          const std::size_t idx = (o * len + l) * inner + n;
          if (x[idx] > x[best]) best = idx;
        }
        const std::size_t oi = (o * target + bin) * inner + n;
        out[oi] = x[best];
        arg[oi] = best;
      }
    }
  }
  auto* xn = input.node().get();
  return make_result<T>(std::move(out_shape), std::move(out), {&input}, [xn, arg = std::move(arg)](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    for (std::size_t o = 0; o < arg.size(); ++o) dx[arg[o]] += self.grad[o];
  });
}

template <Real T>
Tensor<T> adaptive_maxpool2d(const Tensor<T>& input, std::size_t target_h, std::size_t target_w) {
  require_rank(input, 3, "adaptive_maxpool2d", "input");
  return adaptive_maxpool(adaptive_maxpool(input, target_w, 2), target_h, 1);
}

template <Real T>
Tensor<T> relu(const Tensor<T>& input) {
  std::vector<T> out(input.numel());
  const auto x = input.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
  auto* xn = input.node().get();
  return make_result<T>(input.shape(), std::move(out), {&input}, [xn](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    const T* xv = xn->data.data();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (xv[i] > T(0)) dx[i] += self.grad[i];
    }
  });
}

template <Real T>
Tensor<T> linear(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  require_rank(input, 1, "linear", "input");
  require_rank(weight, 2, "linear", "weight");
  require_rank(bias, 1, "linear", "bias");
  const std::size_t d = input.extent(0), o = weight.extent(0);
  if (weight.extent(1) != d) {
    throw ShapeError("linear: weight " + shape_str(weight.shape()) + " incompatible with input " +
                     shape_str(input.shape()));
  }
  if (bias.extent(0) != o) throw ShapeError("linear: bias length does not match output dimension");
  std::vector<T> out(o);
  const T* x = input.data().data();
  const T* w = weight.data().data();
  const T* b = bias.data().data();
  parallel_for(
      o,
      [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
          T acc = b[r];
          const T* row = w + r * d;
          for (std::size_t i = 0; i < d; ++i) acc += row[i] * x[i];
          out[r] = acc;
        }
      },
      16);
  auto* xn = input.node().get();
  auto* wn = weight.node().get();
  auto* bn = bias.node().get();
  return make_result<T>({o}, std::move(out), {&input, &weight, &bias}, [=](NodeT<T>& self) {
    const T* g = self.grad.data();
    const T* xv = xn->data.data();
    const T* wv = wn->data.data();
    if (T* db = grad_target<T>(bn)) {
      for (std::size_t r = 0; r < o; ++r) db[r] += g[r];
    }
    if (T* dw = grad_target<T>(wn)) {
      for (std::size_t r = 0; r < o; ++r) {
        T* row = dw + r * d;
        for (std::size_t i = 0; i < d; ++i) row[i] += g[r] * xv[i];
      }
    }
    if (T* dx = grad_target<T>(xn)) {
      for (std::size_t r = 0; r < o; ++r) {
        const T* row = wv + r * d;
        for (std::size_t i = 0; i < d; ++i) dx[i] += g[r] * row[i];
      }
    }
  });
}

template <Real T>
Tensor<T> concat(std::span<const Tensor<T>> tensors, std::size_t axis) {
  if (tensors.empty()) throw ArgumentError("concat: no tensors given");
  const Shape& first = tensors[0].shape();
  if (axis >= first.size()) throw ArgumentError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& t : tensors) {
    const Shape& s = t.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = i == axis || s[i] == first[i];
    if (!ok) throw ShapeError("concat: extent mismatch between " + shape_str(first) + " and " + shape_str(s));
    out_shape[axis] += s[axis];
  }
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];
  const std::size_t out_row = out_shape[axis] * inner;

  std::vector<T> out(shape_numel(out_shape));
  std::vector<NodeT<T>*> nodes;
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& t : tensors) {
    const std::size_t row = t.extent(axis) * inner;
    const T* src = t.data().data();
    for (std::size_t o = 0; o < outer; ++o) std::copy_n(src + o * row, row, out.data() + o * out_row + offset);
    nodes.push_back(t.node().get());
    offsets.push_back(offset);
    offset += row;
  }

  Tensor<T> result(out_shape, std::move(out), false);
  if (!grad_enabled()) return result;
  bool any = false;
  for (const auto& t : tensors) any = any || t.requires_grad();
  if (!any) return result;
  auto& node = *result.node();
  node.requires_grad = true;
  for (const auto& t : tensors) node.parents.push_back(t.node());
  node.backward_fn = [nodes, offsets, outer, out_row, inner, axis](NodeT<T>& self) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      T* dx = grad_target<T>(nodes[i]);
      if (!dx) continue;
      const std::size_t row = nodes[i]->shape[axis] * inner;
      for (std::size_t o = 0; o < outer; ++o) {
        const T* g = self.grad.data() + o * out_row + offsets[i];
        for (std::size_t j = 0; j < row; ++j) dx[o * row + j] += g[j];
      }
    }
  };
  return result;
}

template <Real T>
Tensor<T> reshape(const Tensor<T>& input, Shape shape) {
  if (shape_numel(shape) != input.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(input.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> data(input.data().begin(), input.data().end());
  auto* xn = input.node().get();
  return make_result<T>(std::move(shape), std::move(data), {&input}, [xn](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i];
  });
}

template <Real T>
Tensor<T> flatten(const Tensor<T>& input) {
  return reshape(input, Shape{input.numel()});
}

template <Real T>
Tensor<T> sum(const Tensor<T>& input) {
  T acc = 0;
  for (T v : input.data()) acc += v;
  auto* xn = input.node().get();
  return make_result<T>({1}, {acc}, {&input}, [xn](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    const T g = self.grad[0];
    for (std::size_t i = 0; i < xn->data.size(); ++i) dx[i] += g;
  });
}

template <Real T>
Tensor<T> scale(const Tensor<T>& input, T factor) {
  std::vector<T> out(input.data().begin(), input.data().end());
  for (T& v : out) v *= factor;
  auto* xn = input.node().get();
  return make_result<T>(input.shape(), std::move(out), {&input}, [xn, factor](NodeT<T>& self) {
    T* dx = grad_target<T>(xn);
    for (std::size_t i = 0; i < self.grad.size(); ++i) dx[i] += self.grad[i] * factor;
  });
}

template <Real T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto* an = a.node().get();
  auto* bn = b.node().get();
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [an, bn](NodeT<T>& self) {
    if (T* da = grad_target<T>(an)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) da[i] += self.grad[i] * bn->data[i];
    }
    if (T* db = grad_target<T>(bn)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) db[i] += self.grad[i] * an->data[i];
    }
  });
}

template <Real T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError("add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<T> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto* an = a.node().get();
  auto* bn = b.node().get();
  return make_result<T>(a.shape(), std::move(out), {&a, &b}, [an, bn](NodeT<T>& self) {
    for (auto* n : {an, bn}) {
      if (T* d = grad_target<T>(n)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) d[i] += self.grad[i];
      }
    }
  });
}

template <Real T>
std::vector<double> softmax(std::span<const T> logits) {
  if (logits.empty()) throw ArgumentError("softmax: empty input");
  double m = -std::numeric_limits<double>::infinity();
  for (T v : logits) m = std::max(m, static_cast<double>(v));
  std::vector<double> p(logits.size());
  double s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(static_cast<double>(logits[i]) - m);
    s += p[i];
  }
  for (double& v : p) v /= s;
  return p;
}

template <Real T>
Tensor<T> softmax_cross_entropy(const Tensor<T>& logits, std::size_t label) {
  if (!logits.defined()) throw ArgumentError("softmax_cross_entropy: logits undefined");
  const std::size_t k = logits.numel();
  if (label >= k) {
    throw ArgumentError("softmax_cross_entropy: label " + std::to_string(label) + " out of range for " +
                        std::to_string(k) + " classes");
  }
  const auto z = logits.data();
  double m = -std::numeric_limits<double>::infinity();
  for (T v : z) m = std::max(m, static_cast<double>(v));
  double s = 0;
  for (T v : z) s += std::exp(static_cast<double>(v) - m);
  const double loss = std::log(s) - (static_cast<double>(z[label]) - m);
  auto* zn = logits.node().get();
  return make_result<T>({1}, {static_cast<T>(loss)}, {&logits}, [zn, label](NodeT<T>& self) {
    T* dz = grad_target<T>(zn);
    const auto p = softmax<T>(zn->data);
    const double g = self.grad[0];
    for (std::size_t i = 0; i < p.size(); ++i) {
      dz[i] += static_cast<T>(g * (p[i] - (i == label ? 1.0 : 0.0)));
    }
  });
}

template <Real T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw ArgumentError("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

#define WAVEMS_INSTANTIATE_OPS(T)                                                                    \
  template Tensor<T> conv1d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t); \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> maxpool2d<T>(const Tensor<T>&, std::size_t, std::size_t);                     \
  template Tensor<T> adaptive_maxpool<T>(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> adaptive_maxpool2d<T>(const Tensor<T>&, std::size_t, std::size_t);            \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                    \
  template Tensor<T> linear<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);              \
  template Tensor<T> concat<T>(std::span<const Tensor<T>>, std::size_t);                           \
  template Tensor<T> reshape<T>(const Tensor<T>&, Shape);                                          \
  template Tensor<T> flatten<T>(const Tensor<T>&);                                                 \
  template Tensor<T> sum<T>(const Tensor<T>&);                                                     \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                                \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                   \
  template Tensor<T> softmax_cross_entropy<T>(const Tensor<T>&, std::size_t);                      \
  template std::vector<double> softmax<T>(std::span<const T>);                                     \
  template std::size_t argmax<T>(std::span<const T>);

WAVEMS_INSTANTIATE_OPS(float)
WAVEMS_INSTANTIATE_OPS(double)

#undef WAVEMS_INSTANTIATE_OPS

}  // namespace wavems
