#include "advicelab/qnet/network.hpp"

#include <algorithm>
#include <cmath>

namespace advicelab::qnet {

void NetworkSpec::validate() const {
  if (frames <= 0 || height <= 0 || width <= 0) {
    throw std::invalid_argument("network input dimensions must be positive");
  }
  if (outputs != 4) throw std::invalid_argument("network must have one output per action (4)");
  int h = height, w = width;
  for (int c : conv_channels) {
    if (c <= 0) throw std::invalid_argument("conv stage channel count must be positive");
    if (h < 2 || w < 2) {
      throw std::invalid_argument("input too small for " + std::to_string(conv_channels.size()) +
                                  " pooled conv stages");
    }
    h /= 2;
    w /= 2;
  }
  for (int d : dense_widths) {
    if (d <= 0) throw std::invalid_argument("dense stage width must be positive");
  }
}

template <class T>
QNetwork<T>::QNetwork(NetworkSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::size_t offset = 0;
  int channels = spec_.frames, h = spec_.height, w = spec_.width;
  for (int out_c : spec_.conv_channels) {
    ConvSlots s{};
    s.in_channels = channels;
    s.out_channels = out_c;
    s.in_height = h;
    s.in_width = w;
    s.out_height = h / 2;
    s.out_width = w / 2;
    s.weight = offset;
    offset += static_cast<std::size_t>(out_c) * channels * 9;
    s.bias = offset;
    offset += out_c;
    s.gamma = offset;
    offset += out_c;
    s.beta = offset;
    offset += out_c;
    conv_.push_back(s);
    channels = out_c;
    h /= 2;
    w /= 2;
  }
  int inputs = channels * h * w;
  std::vector<int> widths = spec_.dense_widths;
  widths.push_back(spec_.outputs);
  for (int out : widths) {
    DenseSlots d{};
    d.inputs = inputs;
    d.outputs = out;
    d.weight = offset;
    offset += static_cast<std::size_t>(out) * inputs;
    d.bias = offset;
    offset += out;
    dense_.push_back(d);
    inputs = out;
  }
  params_.assign(offset, T(0));
  running_.assign(0, T(0));
  for (const auto& s : conv_) {
    running_.insert(running_.end(), s.out_channels, T(0));  // mean
    running_.insert(running_.end(), s.out_channels, T(1));  // variance
  }
  for (const auto& s : conv_) {
    std::fill_n(params_.begin() + s.gamma, s.out_channels, T(1));
  }
}

template <class T>
void QNetwork<T>::init_he_uniform(std::mt19937_64& rng) {
  std::fill(params_.begin(), params_.end(), T(0));
  for (const auto& s : conv_) {
    double fan_in = static_cast<double>(s.in_channels) * 9.0;
    double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::size_t n = static_cast<std::size_t>(s.out_channels) * s.in_channels * 9;
    for (std::size_t i = 0; i < n; ++i) params_[s.weight + i] = static_cast<T>(dist(rng));
    std::fill_n(params_.begin() + s.gamma, s.out_channels, T(1));
  }
  for (const auto& d : dense_) {
    double limit = std::sqrt(6.0 / static_cast<double>(d.inputs));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::size_t n = static_cast<std::size_t>(d.outputs) * d.inputs;
    for (std::size_t i = 0; i < n; ++i) params_[d.weight + i] = static_cast<T>(dist(rng));
  }
  std::size_t r = 0;
  for (const auto& s : conv_) {
    std::fill_n(running_.begin() + r, s.out_channels, T(0));
    std::fill_n(running_.begin() + r + s.out_channels, s.out_channels, T(1));
    r += 2 * static_cast<std::size_t>(s.out_channels);
  }
}

template <class T>
void QNetwork<T>::copy_from(const QNetwork& other) {
  if (!(other.spec_ == spec_)) throw ShapeMismatch("cannot copy parameters across specs");
  params_ = other.params_;
  running_ = other.running_;
}

template <class T>
std::vector<T> QNetwork<T>::forward(std::span<const T> inputs, int batch, Mode mode,
                                    Workspace<T>* ws) {
  if (ws) return run(inputs, batch, mode, ws, running_);
  Workspace<T> local;
  return run(inputs, batch, mode, &local, running_);
}

template <class T>
std::vector<T> QNetwork<T>::forward(std::span<const T> inputs, int batch) const {
  thread_local Workspace<T> scratch;
  return forward(inputs, batch, scratch);
}

template <class T>
std::vector<T> QNetwork<T>::forward(std::span<const T> inputs, int batch, Workspace<T>& scratch) const {
  // Inference never writes to the running statistics.
  std::span<T> running(const_cast<T*>(running_.data()), running_.size());
  return run(inputs, batch, Mode::kInference, &scratch, running);
}

namespace {

// Dot product with independent partial sums so the compiler can vectorize.
template <class T>
T dot(const T* __restrict a, const T* __restrict b, int n) {
  constexpr int kLanes = 32;
  T acc[kLanes] = {};
  int i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (int j = 0; j < kLanes; ++j) acc[j] += a[i + j] * b[i + j];
  }
  T sum = 0;
  for (; i < n; ++i) sum += a[i] * b[i];
  for (int j = 0; j < kLanes; ++j) sum += acc[j];
  return sum;
}

template <class T>
void sum_and_squares(const T* __restrict p, std::size_t n, double& sum, double& sq) {
  constexpr std::size_t kLanes = 8;
  double s[kLanes] = {}, q[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t j = 0; j < kLanes; ++j) {
      const double v = p[i + j];
      s[j] += v;
      q[j] += v * v;
    }
  }
  for (; i < n; ++i) {
    s[0] += p[i];
    q[0] += static_cast<double>(p[i]) * p[i];
  }
  for (std::size_t j = 0; j < kLanes; ++j) {
    sum += s[j];
    sq += q[j];
  }
}

// Convolutions work on planes padded to (h + 2) x (w + 2) plus two spare
// values, so each kernel tap is a single contiguous loop over h * (w + 2)
// outputs. The two extra columns per output row are junk and get dropped.
inline std::size_t padded_plane(int h, int w) { return static_cast<std::size_t>(h + 2) * (w + 2) + 2; }

template <class T>
void pad_planes(const T* src, int planes, int h, int w, T* dst) {
  const int pw = w + 2;
  const std::size_t pp = padded_plane(h, w);
  std::fill_n(dst, pp * planes, T(0));
  for (int c = 0; c < planes; ++c) {
    for (int y = 0; y < h; ++y) {
      std::copy_n(src + (static_cast<std::size_t>(c) * h + y) * w, w, dst + c * pp + (y + 1) * pw + 1);
    }
  }
}

template <class T>
void conv3x3_forward(const T* pad, int in_c, int h, int w, const T* weight, const T* bias,
                     int out_c, T* wide, T* out) {
  const int pw = w + 2;
  const std::size_t pp = padded_plane(h, w);
  const int n = h * pw;
  for (int co = 0; co < out_c; ++co) {
    T* __restrict acc = wide;
    std::fill_n(acc, n, bias[co]);
    for (int ci = 0; ci < in_c; ++ci) {
      const T* k = weight + (static_cast<std::size_t>(co) * in_c + ci) * 9;
      for (int t = 0; t < 9; ++t) {
        const T kv = k[t];
        const T* __restrict src = pad + ci * pp + (t / 3) * pw + (t % 3);
        for (int i = 0; i < n; ++i) acc[i] += kv * src[i];
      }
    }
    T* dst = out + static_cast<std::size_t>(co) * h * w;
    for (int y = 0; y < h; ++y) std::copy_n(acc + y * pw, w, dst + y * w);
  }
}

// Accumulates weight and bias gradients and, when dpad is non-null, gradients
// for the padded input. `wide` is scratch of h * (w + 2) values.
template <class T>
void conv3x3_backward(const T* pad, int in_c, int h, int w, const T* weight, int out_c,
                      const T* dout, T* dweight, T* dbias, T* dpad, T* wide) {
  const int pw = w + 2;
  const std::size_t pp = padded_plane(h, w);
  const int n = h * pw;
  for (int co = 0; co < out_c; ++co) {
    const T* g = dout + static_cast<std::size_t>(co) * h * w;
    std::fill_n(wide, n, T(0));
    for (int y = 0; y < h; ++y) std::copy_n(g + y * w, w, wide + y * pw);
    T bsum = 0;
    for (int i = 0; i < h * w; ++i) bsum += g[i];
    dbias[co] += bsum;
    for (int ci = 0; ci < in_c; ++ci) {
      const std::size_t kbase = (static_cast<std::size_t>(co) * in_c + ci) * 9;
      for (int t = 0; t < 9; ++t) {
        const std::size_t off = ci * pp + (t / 3) * pw + (t % 3);
        dweight[kbase + t] += dot(wide, pad + off, n);
        if (dpad) {
          const T wv = weight[kbase + t];
          const T* __restrict gw = wide;
          T* __restrict d = dpad + off;
          for (int i = 0; i < n; ++i) d[i] += wv * gw[i];
        }
      }
    }
  }
}

template <class T>
void check_finite(const std::vector<T>& v, const char* where) {
  for (T x : v) {
    if (!std::isfinite(x)) throw NumericalDivergence(std::string("non-finite activation in ") + where);
  }
}

}  // namespace

template <class T>
std::vector<T> QNetwork<T>::run(std::span<const T> inputs, int batch, Mode mode, Workspace<T>* ws,
                                std::span<T> running) const {
  if (batch <= 0) throw ShapeMismatch("batch must be positive");
  if (inputs.size() != spec_.input_size() * static_cast<std::size_t>(batch)) {
    throw ShapeMismatch("input has " + std::to_string(inputs.size()) + " values, expected " +
                        std::to_string(spec_.input_size() * batch));
  }
  ws->batch = batch;
  ws->conv.resize(conv_.size());
  ws->dense.resize(dense_.size());
  const bool batch_stats = mode != Mode::kInference;
  if (!conv_.empty()) {
    ws->conv[0].input.assign(inputs.begin(), inputs.end());
  } else {
    ws->dense[0].input.assign(inputs.begin(), inputs.end());
  }
  std::size_t r = 0;
  for (std::size_t s = 0; s < conv_.size(); ++s) {
    const ConvSlots& cs = conv_[s];
    ConvCache<T>& cc = ws->conv[s];
    const int h = cs.in_height, w = cs.in_width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t in_stride = plane * cs.in_channels;
    const std::size_t out_stride = plane * cs.out_channels;
    std::vector<T>& conv = cc.relu;
    conv.resize(out_stride * batch);
    const std::size_t pp = padded_plane(h, w);
    ws->pad.resize(pp * cs.in_channels);
    ws->wide.resize(static_cast<std::size_t>(h) * (w + 2));
    for (int b = 0; b < batch; ++b) {
      pad_planes(cc.input.data() + in_stride * b, cs.in_channels, h, w, ws->pad.data());
      conv3x3_forward(ws->pad.data(), cs.in_channels, h, w, &params_[cs.weight], &params_[cs.bias],
                      cs.out_channels, ws->wide.data(), conv.data() + out_stride * b);
    }
    for (T& v : conv) v = v > T(0) ? v : T(0);

    std::vector<T>& normed = cc.xhat;
    normed.resize(conv.size());
    cc.inv_std.resize(cs.out_channels);
    const double count = static_cast<double>(plane) * batch;
    T* run_mean = running.data() + r;
    T* run_var = running.data() + r + cs.out_channels;
    for (int c = 0; c < cs.out_channels; ++c) {
      double mean, var;
      if (batch_stats) {
        double sum = 0.0, sq = 0.0;
        for (int b = 0; b < batch; ++b) {
          sum_and_squares(conv.data() + out_stride * b + plane * c, plane, sum, sq);
        }
        mean = sum / count;
        var = std::max(0.0, sq / count - mean * mean);
        if (mode == Mode::kTrain) {
          run_mean[c] = static_cast<T>(kBatchNormMomentum * run_mean[c] +
                                       (1.0 - kBatchNormMomentum) * mean);
          run_var[c] = static_cast<T>(kBatchNormMomentum * run_var[c] +
                                      (1.0 - kBatchNormMomentum) * var);
        }
      } else {
        mean = run_mean[c];
        var = run_var[c];
      }
      const T istd = static_cast<T>(1.0 / std::sqrt(var + kBatchNormEps));
      const T tmean = static_cast<T>(mean);
      cc.inv_std[c] = istd;
      for (int b = 0; b < batch; ++b) {
        const T* __restrict p = conv.data() + out_stride * b + plane * c;
        T* __restrict q = normed.data() + out_stride * b + plane * c;
        for (std::size_t i = 0; i < plane; ++i) q[i] = (p[i] - tmean) * istd;
      }
    }
    r += 2 * static_cast<std::size_t>(cs.out_channels);

    const int oh = cs.out_height, ow = cs.out_width;
    const std::size_t pooled_plane = static_cast<std::size_t>(oh) * ow;
    std::vector<T>& pooled = s + 1 < conv_.size() ? ws->conv[s + 1].input : ws->dense[0].input;
    pooled.resize(pooled_plane * cs.out_channels * batch);
    cc.argmax.resize(pooled.size());
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < cs.out_channels; ++c) {
        const T gamma = params_[cs.gamma + c];
        const T beta = params_[cs.beta + c];
        const T* q = normed.data() + out_stride * b + plane * c;
        const std::size_t obase = (static_cast<std::size_t>(b) * cs.out_channels + c) * pooled_plane;
        for (int py = 0; py < oh; ++py) {
          for (int px = 0; px < ow; ++px) {
            std::uint32_t best = static_cast<std::uint32_t>((2 * py) * w + 2 * px);
            T best_v = gamma * q[best] + beta;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                auto idx = static_cast<std::uint32_t>((2 * py + dy) * w + 2 * px + dx);
                T v = gamma * q[idx] + beta;
                if (v > best_v) {
                  best_v = v;
                  best = idx;
                }
              }
            }
            pooled[obase + py * ow + px] = best_v;
            cc.argmax[obase + py * ow + px] = best;
          }
        }
      }
    }
  }

  for (std::size_t l = 0; l < dense_.size(); ++l) {
    const DenseSlots& d = dense_[l];
    const bool last = l + 1 == dense_.size();
    DenseCache<T>& dc = ws->dense[l];
    std::vector<T>& out = dc.output;
    out.resize(static_cast<std::size_t>(d.outputs) * batch);
    for (int b = 0; b < batch; ++b) {
      const T* x = dc.input.data() + static_cast<std::size_t>(b) * d.inputs;
      for (int o = 0; o < d.outputs; ++o) {
        const T* wr = &params_[d.weight + static_cast<std::size_t>(o) * d.inputs];
        T sum = dot(wr, x, d.inputs) + params_[d.bias + o];
        out[static_cast<std::size_t>(b) * d.outputs + o] = last ? sum : std::max(sum, T(0));
      }
    }
    if (!last) ws->dense[l + 1].input.assign(out.begin(), out.end());
  }
  std::vector<T> result = ws->dense.back().output;
  check_finite(result, "network output");
  return result;
}

template <class T>
void QNetwork<T>::backward(const Workspace<T>& ws, std::span<const T> grad_out,
                           std::span<T> grad) const {
  const int batch = ws.batch;
  if (grad.size() != params_.size()) throw ShapeMismatch("gradient buffer has the wrong size");
  if (grad_out.size() != static_cast<std::size_t>(spec_.outputs) * batch) {
    throw ShapeMismatch("output gradient has the wrong size");
  }
  if (ws.dense.size() != dense_.size() || ws.conv.size() != conv_.size()) {
    throw ShapeMismatch("workspace does not belong to this network");
  }
  std::vector<T>& delta = ws.delta;
  std::vector<T>& dx = ws.next_delta;
  delta.assign(grad_out.begin(), grad_out.end());
  for (std::size_t li = dense_.size(); li-- > 0;) {
    const DenseSlots& d = dense_[li];
    const DenseCache<T>& cache = ws.dense[li];
    const bool last = li + 1 == dense_.size();
    if (!last) {
      for (std::size_t i = 0; i < delta.size(); ++i) {
        if (!(cache.output[i] > T(0))) delta[i] = T(0);
      }
    }
    dx.assign(static_cast<std::size_t>(d.inputs) * batch, T(0));
    for (int b = 0; b < batch; ++b) {
      const T* __restrict x = cache.input.data() + static_cast<std::size_t>(b) * d.inputs;
      T* __restrict dxb = dx.data() + static_cast<std::size_t>(b) * d.inputs;
      for (int o = 0; o < d.outputs; ++o) {
        const T g = delta[static_cast<std::size_t>(b) * d.outputs + o];
        if (g == T(0)) continue;
        grad[d.bias + o] += g;
        T* __restrict gw = &grad[d.weight + static_cast<std::size_t>(o) * d.inputs];
        const T* __restrict wr = &params_[d.weight + static_cast<std::size_t>(o) * d.inputs];
        for (int i = 0; i < d.inputs; ++i) {
          gw[i] += g * x[i];
          dxb[i] += g * wr[i];
        }
      }
    }
    delta.swap(dx);
  }

  for (std::size_t s = conv_.size(); s-- > 0;) {
    const ConvSlots& cs = conv_[s];
    const ConvCache<T>& cache = ws.conv[s];
    const int h = cs.in_height, w = cs.in_width;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    const std::size_t out_stride = plane * cs.out_channels;
    const std::size_t pooled_plane = static_cast<std::size_t>(cs.out_height) * cs.out_width;

    // Unpool into d(bn output).
    std::vector<T>& dy = ws.dy;
    dy.assign(out_stride * batch, T(0));
    for (int b = 0; b < batch; ++b) {
      for (int c = 0; c < cs.out_channels; ++c) {
        const std::size_t pbase = (static_cast<std::size_t>(b) * cs.out_channels + c) * pooled_plane;
        T* dplane = dy.data() + out_stride * b + plane * c;
        for (std::size_t i = 0; i < pooled_plane; ++i) dplane[cache.argmax[pbase + i]] += delta[pbase + i];
      }
    }

    // Batch norm backward, then relu mask; dy becomes d(conv pre-activation).
    const double count = static_cast<double>(plane) * batch;
    for (int c = 0; c < cs.out_channels; ++c) {
      const T gamma = params_[cs.gamma + c];
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (int b = 0; b < batch; ++b) {
        const T* g = dy.data() + out_stride * b + plane * c;
        const T* xh = cache.xhat.data() + out_stride * b + plane * c;
        double unused = 0.0;
        sum_and_squares(g, plane, sum_dy, unused);
        sum_dy_xhat += static_cast<double>(dot(g, xh, static_cast<int>(plane)));
      }
      grad[cs.gamma + c] += static_cast<T>(sum_dy_xhat);
      grad[cs.beta + c] += static_cast<T>(sum_dy);
      // d xhat = dy * gamma, so the sums scale by gamma.
      const double k = static_cast<double>(cache.inv_std[c]) * gamma / count;
      const T kc = static_cast<T>(k * count);
      const T km = static_cast<T>(k * sum_dy);
      const T kx = static_cast<T>(k * sum_dy_xhat);
      for (int b = 0; b < batch; ++b) {
        T* __restrict g = dy.data() + out_stride * b + plane * c;
        const T* __restrict xh = cache.xhat.data() + out_stride * b + plane * c;
        const T* __restrict rl = cache.relu.data() + out_stride * b + plane * c;
        for (std::size_t i = 0; i < plane; ++i) {
          const T v = kc * g[i] - km - xh[i] * kx;
          g[i] = rl[i] > T(0) ? v : T(0);
        }
      }
    }

    const std::size_t in_stride = plane * cs.in_channels;
    std::vector<T>& din = ws.next_delta;
    din.resize(s > 0 ? in_stride * batch : 0);
    const std::size_t pp = padded_plane(h, w);
    const int pw = w + 2;
    ws.pad.resize(pp * cs.in_channels);
    ws.dpad.resize(pp * cs.in_channels);
    ws.wide.resize(static_cast<std::size_t>(h) * pw);
    for (int b = 0; b < batch; ++b) {
      pad_planes(cache.input.data() + in_stride * b, cs.in_channels, h, w, ws.pad.data());
      if (s > 0) std::fill(ws.dpad.begin(), ws.dpad.end(), T(0));
      conv3x3_backward(ws.pad.data(), cs.in_channels, h, w, &params_[cs.weight], cs.out_channels,
                       dy.data() + out_stride * b, &grad[cs.weight], &grad[cs.bias],
                       s > 0 ? ws.dpad.data() : nullptr, ws.wide.data());
      if (s == 0) continue;
      for (int c = 0; c < cs.in_channels; ++c) {
        for (int y = 0; y < h; ++y) {
          std::copy_n(ws.dpad.data() + c * pp + (y + 1) * pw + 1, w,
                      din.data() + in_stride * b + (static_cast<std::size_t>(c) * h + y) * w);
        }
      }
    }
    delta.swap(din);
  }
}

template class QNetwork<float>;
template class QNetwork<double>;

}  // namespace advicelab::qnet
