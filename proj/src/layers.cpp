#include "fvss/layers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fvss::nn {

namespace {

std::size_t flat(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

// Fan-in scaled uniform: U(-limit, limit) with limit = sqrt(3 / fan_in),
// biases zero.
void fill_uniform(Tensor& t, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (double& x : t.v) x = rng.uniform(-limit, limit);
}

class ConvLayer final : public Layer {
 public:
  ConvLayer(std::size_t out_c, std::size_t k, std::size_t stride, std::size_t pad,
            const Shape& in_shape)
      : k_(k), stride_(stride), pad_(pad), in_shape_(in_shape) {
    if (in_shape.size() != 3) throw std::invalid_argument("conv expects a C,H,W input");
    const std::size_t h = in_shape[1], w = in_shape[2];
    if (h + 2 * pad < k || w + 2 * pad < k)
      throw std::invalid_argument("conv kernel larger than padded input");
    out_shape_ = {out_c, (h + 2 * pad - k) / stride + 1, (w + 2 * pad - k) / stride + 1};
    weight_ = Tensor({out_c, in_shape[0], k, k});
    bias_ = Tensor({out_c});
  }

  std::string kind() const override { return "conv"; }
  std::string spec_token() const override {
    std::ostringstream s;
    s << "conv:" << out_shape_[0] << ":" << k_ << ":" << stride_ << ":" << pad_;
    return s.str();
  }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    const std::size_t batch = in.shape[0];
    const auto [ic, ih, iw] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const auto [oc, oh, ow] = std::tuple(out_shape_[0], out_shape_[1], out_shape_[2]);
    Tensor out({batch, oc, oh, ow});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            double acc = bias_[o];
            for (std::size_t c = 0; c < ic; ++c)
              for (std::size_t ky = 0; ky < k_; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                          static_cast<std::ptrdiff_t>(pad_);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
                for (std::size_t kx = 0; kx < k_; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                            static_cast<std::ptrdiff_t>(pad_);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
                  acc += weight_[((o * ic + c) * k_ + ky) * k_ + kx] *
                         in[((b * ic + c) * ih + iy) * iw + ix];
                }
              }
            out[((b * oc + o) * oh + oy) * ow + ox] = acc;
          }
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor&, const Tensor& dout,
                  std::span<Tensor> param_grads) const override {
    const std::size_t batch = in.shape[0];
    const auto [ic, ih, iw] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const auto [oc, oh, ow] = std::tuple(out_shape_[0], out_shape_[1], out_shape_[2]);
    Tensor din(in.shape);
    Tensor& dw = param_grads[0];
    Tensor& db = param_grads[1];
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const double g = dout[((b * oc + o) * oh + oy) * ow + ox];
            if (g == 0.0) continue;
            db[o] += g;
            for (std::size_t c = 0; c < ic; ++c)
              for (std::size_t ky = 0; ky < k_; ++ky) {
                const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride_ + ky) -
                                          static_cast<std::ptrdiff_t>(pad_);
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(ih)) continue;
                for (std::size_t kx = 0; kx < k_; ++kx) {
                  const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride_ + kx) -
                                            static_cast<std::ptrdiff_t>(pad_);
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(iw)) continue;
                  const std::size_t widx = ((o * ic + c) * k_ + ky) * k_ + kx;
                  const std::size_t iidx = ((b * ic + c) * ih + iy) * iw + ix;
                  dw[widx] += g * in[iidx];
                  din[iidx] += g * weight_[widx];
                }
              }
          }
    return din;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::vector<const Tensor*> params() const override { return {&weight_, &bias_}; }
  void init_params(Rng& rng) override {
    fill_uniform(weight_, in_shape_[0] * k_ * k_, rng);
    std::fill(bias_.v.begin(), bias_.v.end(), 0.0);
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<ConvLayer>(*this); }

 private:
  std::size_t k_, stride_, pad_;
  Shape in_shape_, out_shape_;
  Tensor weight_, bias_;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t out_dim, const Shape& in_shape) : in_shape_(in_shape) {
    if (in_shape.size() != 1) throw std::invalid_argument("dense expects a flat input");
    out_shape_ = {out_dim};
    weight_ = Tensor({out_dim, in_shape[0]});
    bias_ = Tensor({out_dim});
  }

  std::string kind() const override { return "dense"; }
  std::string spec_token() const override { return "dense:" + std::to_string(out_shape_[0]); }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    const std::size_t batch = in.shape[0], din = in_shape_[0], dout = out_shape_[0];
    Tensor out({batch, dout});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < dout; ++o)
        out[b * dout + o] = bias_[o] + dot(weight_, in, o * din, b * din, din);
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor&, const Tensor& dout,
                  std::span<Tensor> param_grads) const override {
    const std::size_t batch = in.shape[0], din_n = in_shape_[0], dout_n = out_shape_[0];
    Tensor din(in.shape);
    Tensor& dw = param_grads[0];
    Tensor& db = param_grads[1];
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t o = 0; o < dout_n; ++o) {
        const double g = dout[b * dout_n + o];
        if (g == 0.0) continue;
        db[o] += g;
        for (std::size_t d = 0; d < din_n; ++d) {
          dw[o * din_n + d] += g * in[b * din_n + d];
          din[b * din_n + d] += g * weight_[o * din_n + d];
        }
      }
    return din;
  }

  std::vector<Tensor*> params() override { return {&weight_, &bias_}; }
  std::vector<const Tensor*> params() const override { return {&weight_, &bias_}; }
  void init_params(Rng& rng) override {
    fill_uniform(weight_, in_shape_[0], rng);
    std::fill(bias_.v.begin(), bias_.v.end(), 0.0);
  }
  std::unique_ptr<Layer> clone() const override { return std::make_unique<DenseLayer>(*this); }

 private:
  Shape in_shape_, out_shape_;
  Tensor weight_, bias_;
};

class ActivationLayer final : public Layer {
 public:
  ActivationLayer(bool use_tanh, const Shape& in_shape)
      : tanh_(use_tanh), in_shape_(in_shape), out_shape_(in_shape) {}

  std::string kind() const override { return tanh_ ? "tanh" : "relu"; }
  std::string spec_token() const override { return kind(); }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    Tensor out = in;
    if (tanh_)
      for (double& x : out.v) x = std::tanh(x);
    else
      for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor& out, const Tensor& dout,
                  std::span<Tensor>) const override {
    Tensor din(in.shape);
    if (tanh_)
      for (std::size_t i = 0; i < in.size(); ++i) din[i] = dout[i] * (1.0 - out[i] * out[i]);
    else
      for (std::size_t i = 0; i < in.size(); ++i) din[i] = in[i] > 0.0 ? dout[i] : 0.0;
    return din;
  }

  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ActivationLayer>(*this);
  }

 private:
  bool tanh_;
  Shape in_shape_, out_shape_;
};

class PoolLayer final : public Layer {
 public:
  PoolLayer(bool max_pool, std::size_t k, const Shape& in_shape)
      : max_(max_pool), k_(k), in_shape_(in_shape) {
    if (in_shape.size() != 3) throw std::invalid_argument("pool expects a C,H,W input");
    if (in_shape[1] < k || in_shape[2] < k)
      throw std::invalid_argument("pool window larger than input");
    out_shape_ = {in_shape[0], in_shape[1] / k, in_shape[2] / k};
  }

  std::string kind() const override { return max_ ? "maxpool" : "avgpool"; }
  std::string spec_token() const override { return kind() + ":" + std::to_string(k_); }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    const std::size_t batch = in.shape[0];
    const auto [c_n, ih, iw] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const auto [oc, oh, ow] = std::tuple(out_shape_[0], out_shape_[1], out_shape_[2]);
    (void)oc;
    Tensor out({batch, c_n, oh, ow});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < c_n; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            double acc = max_ ? -1e300 : 0.0;
            for (std::size_t ky = 0; ky < k_; ++ky)
              for (std::size_t kx = 0; kx < k_; ++kx) {
                const double x = in[((b * c_n + c) * ih + oy * k_ + ky) * iw + ox * k_ + kx];
                acc = max_ ? std::max(acc, x) : acc + x;
              }
            out[((b * c_n + c) * oh + oy) * ow + ox] =
                max_ ? acc : acc / static_cast<double>(k_ * k_);
          }
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor& out, const Tensor& dout,
                  std::span<Tensor>) const override {
    const std::size_t batch = in.shape[0];
    const auto [c_n, ih, iw] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const auto [oc, oh, ow] = std::tuple(out_shape_[0], out_shape_[1], out_shape_[2]);
    (void)oc;
    Tensor din(in.shape);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < c_n; ++c)
        for (std::size_t oy = 0; oy < oh; ++oy)
          for (std::size_t ox = 0; ox < ow; ++ox) {
            const std::size_t oidx = ((b * c_n + c) * oh + oy) * ow + ox;
            const double g = dout[oidx];
            if (max_) {
              // route to the first window element equal to the max
              const double m = out[oidx];
              for (std::size_t ky = 0; ky < k_; ++ky) {
                bool routed = false;
                for (std::size_t kx = 0; kx < k_; ++kx) {
                  const std::size_t iidx =
                      ((b * c_n + c) * ih + oy * k_ + ky) * iw + ox * k_ + kx;
                  if (in[iidx] == m) {
                    din[iidx] += g;
                    routed = true;
                    break;
                  }
                }
                if (routed) break;
              }
            } else {
              const double share = g / static_cast<double>(k_ * k_);
              for (std::size_t ky = 0; ky < k_; ++ky)
                for (std::size_t kx = 0; kx < k_; ++kx)
                  din[((b * c_n + c) * ih + oy * k_ + ky) * iw + ox * k_ + kx] += share;
            }
          }
    return din;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<PoolLayer>(*this); }

 private:
  bool max_;
  std::size_t k_;
  Shape in_shape_, out_shape_;
};

class GlobalAvgPoolLayer final : public Layer {
 public:
  explicit GlobalAvgPoolLayer(const Shape& in_shape) : in_shape_(in_shape) {
    if (in_shape.size() != 3) throw std::invalid_argument("gap expects a C,H,W input");
    out_shape_ = {in_shape[0]};
  }

  std::string kind() const override { return "gap"; }
  std::string spec_token() const override { return "gap"; }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    const std::size_t batch = in.shape[0];
    const auto [c_n, h, w] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const double scale = 1.0 / static_cast<double>(h * w);
    Tensor out({batch, c_n});
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < c_n; ++c) {
        double acc = 0.0;
        for (std::size_t i = 0; i < h * w; ++i) acc += in[(b * c_n + c) * h * w + i];
        out[b * c_n + c] = acc * scale;
      }
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor&, const Tensor& dout,
                  std::span<Tensor>) const override {
    const std::size_t batch = in.shape[0];
    const auto [c_n, h, w] = std::tuple(in_shape_[0], in_shape_[1], in_shape_[2]);
    const double scale = 1.0 / static_cast<double>(h * w);
    Tensor din(in.shape);
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < c_n; ++c) {
        const double g = dout[b * c_n + c] * scale;
        for (std::size_t i = 0; i < h * w; ++i) din[(b * c_n + c) * h * w + i] = g;
      }
    return din;
  }

  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<GlobalAvgPoolLayer>(*this);
  }

 private:
  Shape in_shape_, out_shape_;
};

class FlattenLayer final : public Layer {
 public:
  explicit FlattenLayer(const Shape& in_shape) : in_shape_(in_shape) {
    out_shape_ = {flat(in_shape)};
  }

  std::string kind() const override { return "flatten"; }
  std::string spec_token() const override { return "flatten"; }
  const Shape& input_shape() const override { return in_shape_; }
  const Shape& output_shape() const override { return out_shape_; }

  Tensor forward(const Tensor& in) const override {
    Tensor out = in;
    out.shape = {in.shape[0], out_shape_[0]};
    return out;
  }

  Tensor backward(const Tensor& in, const Tensor&, const Tensor& dout,
                  std::span<Tensor>) const override {
    Tensor din = dout;
    din.shape = in.shape;
    return din;
  }

  std::unique_ptr<Layer> clone() const override { return std::make_unique<FlattenLayer>(*this); }

 private:
  Shape in_shape_, out_shape_;
};

std::vector<std::size_t> parse_args(const std::string& token) {
  std::vector<std::size_t> args;
  std::size_t pos = token.find(':');
  while (pos != std::string::npos) {
    const std::size_t next = token.find(':', pos + 1);
    const std::string piece = token.substr(pos + 1, next == std::string::npos
                                                        ? std::string::npos
                                                        : next - pos - 1);
    args.push_back(static_cast<std::size_t>(std::stoull(piece)));
    pos = next;
  }
  return args;
}

}  // namespace

const std::vector<std::string>& registered_layer_kinds() {
  static const std::vector<std::string> kinds = {"conv",    "dense", "relu",    "tanh",
                                                 "maxpool", "avgpool", "gap", "flatten"};
  return kinds;
}

std::unique_ptr<Layer> make_layer(const std::string& token, const Shape& input_shape) {
  const std::string name = token.substr(0, token.find(':'));
  std::vector<std::size_t> args;
  try {
    args = parse_args(token);
  } catch (const std::exception&) {
    throw std::invalid_argument("malformed layer token: " + token);
  }
  if (name == "conv") {
    if (args.size() < 2) throw std::invalid_argument("conv needs out-channels and kernel");
    const std::size_t out_c = args[0], k = args[1];
    const std::size_t stride = args.size() > 2 ? args[2] : 1;
    const std::size_t pad = args.size() > 3 ? args[3] : (k - 1) / 2;
    if (out_c == 0 || k == 0 || stride == 0) throw std::invalid_argument("bad conv size");
    return std::make_unique<ConvLayer>(out_c, k, stride, pad, input_shape);
  }
  if (name == "dense") {
    if (args.size() != 1 || args[0] == 0) throw std::invalid_argument("dense needs a width");
    return std::make_unique<DenseLayer>(args[0], input_shape);
  }
  if (name == "relu") return std::make_unique<ActivationLayer>(false, input_shape);
  if (name == "tanh") return std::make_unique<ActivationLayer>(true, input_shape);
  if (name == "maxpool" || name == "avgpool") {
    if (args.size() != 1 || args[0] == 0) throw std::invalid_argument("pool needs a window");
    return std::make_unique<PoolLayer>(name == "maxpool", args[0], input_shape);
  }
  if (name == "gap") return std::make_unique<GlobalAvgPoolLayer>(input_shape);
  if (name == "flatten") return std::make_unique<FlattenLayer>(input_shape);
  throw std::invalid_argument("unknown layer kind: " + name);
}

}  // namespace fvss::nn
