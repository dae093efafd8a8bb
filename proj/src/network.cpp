#include "fvss/network.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fvss::nn {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(sep, start);
    if (end == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string EncoderConfig::descriptor() const {
  std::ostringstream s;
  s << "in:" << input_channels << "x" << input_side << "x" << input_side << ";backbone="
    << backbone << ";head=" << projection_hidden << "," << projection_dim;
  return s.str();
}

EncoderConfig EncoderConfig::from_descriptor(const std::string& descriptor) {
  EncoderConfig cfg;
  for (const std::string& part : split(descriptor, ';')) {
    if (part.rfind("in:", 0) == 0) {
      const auto dims = split(part.substr(3), 'x');
      if (dims.size() != 3 || dims[1] != dims[2])
        throw std::invalid_argument("bad input shape in descriptor: " + part);
      cfg.input_channels = std::stoi(dims[0]);
      cfg.input_side = std::stoi(dims[1]);
    } else if (part.rfind("backbone=", 0) == 0) {
      cfg.backbone = part.substr(9);
    } else if (part.rfind("head=", 0) == 0) {
      const auto dims = split(part.substr(5), ',');
      if (dims.size() != 2) throw std::invalid_argument("bad head in descriptor: " + part);
      cfg.projection_hidden = std::stoi(dims[0]);
      cfg.projection_dim = std::stoi(dims[1]);
    } else {
      throw std::invalid_argument("unknown descriptor section: " + part);
    }
  }
  return cfg;
}

Network& Network::operator=(const Network& o) {
  if (this == &o) return *this;
  cfg_ = o.cfg_;
  backbone_end_ = o.backbone_end_;
  feature_dim_ = o.feature_dim_;
  layers_.clear();
  layers_.reserve(o.layers_.size());
  for (const auto& l : o.layers_) layers_.push_back(l->clone());
  return *this;
}

Network Network::build(const EncoderConfig& cfg) {
  if (cfg.input_side < 1 || cfg.input_channels < 1 || cfg.projection_hidden < 1 ||
      cfg.projection_dim < 1)
    throw std::invalid_argument("invalid encoder config");
  Network net;
  net.cfg_ = cfg;
  Shape shape = {static_cast<std::size_t>(cfg.input_channels),
                 static_cast<std::size_t>(cfg.input_side),
                 static_cast<std::size_t>(cfg.input_side)};
  for (const std::string& token : split(cfg.backbone, ',')) {
    if (token.empty()) throw std::invalid_argument("empty layer token in backbone");
    net.layers_.push_back(make_layer(token, shape));
    shape = net.layers_.back()->output_shape();
  }
  if (shape.size() != 1) {
    net.layers_.push_back(make_layer("flatten", shape));
    shape = net.layers_.back()->output_shape();
  }
  net.backbone_end_ = net.layers_.size();
  net.feature_dim_ = shape[0];

  net.layers_.push_back(
      make_layer("dense:" + std::to_string(cfg.projection_hidden), shape));
  shape = net.layers_.back()->output_shape();
  net.layers_.push_back(make_layer("relu", shape));
  net.layers_.push_back(make_layer("dense:" + std::to_string(cfg.projection_dim), shape));
  return net;
}

void Network::init_params(Rng& rng) {
  for (auto& layer : layers_) layer->init_params(rng);
}

Tensor Network::forward(const Tensor& input, std::vector<Tensor>* trace) const {
  if (input.rank() != 4 || input.shape[1] != static_cast<std::size_t>(cfg_.input_channels) ||
      input.shape[2] != static_cast<std::size_t>(cfg_.input_side) ||
      input.shape[3] != static_cast<std::size_t>(cfg_.input_side))
    throw std::invalid_argument("input does not match the configured encoder shape");
  Tensor act = input;
  if (trace) {
    trace->clear();
    trace->reserve(layers_.size() + 1);
    trace->push_back(act);
  }
  for (const auto& layer : layers_) {
    act = layer->forward(act);
    if (trace) trace->push_back(act);
  }
  return act;
}

Tensor Network::features(const Tensor& input) const {
  if (input.rank() != 4) throw std::invalid_argument("features expects an image batch");
  Tensor act = input;
  for (std::size_t i = 0; i < backbone_end_; ++i) act = layers_[i]->forward(act);
  return act;
}

void Network::backward(const std::vector<Tensor>& trace, const Tensor& dout,
                       std::vector<Tensor>& grads) const {
  if (trace.size() != layers_.size() + 1)
    throw std::invalid_argument("trace does not match the network");
  Tensor grad = dout;
  std::size_t grad_cursor = grads.size();
  // Walk layers in reverse; grads are laid out in forward parameter order.
  std::vector<std::size_t> starts(layers_.size());
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    starts[i] = cursor;
    cursor += layers_[i]->params().size();
  }
  if (grad_cursor != cursor) throw std::invalid_argument("grads size mismatch");

  for (std::size_t i = layers_.size(); i-- > 0;) {
    grad = layers_[i]->backward(
        trace[i], trace[i + 1], grad,
        std::span<Tensor>(grads.data() + starts[i], layers_[i]->params().size()));
  }
}

std::vector<NamedParam> Network::parameters() {
  std::vector<NamedParam> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto ps = layers_[i]->params();
    for (std::size_t j = 0; j < ps.size(); ++j)
      out.push_back({layers_[i]->kind() + std::to_string(i) + (j == 0 ? ".weight" : ".bias"),
                     ps[j]});
  }
  return out;
}

std::vector<NamedParamView> Network::parameters() const {
  std::vector<NamedParamView> out;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto ps = static_cast<const Layer&>(*layers_[i]).params();
    for (std::size_t j = 0; j < ps.size(); ++j)
      out.push_back({layers_[i]->kind() + std::to_string(i) + (j == 0 ? ".weight" : ".bias"),
                     ps[j]});
  }
  return out;
}

std::vector<Tensor> Network::zero_grads() const {
  std::vector<Tensor> grads;
  for (const auto& p : parameters()) grads.push_back(Tensor::zeros_like(*p.tensor));
  return grads;
}

Tensor to_input_tensor(std::span<const ImageU8* const> images) {
  if (images.empty()) throw std::invalid_argument("empty image batch");
  const int side = images[0]->width;
  Tensor out({images.size(), 3, static_cast<std::size_t>(side), static_cast<std::size_t>(side)});
  for (std::size_t b = 0; b < images.size(); ++b) {
    const ImageU8& img = *images[b];
    if (img.width != side || img.height != side)
      throw std::invalid_argument("mixed image sizes in batch");
    for (int y = 0; y < side; ++y)
      for (int x = 0; x < side; ++x)
        for (int c = 0; c < 3; ++c)
          out[((b * 3 + c) * side + y) * side + x] = img.at(x, y, c) / 255.0;
  }
  return out;
}

Tensor to_input_tensor(const ImageU8& image) {
  const ImageU8* ptr = &image;
  return to_input_tensor(std::span<const ImageU8* const>(&ptr, 1));
}

EmbedResult normalize_rows(const Tensor& raw) {
  if (raw.rank() != 2) throw std::invalid_argument("embeddings must be a [B, d] matrix");
  const std::size_t batch = raw.shape[0], dim = raw.shape[1];
  EmbedResult result;
  result.embeddings = Tensor({batch, dim});
  result.degenerate.assign(batch, false);
  for (std::size_t b = 0; b < batch; ++b) {
    double norm_sq = 0.0;
    for (std::size_t d = 0; d < dim; ++d) norm_sq += raw[b * dim + d] * raw[b * dim + d];
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) {
      result.degenerate[b] = true;
      continue;
    }
    for (std::size_t d = 0; d < dim; ++d) result.embeddings[b * dim + d] = raw[b * dim + d] / norm;
  }
  return result;
}

EmbedResult embed(const Network& net, const Tensor& input_batch) {
  return normalize_rows(net.forward(input_batch));
}

}  // namespace fvss::nn
