#include "mugen/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mugen::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
  }
  return "linear";
}

Activation parse_activation(const std::string& name) {
  if (name == "linear") return Activation::Linear;
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "softmax") return Activation::Softmax;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

std::size_t NetworkSpec::parameter_count() const {
  std::size_t count = 0;
  std::size_t in = input_size;
  for (const auto& l : layers) {
    count += l.size * in + l.size;
    in = l.size;
  }
  return count;
}

void NetworkSpec::validate() const {
  if (input_size == 0) throw std::invalid_argument("network input size must be non-zero");
  if (layers.empty()) throw std::invalid_argument("network needs at least one layer");
  for (const auto& l : layers) {
    if (l.size == 0) throw std::invalid_argument("network layers must be non-zero");
    if (l.activation == Activation::Softmax && l.softmax_group != 0 && l.size % l.softmax_group != 0) {
      throw std::invalid_argument("softmax group must divide the layer size");
    }
  }
}

Network::Network(NetworkSpec spec, std::vector<double> params) : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (params_.size() != spec_.parameter_count()) {
    throw std::invalid_argument("parameter count " + std::to_string(params_.size()) + " does not match spec (" +
                                std::to_string(spec_.parameter_count()) + ")");
  }
}

std::uint64_t Network::layout_id() const {
  std::uint64_t h = 1469598103934665603ULL ^ spec_.input_size;
  for (const auto& l : spec_.layers) {
    h = (h ^ l.size) * 1099511628211ULL;
    h = (h ^ static_cast<std::uint64_t>(l.activation)) * 1099511628211ULL;
    h = (h ^ l.softmax_group) * 1099511628211ULL;
  }
  return h;
}

namespace {

void softmax_inplace(std::span<double> v) {
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

void activate(const LayerSpec& l, const std::vector<double>& z, std::vector<double>& h) {
  h.resize(z.size());
  switch (l.activation) {
    case Activation::Linear: h = z; break;
    case Activation::Relu:
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] > 0.0 ? z[i] : 0.0;
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = 1.0 / (1.0 + std::exp(-z[i]));
      break;
    case Activation::Softmax: {
      h = z;
      const std::size_t g = l.softmax_group == 0 ? z.size() : l.softmax_group;
      for (std::size_t s = 0; s < z.size(); s += g) softmax_inplace(std::span<double>(h).subspan(s, g));
      break;
    }
  }
}

}  // namespace

ForwardTape Network::forward(std::span<const double> input) const {
  if (input.size() != spec_.input_size) {
    throw std::invalid_argument("network input has " + std::to_string(input.size()) + " values, expected " +
                                std::to_string(spec_.input_size));
  }
  for (double x : input) {
    if (!std::isfinite(x)) throw std::invalid_argument("network input is not finite");
  }
  ForwardTape tape;
  tape.layout_id = layout_id();
  tape.activations.reserve(spec_.layers.size() + 1);
  tape.pre.reserve(spec_.layers.size());
  tape.activations.emplace_back(input.begin(), input.end());
  std::size_t offset = 0;
  std::vector<std::size_t> nonzero;
  for (const auto& l : spec_.layers) {
    const std::vector<double>& x = tape.activations.back();
    const std::size_t in = x.size();
    const double* w = params_.data() + offset;
    const double* b = w + l.size * in;
    nonzero.clear();
    for (std::size_t j = 0; j < in; ++j) {
      if (x[j] != 0.0) nonzero.push_back(j);
    }
    std::vector<double> z(l.size);
    for (std::size_t i = 0; i < l.size; ++i) {
      const double* row = w + i * in;
      double acc = b[i];
      for (std::size_t j : nonzero) acc += row[j] * x[j];
      z[i] = acc;
    }
    std::vector<double> h;
    activate(l, z, h);
    tape.pre.push_back(std::move(z));
    tape.activations.push_back(std::move(h));
    offset += l.size * in + l.size;
  }
  return tape;
}

std::vector<double> Network::backward(const ForwardTape& tape, std::span<const double> output_grad,
                                      std::vector<double>* input_grad) const {
  std::vector<double> grad(params_.size(), 0.0);
  accumulate_backward(tape, output_grad, grad, input_grad);
  return grad;
}

void Network::accumulate_backward(const ForwardTape& tape, std::span<const double> output_grad,
                                  std::span<double> grad, std::vector<double>* input_grad) const {
  if (tape.layout_id != layout_id() || tape.activations.size() != spec_.layers.size() + 1) {
    throw std::invalid_argument("tape was not produced by this network");
  }
  if (output_grad.size() != output_size()) throw std::invalid_argument("output gradient has the wrong size");
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient buffer has the wrong size");
  std::vector<double> dh(output_grad.begin(), output_grad.end());
  std::vector<std::size_t> nonzero;
  std::size_t offset = params_.size();
  for (std::size_t li = spec_.layers.size(); li-- > 0;) {
    const LayerSpec& l = spec_.layers[li];
    const std::vector<double>& x = tape.activations[li];
    const std::vector<double>& z = tape.pre[li];
    const std::vector<double>& h = tape.activations[li + 1];
    const std::size_t in = x.size();
    offset -= l.size * in + l.size;

    std::vector<double> dz(l.size);
    switch (l.activation) {
      case Activation::Linear: dz = dh; break;
      case Activation::Relu:
        for (std::size_t i = 0; i < l.size; ++i) dz[i] = z[i] > 0.0 ? dh[i] : 0.0;
        break;
      case Activation::Sigmoid:
        for (std::size_t i = 0; i < l.size; ++i) dz[i] = dh[i] * h[i] * (1.0 - h[i]);
        break;
      case Activation::Softmax: {
        const std::size_t g = l.softmax_group == 0 ? l.size : l.softmax_group;
        for (std::size_t s = 0; s < l.size; s += g) {
          double dot = 0.0;
          for (std::size_t i = s; i < s + g; ++i) dot += h[i] * dh[i];
          for (std::size_t i = s; i < s + g; ++i) dz[i] = h[i] * (dh[i] - dot);
        }
        break;
      }
    }

    nonzero.clear();
    for (std::size_t j = 0; j < in; ++j) {
      if (x[j] != 0.0) nonzero.push_back(j);
    }
    const double* w = params_.data() + offset;
    double* gw = grad.data() + offset;
    double* gb = gw + l.size * in;
    const bool need_dx = li > 0 || input_grad != nullptr;
    std::vector<double> dx(need_dx ? in : 0, 0.0);
    for (std::size_t i = 0; i < l.size; ++i) {
      const double d = dz[i];
      if (d == 0.0) continue;
      gb[i] += d;
      double* grow = gw + i * in;
      const double* row = w + i * in;
      for (std::size_t j : nonzero) grow[j] += d * x[j];
      if (need_dx) {
        for (std::size_t j = 0; j < in; ++j) dx[j] += row[j] * d;
      }
    }
    dh = std::move(dx);
  }
  if (input_grad) *input_grad = std::move(dh);
}

Network init_glorot(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  std::vector<double> params;
  params.reserve(spec.parameter_count());
  std::size_t in = spec.input_size;
  for (const auto& l : spec.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(in + l.size));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = 0; k < l.size * in; ++k) params.push_back(u(rng));
    params.insert(params.end(), l.size, 0.0);
    in = l.size;
  }
  return Network(spec, std::move(params));
}

AdamState AdamState::for_network(const Network& net, double lr, double l2) {
  AdamState s;
  s.m.assign(net.params().size(), 0.0);
  s.v.assign(net.params().size(), 0.0);
  s.learning_rate = lr;
  s.l2 = l2;
  return s;
}

void adam_step(Network& net, AdamState& state, std::span<const double> gradient) {
  auto& theta = net.mutable_params();
  if (gradient.size() != theta.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw std::invalid_argument("adam_step shape mismatch");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) throw NumericalError("non-finite gradient passed to adam_step");
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = gradient[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    theta[i] -= state.learning_rate * (mhat / (std::sqrt(vhat) + state.epsilon) + state.l2 * theta[i]);
  }
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : ckpt.net.spec().layers) {
    layers.push_back({{"size", l.size}, {"activation", to_string(l.activation)}, {"softmax_group", l.softmax_group}});
  }
  return {
      {"format", "mugen-checkpoint"},
      {"version", kCheckpointVersion},
      {"network", {{"input_size", ckpt.net.spec().input_size}, {"layers", layers}}},
      {"params", ckpt.net.params()},
      {"adam",
       {{"m", ckpt.adam.m},
        {"v", ckpt.adam.v},
        {"step", ckpt.adam.step},
        {"learning_rate", ckpt.adam.learning_rate},
        {"l2", ckpt.adam.l2},
        {"beta1", ckpt.adam.beta1},
        {"beta2", ckpt.adam.beta2},
        {"epsilon", ckpt.adam.epsilon}}},
      {"seed", ckpt.seed},
      {"iteration", ckpt.iteration},
      {"meta", ckpt.meta},
  };
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.value("format", "") != "mugen-checkpoint") throw ArtifactError("not a mugen checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ArtifactError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
    }
    NetworkSpec spec;
    spec.input_size = j.at("network").at("input_size").get<std::size_t>();
    for (const auto& l : j.at("network").at("layers")) {
      spec.layers.push_back({l.at("size").get<std::size_t>(), parse_activation(l.at("activation").get<std::string>()),
                             l.value("softmax_group", std::size_t{0})});
    }
    Checkpoint c;
    c.net = Network(spec, j.at("params").get<std::vector<double>>());
    const auto& a = j.at("adam");
    c.adam.m = a.at("m").get<std::vector<double>>();
    c.adam.v = a.at("v").get<std::vector<double>>();
    c.adam.step = a.at("step").get<std::uint64_t>();
    c.adam.learning_rate = a.at("learning_rate").get<double>();
    c.adam.l2 = a.at("l2").get<double>();
    c.adam.beta1 = a.at("beta1").get<double>();
    c.adam.beta2 = a.at("beta2").get<double>();
    c.adam.epsilon = a.at("epsilon").get<double>();
    if (c.adam.m.size() != c.net.params().size() || c.adam.v.size() != c.net.params().size()) {
      throw ArtifactError("optimizer state does not match the parameter count");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    c.iteration = j.at("iteration").get<std::uint64_t>();
    c.meta = j.value("meta", nlohmann::json::object());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ArtifactError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArtifactError("cannot write checkpoint " + path);
  out << checkpoint_to_json(ckpt).dump() << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ArtifactError("checkpoint " + path + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace mugen::nn
