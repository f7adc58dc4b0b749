#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mugen/common.hpp"
#include "json.hpp"

namespace mugen::nn {

enum class Activation { Linear, Relu, Sigmoid, Softmax };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct LayerSpec {
  std::size_t size = 0;
  Activation activation = Activation::Relu;
  /// Softmax is applied independently over consecutive groups of this many
  /// units (0 = the whole layer).
  std::size_t softmax_group = 0;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct NetworkSpec {
  std::size_t input_size = 0;
  std::vector<LayerSpec> layers;

  std::size_t output_size() const { return layers.empty() ? input_size : layers.back().size; }
  std::size_t parameter_count() const;
  /// Throws std::invalid_argument on zero-sized layers or bad softmax groups.
  void validate() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Intermediates of one forward pass: activations[0] is the input,
/// activations[l + 1] the output of layer l; pre[l] the affine pre-activation.
struct ForwardTape {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre;
  std::uint64_t layout_id = 0;

  const std::vector<double>& output() const { return activations.back(); }
};

/// Feed-forward network with a flat parameter vector. Per layer the
/// parameters are the row-major (out × in) weight matrix followed by the bias.
class Network {
 public:
  Network() = default;
  Network(NetworkSpec spec, std::vector<double> params);

  const NetworkSpec& spec() const { return spec_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { return params_; }
  std::size_t input_size() const { return spec_.input_size; }
  std::size_t output_size() const { return spec_.output_size(); }

  ForwardTape forward(std::span<const double> input) const;
  std::vector<double> predict(std::span<const double> input) const { return forward(input).output(); }

  /// Parameter gradient of <output_grad, output>. Optionally also returns the
  /// gradient with respect to the input.
  std::vector<double> backward(const ForwardTape& tape, std::span<const double> output_grad,
                               std::vector<double>* input_grad = nullptr) const;
  /// Same as backward() but adds into `grad`.
  void accumulate_backward(const ForwardTape& tape, std::span<const double> output_grad, std::span<double> grad,
                           std::vector<double>* input_grad = nullptr) const;

  /// Structural fingerprint linking tapes to the network that produced them.
  std::uint64_t layout_id() const;

 private:
  NetworkSpec spec_;
  std::vector<double> params_;
};

/// Weights ~ U(±sqrt(6 / (fan_in + fan_out))), biases 0.
Network init_glorot(const NetworkSpec& spec, Rng& rng);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
  double learning_rate = 1e-4;
  double l2 = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_network(const Network& net, double lr, double l2);
};

/// One Adam step that descends `gradient`, plus decoupled shrinkage
/// θ -= lr·λ·θ. Throws NumericalError on a non-finite gradient.
void adam_step(Network& net, AdamState& state, std::span<const double> gradient);

struct Checkpoint {
  Network net;
  AdamState adam;
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
  /// Free-form description of what the network generates (decoding rules,
  /// the training config, diagnostics).
  nlohmann::json meta = nlohmann::json::object();
};

constexpr int kCheckpointVersion = 1;

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws ArtifactError on a malformed file or version mismatch.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mugen::nn
