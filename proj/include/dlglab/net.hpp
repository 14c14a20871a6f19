#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlglab/data.hpp"
#include "dlglab/dlg.hpp"
#include "dlglab/rng.hpp"

namespace dlglab {

enum class LaplacianKind { laplacian, signless };

/// One spectral convolution layer: Z = phi(X Theta0 + (Op X) Theta1 [+ X]).
struct ConvLayer {
  CMat theta0;  // c_in x c_out
  CMat theta1;  // c_in x c_out
};

struct LinearLayer {
  RMat weight;  // in x out
  RVec bias;    // out
};

struct DlgModel {
  std::vector<ConvLayer> conv;
  std::vector<LinearLayer> linear;
  bool residual = true;      // skip connection on every conv layer except the first
  bool theta0_zero = false;  // Theta0 pinned to zero (ablation)

  int input_channels() const { return static_cast<int>(conv.front().theta0.rows()); }
  int conv_out_channels() const { return static_cast<int>(conv.back().theta0.cols()); }
  int classes() const { return static_cast<int>(linear.back().weight.cols()); }

  /// Checks that layer shapes chain and residual widths match.
  void validate() const;
};

/// Glorot-style initialization; complex parameters split the variance evenly
/// between real and imaginary parts. Biases start at zero.
DlgModel init_model(int in_channels, int conv_layers, int filters, int hidden, int linear_layers,
                    int classes, Rng& rng, bool residual = true, bool theta0_zero = false);

std::string serialize_model(const DlgModel& model);
DlgModel parse_model_text(const std::string& text, const std::string& origin = "<memory>");
void write_model(const DlgModel& model, const std::string& path);
DlgModel load_model(const std::string& path);

/// phi(z) = z when Re(z) >= 0, else 0. Applied entry-wise.
CMat complex_relu(const CMat& z);

/// Concatenates real and imaginary parts: m x c -> m x 2c.
RMat unwind(const CMat& z);

/// Hyperedge features from node features: X = B* X'. With imag_equals_real
/// the node features are used as both real and imaginary input parts.
CMat lift_features(const CMat& incidence, const RMat& node_features,
                   bool imag_equals_real = false);

/// Single convolution layer application (shape-checked).
CMat conv_forward(const CMat& op, const CMat& x, const CMat& theta0, const CMat& theta1,
                  bool use_residual);

/// Cached intermediate values of one full forward pass (backprop inputs).
struct ForwardTrace {
  CMat lifted;
  std::vector<CMat> conv_pre;
  std::vector<CMat> conv_out;
  std::vector<CMat> op_times_in;  // Op * layer input, reused in the backward pass
  RMat unwound;
  std::vector<RMat> lin_pre;
  std::vector<RMat> lin_act;
  RMat probs;
};

struct Forward {
  RMat probs;  // m x d, softmax rows
  ForwardTrace trace;
};

Forward forward(const DlgModel& model, const CMat& op, const CMat& incidence,
                const RMat& node_features, bool imag_equals_real = false);

/// Gradient container with the same tensor shapes as the model.
struct ModelGrads {
  std::vector<ConvLayer> conv;
  std::vector<LinearLayer> linear;
};

struct LossAndGrads {
  double loss = 0.0;
  ModelGrads grads;
};

/// Mean cross-entropy over the batch plus an L2 penalty on Theta and linear
/// weights (not biases). Gradients by reverse accumulation; each complex
/// parameter is treated as an independent (real, imaginary) pair and the
/// complex-ReLU subgradient passes both parts through where Re >= 0.
LossAndGrads loss_and_grads(const DlgModel& model, const CMat& op, const ForwardTrace& trace,
                            const std::vector<int>& batch, const std::vector<int>& labels,
                            double weight_decay);

/// Loss recomputed from scratch at the current parameters; the finite
/// difference oracle for loss_and_grads.
double training_loss(const DlgModel& model, const CMat& op, const CMat& incidence,
                     const RMat& node_features, bool imag_equals_real,
                     const std::vector<int>& batch, const std::vector<int>& labels,
                     double weight_decay);

RVec pack_parameters(const std::vector<ConvLayer>& conv, const std::vector<LinearLayer>& linear);
void unpack_parameters(const RVec& flat, std::vector<ConvLayer>& conv,
                       std::vector<LinearLayer>& linear);

struct TrainConfig {
  int epochs = 1000;
  double learning_rate = 5e-3;
  double weight_decay = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  int conv_layers = 2;
  int filters = 64;
  int hidden = 64;
  int linear_layers = 2;

  bool residual = true;
  bool theta0_zero = false;
  bool imag_features = false;
  bool undirected = false;  // direction-blind ablation: 0/1 incidence + line-graph Laplacian
  LaplacianKind laplacian = LaplacianKind::laplacian;

  void validate() const;
};

/// Classification metrics on one split. F1 values are percentages.
struct Metrics {
  double macro_f1 = 0.0;
  RVec precision;
  RVec recall;
  RVec f1;
  IMat confusion;  // rows = true class, cols = predicted
  double loss = 0.0;
};

Metrics metrics_from_probs(const RMat& probs, const std::vector<int>& labels,
                           const std::vector<int>& split, int num_classes);

/// Convolution operator and incidence matrix selected by the config
/// (directed/undirected, Laplacian/signless).
CMat conv_operator(const DirectedHypergraph& hg, const TrainConfig& cfg);
CMat model_incidence(const DirectedHypergraph& hg, const TrainConfig& cfg);

struct EpochRecord {
  double train_loss = 0.0;
  double train_macro_f1 = 0.0;
  Metrics val;
};

struct TrainResult {
  DlgModel model;  // parameters from the epoch with the best validation macro F1
  int best_epoch = 0;
  double best_val_macro_f1 = 0.0;
  std::vector<EpochRecord> history;
};

/// Full-batch Adam training on one fold, deterministic for a given seed.
TrainResult train(const Dataset& ds, const FoldSplit& fold, const TrainConfig& cfg);

Metrics evaluate(const DlgModel& model, const Dataset& ds, const std::vector<int>& split,
                 const TrainConfig& cfg);

}  // namespace dlglab
