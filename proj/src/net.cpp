#include "dlglab/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dlglab {

using nlohmann::json;

void DlgModel::validate() const {
  if (conv.empty() || linear.empty())
    fail(ErrorCode::invalid_config, "model needs at least one conv and one linear layer");
  for (std::size_t k = 0; k < conv.size(); ++k) {
    const ConvLayer& layer = conv[k];
    if (layer.theta0.rows() != layer.theta1.rows() || layer.theta0.cols() != layer.theta1.cols())
      fail(ErrorCode::shape_mismatch, "conv layer " + std::to_string(k) + " theta shapes differ");
    if (k > 0 && conv[k - 1].theta0.cols() != layer.theta0.rows())
      fail(ErrorCode::shape_mismatch, "conv layer " + std::to_string(k) + " does not chain");
    if (k > 0 && residual && layer.theta0.rows() != layer.theta0.cols())
      fail(ErrorCode::residual_width_mismatch,
           "conv layer " + std::to_string(k) + " has a residual but unequal in/out widths");
  }
  if (linear.front().weight.rows() != 2 * conv.back().theta0.cols())
    fail(ErrorCode::shape_mismatch, "first linear layer must take the unwound conv output");
  for (std::size_t s = 0; s < linear.size(); ++s) {
    if (linear[s].bias.size() != linear[s].weight.cols())
      fail(ErrorCode::shape_mismatch, "linear layer " + std::to_string(s) + " bias size");
    if (s > 0 && linear[s - 1].weight.cols() != linear[s].weight.rows())
      fail(ErrorCode::shape_mismatch, "linear layer " + std::to_string(s) + " does not chain");
  }
}

DlgModel init_model(int in_channels, int conv_layers, int filters, int hidden, int linear_layers,
                    int classes, Rng& rng, bool residual, bool theta0_zero) {
  if (in_channels < 1 || conv_layers < 1 || filters < 1 || linear_layers < 1 || classes < 2 ||
      (linear_layers > 1 && hidden < 1))
    fail(ErrorCode::invalid_config, "model dimensions must be positive (and classes >= 2)");

  DlgModel model;
  model.residual = residual;
  model.theta0_zero = theta0_zero;

  auto glorot_complex = [&rng](int rows, int cols) {
    // variance split evenly between the two real components
    const double limit = std::sqrt(6.0 / (rows + cols)) / std::sqrt(2.0);
    CMat t(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        t(r, c) = cxd(rng.uniform(-limit, limit), rng.uniform(-limit, limit));
    return t;
  };
  auto glorot_real = [&rng](int rows, int cols) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    RMat w(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-limit, limit);
    return w;
  };

  for (int k = 0; k < conv_layers; ++k) {
    const int cin = (k == 0) ? in_channels : filters;
    ConvLayer layer{glorot_complex(cin, filters), glorot_complex(cin, filters)};
    if (theta0_zero) layer.theta0.setZero();
    model.conv.push_back(std::move(layer));
  }
  for (int s = 0; s < linear_layers; ++s) {
    const int in = (s == 0) ? 2 * filters : hidden;
    const int out = (s == linear_layers - 1) ? classes : hidden;
    model.linear.push_back({glorot_real(in, out), RVec::Zero(out)});
  }
  model.validate();
  return model;
}

CMat complex_relu(const CMat& z) {
  return z.unaryExpr([](cxd v) { return v.real() >= 0.0 ? v : cxd(0.0, 0.0); });
}

RMat unwind(const CMat& z) {
  RMat out(z.rows(), 2 * z.cols());
  out.leftCols(z.cols()) = z.real();
  out.rightCols(z.cols()) = z.imag();
  return out;
}

CMat lift_features(const CMat& incidence, const RMat& node_features, bool imag_equals_real) {
  if (incidence.rows() != node_features.rows())
    fail(ErrorCode::shape_mismatch, "incidence rows must match node feature rows");
  CMat x(node_features.rows(), node_features.cols());
  x.real() = node_features;
  if (imag_equals_real)
    x.imag() = node_features;
  else
    x.imag().setZero();
  return incidence.adjoint() * x;
}

CMat conv_forward(const CMat& op, const CMat& x, const CMat& theta0, const CMat& theta1,
                  bool use_residual) {
  if (op.rows() != op.cols() || op.cols() != x.rows())
    fail(ErrorCode::shape_mismatch, "operator/feature shapes do not chain");
  if (theta0.rows() != x.cols() || theta1.rows() != x.cols() || theta0.cols() != theta1.cols())
    fail(ErrorCode::shape_mismatch, "theta shapes do not match features");
  if (use_residual && theta0.rows() != theta0.cols())
    fail(ErrorCode::residual_width_mismatch, "residual needs equal in/out widths");
  CMat pre = x * theta0 + (op * x) * theta1;
  if (use_residual) pre += x;
  return complex_relu(pre);
}

namespace {

RMat softmax_rows(const RMat& z) {
  RMat out(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double mx = z.row(r).maxCoeff();
    const RVec e = (z.row(r).array() - mx).exp();
    out.row(r) = e.transpose() / e.sum();
  }
  return out;
}

/// Mean cross-entropy over the batch, computed from pre-softmax activations
/// via log-sum-exp.
double cross_entropy(const RMat& pre, const std::vector<int>& batch,
                     const std::vector<int>& labels) {
  if (batch.empty()) fail(ErrorCode::empty_split, "cross entropy over an empty batch");
  double acc = 0.0;
  for (int e : batch) {
    const int y = labels.at(static_cast<std::size_t>(e));
    if (y < 0 || y >= pre.cols()) fail(ErrorCode::invalid_config, "label out of range");
    const double mx = pre.row(e).maxCoeff();
    const double lse = mx + std::log((pre.row(e).array() - mx).exp().sum());
    acc += lse - pre(e, y);
  }
  return acc / static_cast<double>(batch.size());
}

double decay_penalty(const DlgModel& model, double weight_decay) {
  double sq = 0.0;
  for (const ConvLayer& layer : model.conv)
    sq += layer.theta0.squaredNorm() + layer.theta1.squaredNorm();
  for (const LinearLayer& layer : model.linear) sq += layer.weight.squaredNorm();
  return 0.5 * weight_decay * sq;
}

}  // namespace

Forward forward(const DlgModel& model, const CMat& op, const CMat& incidence,
                const RMat& node_features, bool imag_equals_real) {
  model.validate();
  if (incidence.cols() != op.rows())
    fail(ErrorCode::shape_mismatch, "incidence columns must match operator size");
  if (node_features.cols() != model.input_channels())
    fail(ErrorCode::shape_mismatch, "node feature channels must match the first conv layer");

  Forward out;
  ForwardTrace& tr = out.trace;
  tr.lifted = lift_features(incidence, node_features, imag_equals_real);

  CMat z = tr.lifted;
  for (std::size_t k = 0; k < model.conv.size(); ++k) {
    const bool use_residual = k > 0 && model.residual;
    CMat op_in = op * z;
    CMat pre = z * model.conv[k].theta0 + op_in * model.conv[k].theta1;
    if (use_residual) pre += z;
    tr.op_times_in.push_back(std::move(op_in));
    tr.conv_pre.push_back(pre);
    z = complex_relu(pre);
    tr.conv_out.push_back(z);
  }

  tr.unwound = unwind(z);
  RMat a = tr.unwound;
  for (std::size_t s = 0; s < model.linear.size(); ++s) {
    RMat pre = (a * model.linear[s].weight).rowwise() + model.linear[s].bias.transpose();
    tr.lin_pre.push_back(pre);
    if (s + 1 < model.linear.size()) {
      a = pre.cwiseMax(0.0);
      tr.lin_act.push_back(a);
    }
  }
  tr.probs = softmax_rows(tr.lin_pre.back());
  out.probs = tr.probs;
  return out;
}

LossAndGrads loss_and_grads(const DlgModel& model, const CMat& op, const ForwardTrace& trace,
                            const std::vector<int>& batch, const std::vector<int>& labels,
                            double weight_decay) {
  if (batch.empty()) fail(ErrorCode::empty_split, "gradient step needs a nonempty batch");
  const Eigen::Index m = trace.probs.rows();
  const Eigen::Index d = trace.probs.cols();

  LossAndGrads out;
  out.loss = cross_entropy(trace.lin_pre.back(), batch, labels) + decay_penalty(model, weight_decay);

  // Softmax + cross-entropy: dL/dpre = (probs - onehot) / |batch| on batch rows.
  RMat g_pre = RMat::Zero(m, d);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (int e : batch) {
    g_pre.row(e) = trace.probs.row(e) * inv;
    g_pre(e, labels.at(static_cast<std::size_t>(e))) -= inv;
  }

  const std::size_t S = model.linear.size();
  out.grads.linear.resize(S);
  for (std::size_t s = S; s-- > 0;) {
    const RMat& a_in = (s == 0) ? trace.unwound : trace.lin_act[s - 1];
    out.grads.linear[s].weight = a_in.transpose() * g_pre + weight_decay * model.linear[s].weight;
    out.grads.linear[s].bias = g_pre.colwise().sum().transpose();
    if (s > 0) {
      RMat g_act = g_pre * model.linear[s].weight.transpose();
      g_pre = g_act.cwiseProduct((trace.lin_pre[s - 1].array() > 0.0).cast<double>().matrix());
    } else {
      RMat g_unwound = g_pre * model.linear[0].weight.transpose();
      const Eigen::Index c = g_unwound.cols() / 2;
      // Complex cograds carry dL/dRe in the real part and dL/dIm in the imaginary part.
      CMat g_z(g_unwound.rows(), c);
      g_z.real() = g_unwound.leftCols(c);
      g_z.imag() = g_unwound.rightCols(c);

      const std::size_t L = model.conv.size();
      out.grads.conv.resize(L);
      for (std::size_t k = L; k-- > 0;) {
        const CMat& z_in = (k == 0) ? trace.lifted : trace.conv_out[k - 1];
        // complex-ReLU subgradient: both parts pass where Re(pre) >= 0
        CMat g_conv_pre =
            g_z.binaryExpr(trace.conv_pre[k],
                           [](cxd g, cxd pre) { return pre.real() >= 0.0 ? g : cxd(0.0, 0.0); });
        out.grads.conv[k].theta0 =
            z_in.adjoint() * g_conv_pre + weight_decay * model.conv[k].theta0;
        out.grads.conv[k].theta1 =
            trace.op_times_in[k].adjoint() * g_conv_pre + weight_decay * model.conv[k].theta1;

        CMat g_in = g_conv_pre * model.conv[k].theta0.adjoint() +
                    op.adjoint() * (g_conv_pre * model.conv[k].theta1.adjoint());
        if (k > 0 && model.residual) g_in += g_conv_pre;
        g_z = std::move(g_in);
      }
    }
  }
  return out;
}

double training_loss(const DlgModel& model, const CMat& op, const CMat& incidence,
                     const RMat& node_features, bool imag_equals_real,
                     const std::vector<int>& batch, const std::vector<int>& labels,
                     double weight_decay) {
  const Forward fwd = forward(model, op, incidence, node_features, imag_equals_real);
  return cross_entropy(fwd.trace.lin_pre.back(), batch, labels) +
         decay_penalty(model, weight_decay);
}

RVec pack_parameters(const std::vector<ConvLayer>& conv, const std::vector<LinearLayer>& linear) {
  Eigen::Index total = 0;
  for (const ConvLayer& l : conv) total += 4 * l.theta0.size();
  for (const LinearLayer& l : linear) total += l.weight.size() + l.bias.size();
  RVec flat(total);
  Eigen::Index at = 0;
  auto put_c = [&](const CMat& t) {
    const RMat re = t.real(), im = t.imag();
    flat.segment(at, re.size()) = Eigen::Map<const RVec>(re.data(), re.size());
    at += re.size();
    flat.segment(at, im.size()) = Eigen::Map<const RVec>(im.data(), im.size());
    at += im.size();
  };
  auto put_r = [&](const RMat& t) {
    flat.segment(at, t.size()) = Eigen::Map<const RVec>(t.data(), t.size());
    at += t.size();
  };
  for (const ConvLayer& l : conv) {
    put_c(l.theta0);
    put_c(l.theta1);
  }
  for (const LinearLayer& l : linear) {
    put_r(l.weight);
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void unpack_parameters(const RVec& flat, std::vector<ConvLayer>& conv,
                       std::vector<LinearLayer>& linear) {
  Eigen::Index at = 0;
  auto take_c = [&](CMat& t) {
    t.real() = Eigen::Map<const RMat>(flat.data() + at, t.rows(), t.cols());
    at += t.size();
    t.imag() = Eigen::Map<const RMat>(flat.data() + at, t.rows(), t.cols());
    at += t.size();
  };
  for (ConvLayer& l : conv) {
    take_c(l.theta0);
    take_c(l.theta1);
  }
  for (LinearLayer& l : linear) {
    l.weight = Eigen::Map<const RMat>(flat.data() + at, l.weight.rows(), l.weight.cols());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
  if (at != flat.size()) fail(ErrorCode::shape_mismatch, "parameter vector size mismatch");
}

void TrainConfig::validate() const {
  if (epochs < 1) fail(ErrorCode::invalid_config, "epochs must be >= 1");
  if (!(learning_rate > 0.0) || !(weight_decay >= 0.0))
    fail(ErrorCode::invalid_config, "learning rate must be positive, weight decay nonnegative");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0 && adam_eps > 0.0))
    fail(ErrorCode::invalid_config, "Adam parameters out of range");
  if (conv_layers < 1 || filters < 1 || linear_layers < 1 || (linear_layers > 1 && hidden < 1))
    fail(ErrorCode::invalid_config, "layer sizes must be positive");
}

Metrics metrics_from_probs(const RMat& probs, const std::vector<int>& labels,
                           const std::vector<int>& split, int num_classes) {
  if (split.empty()) fail(ErrorCode::empty_split, "metrics over an empty split");
  Metrics mt;
  mt.confusion = IMat::Zero(num_classes, num_classes);
  double nll = 0.0;
  for (int e : split) {
    Eigen::Index pred = 0;
    probs.row(e).maxCoeff(&pred);
    const int y = labels.at(static_cast<std::size_t>(e));
    mt.confusion(y, static_cast<int>(pred)) += 1;
    nll -= std::log(std::max(probs(e, y), 1e-300));
  }
  mt.loss = nll / static_cast<double>(split.size());

  mt.precision = RVec::Zero(num_classes);
  mt.recall = RVec::Zero(num_classes);
  mt.f1 = RVec::Zero(num_classes);
  for (int c = 0; c < num_classes; ++c) {
    const double tp = mt.confusion(c, c);
    const double pred_total = mt.confusion.col(c).sum();
    const double true_total = mt.confusion.row(c).sum();
    const double p = pred_total > 0 ? tp / pred_total : 0.0;
    const double r = true_total > 0 ? tp / true_total : 0.0;
    mt.precision[c] = 100.0 * p;
    mt.recall[c] = 100.0 * r;
    mt.f1[c] = (p + r) > 0.0 ? 100.0 * 2.0 * p * r / (p + r) : 0.0;
  }
  mt.macro_f1 = mt.f1.mean();
  return mt;
}

CMat conv_operator(const DirectedHypergraph& hg, const TrainConfig& cfg) {
  if (cfg.undirected) {
    const RMat op = cfg.laplacian == LaplacianKind::signless ? undirected_signless(hg)
                                                             : undirected_laplacian(hg);
    return op.cast<cxd>();
  }
  const DlgMatrices dm = directed_laplacians(hg);
  return cfg.laplacian == LaplacianKind::signless ? dm.signless : dm.laplacian;
}

CMat model_incidence(const DirectedHypergraph& hg, const TrainConfig& cfg) {
  if (cfg.undirected) return real_incidence(hg).cast<cxd>();
  return incidence_matrix(hg);
}

namespace {

struct AdamState {
  RVec m;
  RVec v;
  long t = 0;
};

void adam_step(AdamState& st, RVec& params, const RVec& grads, const TrainConfig& cfg) {
  ++st.t;
  st.m = cfg.beta1 * st.m + (1.0 - cfg.beta1) * grads;
  st.v = cfg.beta2 * st.v + (1.0 - cfg.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.t));
  params.array() -=
      cfg.learning_rate * (st.m.array() / bc1) / ((st.v.array() / bc2).sqrt() + cfg.adam_eps);
}

}  // namespace

TrainResult train(const Dataset& ds, const FoldSplit& fold, const TrainConfig& cfg) {
  cfg.validate();
  if (fold.train.empty() || fold.val.empty())
    fail(ErrorCode::empty_split, "training needs nonempty train and val splits");

  const CMat op = conv_operator(ds.hypergraph, cfg);
  const CMat b = model_incidence(ds.hypergraph, cfg);
  const int c0 = static_cast<int>(ds.node_features.cols());

  Rng init_rng(derive_seed(cfg.seed, "init"));
  DlgModel model = init_model(c0, cfg.conv_layers, cfg.filters, cfg.hidden, cfg.linear_layers,
                              ds.num_classes(), init_rng, cfg.residual, cfg.theta0_zero);

  RVec params = pack_parameters(model.conv, model.linear);
  AdamState adam{RVec::Zero(params.size()), RVec::Zero(params.size()), 0};

  TrainResult result{model, 0, -1.0, {}};
  RVec best_params = params;

  Forward fwd = forward(model, op, b, ds.node_features, cfg.imag_features);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    LossAndGrads lg =
        loss_and_grads(model, op, fwd.trace, fold.train, ds.labels, cfg.weight_decay);
    // Theta0 stays pinned at zero under the ablation: mask its gradient so the
    // optimizer never moves it.
    if (cfg.theta0_zero)
      for (ConvLayer& layer : lg.grads.conv) layer.theta0.setZero();
    adam_step(adam, params, pack_parameters(lg.grads.conv, lg.grads.linear), cfg);
    unpack_parameters(params, model.conv, model.linear);

    fwd = forward(model, op, b, ds.node_features, cfg.imag_features);
    EpochRecord rec;
    rec.train_loss = lg.loss;
    rec.train_macro_f1 =
        metrics_from_probs(fwd.probs, ds.labels, fold.train, ds.num_classes()).macro_f1;
    rec.val = metrics_from_probs(fwd.probs, ds.labels, fold.val, ds.num_classes());
    if (rec.val.macro_f1 > result.best_val_macro_f1) {
      result.best_val_macro_f1 = rec.val.macro_f1;
      result.best_epoch = epoch;
      best_params = params;
    }
    result.history.push_back(std::move(rec));
  }

  unpack_parameters(best_params, model.conv, model.linear);
  result.model = std::move(model);
  return result;
}

Metrics evaluate(const DlgModel& model, const Dataset& ds, const std::vector<int>& split,
                 const TrainConfig& cfg) {
  if (split.empty()) fail(ErrorCode::empty_split, "evaluate needs a nonempty split");
  const CMat op = conv_operator(ds.hypergraph, cfg);
  const CMat b = model_incidence(ds.hypergraph, cfg);
  const Forward fwd = forward(model, op, b, ds.node_features, cfg.imag_features);
  return metrics_from_probs(fwd.probs, ds.labels, split, ds.num_classes());
}

std::string serialize_model(const DlgModel& model) {
  json j;
  j["format"] = "dlgnet-model-v1";
  j["residual"] = model.residual;
  j["theta0_zero"] = model.theta0_zero;

  auto dump_r = [](const RMat& t) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      rows.push_back(std::vector<double>(t.row(r).begin(), t.row(r).end()));
    return rows;
  };
  json conv = json::array();
  for (const ConvLayer& layer : model.conv) {
    conv.push_back(json{{"theta0_re", dump_r(layer.theta0.real())},
                        {"theta0_im", dump_r(layer.theta0.imag())},
                        {"theta1_re", dump_r(layer.theta1.real())},
                        {"theta1_im", dump_r(layer.theta1.imag())}});
  }
  j["conv"] = std::move(conv);
  json linear = json::array();
  for (const LinearLayer& layer : model.linear) {
    linear.push_back(json{{"weight", dump_r(layer.weight)},
                          {"bias", std::vector<double>(layer.bias.begin(), layer.bias.end())}});
  }
  j["linear"] = std::move(linear);
  return j.dump(2);
}

DlgModel parse_model_text(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::parse_error, origin + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "dlgnet-model-v1")
    fail(ErrorCode::parse_error, origin + ": not a dlgnet-model-v1 file");

  auto load_r = [&origin](const json& rows) {
    if (!rows.is_array() || rows.empty())
      fail(ErrorCode::parse_error, origin + ": expected a nonempty matrix");
    RMat t(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows[0].size()));
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      const json& row = rows[static_cast<std::size_t>(r)];
      if (static_cast<Eigen::Index>(row.size()) != t.cols())
        fail(ErrorCode::parse_error, origin + ": ragged matrix rows");
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return t;
  };

  DlgModel model;
  model.residual = j.value("residual", true);
  model.theta0_zero = j.value("theta0_zero", false);
  for (const json& jl : j.at("conv")) {
    ConvLayer layer;
    const RMat t0r = load_r(jl.at("theta0_re")), t0i = load_r(jl.at("theta0_im"));
    const RMat t1r = load_r(jl.at("theta1_re")), t1i = load_r(jl.at("theta1_im"));
    layer.theta0.resize(t0r.rows(), t0r.cols());
    layer.theta0.real() = t0r;
    layer.theta0.imag() = t0i;
    layer.theta1.resize(t1r.rows(), t1r.cols());
    layer.theta1.real() = t1r;
    layer.theta1.imag() = t1i;
    model.conv.push_back(std::move(layer));
  }
  for (const json& jl : j.at("linear")) {
    LinearLayer layer;
    layer.weight = load_r(jl.at("weight"));
    const auto bias = jl.at("bias").get<std::vector<double>>();
    layer.bias = Eigen::Map<const RVec>(bias.data(), static_cast<Eigen::Index>(bias.size()));
    model.linear.push_back(std::move(layer));
  }
  model.validate();
  return model;
}

void write_model(const DlgModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io_error, "cannot write model file " + path);
  out << serialize_model(model) << "\n";
  if (!out) fail(ErrorCode::io_error, "failed writing model file " + path);
}

DlgModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open model file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_text(buf.str(), path);
}

}  // namespace dlglab
