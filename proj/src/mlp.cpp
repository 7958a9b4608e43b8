// Copyright The mtdyn Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mtdyn/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mtdyn/rng.hpp"

namespace mtdyn {

void MLPWeights::validate() const {
  if (layer_sizes.size() < 2) throw ConfigError("mlp: need at least input and output layers");
  if (weights.size() + 1 != layer_sizes.size() || biases.size() != weights.size())
    throw ConfigError("mlp: layer count mismatch");
  for (size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != layer_sizes[k + 1] || weights[k].cols() != layer_sizes[k])
      throw ConfigError("mlp: weight matrix " + std::to_string(k) + " has wrong shape");
    if (biases[k].size() != layer_sizes[k + 1])
      throw ConfigError("mlp: bias vector " + std::to_string(k) + " has wrong size");
  }
  if (input_mean.size() != input_dim() || input_scale.size() != input_dim() ||
      output_mean.size() != output_dim() || output_scale.size() != output_dim())
    throw ConfigError("mlp: normalization statistics have wrong size");
}

MatX mlp_forward_batch(const MLPWeights& w, const MatX& inputs) {
  if (inputs.rows() != w.input_dim())
    throw ConfigError("mlp: input dimension mismatch: expected " + std::to_string(w.input_dim()) +
                      ", got " + std::to_string(inputs.rows()));
  MatX a = (inputs.colwise() - w.input_mean).array().colwise() / w.input_scale.array();
  const size_t nl = w.weights.size();
  for (size_t k = 0; k < nl; ++k) {
    a = (w.weights[k] * a).colwise() + w.biases[k];
    if (k + 1 < nl) a = a.array().tanh();
  }
  return (a.array().colwise() * w.output_scale.array()).colwise() + w.output_mean.array();
}

VecX mlp_forward(const MLPWeights& w, const VecX& input) {
  return mlp_forward_batch(w, input);
}

std::vector<MatX> mlp_input_jacobian_batch(const MLPWeights& w, const MatX& inputs) {
  if (inputs.rows() != w.input_dim()) throw ConfigError("mlp: input dimension mismatch");
  const int nb = static_cast<int>(inputs.cols());
  const size_t nl = w.weights.size();
  // Forward pass keeping hidden activations.
  std::vector<MatX> act(nl);  // act[k] = tanh output of hidden layer k (k < nl-1)
  MatX a = (inputs.colwise() - w.input_mean).array().colwise() / w.input_scale.array();
  for (size_t k = 0; k + 1 < nl; ++k) {
    a = ((w.weights[k] * a).colwise() + w.biases[k]).array().tanh();
    act[k] = a;
  }
  std::vector<MatX> out(nb);
  for (int i = 0; i < nb; ++i) {
    MatX m = w.weights[nl - 1];
    for (size_t k = nl - 1; k-- > 0;) {
      const VecX d = 1.0 - act[k].col(i).array().square();
      m = (m.array().rowwise() * d.transpose().array()).matrix() * w.weights[k];
    }
    out[i] = (m.array().colwise() * w.output_scale.array()).rowwise() /
             w.input_scale.transpose().array();
  }
  return out;
}

MatX mlp_input_jacobian(const MLPWeights& w, const VecX& input) {
  return mlp_input_jacobian_batch(w, input)[0];
}

namespace {

MLPWeights init_network(int d_in, int d_out, const std::vector<int>& hidden, Rng& rng) {
  MLPWeights w;
  w.layer_sizes.push_back(d_in);
  for (int h : hidden) w.layer_sizes.push_back(h);
  w.layer_sizes.push_back(d_out);
  for (size_t k = 0; k + 1 < w.layer_sizes.size(); ++k) {
    const int rows = w.layer_sizes[k + 1], cols = w.layer_sizes[k];
    const double bound = std::sqrt(6.0 / (rows + cols));
    MatX m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-bound, bound);
    w.weights.push_back(std::move(m));
    w.biases.push_back(VecX::Zero(rows));
  }
  w.input_mean = VecX::Zero(d_in);
  w.input_scale = VecX::Ones(d_in);
  w.output_mean = VecX::Zero(d_out);
  w.output_scale = VecX::Ones(d_out);
  return w;
}

struct AdamState {
  std::vector<MatX> mw, vw;
  std::vector<VecX> mb, vb;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int t = 0;

  explicit AdamState(const MLPWeights& w) {
    for (size_t k = 0; k < w.weights.size(); ++k) {
      mw.push_back(MatX::Zero(w.weights[k].rows(), w.weights[k].cols()));
      vw.push_back(MatX::Zero(w.weights[k].rows(), w.weights[k].cols()));
      mb.push_back(VecX::Zero(w.biases[k].size()));
      vb.push_back(VecX::Zero(w.biases[k].size()));
    }
  }

  void update(MLPWeights& w, const std::vector<MatX>& gw, const std::vector<VecX>& gb,
              double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(beta1, t);
    const double c2 = 1.0 - std::pow(beta2, t);
    for (size_t k = 0; k < w.weights.size(); ++k) {
      mw[k] = beta1 * mw[k] + (1.0 - beta1) * gw[k];
      vw[k] = beta2 * vw[k] + (1.0 - beta2) * gw[k].array().square().matrix();
      w.weights[k].array() -=
          lr * (mw[k].array() / c1) / ((vw[k].array() / c2).sqrt() + eps);
      mb[k] = beta1 * mb[k] + (1.0 - beta1) * gb[k];
      vb[k] = beta2 * vb[k] + (1.0 - beta2) * gb[k].array().square().matrix();
      w.biases[k].array() -= lr * (mb[k].array() / c1) / ((vb[k].array() / c2).sqrt() + eps);
    }
  }
};

}  // namespace

TrainReport mlp_train(const MatX& inputs, const MatX& targets, const TrainConfig& cfg) {
  const int n = static_cast<int>(inputs.cols());
  if (n == 0) throw ConfigError("mlp_train: empty dataset");
  if (targets.cols() != n) throw ConfigError("mlp_train: input/target count mismatch");

  Rng rng(cfg.seed);

  // Shuffled holdout split.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.index(i + 1)]);
  const int n_val = std::min(n - 1, static_cast<int>(std::floor(cfg.holdout_fraction * n)));
  const int n_train = n - n_val;
  MatX x_train(inputs.rows(), n_train), y_train(targets.rows(), n_train);
  MatX x_val(inputs.rows(), std::max(n_val, 1)), y_val(targets.rows(), std::max(n_val, 1));
  for (int i = 0; i < n_train; ++i) {
    x_train.col(i) = inputs.col(perm[i]);
    y_train.col(i) = targets.col(perm[i]);
  }
  for (int i = 0; i < n_val; ++i) {
    x_val.col(i) = inputs.col(perm[n_train + i]);
    y_val.col(i) = targets.col(perm[n_train + i]);
  }

  MLPWeights w = init_network(static_cast<int>(inputs.rows()), static_cast<int>(targets.rows()),
                              cfg.hidden, rng);
  // z-score statistics from the training split; guard constant components.
  w.input_mean = x_train.rowwise().mean();
  w.output_mean = y_train.rowwise().mean();
  for (int i = 0; i < w.input_scale.size(); ++i) {
    const double sd = std::sqrt((x_train.row(i).array() - w.input_mean[i]).square().mean());
    w.input_scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  for (int i = 0; i < w.output_scale.size(); ++i) {
    const double sd = std::sqrt((y_train.row(i).array() - w.output_mean[i]).square().mean());
    w.output_scale[i] = sd > 1e-12 ? sd : 1.0;
  }
  w.input_min = inputs.rowwise().minCoeff();
  w.input_max = inputs.rowwise().maxCoeff();

  const MatX xn = (x_train.colwise() - w.input_mean).array().colwise() / w.input_scale.array();
  const MatX yn = (y_train.colwise() - w.output_mean).array().colwise() / w.output_scale.array();

  const size_t nl = w.weights.size();
  const int batch = std::min(cfg.batch, n_train);
  std::vector<MatX> act(nl + 1), delta(nl), gw(nl);
  std::vector<VecX> gb(nl);
  AdamState adam(w);
  TrainReport report;
  double running = 0.0;

  for (int step = 0; step < cfg.steps; ++step) {
    MatX xb(xn.rows(), batch), yb(yn.rows(), batch);
    for (int i = 0; i < batch; ++i) {
      const int idx = static_cast<int>(rng.index(n_train));
      xb.col(i) = xn.col(idx);
      yb.col(i) = yn.col(idx);
    }
    act[0] = xb;
    for (size_t k = 0; k < nl; ++k) {
      act[k + 1] = (w.weights[k] * act[k]).colwise() + w.biases[k];
      if (k + 1 < nl) act[k + 1] = act[k + 1].array().tanh();
    }
    const MatX diff = act[nl] - yb;
    const double loss = diff.array().square().colwise().sum().mean();
    if (!std::isfinite(loss)) throw NumericalError("mlp_train: loss diverged at step " + std::to_string(step));
    running = loss;
    if (step % cfg.log_every == 0) report.loss_history.push_back(loss);

    MatX d = (2.0 / batch) * diff;
    for (size_t k = nl; k-- > 0;) {
      gw[k] = d * act[k].transpose();
      gb[k] = d.rowwise().sum();
      if (k > 0) d = (w.weights[k].transpose() * d).array() * (1.0 - act[k].array().square());
    }
    adam.update(w, gw, gb, cfg.learning_rate);
  }
  report.final_train_loss = running;

  if (n_val > 0) {
    const MatX pred = mlp_forward_batch(w, x_val.leftCols(n_val));
    report.holdout_rmse =
        std::sqrt((pred - y_val.leftCols(n_val)).array().square().colwise().sum().mean());
  }
  report.weights = std::move(w);
  return report;
}

namespace {

void write_vec(std::ostream& os, const char* name, const VecX& v) {
  os << name;
  char buf[32];
  for (int i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g", v[i]);
    os << buf;
  }
  os << "\n";
}

VecX read_vec(std::istringstream& is, int n, const std::string& what) {
  VecX v(n);
  for (int i = 0; i < n; ++i)
    if (!(is >> v[i])) throw ConfigError("weights file: truncated " + what);
  return v;
}

}  // namespace

void save_mlp_weights(const MLPWeights& w, const std::string& path) {
  w.validate();
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open weights file for writing: " + path);
  os << "mtdyn-mlp 1\n";
  os << "layers";
  for (int s : w.layer_sizes) os << " " << s;
  os << "\nactivation tanh\n";
  write_vec(os, "input_mean", w.input_mean);
  write_vec(os, "input_scale", w.input_scale);
  write_vec(os, "output_mean", w.output_mean);
  write_vec(os, "output_scale", w.output_scale);
  if (w.input_min.size() == w.input_dim()) {
    write_vec(os, "input_min", w.input_min);
    write_vec(os, "input_max", w.input_max);
  }
  char buf[32];
  for (size_t k = 0; k < w.weights.size(); ++k) {
    os << "layer " << k << "\n";
    for (int i = 0; i < w.weights[k].rows(); ++i) {
      for (int j = 0; j < w.weights[k].cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", w.weights[k](i, j));
        os << (j ? " " : "") << buf;
      }
      os << "\n";
    }
    os << "bias " << k << "\n";
    for (int i = 0; i < w.biases[k].size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", w.biases[k][i]);
      os << (i ? " " : "") << buf;
    }
    os << "\n";
  }
}

MLPWeights load_mlp_weights(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open weights file: " + path);
  std::string line, tag;
  int version = 0;
  if (!std::getline(is, line)) throw ConfigError("weights file is empty: " + path);
  {
    std::istringstream ls(line);
    ls >> tag >> version;
    if (tag != "mtdyn-mlp" || version != 1)
      throw ConfigError("weights file: unsupported format header '" + line + "'");
  }
  MLPWeights w;
  auto next_line = [&](const std::string& what) -> std::istringstream {
    if (!std::getline(is, line)) throw ConfigError("weights file: missing " + what);
    return std::istringstream(line);
  };
  {
    auto ls = next_line("layers");
    ls >> tag;
    if (tag != "layers") throw ConfigError("weights file: expected 'layers'");
    int s;
    while (ls >> s) w.layer_sizes.push_back(s);
    if (w.layer_sizes.size() < 2) throw ConfigError("weights file: bad layer list");
  }
  {
    auto ls = next_line("activation");
    std::string act;
    ls >> tag >> act;
    if (tag != "activation" || act != "tanh")
      throw ConfigError("weights file: unsupported activation");
  }
  auto read_named = [&](const char* name, int n) {
    auto ls = next_line(name);
    ls >> tag;
    if (tag != name) throw ConfigError(std::string("weights file: expected '") + name + "'");
    return read_vec(ls, n, name);
  };
  w.input_mean = read_named("input_mean", w.layer_sizes.front());
  w.input_scale = read_named("input_scale", w.layer_sizes.front());
  w.output_mean = read_named("output_mean", w.layer_sizes.back());
  w.output_scale = read_named("output_scale", w.layer_sizes.back());

  // Optional training-range metadata.
  std::streampos mark = is.tellg();
  if (std::getline(is, line)) {
    std::istringstream ls(line);
    ls >> tag;
    if (tag == "input_min") {
      w.input_min = read_vec(ls, w.layer_sizes.front(), "input_min");
      w.input_max = read_named("input_max", w.layer_sizes.front());
    } else {
      is.seekg(mark);
    }
  }

  for (size_t k = 0; k + 1 < w.layer_sizes.size(); ++k) {
    auto ls = next_line("layer header");
    int idx;
    ls >> tag >> idx;
    if (tag != "layer" || idx != static_cast<int>(k))
      throw ConfigError("weights file: expected 'layer " + std::to_string(k) + "'");
    MatX m(w.layer_sizes[k + 1], w.layer_sizes[k]);
    for (int i = 0; i < m.rows(); ++i) {
      auto row = next_line("weight row");
      for (int j = 0; j < m.cols(); ++j)
        if (!(row >> m(i, j))) throw ConfigError("weights file: truncated weight row");
    }
    w.weights.push_back(std::move(m));
    auto bs = next_line("bias header");
    bs >> tag >> idx;
    if (tag != "bias" || idx != static_cast<int>(k))
      throw ConfigError("weights file: expected 'bias " + std::to_string(k) + "'");
    auto bl = next_line("bias row");
    w.biases.push_back(read_vec(bl, w.layer_sizes[k + 1], "bias row"));
  }
  w.validate();
  return w;
}

}  // namespace mtdyn
