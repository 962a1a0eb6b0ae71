// Copyright 2026 The CatRec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace catrec::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Eigen::Index rows, Eigen::Index cols)
      : name(std::move(n)), value(Matrix::Zero(rows, cols)), grad(Matrix::Zero(rows, cols)) {}

  void zero_grad() { grad.setZero(); }
};

using ParameterRefs = std::vector<Parameter*>;
using ConstParameterRefs = std::vector<const Parameter*>;

void zero_grads(const ParameterRefs& params);

/// Checksum over names, shapes and raw values.
std::uint64_t checksum(const ConstParameterRefs& params);
inline std::uint64_t checksum(const ParameterRefs& params) {
  return checksum(ConstParameterRefs(params.begin(), params.end()));
}

void init_normal(Parameter& p, double stddev, std::mt19937_64& rng);

/// Binary parameter file: magic, count, then (name, rows, cols, values).
void write_parameters(std::ostream& out, const ConstParameterRefs& params);
/// Reads into parameters matched by name; every parameter must be present
/// with identical shape.
void read_parameters(std::istream& in, const ParameterRefs& params);

/// Adaptive-moment optimizer over a fixed parameter set.
class Adam {
 public:
  struct Options {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double weight_decay = 0.0;
  };

  Adam(ParameterRefs params, Options options);
  void step();

 private:
  ParameterRefs params_;
  Options options_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  long t_ = 0;
};

/// y = x W + b, with x of shape (n, in).
class Linear {
 public:
  Linear() = default;
  Linear(const std::string& name, Eigen::Index in, Eigen::Index out);

  Matrix forward(const Matrix& x) const;
  /// Accumulates dW, db; returns dx.
  Matrix backward(const Matrix& x, const Matrix& dy);

  void init(double stddev, std::mt19937_64& rng);
  void collect(ParameterRefs& out) { out.push_back(&weight); out.push_back(&bias); }
  void collect(ConstParameterRefs& out) const { out.push_back(&weight); out.push_back(&bias); }

  Parameter weight;  // (in, out)
  Parameter bias;    // (1, out)
};

/// Row-wise layer normalization with learned scale and shift.
class LayerNorm {
 public:
  struct Cache {
    Matrix normalized;
    Vector inv_std;
  };

  LayerNorm() = default;
  LayerNorm(const std::string& name, Eigen::Index dim, double eps = 1e-12);

  Matrix forward(const Matrix& x, Cache* cache) const;
  Matrix backward(const Cache& cache, const Matrix& dy);

  void collect(ParameterRefs& out) { out.push_back(&gamma); out.push_back(&beta); }
  void collect(ConstParameterRefs& out) const { out.push_back(&gamma); out.push_back(&beta); }

  Parameter gamma;
  Parameter beta;
  double eps = 1e-12;
};

Matrix gelu(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& dy);

/// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& x);

/// Inverted dropout mask (entries 0 or 1/(1-p)); empty when p == 0.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng);

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace catrec::nn
