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

#include "catrec/nn.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "catrec/hash.hpp"

namespace catrec::nn {

namespace {

constexpr char kMagic[8] = {'C', 'R', 'P', 'A', 'R', 'M', '0', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("parameter file truncated");
  return v;
}

}  // namespace

void zero_grads(const ParameterRefs& params) {
  for (auto* p : params) p->zero_grad();
}

std::uint64_t checksum(const ConstParameterRefs& params) {
  Fnv1a h;
  for (const auto* p : params) {
    h.update(p->name);
    const std::int64_t shape[2] = {p->value.rows(), p->value.cols()};
    h.update(shape, sizeof(shape));
    h.update(p->value.data(), sizeof(double) * static_cast<std::size_t>(p->value.size()));
  }
  return h.digest();
}

void init_normal(Parameter& p, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = dist(rng);
}

void write_parameters(std::ostream& out, const ConstParameterRefs& params) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint64_t>(out, params.size());
  for (const auto* p : params) {
    put<std::uint64_t>(out, p->name.size());
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::int64_t>(out, p->value.rows());
    put<std::int64_t>(out, p->value.cols());
    out.write(reinterpret_cast<const char*>(p->value.data()),
              static_cast<std::streamsize>(sizeof(double) * p->value.size()));
  }
}

void read_parameters(std::istream& in, const ParameterRefs& params) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic))
    throw std::runtime_error("not a parameter file");
  std::map<std::string, Matrix> stored;
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(get<std::uint64_t>(in), '\0');
    in.read(name.data(), static_cast<std::streamsize>(name.size()));
    const auto rows = get<std::int64_t>(in);
    const auto cols = get<std::int64_t>(in);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw std::runtime_error("parameter file truncated");
    stored.emplace(std::move(name), std::move(m));
  }
  for (auto* p : params) {
    const auto it = stored.find(p->name);
    if (it == stored.end()) throw std::runtime_error("parameter '" + p->name + "' missing from file");
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw std::runtime_error("parameter '" + p->name + "' has mismatched shape");
    p->value = it->second;
    p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
  }
}

// ---------------------------------------------------------------------------

Adam::Adam(ParameterRefs params, Options options) : params_(std::move(params)), options_(options) {
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * p.grad;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * p.grad.cwiseProduct(p.grad);
    const Matrix update =
        (m_[i] / c1).array() / ((v_[i] / c2).array().sqrt() + options_.epsilon);
    p.value -= options_.learning_rate * update;
    if (options_.weight_decay > 0) p.value *= (1.0 - options_.learning_rate * options_.weight_decay);
  }
}

// ---------------------------------------------------------------------------

Linear::Linear(const std::string& name, Eigen::Index in, Eigen::Index out)
    : weight(name + ".weight", in, out), bias(name + ".bias", 1, out) {}

Matrix Linear::forward(const Matrix& x) const {
  Matrix y = x * weight.value;
  y.rowwise() += bias.value.row(0);
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy) {
  weight.grad.noalias() += x.transpose() * dy;
  bias.grad += dy.colwise().sum();
  return dy * weight.value.transpose();
}

void Linear::init(double stddev, std::mt19937_64& rng) {
  init_normal(weight, stddev, rng);
  bias.value.setZero();
}

LayerNorm::LayerNorm(const std::string& name, Eigen::Index dim, double eps_)
    : gamma(name + ".gamma", 1, dim), beta(name + ".beta", 1, dim), eps(eps_) {
  gamma.value.setOnes();
}

Matrix LayerNorm::forward(const Matrix& x, Cache* cache) const {
  const Eigen::Index n = x.cols();
  Matrix xhat(x.rows(), n);
  Vector inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const RowVector centered = x.row(r).array() - mean;
    const double var = centered.squaredNorm() / static_cast<double>(n);
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = centered * inv_std(r);
  }
  Matrix y = xhat.array().rowwise() * gamma.value.row(0).array();
  y.rowwise() += beta.value.row(0);
  if (cache) {
    cache->normalized = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Matrix LayerNorm::backward(const Cache& cache, const Matrix& dy) {
  const Matrix& xhat = cache.normalized;
  gamma.grad += (dy.array() * xhat.array()).colwise().sum().matrix();
  beta.grad += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gamma.value.row(0).array();
  const double n = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double sum_d = dxhat.row(r).sum();
    const double sum_dx = dxhat.row(r).dot(xhat.row(r));
    dx.row(r) = (cache.inv_std(r) / n) *
                (n * dxhat.row(r).array() - sum_d - xhat.row(r).array() * sum_dx).matrix();
  }
  return dx;
}

Matrix gelu(const Matrix& x) {
  return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); });
}

Matrix gelu_backward(const Matrix& x, const Matrix& dy) {
  static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
  const Matrix d = x.unaryExpr([](double v) {
    return 0.5 * (1.0 + std::erf(v * M_SQRT1_2)) + v * kInvSqrt2Pi * std::exp(-0.5 * v * v);
  });
  return d.cwiseProduct(dy);
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return {};
  std::bernoulli_distribution keep(1.0 - p);
  Matrix mask(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : 0.0;
  return mask;
}

}  // namespace catrec::nn
