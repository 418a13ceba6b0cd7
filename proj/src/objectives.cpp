#include "gg/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gg/error.hpp"
#include "gg/rng.hpp"

namespace gg {

namespace {

void require_param_length(std::span<const double> params, std::size_t d, const char* op) {
  if (params.size() != d) {
    throw DimensionError(std::string(op) + ": parameter length " + std::to_string(params.size()) +
                         " does not match dimension " + std::to_string(d));
  }
}

}  // namespace

QuadraticObjective::QuadraticObjective(std::vector<double> diag_a)
    : dimension_(diag_a.size()), diag_(std::move(diag_a)) {
  if (dimension_ == 0) throw DimensionError("QuadraticObjective: empty diagonal");
  for (double a : diag_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw NumericError("QuadraticObjective: diagonal entries must be positive finite");
    }
  }
}

QuadraticObjective::QuadraticObjective(DenseMatrix dense_a)
    : dimension_(dense_a.rows()), dense_(std::move(dense_a)) {
  if (dimension_ == 0 || dense_.rows() != dense_.cols()) {
    throw DimensionError("QuadraticObjective: dense matrix must be square and nonempty");
  }
  if (dimension_ > 64) {
    throw DimensionError("QuadraticObjective: dense form limited to d <= 64");
  }
  SymEigDecomposition eig = sym_eig(dense_);  // also checks symmetry
  if (eig.eigenvalues.front() < -1e-10 * std::abs(eig.eigenvalues.back())) {
    throw NumericError("QuadraticObjective: dense matrix is not PSD");
  }
}

QuadraticObjective QuadraticObjective::with_condition_number(std::size_t d, double rho) {
  if (d == 0 || rho < 1.0) {
    throw DimensionError("QuadraticObjective: need d >= 1 and rho >= 1");
  }
  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) {
    double t = d == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    diag[i] = 1.0 + t * (rho - 1.0);
  }
  return QuadraticObjective(std::move(diag));
}

QuadraticObjective QuadraticObjective::isotropic(std::size_t d, double c) {
  return QuadraticObjective(std::vector<double>(d, c));
}

double QuadraticObjective::loss(std::span<const double> params,
                                std::span<const int>) const {
  require_param_length(params, dimension_, "quadratic loss");
  double total = 0.0;
  if (!diag_.empty()) {
    for (std::size_t i = 0; i < dimension_; ++i) total += diag_[i] * params[i] * params[i];
  } else {
    for (std::size_t i = 0; i < dimension_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dimension_; ++j) row += dense_(i, j) * params[j];
      total += params[i] * row;
    }
  }
  return 0.5 * total;
}

double QuadraticObjective::loss_and_gradient(std::span<const double> params,
                                             std::span<const int>,
                                             std::span<double> grad_out) const {
  require_param_length(params, dimension_, "quadratic gradient");
  if (grad_out.size() != dimension_) {
    throw DimensionError("quadratic gradient: output length mismatch");
  }
  double total = 0.0;
  if (!diag_.empty()) {
    for (std::size_t i = 0; i < dimension_; ++i) {
      grad_out[i] = diag_[i] * params[i];
      total += grad_out[i] * params[i];
    }
  } else {
    for (std::size_t i = 0; i < dimension_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < dimension_; ++j) row += dense_(i, j) * params[j];
      grad_out[i] = row;
      total += params[i] * row;
    }
  }
  return 0.5 * total;
}

double QuadraticObjective::condition_number() const {
  if (!diag_.empty()) {
    auto [lo, hi] = std::minmax_element(diag_.begin(), diag_.end());
    return *hi / *lo;
  }
  SymEigDecomposition eig = sym_eig(dense_);
  return eig.eigenvalues.back() / eig.eigenvalues.front();
}

Dataset Dataset::with_bias_column() const {
  Dataset out;
  out.num_samples = num_samples;
  out.num_features = num_features + 1;
  out.num_classes = num_classes;
  out.labels = labels;
  out.features.resize(num_samples * (num_features + 1));
  for (std::size_t i = 0; i < num_samples; ++i) {
    for (std::size_t j = 0; j < num_features; ++j) {
      out.features[i * out.num_features + j] = feature(i, j);
    }
    out.features[i * out.num_features + num_features] = 1.0;
  }
  return out;
}

void Dataset::validate() const {
  if (num_samples == 0) throw DimensionError("Dataset: no samples");
  if (num_classes < 2) throw DimensionError("Dataset: need at least 2 classes");
  if (features.size() != num_samples * num_features || labels.size() != num_samples) {
    throw DimensionError("Dataset: inconsistent storage sizes");
  }
  for (double x : features) {
    if (!std::isfinite(x)) throw NumericError("Dataset: non-finite feature value");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw DimensionError("Dataset: label " + std::to_string(y) + " out of range");
    }
  }
}

Dataset gen_synthetic(std::size_t n, std::size_t p, std::size_t classes, std::uint64_t seed) {
  if (n == 0 || p == 0 || classes < 2) {
    throw DimensionError("gen_synthetic: need n >= 1, p >= 1, classes >= 2");
  }
  Rng rng(Rng::derive_seed(seed, 0xda7a));
  Dataset out;
  out.num_samples = n;
  out.num_features = p;
  out.num_classes = classes;
  out.features.resize(n * p);
  out.labels.resize(n);

  double centroid_scale = 1.0 / std::sqrt(static_cast<double>(p));
  std::vector<double> centroids(classes * p);
  for (double& c : centroids) c = centroid_scale * rng.normal();

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = i % classes;
    out.labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < p; ++j) {
      out.features[i * p + j] = centroids[c * p + j] + rng.normal();
    }
  }
  return out;
}

namespace {

bool parse_label(const std::string& token, int& label) {
  // Accepts integers and integral floats like "3.0".
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) return false;
    double rounded = std::nearbyint(v);
    if (std::abs(v - rounded) > 1e-9) return false;
    label = static_cast<int>(rounded);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

Dataset load_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  int max_label = -1;

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;

    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() < 2) {
      throw ParseError("row needs a label and at least one feature", line_no);
    }

    int label;
    if (!parse_label(cells[0], label) || label < 0) {
      throw ParseError("label '" + cells[0] + "' is not a nonnegative integer", line_no);
    }
    std::vector<double> values;
    values.reserve(cells.size() - 1);
    for (std::size_t k = 1; k < cells.size(); ++k) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cells[k], &used));
        while (used < cells[k].size() && std::isspace(static_cast<unsigned char>(cells[k][used]))) ++used;
        if (used != cells[k].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParseError("cannot parse field '" + cells[k] + "'", line_no);
      }
    }

    if (width == 0) {
      width = values.size();
    } else if (values.size() != width) {
      throw ParseError("row has " + std::to_string(values.size()) + " features, expected " +
                           std::to_string(width),
                       line_no);
    }
    labels.push_back(label);
    max_label = std::max(max_label, label);
    rows.push_back(std::move(values));
  }

  if (rows.empty()) throw ParseError("file contains no data rows", line_no);

  Dataset out;
  out.num_samples = rows.size();
  out.num_features = width;
  out.num_classes = std::max<std::size_t>(static_cast<std::size_t>(max_label) + 1, 2);
  out.labels = std::move(labels);
  out.features.reserve(out.num_samples * width);
  for (const auto& r : rows) out.features.insert(out.features.end(), r.begin(), r.end());
  out.validate();
  return out;
}

Dataset load_libsvm(std::istream& in) {
  struct SparseRow {
    std::vector<std::pair<std::size_t, double>> entries;
  };
  std::vector<SparseRow> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t max_index = 0;  // 1-based
  int max_label = -1;

  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    int label;
    if (!parse_label(token, label) || label < 0) {
      throw ParseError("label '" + token + "' is not a nonnegative integer", line_no);
    }
    SparseRow row;
    while (ss >> token) {
      auto colon = token.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == token.size()) {
        throw ParseError("expected idx:value, got '" + token + "'", line_no);
      }
      std::size_t idx;
      double value;
      try {
        std::size_t used = 0;
        long long raw = std::stoll(token.substr(0, colon), &used);
        if (used != colon || raw < 1) throw std::invalid_argument("index");
        idx = static_cast<std::size_t>(raw);
        value = std::stod(token.substr(colon + 1), &used);
        if (used != token.size() - colon - 1) throw std::invalid_argument("value");
      } catch (const std::exception&) {
        throw ParseError("cannot parse feature '" + token + "'", line_no);
      }
      max_index = std::max(max_index, idx);
      row.entries.emplace_back(idx - 1, value);
    }
    labels.push_back(label);
    max_label = std::max(max_label, label);
    rows.push_back(std::move(row));
  }

  if (rows.empty()) throw ParseError("file contains no data rows", line_no);
  if (max_index == 0) throw ParseError("no feature entries found", line_no);

  Dataset out;
  out.num_samples = rows.size();
  out.num_features = max_index;
  out.num_classes = std::max<std::size_t>(static_cast<std::size_t>(max_label) + 1, 2);
  out.labels = std::move(labels);
  out.features.assign(out.num_samples * out.num_features, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (auto [j, v] : rows[i].entries) {
      out.features[i * out.num_features + j] = v;
    }
  }
  out.validate();
  return out;
}

}  // namespace

Dataset load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_dataset: cannot open '" + path + "'");
  }
  return format == DataFormat::kCsv ? load_csv(in) : load_libsvm(in);
}

double softmax_loss_grad(const Dataset& data, std::span<const double> weights,
                         std::span<const int> batch, std::span<double> grad_out) {
  const std::size_t p = data.num_features;
  const std::size_t c = data.num_classes;
  if (weights.size() != p * c) {
    throw DimensionError("softmax: weight length " + std::to_string(weights.size()) +
                         " does not match C*p = " + std::to_string(p * c));
  }
  if (batch.empty()) {
    throw DimensionError("softmax: empty batch");
  }
  if (!grad_out.empty() && grad_out.size() != p * c) {
    throw DimensionError("softmax: gradient output length mismatch");
  }
  std::fill(grad_out.begin(), grad_out.end(), 0.0);

  std::vector<double> logits(c);
  std::vector<double> probs(c);
  double loss_sum = 0.0;
  const double inv_batch = 1.0 / static_cast<double>(batch.size());

  for (int idx : batch) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= data.num_samples) {
      throw DimensionError("softmax: batch index " + std::to_string(idx) + " out of range");
    }
    const double* x = data.features.data() + static_cast<std::size_t>(idx) * p;
    for (std::size_t k = 0; k < c; ++k) {
      double z = 0.0;
      const double* w = weights.data() + k * p;
      for (std::size_t j = 0; j < p; ++j) z += w[j] * x[j];
      logits[k] = z;
    }
    double zmax = *std::max_element(logits.begin(), logits.end());
    double denom = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      probs[k] = std::exp(logits[k] - zmax);
      denom += probs[k];
    }
    int y = data.labels[static_cast<std::size_t>(idx)];
    loss_sum += -(logits[static_cast<std::size_t>(y)] - zmax - std::log(denom));
    if (!grad_out.empty()) {
      for (std::size_t k = 0; k < c; ++k) {
        double coeff = (probs[k] / denom - (static_cast<int>(k) == y ? 1.0 : 0.0)) * inv_batch;
        double* gw = grad_out.data() + k * p;
        for (std::size_t j = 0; j < p; ++j) gw[j] += coeff * x[j];
      }
    }
  }
  return loss_sum * inv_batch;
}

double softmax_loss(const Dataset& data, std::span<const double> weights,
                    std::span<const int> batch) {
  return softmax_loss_grad(data, weights, batch, {});
}

SoftmaxObjective::SoftmaxObjective(std::shared_ptr<const Dataset> data)
    : data_(std::move(data)) {
  data_->validate();
}

std::size_t SoftmaxObjective::dimension() const {
  return data_->num_features * data_->num_classes;
}

double SoftmaxObjective::loss(std::span<const double> params,
                              std::span<const int> batch) const {
  return softmax_loss(*data_, params, batch);
}

double SoftmaxObjective::loss_and_gradient(std::span<const double> params,
                                           std::span<const int> batch,
                                           std::span<double> grad_out) const {
  return softmax_loss_grad(*data_, params, batch, grad_out);
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), seed_(seed) {
  if (n == 0) throw DimensionError("BatchSampler: empty dataset");
  if (batch_size == 0 || batch_size > n) {
    throw DimensionError("BatchSampler: batch size " + std::to_string(batch_size) +
                         " not in [1, " + std::to_string(n) + "]");
  }
  perm_.resize(n);
  reshuffle();
}

void BatchSampler::reshuffle() {
  for (std::size_t i = 0; i < n_; ++i) perm_[i] = static_cast<int>(i);
  Rng rng(Rng::derive_seed(seed_, epoch_));
  rng.shuffle(perm_);
}

std::vector<int> BatchSampler::next() {
  if (pos_ >= n_) {
    ++epoch_;
    pos_ = 0;
    reshuffle();
  }
  std::size_t take = std::min(batch_size_, n_ - pos_);
  std::vector<int> batch(perm_.begin() + static_cast<std::ptrdiff_t>(pos_),
                         perm_.begin() + static_cast<std::ptrdiff_t>(pos_ + take));
  pos_ += take;
  samples_drawn_ += take;
  return batch;
}

}  // namespace gg
