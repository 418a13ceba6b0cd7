#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gg/matrix.hpp"

namespace gg {

// Pure loss/gradient oracle over (parameter vector, batch of sample indices).
// Deterministic objectives are free to ignore the batch.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual std::size_t dimension() const = 0;
  virtual double loss(std::span<const double> params, std::span<const int> batch) const = 0;
  virtual double loss_and_gradient(std::span<const double> params, std::span<const int> batch,
                                   std::span<double> grad_out) const = 0;

  std::vector<double> gradient(std::span<const double> params,
                               std::span<const int> batch) const {
    std::vector<double> g(dimension(), 0.0);
    loss_and_gradient(params, batch, g);
    return g;
  }
};

// f(theta) = 1/2 theta^T A theta with A either diagonal (any d) or dense
// symmetric PSD (d <= 64). Batch indices are ignored: the objective is
// deterministic.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(std::vector<double> diag_a);
  explicit QuadraticObjective(DenseMatrix dense_a);

  // Diagonal spectrum interpolated linearly from 1 to rho.
  static QuadraticObjective with_condition_number(std::size_t d, double rho);
  // A = c * I.
  static QuadraticObjective isotropic(std::size_t d, double c);

  std::size_t dimension() const override { return dimension_; }
  double loss(std::span<const double> params, std::span<const int> batch) const override;
  double loss_and_gradient(std::span<const double> params, std::span<const int> batch,
                           std::span<double> grad_out) const override;

  double condition_number() const;

 private:
  std::size_t dimension_;
  std::vector<double> diag_;   // empty when dense
  DenseMatrix dense_;          // empty when diagonal
};

// n samples, p features, integer class labels in [0, num_classes).
struct Dataset {
  std::size_t num_samples = 0;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // row-major n x p
  std::vector<int> labels;

  double feature(std::size_t i, std::size_t j) const { return features[i * num_features + j]; }

  // Copy with a constant 1.0 feature appended to every sample, so a linear
  // model's weights carry the bias as its last per-class entry.
  Dataset with_bias_column() const;

  void validate() const;
};

enum class DataFormat { kCsv, kLibsvm };

// Gaussian class-centroid mixture with unit noise. Centroids are drawn with
// scale 1/sqrt(p) so pairwise class separation stays O(1) regardless of p and
// the classes overlap; labels are assigned round-robin.
Dataset gen_synthetic(std::size_t n, std::size_t p, std::size_t classes, std::uint64_t seed);

// CSV: first column integer label, remaining columns features.
// libsvm: "label idx:val idx:val ..." with 1-based indices, densified.
// The class count is inferred as max label + 1.
Dataset load_dataset(const std::string& path, DataFormat format);

// Mean cross-entropy of a flat (C x p) linear softmax model over the batch,
// and its gradient, flattened row-major (class-major) to match the weights.
double softmax_loss_grad(const Dataset& data, std::span<const double> weights,
                         std::span<const int> batch, std::span<double> grad_out);
double softmax_loss(const Dataset& data, std::span<const double> weights,
                    std::span<const int> batch);

// Softmax regression objective over a dataset; d = num_classes * num_features.
// Callers wanting a bias term append it to the dataset first.
class SoftmaxObjective final : public Objective {
 public:
  explicit SoftmaxObjective(std::shared_ptr<const Dataset> data);

  std::size_t dimension() const override;
  double loss(std::span<const double> params, std::span<const int> batch) const override;
  double loss_and_gradient(std::span<const double> params, std::span<const int> batch,
                           std::span<double> grad_out) const override;

  const Dataset& dataset() const { return *data_; }

 private:
  std::shared_ptr<const Dataset> data_;
};

// Seeded epoch sampler: each epoch is a fresh permutation of 0..n-1 cut into
// batches; the final short batch of an epoch is emitted as-is.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::vector<int> next();

  std::size_t dataset_size() const { return n_; }
  std::size_t batch_size() const { return batch_size_; }
  std::uint64_t samples_drawn() const { return samples_drawn_; }

 private:
  void reshuffle();

  std::size_t n_;
  std::size_t batch_size_;
  std::uint64_t seed_;
  std::uint64_t epoch_ = 0;
  std::size_t pos_ = 0;
  std::uint64_t samples_drawn_ = 0;
  std::vector<int> perm_;
};

}  // namespace gg
