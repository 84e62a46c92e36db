#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include "fedra/numkit.hpp"
#include "fedra/rng.hpp"
#include "fedra/types.hpp"

namespace fedra {

// Row-major sample store shared by all clients of a simulation.
struct Dataset {
  std::size_t dim = 0;
  int num_classes = 0;  // 0 for unlabeled data
  std::vector<double> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
};

struct ClientDataset {
  ClientId client_id = 0;
  std::vector<std::size_t> samples;  // indices into the shared Dataset
  bool is_malicious = false;

  Quantity quantity() const { return static_cast<Quantity>(samples.size()); }
};

// f(w; z) = 0.5 ||w - z||^2 with z ~ Normal(true_mean, diag(stddev^2)).
struct GaussianMeanTask {
  std::vector<double> true_mean;
  std::vector<double> stddev;

  std::size_t dim() const { return true_mean.size(); }
};

// Multinomial logistic regression; parameters are C rows of (weights, bias).
struct SoftmaxTask {
  std::size_t dim = 0;
  int num_classes = 2;
  double l2_reg = 0.0;
};

using Task = std::variant<GaussianMeanTask, SoftmaxTask>;

void validate(const Task& task);
std::size_t parameter_dim(const Task& task);

struct LocalResult {
  UpdateVector gradient;
  Quantity quantity = 0;
  double loss = 0.0;
};

// Full-batch gradient of the client's empirical loss at w. With
// flip_labels the client trains on flip_label(y) instead of y.
LocalResult local_update(const Task& task, const UpdateVector& w, const Dataset& data,
                         const ClientDataset& client, bool flip_labels = false);

// Lognormal quantities with analytic mean target_mean:
// q = max(1, round(exp(x))), x ~ Normal(ln(target_mean) - log_sigma^2 / 2, log_sigma).
std::vector<Quantity> sample_quantities(std::size_t count, double target_mean, double log_sigma,
                                        Rng& rng);

enum class PartitionMode { Iid, NonIid };

struct PartitionSpec {
  PartitionMode mode = PartitionMode::Iid;
  double single_class_fraction = 0.9;
};

// Shuffles the dataset and hands out samples client by client. A client
// receives min(quantity, what is left after reserving one sample for each
// later client), so every client ends up with at least one sample.
std::vector<ClientDataset> partition(const Dataset& data, std::span<const Quantity> quantities,
                                     const PartitionSpec& spec, Rng& rng);

// One draw z from the task's sampling distribution.
std::vector<double> draw_gaussian_sample(const GaussianMeanTask& task, Rng& rng);
Dataset make_gaussian_dataset(const GaussianMeanTask& task, std::size_t count, Rng& rng);
// Gradient of a fresh client holding q i.i.d. samples: w - mean(z_1..z_q).
UpdateVector gaussian_client_update(const GaussianMeanTask& task, const UpdateVector& w,
                                    Quantity q, Rng& rng);

// Gaussian class blobs: centers ~ Normal(0, separation^2), samples = center
// + Normal(0, 1). Train and test share the centers.
struct BlobSplit {
  Dataset train;
  Dataset test;
};
BlobSplit make_blobs(std::size_t dim, int num_classes, std::size_t train_count,
                     std::size_t test_count, double separation, Rng& rng);

// Mean classification accuracy of the softmax model on every sample.
double accuracy(const SoftmaxTask& task, const UpdateVector& w, const Dataset& data);
double parameter_error(const GaussianMeanTask& task, const UpdateVector& w);

// MNIST-style IDX pair (images magic 0x00000803, labels 0x00000801,
// big-endian). Pixels are scaled to [0, 1]. max_count > 0 keeps only the
// first max_count samples.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t max_count = 0);

}  // namespace fedra
