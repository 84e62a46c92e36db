#include "fedra/cohort.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "fedra/adversary.hpp"
#include "fedra/error.hpp"

namespace fedra {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_dim(const UpdateVector& w, std::size_t expected) {
  if (w.size() != expected)
    throw Error("parameter dimension mismatch: got " + std::to_string(w.size()) + ", expected " +
                std::to_string(expected));
}

LocalResult gaussian_local(const GaussianMeanTask& task, const UpdateVector& w,
                           const Dataset& data, const ClientDataset& client) {
  const std::size_t d = task.dim();
  require_dim(w, d);
  if (data.dim != d) throw Error("dataset dimension does not match the task");
  std::vector<long double> sum(d, 0.0L);
  long double loss = 0.0L;
  for (std::size_t idx : client.samples) {
    const auto z = data.row(idx);
    for (std::size_t k = 0; k < d; ++k) {
      sum[k] += z[k];
      const long double diff = w[k] - z[k];
      loss += 0.5L * diff * diff;
    }
  }
  const auto q = static_cast<long double>(client.samples.size());
  std::vector<double> g(d);
  for (std::size_t k = 0; k < d; ++k) g[k] = static_cast<double>(w[k] - sum[k] / q);
  return {UpdateVector(std::move(g)), client.quantity(), static_cast<double>(loss / q)};
}

// Logits for one sample; returns the log-sum-exp.
double softmax_probs(const SoftmaxTask& task, const UpdateVector& w, std::span<const double> x,
                     std::vector<double>& probs) {
  const std::size_t stride = task.dim + 1;
  const auto classes = static_cast<std::size_t>(task.num_classes);
  probs.assign(classes, 0.0);
  for (std::size_t c = 0; c < classes; ++c) {
    double z = w[c * stride + task.dim];
    for (std::size_t k = 0; k < task.dim; ++k) z += w[c * stride + k] * x[k];
    probs[c] = z;
  }
  const double zmax = *std::max_element(probs.begin(), probs.end());
  double total = 0.0;
  for (double& p : probs) {
    p = std::exp(p - zmax);
    total += p;
  }
  for (double& p : probs) p /= total;
  return zmax + std::log(total);
}

LocalResult softmax_local(const SoftmaxTask& task, const UpdateVector& w, const Dataset& data,
                          const ClientDataset& client, bool flip_labels) {
  require_dim(w, parameter_dim(task));
  if (data.dim != task.dim) throw Error("dataset dimension does not match the task");
  const std::size_t stride = task.dim + 1;
  std::vector<long double> grad(w.size(), 0.0L);
  long double loss = 0.0L;
  std::vector<double> probs;
  for (std::size_t idx : client.samples) {
    const auto x = data.row(idx);
    int y = data.labels[idx];
    if (flip_labels) y = flip_label(y, task.num_classes);
    const double lse = softmax_probs(task, w, x, probs);
    double logit_y = w[y * stride + task.dim];
    for (std::size_t k = 0; k < task.dim; ++k) logit_y += w[y * stride + k] * x[k];
    loss += lse - logit_y;
    for (std::size_t c = 0; c < probs.size(); ++c) {
      const double err = probs[c] - (static_cast<int>(c) == y ? 1.0 : 0.0);
      for (std::size_t k = 0; k < task.dim; ++k) grad[c * stride + k] += err * x[k];
      grad[c * stride + task.dim] += err;
    }
  }
  const auto q = static_cast<long double>(client.samples.size());
  long double reg = 0.0L;
  std::vector<double> g(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    g[k] = static_cast<double>(grad[k] / q + task.l2_reg * w[k]);
    reg += static_cast<long double>(w[k]) * w[k];
  }
  const double total_loss = static_cast<double>(loss / q + 0.5L * task.l2_reg * reg);
  return {UpdateVector(std::move(g)), client.quantity(), total_loss};
}

std::uint32_t read_be32(std::istream& in, std::uint64_t offset, const std::string& what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4))
    throw Error(what + ": truncated header at byte offset " + std::to_string(offset));
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

}  // namespace

void validate(const Task& task) {
  std::visit(Overloaded{
                 [](const GaussianMeanTask& t) {
                   if (t.true_mean.empty()) throw Error("GaussianMean task needs dimension >= 1");
                   if (t.stddev.size() != t.true_mean.size())
                     throw Error("GaussianMean stddev/true_mean length mismatch");
                   for (double s : t.stddev)
                     if (!(s > 0.0)) throw Error("GaussianMean stddev entries must be positive");
                 },
                 [](const SoftmaxTask& t) {
                   if (t.dim == 0) throw Error("softmax task needs feature dimension >= 1");
                   if (t.num_classes < 2) throw Error("softmax task needs >= 2 classes");
                   if (!(t.l2_reg >= 0.0)) throw Error("softmax l2_reg must be >= 0");
                 },
             },
             task);
}

std::size_t parameter_dim(const Task& task) {
  return std::visit(
      Overloaded{
          [](const GaussianMeanTask& t) { return t.dim(); },
          [](const SoftmaxTask& t) { return static_cast<std::size_t>(t.num_classes) * (t.dim + 1); },
      },
      task);
}

LocalResult local_update(const Task& task, const UpdateVector& w, const Dataset& data,
                         const ClientDataset& client, bool flip_labels) {
  if (client.samples.empty()) throw Error("client has no samples");
  return std::visit(Overloaded{
                        [&](const GaussianMeanTask& t) { return gaussian_local(t, w, data, client); },
                        [&](const SoftmaxTask& t) {
                          return softmax_local(t, w, data, client, flip_labels);
                        },
                    },
                    task);
}

std::vector<Quantity> sample_quantities(std::size_t count, double target_mean, double log_sigma,
                                        Rng& rng) {
  if (count < 1) throw Error("need at least one client");
  if (!(target_mean >= 1.0)) throw Error("target mean quantity must be >= 1");
  if (!(log_sigma >= 0.0)) throw Error("log_sigma must be >= 0");
  std::vector<Quantity> out(count);
  if (log_sigma == 0.0) {
    std::fill(out.begin(), out.end(), std::max<Quantity>(1, std::llround(target_mean)));
    return out;
  }
  std::normal_distribution<double> normal(std::log(target_mean) - log_sigma * log_sigma / 2.0,
                                          log_sigma);
  for (auto& q : out) {
    const double v = std::min(std::exp(normal(rng)), 1e15);
    q = std::max<Quantity>(1, std::llround(v));
  }
  return out;
}

std::vector<ClientDataset> partition(const Dataset& data, std::span<const Quantity> quantities,
                                     const PartitionSpec& spec, Rng& rng) {
  const std::size_t clients = quantities.size();
  if (clients == 0) throw Error("partition needs at least one client");
  if (data.size() < clients)
    throw Error("dataset has " + std::to_string(data.size()) + " samples for " +
                std::to_string(clients) + " clients");
  for (Quantity q : quantities)
    if (q < 1) throw Error("client quantities must be >= 1");
  if (!(spec.single_class_fraction >= 0.0 && spec.single_class_fraction <= 1.0))
    throw Error("single_class_fraction must lie in [0, 1]");

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> single_class(clients, false);
  std::vector<std::vector<std::size_t>> pools;
  std::vector<std::size_t> pool_pos;
  std::vector<long long> class_left;
  std::vector<long long> wrr_weight;
  std::vector<long long> wrr_current;
  if (spec.mode == PartitionMode::NonIid) {
    if (data.num_classes < 1) throw Error("non-IID partition needs labeled data");
    std::vector<std::size_t> ids(clients);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto k = static_cast<std::size_t>(
        std::llround(spec.single_class_fraction * static_cast<double>(clients)));
    for (std::size_t i = 0; i < std::min(k, clients); ++i) single_class[ids[i]] = true;

    const auto classes = static_cast<std::size_t>(data.num_classes);
    pools.assign(classes, {});
    for (std::size_t idx : order) pools.at(static_cast<std::size_t>(data.labels[idx])).push_back(idx);
    pool_pos.assign(classes, 0);
    class_left.resize(classes);
    wrr_weight.resize(classes);
    for (std::size_t c = 0; c < classes; ++c) {
      class_left[c] = static_cast<long long>(pools[c].size());
      wrr_weight[c] = class_left[c];
    }
    wrr_current.assign(classes, 0);
  }

  std::vector<bool> used(data.size(), false);
  std::size_t global_pos = 0;
  std::size_t remaining = data.size();
  std::vector<ClientDataset> out(clients);

  auto take = [&](ClientDataset& cd, std::size_t idx) {
    used[idx] = true;
    --remaining;
    if (!class_left.empty()) --class_left[static_cast<std::size_t>(data.labels[idx])];
    cd.samples.push_back(idx);
  };

  for (std::size_t i = 0; i < clients; ++i) {
    ClientDataset& cd = out[i];
    cd.client_id = static_cast<ClientId>(i);
    const std::size_t later = clients - i - 1;
    const auto cap =
        std::min<std::size_t>(static_cast<std::size_t>(quantities[i]), remaining - later);

    if (single_class[i]) {
      // Smooth weighted round-robin over classes that still have samples.
      long long total = 0;
      std::size_t pick = 0;
      bool found = false;
      for (std::size_t c = 0; c < pools.size(); ++c) {
        if (class_left[c] <= 0) continue;
        wrr_current[c] += wrr_weight[c];
        total += wrr_weight[c];
        if (!found || wrr_current[c] > wrr_current[pick]) {
          pick = c;
          found = true;
        }
      }
      wrr_current[pick] -= total;
      auto& pool = pools[pick];
      while (cd.samples.size() < cap && pool_pos[pick] < pool.size()) {
        const std::size_t idx = pool[pool_pos[pick]++];
        if (!used[idx]) take(cd, idx);
      }
    } else {
      while (cd.samples.size() < cap && global_pos < order.size()) {
        const std::size_t idx = order[global_pos++];
        if (!used[idx]) take(cd, idx);
      }
    }
    if (cd.samples.empty()) throw Error("partition left client " + std::to_string(i) + " empty");
  }
  return out;
}

std::vector<double> draw_gaussian_sample(const GaussianMeanTask& task, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z(task.dim());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = task.true_mean[k] + task.stddev[k] * normal(rng);
  return z;
}

Dataset make_gaussian_dataset(const GaussianMeanTask& task, std::size_t count, Rng& rng) {
  validate(Task{task});
  Dataset data;
  data.dim = task.dim();
  data.features.reserve(count * data.dim);
  data.labels.assign(count, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const auto z = draw_gaussian_sample(task, rng);
    data.features.insert(data.features.end(), z.begin(), z.end());
  }
  return data;
}

UpdateVector gaussian_client_update(const GaussianMeanTask& task, const UpdateVector& w,
                                    Quantity q, Rng& rng) {
  if (q < 1) throw Error("quantity must be >= 1");
  require_dim(w, task.dim());
  std::vector<long double> sum(task.dim(), 0.0L);
  for (Quantity s = 0; s < q; ++s) {
    const auto z = draw_gaussian_sample(task, rng);
    for (std::size_t k = 0; k < z.size(); ++k) sum[k] += z[k];
  }
  std::vector<double> g(task.dim());
  for (std::size_t k = 0; k < g.size(); ++k)
    g[k] = static_cast<double>(w[k] - sum[k] / static_cast<long double>(q));
  return UpdateVector(std::move(g));
}

BlobSplit make_blobs(std::size_t dim, int num_classes, std::size_t train_count,
                     std::size_t test_count, double separation, Rng& rng) {
  if (dim == 0 || num_classes < 2) throw Error("blobs need dim >= 1 and >= 2 classes");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> label_dist(0, num_classes - 1);
  std::vector<double> centers(static_cast<std::size_t>(num_classes) * dim);
  for (double& c : centers) c = separation * normal(rng);

  auto fill = [&](Dataset& d, std::size_t count) {
    d.dim = dim;
    d.num_classes = num_classes;
    d.features.reserve(count * dim);
    d.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const int y = label_dist(rng);
      d.labels.push_back(y);
      for (std::size_t k = 0; k < dim; ++k)
        d.features.push_back(centers[static_cast<std::size_t>(y) * dim + k] + normal(rng));
    }
  };
  BlobSplit split;
  fill(split.train, train_count);
  fill(split.test, test_count);
  return split;
}

double accuracy(const SoftmaxTask& task, const UpdateVector& w, const Dataset& data) {
  require_dim(w, parameter_dim(task));
  if (data.size() == 0) throw Error("accuracy on an empty dataset");
  std::vector<double> probs;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    softmax_probs(task, w, data.row(i), probs);
    const auto pred = std::distance(probs.begin(), std::max_element(probs.begin(), probs.end()));
    if (pred == data.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

double parameter_error(const GaussianMeanTask& task, const UpdateVector& w) {
  return l2_distance(w, UpdateVector(task.true_mean));
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t max_count) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw Error("cannot open IDX images file " + images.string());
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw Error("cannot open IDX labels file " + labels.string());

  const std::string iname = images.string();
  const std::string lname = labels.string();
  const std::uint32_t imagic = read_be32(img, 0, iname);
  if (imagic != 0x00000803u)
    throw Error(iname + ": bad image magic at byte offset 0 (expected 0x00000803)");
  const std::uint32_t icount = read_be32(img, 4, iname);
  const std::uint32_t rows = read_be32(img, 8, iname);
  const std::uint32_t cols = read_be32(img, 12, iname);
  if (rows != 28 || cols != 28)
    throw Error(iname + ": expected 28x28 images at byte offset 8, got " + std::to_string(rows) +
                "x" + std::to_string(cols));

  const std::uint32_t lmagic = read_be32(lab, 0, lname);
  if (lmagic != 0x00000801u)
    throw Error(lname + ": bad label magic at byte offset 0 (expected 0x00000801)");
  const std::uint32_t lcount = read_be32(lab, 4, lname);
  if (lcount != icount)
    throw Error("IDX count mismatch at byte offset 4: " + std::to_string(icount) + " images vs " +
                std::to_string(lcount) + " labels");

  std::size_t count = icount;
  if (max_count > 0) count = std::min(count, max_count);
  const std::size_t pixels = std::size_t{rows} * cols;

  Dataset data;
  data.dim = pixels;
  data.num_classes = 10;
  data.features.resize(count * pixels);
  data.labels.resize(count);

  std::vector<unsigned char> buf(pixels);
  for (std::size_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
      throw Error(iname + ": truncated image data at byte offset " +
                  std::to_string(16 + i * pixels));
    for (std::size_t p = 0; p < pixels; ++p) data.features[i * pixels + p] = buf[p] / 255.0;
    char label = 0;
    if (!lab.read(&label, 1))
      throw Error(lname + ": truncated label data at byte offset " + std::to_string(8 + i));
    const auto y = static_cast<unsigned char>(label);
    if (y > 9)
      throw Error(lname + ": label " + std::to_string(y) + " out of range at byte offset " +
                  std::to_string(8 + i));
    data.labels[i] = y;
  }
  return data;
}

}  // namespace fedra
