#pragma once

// Desk-scale learning tasks: Gaussian-blob softmax classification and a
// per-client quadratic objective, with Pareto non-IID partitioning, local
// mini-batch SGD, and the two committee scoring functions.

#include "frain/param_vec.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace frain {

/// Row-major n x d feature matrix with integer labels in [0, classes).
struct Dataset {
  std::size_t dim = 0;
  std::size_t classes = 0;
  std::vector<double> features;
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const { return {features.data() + i * dim, dim}; }
  Dataset subset(std::span<const std::size_t> indices) const;
};

enum class TaskKind { softmax_blobs, quadratic };
std::string to_string(TaskKind k);
TaskKind parse_task_kind(const std::string& name);

struct TaskSpec {
  TaskKind kind = TaskKind::softmax_blobs;
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t samples = 4000;
  double noise = 1.0;        // per-coordinate std of points around their center
  double separation = 1.25;  // per-coordinate std of the class centers
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// For softmax_blobs the model is a (dim + 1) x classes affine classifier,
/// stored row-major with the bias row last. For quadratic the model lives in
/// feature space and every row of the dataset is one client optimum.
struct Task {
  TaskSpec spec;
  Dataset train;
  Dataset eval;
  ParamVec initial;

  std::size_t model_dim() const noexcept { return initial.dim(); }
};

Task make_task(const TaskSpec& spec);

struct ClientShard {
  std::uint64_t owner = 0;
  std::vector<std::size_t> indices;
};

/// Pareto-skewed quantities and label mixes. Every client receives at least
/// one sample; shards are disjoint and cover the whole training split.
std::vector<ClientShard> pareto_partition(const Dataset& train, std::size_t num_clients, double shape,
                                          std::uint64_t seed);

/// Shuffled split into near-equal shards.
std::vector<ClientShard> iid_partition(const Dataset& train, std::size_t num_clients, std::uint64_t seed);

struct TrainOptions {
  std::size_t epochs = 1;
  double learning_rate = 0.01;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// Number of mini-batch steps local_train performs on a shard of this size.
std::uint64_t gradient_steps(std::size_t shard_size, const TrainOptions& opts);

/// Mini-batch SGD over the shard's rows of data. An empty shard returns the model unchanged.
ParamVec local_train(const ParamVec& model, std::span<const std::size_t> shard, const Task& task,
                     const Dataset& data, const TrainOptions& opts);

/// Mean loss over rows (softmax cross-entropy or squared distance) and its gradient.
double loss_and_gradient(const ParamVec& model, const Task& task, const Dataset& data,
                         std::span<const std::size_t> rows, std::span<double> grad);

double mean_loss(const ParamVec& model, const Task& task, const Dataset& data);

/// Fraction of argmax hits; ties resolve to the lowest class index.
double score_accuracy(const ParamVec& model, const Task& task, const Dataset& data);

/// exp(-0.1 * mean loss).
double score_exp_loss(const ParamVec& model, const Task& task, const Dataset& data);
inline constexpr double kExpLossScale = 0.1;

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t classes);

}  // namespace frain
