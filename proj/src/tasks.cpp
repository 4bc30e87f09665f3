#include "frain/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace frain {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
  return std::mt19937_64(seq);
}

double pareto_draw(std::mt19937_64& rng, double shape) {
  // Classic Pareto with scale 1: inverse CDF on (0, 1].
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double v = 1.0 - u(rng);
  return std::pow(v, -1.0 / shape);
}

std::size_t softmax_model_dim(const TaskSpec& s) { return (s.dim + 1) * s.classes; }

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.dim = dim;
  out.classes = classes;
  out.features.reserve(indices.size() * dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    auto r = row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

std::string to_string(TaskKind k) { return k == TaskKind::softmax_blobs ? "softmax_blobs" : "quadratic"; }

TaskKind parse_task_kind(const std::string& name) {
  if (name == "softmax_blobs" || name == "softmax-blobs") return TaskKind::softmax_blobs;
  if (name == "quadratic") return TaskKind::quadratic;
  throw std::invalid_argument("unknown task kind '" + name + "' (expected softmax_blobs or quadratic)");
}

void TaskSpec::validate() const {
  if (dim == 0) throw std::invalid_argument("task: dim must be >= 1");
  if (samples < 2) throw std::invalid_argument("task: samples must be >= 2");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw std::invalid_argument("task: noise must be finite and >= 0");
  if (!(separation > 0.0) || !std::isfinite(separation))
    throw std::invalid_argument("task: separation must be finite and > 0");
  if (kind == TaskKind::softmax_blobs && classes < 2)
    throw std::invalid_argument("task: softmax_blobs needs classes >= 2");
}

Task make_task(const TaskSpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  if (spec.kind == TaskKind::quadratic) {
    Dataset optima;
    optima.dim = spec.dim;
    optima.classes = 1;
    std::vector<double> center(spec.dim);
    for (auto& c : center) c = spec.separation * gauss(rng);
    for (std::size_t i = 0; i < spec.samples; ++i) {
      for (std::size_t j = 0; j < spec.dim; ++j) optima.features.push_back(center[j] + spec.noise * gauss(rng));
      optima.labels.push_back(0);
    }
    return Task{spec, optima, optima, ParamVec::zeros(spec.dim)};
  }

  std::vector<double> centers(spec.classes * spec.dim);
  for (auto& c : centers) c = spec.separation * gauss(rng);

  Dataset all;
  all.dim = spec.dim;
  all.classes = spec.classes;
  all.features.reserve(spec.samples * spec.dim);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    const auto label = static_cast<std::uint32_t>(i % spec.classes);
    for (std::size_t j = 0; j < spec.dim; ++j)
      all.features.push_back(centers[label * spec.dim + j] + spec.noise * gauss(rng));
    all.labels.push_back(label);
  }

  std::vector<std::size_t> order(spec.samples);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_train = std::clamp<std::size_t>(spec.samples * 4 / 5, 1, spec.samples - 1);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> eval_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(eval_idx.begin(), eval_idx.end());

  return Task{spec, all.subset(train_idx), all.subset(eval_idx), ParamVec::zeros(softmax_model_dim(spec))};
}

std::vector<ClientShard> iid_partition(const Dataset& train, std::size_t num_clients, std::uint64_t seed) {
  const std::size_t n = train.size();
  if (num_clients == 0) throw std::invalid_argument("partition: num_clients must be >= 1");
  if (num_clients > n)
    throw std::invalid_argument("partition: " + std::to_string(num_clients) + " clients for " + std::to_string(n) +
                                " samples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, 2);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<ClientShard> shards(num_clients);
  std::size_t pos = 0;
  for (std::size_t k = 0; k < num_clients; ++k) {
    const std::size_t take = n / num_clients + (k < n % num_clients ? 1 : 0);
    shards[k].owner = k;
    shards[k].indices.assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                             order.begin() + static_cast<std::ptrdiff_t>(pos + take));
    std::sort(shards[k].indices.begin(), shards[k].indices.end());
    pos += take;
  }
  return shards;
}

std::vector<ClientShard> pareto_partition(const Dataset& train, std::size_t num_clients, double shape,
                                          std::uint64_t seed) {
  const std::size_t n = train.size();
  if (num_clients == 0) throw std::invalid_argument("partition: num_clients must be >= 1");
  if (num_clients > n)
    throw std::invalid_argument("partition: " + std::to_string(num_clients) + " clients for " + std::to_string(n) +
                                " samples");
  if (!(shape > 0.0)) throw std::invalid_argument("partition: Pareto shape must be > 0");
  auto rng = make_rng(seed, 3);

  // Quantities: one guaranteed sample each, the rest by largest remainder.
  std::vector<double> weight(num_clients);
  for (auto& w : weight) w = pareto_draw(rng, shape);
  const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  const std::size_t spare = n - num_clients;
  std::vector<std::size_t> quota(num_clients, 1);
  std::vector<std::pair<double, std::size_t>> remainder;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < num_clients; ++k) {
    const double exact = static_cast<double>(spare) * weight[k] / total;
    const auto whole = static_cast<std::size_t>(std::floor(exact));
    quota[k] += whole;
    assigned += whole;
    remainder.emplace_back(exact - static_cast<double>(whole), k);
  }
  std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  for (std::size_t i = 0; assigned < spare; ++i, ++assigned) ++quota[remainder[i % num_clients].second];

  // Label skew: each client prefers labels by its own Pareto weights.
  const std::size_t classes = std::max<std::size_t>(train.classes, 1);
  std::vector<std::vector<double>> preference(num_clients, std::vector<double>(classes));
  for (auto& p : preference)
    for (auto& w : p) w = pareto_draw(rng, shape);

  std::vector<std::vector<std::size_t>> pool(classes);
  for (std::size_t i = 0; i < n; ++i) pool[train.labels[i] % classes].push_back(i);
  for (auto& p : pool) std::shuffle(p.begin(), p.end(), rng);

  std::vector<ClientShard> shards(num_clients);
  for (std::size_t k = 0; k < num_clients; ++k) shards[k].owner = k;

  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t remaining = n;
  while (remaining > 0) {
    for (std::size_t k = 0; k < num_clients && remaining > 0; ++k) {
      if (shards[k].indices.size() >= quota[k]) continue;
      double mass = 0.0;
      for (std::size_t c = 0; c < classes; ++c)
        if (!pool[c].empty()) mass += preference[k][c];
      double pick = u(rng) * mass;
      std::size_t chosen = classes;
      for (std::size_t c = 0; c < classes; ++c) {
        if (pool[c].empty()) continue;
        chosen = c;
        pick -= preference[k][c];
        if (pick < 0.0) break;
      }
      shards[k].indices.push_back(pool[chosen].back());
      pool[chosen].pop_back();
      --remaining;
    }
  }
  for (auto& s : shards) std::sort(s.indices.begin(), s.indices.end());
  return shards;
}

std::uint64_t gradient_steps(std::size_t shard_size, const TrainOptions& opts) {
  if (shard_size == 0 || opts.batch_size == 0) return 0;
  return static_cast<std::uint64_t>(opts.epochs) * ((shard_size + opts.batch_size - 1) / opts.batch_size);
}

double loss_and_gradient(const ParamVec& model, const Task& task, const Dataset& data,
                         std::span<const std::size_t> rows, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  if (rows.empty()) return 0.0;
  const auto w = model.values();
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;

  if (task.spec.kind == TaskKind::quadratic) {
    for (std::size_t i : rows) {
      auto x = data.row(i);
      for (std::size_t j = 0; j < data.dim; ++j) {
        const double diff = w[j] - x[j];
        loss += diff * diff;
        grad[j] += 2.0 * diff * inv_m;
      }
    }
    return loss * inv_m;
  }

  const std::size_t d = data.dim;
  const std::size_t c_count = task.spec.classes;
  std::vector<double> z(c_count);
  for (std::size_t i : rows) {
    auto x = data.row(i);
    for (std::size_t c = 0; c < c_count; ++c) z[c] = w[d * c_count + c];
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = x[j];
      const double* wr = w.data() + j * c_count;
      for (std::size_t c = 0; c < c_count; ++c) z[c] += xj * wr[c];
    }
    const double zmax = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (auto& v : z) {
      v = std::exp(v - zmax);
      denom += v;
    }
    const std::uint32_t y = data.labels[i];
    loss += std::log(denom) - std::log(z[y]);
    for (auto& v : z) v /= denom;  // z now holds probabilities
    z[y] -= 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double xj = x[j] * inv_m;
      double* gr = grad.data() + j * c_count;
      for (std::size_t c = 0; c < c_count; ++c) gr[c] += xj * z[c];
    }
    double* gb = grad.data() + d * c_count;
    for (std::size_t c = 0; c < c_count; ++c) gb[c] += z[c] * inv_m;
  }
  return loss * inv_m;
}

ParamVec local_train(const ParamVec& model, std::span<const std::size_t> shard, const Task& task,
                     const Dataset& data, const TrainOptions& opts) {
  if (model.dim() != task.model_dim())
    throw DimensionMismatch(model.dim(), task.model_dim(), "local_train");
  if (shard.empty() || opts.learning_rate == 0.0 || opts.epochs == 0) return model;
  if (opts.batch_size == 0) throw std::invalid_argument("local_train: batch size must be >= 1");

  std::vector<double> w(model.values().begin(), model.values().end());
  std::vector<double> grad(w.size());
  std::vector<std::size_t> order(shard.begin(), shard.end());
  auto rng = make_rng(opts.seed, 4);
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t lo = 0; lo < order.size(); lo += opts.batch_size) {
      const std::size_t hi = std::min(order.size(), lo + opts.batch_size);
      const ParamVec current(w);
      loss_and_gradient(current, task, data, std::span(order).subspan(lo, hi - lo), grad);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= opts.learning_rate * grad[i];
    }
  }
  for (double v : w)
    if (!std::isfinite(v)) throw std::runtime_error("local_train: parameters diverged (reduce the learning rate)");
  return ParamVec(std::move(w));
}

double mean_loss(const ParamVec& model, const Task& task, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("mean_loss: empty dataset");
  if (model.dim() != task.model_dim()) throw DimensionMismatch(model.dim(), task.model_dim(), "mean_loss");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<double> grad(model.dim());
  return loss_and_gradient(model, task, data, rows, grad);
}

double score_accuracy(const ParamVec& model, const Task& task, const Dataset& data) {
  if (task.spec.kind != TaskKind::softmax_blobs)
    throw std::invalid_argument("score_accuracy: accuracy is defined for classification tasks only");
  if (data.size() == 0) throw std::invalid_argument("score_accuracy: empty eval set");
  if (model.dim() != task.model_dim()) throw DimensionMismatch(model.dim(), task.model_dim(), "score_accuracy");
  const auto w = model.values();
  const std::size_t d = data.dim;
  const std::size_t c_count = task.spec.classes;
  std::vector<double> z(c_count);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.row(i);
    for (std::size_t c = 0; c < c_count; ++c) z[c] = w[d * c_count + c];
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t c = 0; c < c_count; ++c) z[c] += x[j] * w[j * c_count + c];
    std::size_t best = 0;
    for (std::size_t c = 1; c < c_count; ++c)
      if (z[c] > z[best]) best = c;
    if (best == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double score_exp_loss(const ParamVec& model, const Task& task, const Dataset& data) {
  // Clamped so that a finite but enormous loss still scores above zero.
  return std::max(std::exp(-kExpLossScale * mean_loss(model, task, data)), std::numeric_limits<double>::min());
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t j = 0; j < data.dim; ++j) out << 'f' << j << ',';
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.row(i)) out << v << ',';
    out << data.labels[i] << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  Dataset data;
  data.dim = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  data.classes = classes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != data.dim + 1)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(data.dim + 1) + " columns");
    for (std::size_t j = 0; j < data.dim; ++j) data.features.push_back(std::stod(cells[j]));
    const auto label = std::stoul(cells.back());
    if (label >= classes)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": label out of range");
    data.labels.push_back(static_cast<std::uint32_t>(label));
  }
  return data;
}

}  // namespace frain
