#include "fedsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numbers>
#include <numeric>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

struct IdxFile {
  std::vector<std::uint32_t> dims;
  std::vector<unsigned char> bytes;
  std::size_t data_offset = 0;
};

IdxFile parse_idx(const std::filesystem::path& path, std::uint32_t expected_magic) {
  IdxFile f;
  f.bytes = read_file(path);
  if (f.bytes.size() < 4) {
    throw DataError(path.string() + ": truncated header, expected at least 4 bytes, got " +
                    std::to_string(f.bytes.size()));
  }
  const std::uint32_t magic = read_be32(f.bytes, 0);
  if (magic != expected_magic) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "bad magic number 0x%08x, expected 0x%08x", magic,
                  expected_magic);
    throw DataError(path.string() + ": " + buf);
  }
  const std::size_t ndims = magic & 0xff;
  const std::size_t header = 4 + 4 * ndims;
  if (f.bytes.size() < header) {
    throw DataError(path.string() + ": truncated header, expected " + std::to_string(header) +
                    " bytes, got " + std::to_string(f.bytes.size()));
  }
  std::size_t payload = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    f.dims.push_back(read_be32(f.bytes, 4 + 4 * d));
    payload *= f.dims.back();
  }
  const std::size_t expected = header + payload;
  if (f.bytes.size() != expected) {
    throw DataError(path.string() + ": " +
                    (f.bytes.size() < expected ? "truncated file" : "trailing bytes") +
                    ", expected " + std::to_string(expected) + " bytes, got " +
                    std::to_string(f.bytes.size()));
  }
  f.data_offset = header;
  return f;
}

}  // namespace

void validate_dataset(const Dataset& d) {
  if (d.size() == 0) throw DataError("dataset is empty");
  if (d.inputs.size() != d.size() * d.sample_size()) {
    throw DataError("dataset inputs do not match sample count x sample size");
  }
  for (int y : d.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= d.num_classes) {
      throw DataError("label " + std::to_string(y) + " outside [0, " +
                      std::to_string(d.num_classes) + ")");
    }
  }
  for (double v : d.inputs) {
    if (!std::isfinite(v)) throw DataError("dataset contains a non-finite input");
  }
}

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices) {
  Batch batch;
  const std::size_t width = dataset.sample_size();
  batch.inputs.shape.reserve(dataset.sample_shape.size() + 1);
  batch.inputs.shape.push_back(indices.size());
  batch.inputs.shape.insert(batch.inputs.shape.end(), dataset.sample_shape.begin(),
                            dataset.sample_shape.end());
  batch.inputs.data.resize(indices.size() * width);
  batch.labels.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    auto src = dataset.sample(indices[i]);
    std::copy(src.begin(), src.end(), batch.inputs.data.begin() + i * width);
    batch.labels[i] = dataset.labels[indices[i]];
  }
  return batch;
}

Tensor as_tensor(const Dataset& dataset) {
  Tensor t;
  t.shape.push_back(dataset.size());
  t.shape.insert(t.shape.end(), dataset.sample_shape.begin(), dataset.sample_shape.end());
  t.data = dataset.inputs;
  return t;
}

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path,
                 std::optional<std::size_t> num_classes) {
  const IdxFile images = parse_idx(images_path, kIdxImagesMagic);
  const IdxFile labels = parse_idx(labels_path, kIdxLabelsMagic);
  if (images.dims[0] != labels.dims[0]) {
    throw DataError("count mismatch: " + std::to_string(images.dims[0]) + " images but " +
                    std::to_string(labels.dims[0]) + " labels");
  }
  Dataset d;
  const std::size_t n = images.dims[0];
  d.sample_shape = {1, images.dims[1], images.dims[2]};
  d.inputs.resize(n * d.sample_size());
  for (std::size_t i = 0; i < d.inputs.size(); ++i) {
    d.inputs[i] = images.bytes[images.data_offset + i] / 255.0;
  }
  d.labels.resize(n);
  int max_label = -1;
  for (std::size_t i = 0; i < n; ++i) {
    d.labels[i] = labels.bytes[labels.data_offset + i];
    max_label = std::max(max_label, d.labels[i]);
  }
  d.num_classes = num_classes.value_or(static_cast<std::size_t>(max_label + 1));
  validate_dataset(d);
  return d;
}

Dataset generate_synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                           double separation, std::uint64_t seed) {
  if (classes < 2) throw DataError("synthetic data needs at least 2 classes");
  if (per_class < 1) throw DataError("synthetic data needs at least 1 sample per class");
  if (dim < 1) throw DataError("synthetic data needs at least 1 feature");
  Dataset d;
  d.sample_shape = {dim};
  d.num_classes = classes;
  d.inputs.resize(classes * per_class * dim);
  d.labels.resize(classes * per_class);
  Rng rng(seed);
  std::vector<double> centre(dim);
  for (std::size_t c = 0; c < classes; ++c) {
    std::fill(centre.begin(), centre.end(), 0.0);
    if (dim >= classes) {
      centre[c] = separation;
    } else if (dim >= 2) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                           static_cast<double>(classes);
      centre[0] = separation * std::cos(angle);
      centre[1] = separation * std::sin(angle);
    } else {
      centre[0] = c % 2 == 0 ? separation : -separation;
    }
    for (std::size_t k = 0; k < per_class; ++k) {
      const std::size_t i = c * per_class + k;
      d.labels[i] = static_cast<int>(c);
      for (std::size_t j = 0; j < dim; ++j) {
        d.inputs[i * dim + j] = centre[j] + standard_normal(rng);
      }
    }
  }
  return d;
}

std::vector<Shard> dirichlet_partition(const Dataset& dataset, std::size_t num_clients,
                                       double beta, std::uint64_t seed) {
  if (num_clients < 2) throw DataError("dirichlet_partition needs at least 2 clients");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DataError("beta must be a positive number");
  if (dataset.size() < num_clients) {
    throw DataError("dataset has " + std::to_string(dataset.size()) + " samples, fewer than " +
                    std::to_string(num_clients) + " clients");
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> assigned(num_clients);

  std::vector<std::vector<std::size_t>> by_class(dataset.num_classes);
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset.labels[i]].push_back(i);

  std::vector<double> proportions(num_clients);
  std::vector<std::size_t> allocation(num_clients);
  std::vector<std::size_t> order(num_clients);
  for (auto& members : by_class) {
    if (members.empty()) continue;
    shuffle(members, rng);

    double sum = 0.0;
    do {
      sum = 0.0;
      for (auto& p : proportions) {
        p = gamma_draw(rng, beta);
        sum += p;
      }
    } while (!(sum > 0.0));
    for (auto& p : proportions) p /= sum;

    const std::size_t n = members.size();
    std::size_t floor_total = 0;
    std::vector<double> remainder(num_clients);
    for (std::size_t j = 0; j < num_clients; ++j) {
      const double quota = proportions[j] * static_cast<double>(n);
      allocation[j] = static_cast<std::size_t>(std::floor(quota));
      remainder[j] = quota - static_cast<double>(allocation[j]);
      floor_total += allocation[j];
    }
    // Normalised quotas can drift by an ulp; clamp so the floors never exceed n.
    while (floor_total > n) {
      auto it = std::max_element(allocation.begin(), allocation.end());
      --*it;
      --floor_total;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; floor_total < n; ++k, ++floor_total) ++allocation[order[k % num_clients]];

    std::size_t cursor = 0;
    for (std::size_t j = 0; j < num_clients; ++j) {
      assigned[j].insert(assigned[j].end(), members.begin() + cursor,
                         members.begin() + cursor + allocation[j]);
      cursor += allocation[j];
    }
  }

  for (std::size_t j = 0; j < num_clients; ++j) {
    if (!assigned[j].empty()) continue;
    std::size_t donor = 0;
    for (std::size_t k = 1; k < num_clients; ++k) {
      if (assigned[k].size() > assigned[donor].size()) donor = k;
    }
    assigned[j].push_back(assigned[donor].back());
    assigned[donor].pop_back();
  }

  std::vector<Shard> shards(num_clients);
  for (std::size_t j = 0; j < num_clients; ++j) {
    shards[j].owner = static_cast<int>(j);
    shards[j].indices = std::move(assigned[j]);
    std::sort(shards[j].indices.begin(), shards[j].indices.end());
  }
  return shards;
}

Shard whole_dataset_shard(const Dataset& dataset) {
  Shard s;
  s.indices.resize(dataset.size());
  std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
  return s;
}

ClassCounts class_counts(const Shard& shard, const Dataset& dataset) {
  ClassCounts c;
  c.counts.assign(dataset.num_classes, 0);
  for (std::size_t i : shard.indices) {
    if (i >= dataset.size()) {
      throw DataError("shard index " + std::to_string(i) + " outside dataset of " +
                      std::to_string(dataset.size()));
    }
    ++c.counts[dataset.labels[i]];
  }
  c.total = shard.indices.size();
  return c;
}

AlphaWeights alpha_weights(const ClassCounts& counts) {
  if (counts.total == 0) throw DataError("alpha_weights: client has no samples");
  AlphaWeights a;
  a.alpha.resize(counts.counts.size());
  for (std::size_t c = 0; c < a.alpha.size(); ++c) {
    a.alpha[c] = static_cast<double>(counts.counts[c]) / static_cast<double>(counts.total);
  }
  return a;
}

}  // namespace fedsim
