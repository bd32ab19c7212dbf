#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fedsim/nn.hpp"

namespace fedsim {

struct Dataset {
  Shape sample_shape;          // (features) or (channels, height, width)
  std::vector<double> inputs;  // n x shape_size(sample_shape), row-major
  std::vector<int> labels;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const { return shape_size(sample_shape); }
  std::span<const double> sample(std::size_t i) const {
    return {inputs.data() + i * sample_size(), sample_size()};
  }
};

/// Throws DataError unless n >= 1, labels lie in [0, num_classes), and inputs are finite.
void validate_dataset(const Dataset& dataset);

/// Copies the given samples into a training batch.
Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices);

/// Whole-dataset inputs as one tensor.
Tensor as_tensor(const Dataset& dataset);

/// Reads an IDX image/label pair (magic 0x00000803 / 0x00000801, big-endian
/// dimensions). Pixels are scaled by 1/255 and samples are shaped (1, rows, cols).
/// num_classes defaults to max label + 1.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path,
                 std::optional<std::size_t> num_classes = std::nullopt);

/// Class c is drawn from N(separation * u_c, I) in `dim` dimensions, where
/// u_c is the c-th basis vector when dim >= classes and otherwise the unit
/// vector at angle 2*pi*c/classes in the first two coordinates.
Dataset generate_synthetic(std::size_t classes, std::size_t per_class, std::size_t dim,
                           double separation, std::uint64_t seed);

struct Shard {
  int owner = 0;
  std::vector<std::size_t> indices;  // ascending
};

/// Label-skewed split of `dataset` over `num_clients` shards. Each class's
/// samples are shuffled and divided by a symmetric Dirichlet(beta) draw
/// (normalised Gamma(beta, 1) variates); fractional allocations are rounded
/// with the largest-remainder rule, ties going to the lower client id.
/// Clients left empty receive one sample at a time from the largest shard.
std::vector<Shard> dirichlet_partition(const Dataset& dataset, std::size_t num_clients,
                                       double beta, std::uint64_t seed);

/// Every sample to client 0.
Shard whole_dataset_shard(const Dataset& dataset);

struct ClassCounts {
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  bool operator==(const ClassCounts&) const = default;
};

ClassCounts class_counts(const Shard& shard, const Dataset& dataset);

struct AlphaWeights {
  std::vector<double> alpha;
  bool operator==(const AlphaWeights&) const = default;
};

/// alpha[c] = counts[c] / total; throws DataError when total is 0.
AlphaWeights alpha_weights(const ClassCounts& counts);

}  // namespace fedsim
