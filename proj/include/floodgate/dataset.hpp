#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "floodgate/input_space.hpp"
#include "floodgate/models.hpp"

namespace floodgate {

struct DatasetProvenance {
  std::uint64_t seed = 0;
  std::string stream_label;  // substream label the rows were drawn from
  std::string model_name;
  std::string created_at;  // ISO-8601; empty for in-memory datasets
};

/// Input matrix with model outputs: the unit of persistence and reuse.
/// outputs/surrogate_outputs may be absent (empty) for input-only files.
struct EvaluatedDataset {
  Matrix inputs;                          // n x d
  std::vector<double> outputs;            // f*, empty when not evaluated
  std::vector<double> surrogate_outputs;  // f at the same rows, optional
  std::optional<std::vector<std::int64_t>> batch_ids;
  DatasetProvenance provenance;

  std::size_t n() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(inputs.cols()); }
  bool has_outputs() const { return !outputs.empty(); }
  bool has_surrogate_outputs() const { return !surrogate_outputs.empty(); }

  /// Checks column lengths agree and batch structure (contiguous, equal
  /// sized) is valid; throws InvalidArgumentError otherwise.
  void validate() const;

  /// Number of batches; 0 when batch_ids are absent.
  std::size_t num_batches() const;
};

/// Builds a dataset from a SampleMatrix and the model's outputs on it.
EvaluatedDataset evaluate_on(const ModelFunction& model, const SampleMatrix& samples,
                             std::string stream_label = "iid");

/// Samples the space i.i.d. with a (seed, label)-derived stream and evaluates
/// the model; rows carry that provenance so train/inference disjointness can
/// be asserted later.
EvaluatedDataset make_dataset(const ModelFunction& model, const InputSpace& space,
                              std::size_t n, std::uint64_t seed,
                              std::string_view label = "data");

/// Throws if two datasets share row provenance (same seed and stream label),
/// which would violate the training/inference separation requirement.
void assert_disjoint_provenance(const EvaluatedDataset& a, const EvaluatedDataset& b);

}  // namespace floodgate
