#include "floodgate/dataset.hpp"

#include "floodgate/errors.hpp"

namespace floodgate {

void EvaluatedDataset::validate() const {
  const std::size_t rows = n();
  if (rows == 0) throw InvalidArgumentError("EvaluatedDataset: no rows");
  if (has_outputs() && outputs.size() != rows)
    throw InvalidArgumentError("EvaluatedDataset: outputs length mismatch");
  if (has_surrogate_outputs() && surrogate_outputs.size() != rows)
    throw InvalidArgumentError("EvaluatedDataset: surrogate outputs length mismatch");
  if (batch_ids) {
    if (batch_ids->size() != rows)
      throw InvalidArgumentError("EvaluatedDataset: batch_ids length mismatch");
    // Contiguous, equal-sized batches labeled 0..B-1.
    std::size_t first_len = 0;
    std::size_t run = 0;
    std::int64_t expected = 0;
    for (std::size_t i = 0; i < rows; ++i) {
      const std::int64_t b = (*batch_ids)[i];
      if (b != expected) {
        if (b != expected + 1 || run == 0)
          throw InvalidArgumentError("EvaluatedDataset: batches must be contiguous");
        if (first_len == 0) first_len = run;
        if (run != first_len)
          throw InvalidArgumentError("EvaluatedDataset: batches must be equal-sized");
        expected = b;
        run = 0;
      }
      ++run;
    }
    if (first_len != 0 && run != first_len)
      throw InvalidArgumentError("EvaluatedDataset: batches must be equal-sized");
  }
}

std::size_t EvaluatedDataset::num_batches() const {
  if (!batch_ids || batch_ids->empty()) return 0;
  return static_cast<std::size_t>(batch_ids->back()) + 1;
}

EvaluatedDataset evaluate_on(const ModelFunction& model, const SampleMatrix& samples,
                             std::string stream_label) {
  if (samples.d() != model.dimension())
    throw InvalidArgumentError("evaluate_on: sample dimension does not match model");
  EvaluatedDataset data;
  data.inputs = samples.values;
  const Vector y = model.evaluate_block(data.inputs);
  data.outputs.assign(y.data(), y.data() + y.size());
  data.batch_ids = samples.batch_ids;
  data.provenance = {samples.seed, std::move(stream_label), model.name(), ""};
  return data;
}

EvaluatedDataset make_dataset(const ModelFunction& model, const InputSpace& space,
                              std::size_t n, std::uint64_t seed, std::string_view label) {
  if (space.dimension() != model.dimension())
    throw InvalidArgumentError("make_dataset: space dimension does not match model");
  const std::uint64_t stream = Rng::derive_seed(seed, label);
  SampleMatrix samples = sample_iid(space, n, stream);
  return evaluate_on(model, samples, std::string(label));
}

void assert_disjoint_provenance(const EvaluatedDataset& a, const EvaluatedDataset& b) {
  if (a.provenance.seed == b.provenance.seed &&
      a.provenance.stream_label == b.provenance.stream_label)
    throw InvalidArgumentError(
        "datasets share row provenance (seed=" + std::to_string(a.provenance.seed) +
        ", label='" + a.provenance.stream_label +
        "'); surrogate training data must be independent of inference data");
}

}  // namespace floodgate
