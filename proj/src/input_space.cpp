#include "floodgate/input_space.hpp"

#include <cmath>
#include <unordered_set>

#include "floodgate/errors.hpp"

namespace floodgate {

InputSpace::InputSpace(std::vector<InputMarginal> inputs) : inputs_(std::move(inputs)) {
  if (inputs_.empty()) throw InvalidArgumentError("InputSpace: dimension must be >= 1");
  std::unordered_set<std::string> names;
  for (const auto& m : inputs_) {
    if (m.name.empty()) throw InvalidArgumentError("InputSpace: empty input name");
    if (!names.insert(m.name).second)
      throw InvalidArgumentError("InputSpace: duplicate input name '" + m.name + "'");
    if (!std::isfinite(m.min) || !std::isfinite(m.max) || !(m.min < m.max))
      throw InvalidArgumentError("InputSpace: marginal '" + m.name +
                                 "' needs finite min < max");
  }
}

InputSpace InputSpace::uniform_cube(std::size_t d, double lo, double hi) {
  std::vector<InputMarginal> ms;
  ms.reserve(d);
  for (std::size_t j = 0; j < d; ++j)
    ms.push_back({"x" + std::to_string(j + 1), MarginalKind::Uniform, lo, hi});
  return InputSpace(std::move(ms));
}

const InputMarginal& InputSpace::marginal(std::size_t j) const {
  if (j >= inputs_.size())
    throw InvalidArgumentError("InputSpace: input index " + std::to_string(j) +
                               " out of range (d=" + std::to_string(inputs_.size()) + ")");
  return inputs_[j];
}

void InputSpace::set_conditional_sampler(ConditionalSampler sampler) {
  conditional_ = std::move(sampler);
  independent_ = false;
}

SampleMatrix sample_iid(const InputSpace& space, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidArgumentError("sample_iid: n must be >= 1");
  const std::size_t d = space.dimension();
  Rng rng = Rng::substream(seed, "iid");
  Matrix values(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          space.marginal(j).sample(rng);
  return SampleMatrix{std::move(values), seed, std::nullopt};
}

SampleMatrix sample_lhs_batches(const InputSpace& space, std::size_t batch_size,
                                std::size_t num_batches, std::uint64_t seed) {
  if (batch_size < 2) throw InvalidArgumentError("sample_lhs_batches: batch_size must be >= 2");
  if (num_batches == 0) throw InvalidArgumentError("sample_lhs_batches: num_batches must be >= 1");
  const std::size_t d = space.dimension();
  const std::size_t n = batch_size * num_batches;
  Matrix values(n, d);
  std::vector<std::int64_t> batch_ids(n);
  for (std::size_t b = 0; b < num_batches; ++b) {
    for (std::size_t j = 0; j < d; ++j) {
      Rng rng = Rng::substream(seed, "lhs", {b, j});
      const auto strata = rng.permutation(static_cast<std::uint32_t>(batch_size));
      const InputMarginal& m = space.marginal(j);
      for (std::size_t i = 0; i < batch_size; ++i) {
        const double u = (static_cast<double>(strata[i]) + rng.uniform()) /
                         static_cast<double>(batch_size);
        values(static_cast<Eigen::Index>(b * batch_size + i),
               static_cast<Eigen::Index>(j)) = m.min + (m.max - m.min) * u;
      }
    }
    for (std::size_t i = 0; i < batch_size; ++i)
      batch_ids[b * batch_size + i] = static_cast<std::int64_t>(b);
  }
  return SampleMatrix{std::move(values), seed, std::move(batch_ids)};
}

ResampleBlock resample_conditional(const InputSpace& space, const SampleMatrix& samples,
                                   std::size_t j, std::size_t K, std::uint64_t seed) {
  const std::size_t d = space.dimension();
  if (j >= d)
    throw InvalidArgumentError("resample_conditional: input index " + std::to_string(j) +
                               " out of range (d=" + std::to_string(d) + ")");
  if (K == 0) throw InvalidArgumentError("resample_conditional: K must be >= 1");
  if (samples.d() != d)
    throw InvalidArgumentError("resample_conditional: sample dimension mismatch");

  const std::size_t n = samples.n();
  Rng rng = Rng::substream(seed, "resample", {j});
  Matrix values(n, K);
  if (space.independent()) {
    // Independent inputs: the conditional law equals the marginal, so the
    // draws never touch the sample values.
    const InputMarginal& m = space.marginal(j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < K; ++k)
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = m.sample(rng);
  } else {
    const auto& sampler = space.conditional_sampler();
    if (!sampler)
      throw InvalidArgumentError("resample_conditional: dependent space without sampler");
    std::vector<double> row(d);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < d; ++c)
        row[c] = samples.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
      for (std::size_t k = 0; k < K; ++k)
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
            sampler(j, row, rng);
    }
  }
  return ResampleBlock{j, std::move(values), seed};
}

}  // namespace floodgate
