#include "floodgate/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "floodgate/errors.hpp"
#include "floodgate/rng.hpp"
#include "floodgate/stats.hpp"

namespace floodgate {

std::string to_string(Method m) {
  switch (m) {
    case Method::Floodgate: return "floodgate";
    case Method::Spf: return "spf";
    case Method::SpfSurrogate: return "spf-surrogate";
    case Method::Panin: return "panin";
  }
  return "unknown";
}

FloodgateTerms floodgate_terms_from_values(std::size_t input_index,
                                           std::span<const double> y_star,
                                           std::span<const double> f_base,
                                           const Matrix& f_resampled,
                                           std::optional<std::vector<std::int64_t>> batch_ids) {
  const std::size_t n = y_star.size();
  if (n < 2) throw InvalidArgumentError("floodgate_terms: need n >= 2 (V_i undefined)");
  if (f_base.size() != n || static_cast<std::size_t>(f_resampled.rows()) != n)
    throw InvalidArgumentError("floodgate_terms: row count mismatch");
  const auto K = static_cast<std::size_t>(f_resampled.cols());
  if (K == 0) throw InvalidArgumentError("floodgate_terms: K must be >= 1");
  if (batch_ids && batch_ids->size() != n)
    throw InvalidArgumentError("floodgate_terms: batch_ids length mismatch");

  FloodgateTerms terms;
  terms.input_index = input_index;
  terms.K = K;
  terms.batch_ids = std::move(batch_ids);
  terms.m_z.resize(n);
  terms.m.resize(n);
  terms.v.resize(n);

  const double ybar = mean(y_star);
  const double bessel = static_cast<double>(n) / static_cast<double>(n - 1);
  const double shrink = 1.0 / (static_cast<double>(K) + 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double fz = f_resampled.row(static_cast<Eigen::Index>(i)).mean();
    const double res_star = y_star[i] - fz;
    const double res_f = f_base[i] - fz;
    terms.m_z[i] = res_star * res_star - shrink * res_f * res_f;
    const double r = y_star[i] - f_base[i];
    terms.m[i] = r * r;
    terms.v[i] = bessel * (y_star[i] - ybar) * (y_star[i] - ybar);
    if (!std::isfinite(terms.m_z[i]) || !std::isfinite(terms.m[i]) || !std::isfinite(terms.v[i]))
      throw NumericalError("floodgate_terms: non-finite term at row " + std::to_string(i));
  }
  return terms;
}

FloodgateTerms floodgate_terms(const EvaluatedDataset& data, const Surrogate& surrogate,
                               const InputSpace& space, std::size_t j, std::size_t K,
                               std::uint64_t seed) {
  data.validate();
  if (!data.has_outputs()) throw InvalidArgumentError("floodgate_terms: dataset has no outputs");
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  if (n < 2) throw InvalidArgumentError("floodgate_terms: need n >= 2 (V_i undefined)");
  if (space.dimension() != d || surrogate.dimension() != d)
    throw InvalidArgumentError("floodgate_terms: dimension mismatch");
  if (j >= d) throw InvalidArgumentError("floodgate_terms: input index out of range");
  if (K == 0) throw InvalidArgumentError("floodgate_terms: K must be >= 1");

  SampleMatrix samples{data.inputs, seed, data.batch_ids};
  const ResampleBlock block = resample_conditional(space, samples, j, K, seed);

  // Surrogate at the modified points (X~_i^(k), Z_i): n*K evaluations.
  Matrix modified(n * K, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < K; ++k) {
      const auto r = static_cast<Eigen::Index>(i * K + k);
      modified.row(r) = data.inputs.row(static_cast<Eigen::Index>(i));
      modified(r, static_cast<Eigen::Index>(j)) =
          block.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    }
  const Vector f_mod = surrogate.predict_block(modified);
  Matrix f_resampled(n, K);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < K; ++k)
      f_resampled(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          f_mod(static_cast<Eigen::Index>(i * K + k));

  std::vector<double> f_base;
  if (data.has_surrogate_outputs()) {
    f_base = data.surrogate_outputs;
  } else {
    const Vector fb = surrogate.predict_block(data.inputs);
    f_base.assign(fb.data(), fb.data() + fb.size());
  }
  return floodgate_terms_from_values(j, data.outputs, f_base, f_resampled, data.batch_ids);
}

namespace {

// Quadratic form w' S w expanded per Algorithm 1. Nonnegative in exact
// arithmetic; tolerate roundoff-scale negatives and fail hard on anything
// larger, since that indicates corrupted inputs rather than roundoff.
double checked_variance(double quad, double magnitude_scale) {
  if (quad >= 0.0) return quad;
  if (quad > -1e-10 * std::max(magnitude_scale, 1e-300)) return 0.0;
  throw NumericalError("floodgate_interval: negative variance quadratic form (" +
                       std::to_string(quad) + "); covariance inputs are inconsistent");
}

std::vector<double> batch_means(std::span<const double> xs,
                                const std::vector<std::int64_t>& batch_ids,
                                std::size_t num_batches) {
  std::vector<double> means(num_batches, 0.0);
  std::vector<std::size_t> counts(num_batches, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto b = static_cast<std::size_t>(batch_ids[i]);
    means[b] += xs[i];
    ++counts[b];
  }
  for (std::size_t b = 0; b < num_batches; ++b) means[b] /= static_cast<double>(counts[b]);
  return means;
}

IntervalResult clipped_interval(std::size_t input_index, Method method, double lo, double hi,
                                double point_lo, double point_hi, IntervalDiagnostics diag) {
  IntervalResult out;
  out.input_index = input_index;
  out.method = method;
  out.lower = std::clamp(lo, 0.0, 1.0);
  out.upper = std::clamp(hi, 0.0, 1.0);
  if (out.lower > out.upper) std::swap(out.lower, out.upper);
  out.point_lower = point_lo;
  out.point_upper = point_hi;
  out.diagnostics = std::move(diag);
  return out;
}

}  // namespace

IntervalResult floodgate_interval(const FloodgateTerms& terms, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgumentError("floodgate_interval: alpha must be in (0, 1)");
  const std::size_t n = terms.n();
  if (n < 2 || terms.m_z.size() != n || terms.v.size() != n)
    throw InvalidArgumentError("floodgate_interval: need matched terms with n >= 2");

  std::span<const double> mz{terms.m_z};
  std::span<const double> m{terms.m};
  std::span<const double> v{terms.v};

  // Batch-means path: the CLT is applied to per-batch means, n = #batches.
  std::vector<double> mz_b, m_b, v_b;
  if (terms.batch_ids) {
    if (terms.batch_ids->size() != n)
      throw InvalidArgumentError("floodgate_interval: batch_ids length mismatch");
    const auto num_batches = static_cast<std::size_t>(terms.batch_ids->back()) + 1;
    if (num_batches < 2)
      throw InvalidArgumentError("floodgate_interval: batch-means path needs >= 2 batches");
    mz_b = batch_means(mz, *terms.batch_ids, num_batches);
    m_b = batch_means(m, *terms.batch_ids, num_batches);
    v_b = batch_means(v, *terms.batch_ids, num_batches);
    mz = mz_b;
    m = m_b;
    v = v_b;
  }

  const MeanCov3 mc = mean_cov3(mz, m, v);
  IntervalDiagnostics diag;
  diag.mz_bar = mc.mean[0];
  diag.m_bar = mc.mean[1];
  diag.v_bar = mc.mean[2];
  diag.sigma = mc.cov;
  diag.n_effective = mz.size();
  diag.K = terms.K;
  diag.alpha = alpha;
  if (terms.batch_ids) diag.notes = "batch-means";

  if (diag.v_bar == 0.0) {
    diag.degenerate = true;
    return clipped_interval(terms.input_index, Method::Floodgate, 0.0, 1.0, 0.0, 0.0,
                            std::move(diag));
  }

  const double u_hat = diag.mz_bar / diag.v_bar;
  const double l_hat = (diag.mz_bar - diag.m_bar) / diag.v_bar;
  const auto& s = diag.sigma;
  const double vb2 = diag.v_bar * diag.v_bar;

  const double quad_u = s[0][0] - 2.0 * u_hat * s[0][2] + u_hat * u_hat * s[2][2];
  const double scale_u =
      std::abs(s[0][0]) + 2.0 * std::abs(u_hat * s[0][2]) + u_hat * u_hat * std::abs(s[2][2]);
  const double su2 = checked_variance(quad_u, scale_u) / vb2;

  const double quad_l = s[0][0] + s[1][1] + l_hat * l_hat * s[2][2] - 2.0 * s[0][1] +
                        2.0 * l_hat * (s[1][2] - s[0][2]);
  const double scale_l = std::abs(s[0][0]) + std::abs(s[1][1]) +
                         l_hat * l_hat * std::abs(s[2][2]) + 2.0 * std::abs(s[0][1]) +
                         2.0 * std::abs(l_hat) * (std::abs(s[1][2]) + std::abs(s[0][2]));
  const double sl2 = checked_variance(quad_l, scale_l) / vb2;

  diag.s_upper = std::sqrt(su2);
  diag.s_lower = std::sqrt(sl2);

  const double z = normal_two_sided_z(alpha);
  const double root_n = std::sqrt(static_cast<double>(diag.n_effective));
  const double lo = l_hat - z * diag.s_lower / root_n;
  const double hi = u_hat + z * diag.s_upper / root_n;
  return clipped_interval(terms.input_index, Method::Floodgate, lo, hi, l_hat, u_hat,
                          std::move(diag));
}

std::vector<IntervalResult> floodgate_all_inputs(const EvaluatedDataset& data,
                                                 const Surrogate& surrogate,
                                                 const InputSpace& space, std::size_t K,
                                                 std::uint64_t seed, double alpha) {
  data.validate();
  if (!data.has_outputs())
    throw InvalidArgumentError("floodgate_all_inputs: dataset has no outputs");
  EvaluatedDataset working = data;
  if (!working.has_surrogate_outputs()) {
    const Vector fb = surrogate.predict_block(working.inputs);
    working.surrogate_outputs.assign(fb.data(), fb.data() + fb.size());
  }
  std::vector<IntervalResult> results;
  results.reserve(space.dimension());
  for (std::size_t j = 0; j < space.dimension(); ++j)
    results.push_back(
        floodgate_interval(floodgate_terms(working, surrogate, space, j, K, seed), alpha));
  return results;
}

namespace {

PairedDataset build_pairs_from_base_impl(const std::function<Vector(const Matrix&)>& eval_block,
                                         const std::string& generator_name,
                                         const InputSpace& space, const SampleMatrix& base,
                                         std::span<const double> base_outputs,
                                         std::uint64_t seed, std::size_t base_evals) {
  const std::size_t n = base.n();
  const std::size_t d = space.dimension();
  if (n < 2) throw InvalidArgumentError("build_paired_dataset: need n >= 2");
  if (base_outputs.size() != n)
    throw InvalidArgumentError("build_paired_dataset: base outputs length mismatch");

  PairedDataset pairs;
  pairs.base.inputs = base.values;
  pairs.base.outputs.assign(base_outputs.begin(), base_outputs.end());
  pairs.base.provenance = {seed, "spf-base", generator_name, ""};
  pairs.picked_inputs.resize(n, d);
  pairs.paired_outputs.resize(n, d);
  pairs.seed = seed;

  const std::uint64_t pick_seed = Rng::derive_seed(seed, "spf-pick");
  Matrix modified = base.values;
  for (std::size_t j = 0; j < d; ++j) {
    const ResampleBlock block = resample_conditional(space, base, j, 1, pick_seed);
    const auto jc = static_cast<Eigen::Index>(j);
    pairs.picked_inputs.col(jc) = block.values.col(0);
    modified.col(jc) = block.values.col(0);
    pairs.paired_outputs.col(jc) = eval_block(modified);
    modified.col(jc) = base.values.col(jc);  // restore the frozen column
  }
  pairs.eval_count = base_evals + n * d;
  return pairs;
}

PairedDataset build_pairs_impl(const std::function<Vector(const Matrix&)>& eval_block,
                               const std::string& generator_name, const InputSpace& space,
                               std::size_t n, std::uint64_t seed) {
  if (n < 2) throw InvalidArgumentError("build_paired_dataset: need n >= 2");
  SampleMatrix base = sample_iid(space, n, Rng::derive_seed(seed, "spf-base"));
  const Vector y = eval_block(base.values);
  return build_pairs_from_base_impl(eval_block, generator_name, space, base,
                                    {y.data(), static_cast<std::size_t>(y.size())}, seed, n);
}

}  // namespace

PairedDataset build_paired_dataset(const ModelFunction& model, const InputSpace& space,
                                   std::size_t n, std::uint64_t seed) {
  if (model.dimension() != space.dimension())
    throw InvalidArgumentError("build_paired_dataset: dimension mismatch");
  return build_pairs_impl([&](const Matrix& pts) { return model.evaluate_block(pts); },
                          model.name(), space, n, seed);
}

PairedDataset build_paired_dataset(const Surrogate& surrogate, const InputSpace& space,
                                   std::size_t n, std::uint64_t seed) {
  if (surrogate.dimension() != space.dimension())
    throw InvalidArgumentError("build_paired_dataset: dimension mismatch");
  return build_pairs_impl([&](const Matrix& pts) { return surrogate.predict_block(pts); },
                          "surrogate", space, n, seed);
}

PairedDataset build_paired_dataset_from_base(const ModelFunction& model,
                                             const InputSpace& space,
                                             const SampleMatrix& base,
                                             std::span<const double> base_outputs,
                                             std::uint64_t seed) {
  if (model.dimension() != space.dimension() || base.d() != space.dimension())
    throw InvalidArgumentError("build_paired_dataset: dimension mismatch");
  return build_pairs_from_base_impl([&](const Matrix& pts) { return model.evaluate_block(pts); },
                                    model.name(), space, base, base_outputs, seed, 0);
}

namespace {

IntervalResult spf_impl(const PairedDataset& pairs, std::size_t j, double alpha,
                        Method method) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgumentError("spf: alpha must be in (0, 1)");
  const std::size_t n = pairs.n();
  if (n < 2) throw InvalidArgumentError("spf: need n >= 2");
  if (j >= pairs.d()) throw InvalidArgumentError("spf: input index out of range");

  const auto& y = pairs.base.outputs;
  const auto col = pairs.paired_outputs.col(static_cast<Eigen::Index>(j));
  const double ybar = mean(y);
  const double bessel = static_cast<double>(n) / static_cast<double>(n - 1);

  std::vector<double> a(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = y[i] - col(static_cast<Eigen::Index>(i));
    a[i] = 0.5 * diff * diff;
    v[i] = bessel * (y[i] - ybar) * (y[i] - ybar);
  }
  const double abar = mean(a);
  const double vbar = mean(v);

  IntervalDiagnostics diag;
  diag.mz_bar = abar;
  diag.v_bar = vbar;
  diag.n_effective = n;
  diag.K = 1;
  diag.alpha = alpha;

  if (vbar == 0.0) {
    // 0/0 convention: the estimand is 0 but the data are uninformative.
    diag.degenerate = true;
    return clipped_interval(j, method, 0.0, 1.0, 0.0, 0.0, std::move(diag));
  }

  const double s_hat = abar / vbar;
  double saa = 0, sav = 0, svv = 0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - abar) * (a[i] - abar);
    sav += (a[i] - abar) * (v[i] - vbar);
    svv += (v[i] - vbar) * (v[i] - vbar);
  }
  const double denom = static_cast<double>(n - 1);
  saa /= denom;
  sav /= denom;
  svv /= denom;
  diag.sigma = {{{saa, 0.0, sav}, {0.0, 0.0, 0.0}, {sav, 0.0, svv}}};

  const double quad = saa - 2.0 * s_hat * sav + s_hat * s_hat * svv;
  const double scale =
      std::abs(saa) + 2.0 * std::abs(s_hat * sav) + s_hat * s_hat * std::abs(svv);
  const double se = std::sqrt(checked_variance(quad, scale) /
                              (vbar * vbar * static_cast<double>(n)));
  diag.s_lower = diag.s_upper = se * std::sqrt(static_cast<double>(n));

  const double z = normal_two_sided_z(alpha);
  return clipped_interval(j, method, s_hat - z * se, s_hat + z * se, s_hat, s_hat,
                          std::move(diag));
}

}  // namespace

IntervalResult spf_jansen(const PairedDataset& pairs, std::size_t j, double alpha) {
  return spf_impl(pairs, j, alpha, Method::Spf);
}

IntervalResult spf_surrogate(const PairedDataset& surrogate_pairs, std::size_t j,
                             double alpha) {
  return spf_impl(surrogate_pairs, j, alpha, Method::SpfSurrogate);
}

IntervalResult panin_interval(std::size_t input_index, const PaninComponents& parts,
                              double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidArgumentError("panin_interval: alpha must be in (0, 1)");
  if (parts.e2 < 0.0 && parts.e2 > -1e-12) {
    // roundoff guard; estimate_relative_mse produces nonnegative values
  } else if (parts.e2 < 0.0) {
    throw InvalidArgumentError("panin_interval: negative relative MSE");
  }

  const double e2 = std::max(parts.e2, 0.0);
  const double e_hat = std::sqrt(e2);
  const double s_tilde = std::clamp(parts.s_hat_f, 0.0, 1.0);
  const double rt_s = std::sqrt(s_tilde);
  const double rt_1ms = std::sqrt(1.0 - s_tilde);

  const double t1 = 1.0;
  const double t2 = e_hat + 2.0 * rt_s;
  const double t3 = e_hat + 2.0 * rt_1ms;
  const double m_star = std::min({t1, t2, t3});
  const double bound = m_star * e_hat;

  // Endpoint-level delta method through the active branch of the bound.
  constexpr double kEps = 1e-12;
  double db_de = 1.0;   // d bound / d E
  double db_ds = 0.0;   // d bound / d S~
  if (m_star == t1) {
    db_de = 1.0;
    db_ds = 0.0;
  } else if (m_star == t2) {
    db_de = 2.0 * e_hat + 2.0 * rt_s;
    db_ds = rt_s > kEps ? e_hat / rt_s : 0.0;
  } else {
    db_de = 2.0 * e_hat + 2.0 * rt_1ms;
    db_ds = rt_1ms > kEps ? -e_hat / rt_1ms : 0.0;
  }
  const double var_e = (e_hat > kEps && parts.se_e2 > 0.0)
                           ? parts.se_e2 * parts.se_e2 / (4.0 * e2)
                           : 0.0;
  const double clip_gate = (parts.s_hat_f > 0.0 && parts.s_hat_f < 1.0) ? 1.0 : 0.0;
  const double g_up = 1.0 + clip_gate * db_ds;
  const double g_lo = 1.0 - clip_gate * db_ds;
  const double se_up =
      std::sqrt(g_up * g_up * parts.se_s_hat_f * parts.se_s_hat_f + db_de * db_de * var_e);
  const double se_lo =
      std::sqrt(g_lo * g_lo * parts.se_s_hat_f * parts.se_s_hat_f + db_de * db_de * var_e);

  IntervalDiagnostics diag;
  diag.mz_bar = parts.s_hat_f;
  diag.m_bar = e2;
  diag.v_bar = bound;
  diag.s_lower = se_lo * std::sqrt(static_cast<double>(std::max<std::size_t>(parts.n, 1)));
  diag.s_upper = se_up * std::sqrt(static_cast<double>(std::max<std::size_t>(parts.n, 1)));
  diag.n_effective = parts.n;
  diag.alpha = alpha;
  diag.notes = "plug-in S~ = clip(S-hat_f); endpoint delta method on the active bound branch";

  const double z = normal_two_sided_z(alpha);
  return clipped_interval(input_index, Method::Panin, parts.s_hat_f - bound - z * se_lo,
                          parts.s_hat_f + bound + z * se_up, parts.s_hat_f - bound,
                          parts.s_hat_f + bound, std::move(diag));
}

IntervalResult panin_from_data(const PairedDataset& surrogate_pairs,
                               const EvaluatedDataset& data, const Surrogate& surrogate,
                               std::size_t j, double alpha) {
  const IntervalResult sf = spf_surrogate(surrogate_pairs, j, alpha);
  RelativeMse rel;
  if (data.has_surrogate_outputs())
    rel = estimate_relative_mse_from_values(data.outputs, data.surrogate_outputs);
  else
    rel = estimate_relative_mse(surrogate, data);
  if (rel.degenerate || sf.diagnostics.degenerate) {
    IntervalDiagnostics diag;
    diag.degenerate = true;
    diag.alpha = alpha;
    diag.n_effective = data.n();
    return clipped_interval(j, Method::Panin, 0.0, 1.0, 0.0, 0.0, std::move(diag));
  }
  PaninComponents parts;
  parts.s_hat_f = sf.point_lower;
  const double root_n = std::sqrt(static_cast<double>(surrogate_pairs.n()));
  parts.se_s_hat_f = sf.diagnostics.s_upper / root_n;
  parts.e2 = rel.e2;
  parts.se_e2 = rel.se;
  parts.n = data.n();
  return panin_interval(j, parts, alpha);
}

}  // namespace floodgate
