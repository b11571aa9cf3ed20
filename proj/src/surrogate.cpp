#include "floodgate/surrogate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "floodgate/errors.hpp"
#include "floodgate/rng.hpp"
#include "floodgate/stats.hpp"

namespace floodgate {

Vector Surrogate::predict_block(const Matrix& points) const {
  Vector out(points.rows());
  std::vector<double> row(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) row[static_cast<std::size_t>(j)] = points(i, j);
    out(i) = predict(row);
  }
  return out;
}

FunctionSurrogate::FunctionSurrogate(std::string name, std::size_t dimension,
                                     ModelFunction::Fn fn)
    : dimension_(dimension), fn_(std::move(fn)) {
  if (dimension_ == 0) throw InvalidArgumentError("FunctionSurrogate: dimension must be >= 1");
  if (!fn_) throw InvalidArgumentError("FunctionSurrogate: missing function");
  metadata_.provenance = "function:" + name;
}

FunctionSurrogate::FunctionSurrogate(const ModelFunction& model)
    : FunctionSurrogate(model.name(), model.dimension(),
                        [model](std::span<const double> x) { return model(x); }) {}

KrrSurrogate::KrrSurrogate(Matrix centers_scaled, Vector weights, double gamma, double lambda,
                           double intercept, Vector scale_lo, Vector scale_hi,
                           Metadata metadata)
    : centers_(std::move(centers_scaled)),
      weights_(std::move(weights)),
      gamma_(gamma),
      lambda_(lambda),
      intercept_(intercept),
      scale_lo_(std::move(scale_lo)),
      scale_hi_(std::move(scale_hi)),
      metadata_(std::move(metadata)) {
  if (centers_.rows() == 0) throw InvalidArgumentError("KrrSurrogate: no centers");
  if (weights_.size() != centers_.rows())
    throw InvalidArgumentError("KrrSurrogate: weight/center count mismatch");
  if (!(gamma_ > 0.0)) throw InvalidArgumentError("KrrSurrogate: gamma must be positive");
  if (lambda_ < 0.0) throw InvalidArgumentError("KrrSurrogate: lambda must be >= 0");
  if (scale_lo_.size() != centers_.cols() || scale_hi_.size() != centers_.cols())
    throw InvalidArgumentError("KrrSurrogate: scaling dimension mismatch");
  if (!weights_.allFinite()) throw InvalidArgumentError("KrrSurrogate: non-finite weights");
}

Matrix KrrSurrogate::scale_rows(const Matrix& points) const {
  Matrix scaled(points.rows(), points.cols());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    const double lo = scale_lo_(j);
    const double span = scale_hi_(j) - scale_lo_(j);
    scaled.col(j) = (points.col(j).array() - lo) / (span != 0.0 ? span : 1.0);
  }
  return scaled;
}

double KrrSurrogate::predict(std::span<const double> x) const {
  if (x.size() != dimension()) throw InvalidArgumentError("KrrSurrogate: dimension mismatch");
  Eigen::RowVectorXd xs(centers_.cols());
  for (Eigen::Index j = 0; j < centers_.cols(); ++j) {
    const double span = scale_hi_(j) - scale_lo_(j);
    xs(j) = (x[static_cast<std::size_t>(j)] - scale_lo_(j)) / (span != 0.0 ? span : 1.0);
  }
  const Vector d2 = (centers_.rowwise() - xs).rowwise().squaredNorm();
  return intercept_ + (-d2.array() / (2.0 * gamma_ * gamma_)).exp().matrix().dot(weights_);
}

Vector KrrSurrogate::predict_block(const Matrix& points) const {
  if (points.cols() != centers_.cols())
    throw InvalidArgumentError("KrrSurrogate: dimension mismatch in block");
  const Matrix scaled = scale_rows(points);
  const Vector center_sq = centers_.rowwise().squaredNorm();
  const double inv = 1.0 / (2.0 * gamma_ * gamma_);

  Vector out(points.rows());
  // Chunk rows so the kernel block stays within a modest memory budget.
  const Eigen::Index m = centers_.rows();
  const Eigen::Index chunk = std::max<Eigen::Index>(1, 4'000'000 / std::max<Eigen::Index>(m, 1));
  for (Eigen::Index start = 0; start < points.rows(); start += chunk) {
    const Eigen::Index rows = std::min(chunk, points.rows() - start);
    const auto block = scaled.middleRows(start, rows);
    Matrix d2 = -2.0 * block * centers_.transpose();
    d2.colwise() += block.rowwise().squaredNorm();
    d2.rowwise() += center_sq.transpose();
    out.segment(start, rows) =
        ((-d2.array() * inv).max(-745.0).exp().matrix() * weights_).array() + intercept_;
  }
  return out;
}

namespace {

double median_pairwise_distance(const Matrix& scaled, Rng& rng) {
  const Eigen::Index n = scaled.rows();
  const Eigen::Index cap = std::min<Eigen::Index>(n, 512);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  if (n > cap) {
    for (Eigen::Index i = 0; i < cap; ++i) {
      const auto k = static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::uint64_t>(n - i)) + static_cast<std::uint64_t>(i));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(k)]);
    }
  }
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(cap) * (static_cast<std::size_t>(cap) - 1) / 2);
  for (Eigen::Index a = 0; a < cap; ++a)
    for (Eigen::Index b = a + 1; b < cap; ++b)
      dists.push_back((scaled.row(idx[static_cast<std::size_t>(a)]) -
                       scaled.row(idx[static_cast<std::size_t>(b)]))
                          .norm());
  if (dists.empty()) return 1.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid;
}

}  // namespace

KrrSurrogate fit_krr(const EvaluatedDataset& train, const KrrOptions& options) {
  train.validate();
  if (!train.has_outputs()) throw InvalidArgumentError("fit_krr: training data has no outputs");
  const std::size_t n = train.n();
  const std::size_t d = train.d();

  // Scaling box: supplied, or the per-dimension data range.
  Vector lo(d), hi(d);
  if (options.scaling) {
    lo = options.scaling->first;
    hi = options.scaling->second;
    if (lo.size() != static_cast<Eigen::Index>(d) || hi.size() != static_cast<Eigen::Index>(d))
      throw InvalidArgumentError("fit_krr: scaling dimension mismatch");
  } else {
    lo = train.inputs.colwise().minCoeff();
    hi = train.inputs.colwise().maxCoeff();
  }

  // Uniform subsample beyond max_centers keeps the dense solve at desk scale.
  Rng rng = Rng::substream(options.seed, "krr-centers");
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  std::size_t m = n;
  if (options.max_centers > 0 && n > options.max_centers) {
    m = options.max_centers;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t k = i + rng.uniform_index(n - i);
      std::swap(rows[i], rows[k]);
    }
    rows.resize(m);
  }

  Matrix centers(m, d);
  Vector y(m);
  for (std::size_t i = 0; i < m; ++i) {
    centers.row(static_cast<Eigen::Index>(i)) =
        train.inputs.row(static_cast<Eigen::Index>(rows[i]));
    y(static_cast<Eigen::Index>(i)) = train.outputs[rows[i]];
  }
  for (Eigen::Index j = 0; j < centers.cols(); ++j) {
    const double span = hi(j) - lo(j);
    centers.col(j) = (centers.col(j).array() - lo(j)) / (span != 0.0 ? span : 1.0);
  }

  double gamma = options.gamma.value_or(0.0);
  if (!options.gamma) {
    gamma = median_pairwise_distance(centers, rng);
    if (!(gamma > 0.0)) gamma = 0.5;  // all points coincide; any bandwidth works
  }
  if (!(gamma > 0.0)) throw InvalidArgumentError("fit_krr: gamma must be positive");
  const double lambda = options.lambda.value_or(1e-6 * static_cast<double>(m));
  if (lambda < 0.0) throw InvalidArgumentError("fit_krr: lambda must be >= 0");

  const double intercept = y.mean();
  const Vector yc = y.array() - intercept;

  Matrix gram = -2.0 * centers * centers.transpose();
  const Vector sq = centers.rowwise().squaredNorm();
  gram.colwise() += sq;
  gram.rowwise() += sq.transpose();
  gram = (-gram.array() / (2.0 * gamma * gamma)).exp();
  gram.diagonal().array() += lambda;

  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw NumericalError(
        "fit_krr: kernel system is not positive definite (duplicate training points with "
        "lambda = 0?); raise lambda");
  const Vector weights = llt.solve(yc);
  if (!weights.allFinite())
    throw NumericalError("fit_krr: non-finite weights from the kernel solve; raise lambda");

  Surrogate::Metadata meta;
  meta.training_size = m;
  meta.gamma = gamma;
  meta.lambda = lambda;
  meta.provenance = "krr-rbf(train='" + train.provenance.stream_label +
                    "', seed=" + std::to_string(train.provenance.seed) + ")";
  return KrrSurrogate(std::move(centers), weights, gamma, lambda, intercept, std::move(lo),
                      std::move(hi), std::move(meta));
}

KrrSurrogate fit_krr(const EvaluatedDataset& train, const InputSpace& space,
                     KrrOptions options) {
  const std::size_t d = space.dimension();
  Vector lo(d), hi(d);
  for (std::size_t j = 0; j < d; ++j) {
    lo(static_cast<Eigen::Index>(j)) = space.marginal(j).min;
    hi(static_cast<Eigen::Index>(j)) = space.marginal(j).max;
  }
  options.scaling = std::make_pair(std::move(lo), std::move(hi));
  return fit_krr(train, options);
}

RelativeMse estimate_relative_mse_from_values(std::span<const double> y_star,
                                              std::span<const double> y_surrogate) {
  const std::size_t n = y_star.size();
  if (n < 2 || y_surrogate.size() != n)
    throw InvalidArgumentError("estimate_relative_mse: need >= 2 matched rows");

  const double ybar = mean(y_star);
  std::vector<double> a(n), b(n);
  const double bessel = static_cast<double>(n) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y_star[i] - y_surrogate[i];
    a[i] = r * r;
    b[i] = bessel * (y_star[i] - ybar) * (y_star[i] - ybar);
  }
  const double abar = mean(a);
  const double bbar = mean(b);

  RelativeMse out;
  if (bbar == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double r = abar / bbar;
  // Delta method on the ratio of means of the per-sample terms (A_i, B_i).
  double saa = 0, sab = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - abar) * (a[i] - abar);
    sab += (a[i] - abar) * (b[i] - bbar);
    sbb += (b[i] - bbar) * (b[i] - bbar);
  }
  const double denom = static_cast<double>(n - 1);
  saa /= denom;
  sab /= denom;
  sbb /= denom;
  out.e2 = r;
  const double var = (saa - 2.0 * r * sab + r * r * sbb) / (bbar * bbar * static_cast<double>(n));
  out.se = var > 0.0 ? std::sqrt(var) : 0.0;
  return out;
}

RelativeMse estimate_relative_mse(const Surrogate& surrogate, const EvaluatedDataset& eval) {
  eval.validate();
  if (!eval.has_outputs() || eval.n() < 2)
    throw InvalidArgumentError("estimate_relative_mse: need >= 2 rows with outputs");
  if (surrogate.dimension() != eval.d())
    throw InvalidArgumentError("estimate_relative_mse: dimension mismatch");
  const Vector f = surrogate.predict_block(eval.inputs);
  return estimate_relative_mse_from_values(eval.outputs,
                                           {f.data(), static_cast<std::size_t>(f.size())});
}

}  // namespace floodgate
