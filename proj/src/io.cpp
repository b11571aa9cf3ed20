#include "floodgate/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "floodgate/errors.hpp"
#include "floodgate/harness.hpp"

namespace floodgate::io {

using nlohmann::json;

namespace {

constexpr const char* kDatasetMagic = "# floodgate-dataset format_version=1";
constexpr const char* kForcingMagic = "# floodgate-forcing format_version=1";
constexpr const char* kIntervalsMagic = "# floodgate-intervals format_version=1";
constexpr const char* kTruthMagic = "# floodgate-ground-truth format_version=1";
constexpr const char* kCoverageMagic = "# floodgate-coverage format_version=1";
constexpr const char* kWidthMagic = "# floodgate-width-curve format_version=1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::int64_t parse_int(const std::string& token, std::size_t row) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw FormatError("row " + std::to_string(row) + ": not an integer: '" + token + "'");
  return v;
}

// Reads all lines, strips a single optional trailing newline handling, and
// skips leading '#' comments (the version line).
std::vector<std::string> read_csv_lines(std::ifstream& in) {
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

json krr_to_json(const KrrSurrogate& m) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "krr-rbf";
  j["gamma"] = m.gamma();
  j["lambda"] = m.lambda();
  j["intercept"] = m.intercept();
  j["scale_lo"] = std::vector<double>(m.scale_lo().data(), m.scale_lo().data() + m.scale_lo().size());
  j["scale_hi"] = std::vector<double>(m.scale_hi().data(), m.scale_hi().data() + m.scale_hi().size());
  j["weights"] = std::vector<double>(m.weights().data(), m.weights().data() + m.weights().size());
  std::vector<std::vector<double>> centers(static_cast<std::size_t>(m.centers_scaled().rows()));
  for (Eigen::Index i = 0; i < m.centers_scaled().rows(); ++i) {
    centers[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(m.centers_scaled().cols()));
    for (Eigen::Index c = 0; c < m.centers_scaled().cols(); ++c)
      centers[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = m.centers_scaled()(i, c);
  }
  j["centers"] = std::move(centers);
  j["metadata"] = {{"training_size", m.metadata().training_size},
                   {"provenance", m.metadata().provenance}};
  return j;
}

json interval_to_json(const IntervalResult& r) {
  const auto& d = r.diagnostics;
  json j;
  j["input"] = r.input_index;
  j["method"] = to_string(r.method);
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  j["point_lower"] = r.point_lower;
  j["point_upper"] = r.point_upper;
  j["diagnostics"] = {
      {"mz_bar", d.mz_bar},
      {"m_bar", d.m_bar},
      {"v_bar", d.v_bar},
      {"sigma", {{d.sigma[0][0], d.sigma[0][1], d.sigma[0][2]},
                 {d.sigma[1][0], d.sigma[1][1], d.sigma[1][2]},
                 {d.sigma[2][0], d.sigma[2][1], d.sigma[2][2]}}},
      {"s_lower", d.s_lower},
      {"s_upper", d.s_upper},
      {"n_effective", d.n_effective},
      {"K", d.K},
      {"alpha", d.alpha},
      {"degenerate", d.degenerate},
      {"notes", d.notes},
  };
  return j;
}

std::string csv_number(double v, const char* what) {
  if (!std::isfinite(v))
    throw FormatError(std::string("refusing to write non-finite ") + what);
  return format_double(v);
}

// NaN-tolerant cell for report files: standard errors may be undefined when
// trials == 1, serialized as an empty cell.
std::string csv_stat(double v) { return std::isfinite(v) ? format_double(v) : std::string(); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token, std::size_t row) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc{} || ptr != token.data() + token.size())
    throw FormatError("row " + std::to_string(row) + ": not a number: '" + token + "'");
  if (!std::isfinite(v))
    throw FormatError("row " + std::to_string(row) + ": non-finite value: '" + token + "'");
  return v;
}

void save_dataset(const EvaluatedDataset& data, const std::filesystem::path& path) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t d = data.d();

  if (path.extension() == ".json") {
    json j;
    j["format_version"] = 1;
    j["kind"] = "dataset";
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c)
        rows[i][c] = data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    j["inputs"] = std::move(rows);
    if (data.has_outputs()) j["outputs"] = data.outputs;
    if (data.has_surrogate_outputs()) j["surrogate_outputs"] = data.surrogate_outputs;
    if (data.batch_ids) j["batch_ids"] = *data.batch_ids;
    j["provenance"] = {{"seed", data.provenance.seed},
                       {"stream_label", data.provenance.stream_label},
                       {"model_name", data.provenance.model_name},
                       {"created_at", data.provenance.created_at}};
    auto out = open_out(path);
    out << j.dump(2) << "\n";
    return;
  }

  auto out = open_out(path);
  out << kDatasetMagic << "\n";
  std::vector<std::string> header;
  for (std::size_t c = 0; c < d; ++c) header.push_back("x_" + std::to_string(c + 1));
  if (data.has_outputs()) header.emplace_back("y");
  if (data.has_surrogate_outputs()) header.emplace_back("f");
  if (data.batch_ids) header.emplace_back("batch");
  for (std::size_t c = 0; c < header.size(); ++c)
    out << header[c] << (c + 1 < header.size() ? "," : "\n");

  std::vector<std::string> cells;
  for (std::size_t i = 0; i < n; ++i) {
    cells.clear();
    for (std::size_t c = 0; c < d; ++c)
      cells.push_back(csv_number(
          data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)), "input"));
    if (data.has_outputs()) cells.push_back(csv_number(data.outputs[i], "output"));
    if (data.has_surrogate_outputs())
      cells.push_back(csv_number(data.surrogate_outputs[i], "surrogate output"));
    if (data.batch_ids) cells.push_back(std::to_string((*data.batch_ids)[i]));
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << cells[c] << (c + 1 < cells.size() ? "," : "\n");
  }
}

EvaluatedDataset load_dataset(const std::filesystem::path& path) {
  if (path.extension() == ".json") {
    auto in = open_in(path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw FormatError("bad dataset JSON: " + std::string(e.what()));
    }
    EvaluatedDataset data;
    const auto& rows = j.at("inputs");
    const std::size_t n = rows.size();
    if (n == 0) throw FormatError("dataset JSON has no rows");
    const std::size_t d = rows[0].size();
    data.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != d)
        throw FormatError("row " + std::to_string(i + 1) + ": ragged JSON inputs");
      for (std::size_t c = 0; c < d; ++c)
        data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
            rows[i][c].get<double>();
    }
    if (j.contains("outputs")) data.outputs = j["outputs"].get<std::vector<double>>();
    if (j.contains("surrogate_outputs"))
      data.surrogate_outputs = j["surrogate_outputs"].get<std::vector<double>>();
    if (j.contains("batch_ids"))
      data.batch_ids = j["batch_ids"].get<std::vector<std::int64_t>>();
    if (j.contains("provenance")) {
      const auto& p = j["provenance"];
      data.provenance.seed = p.value("seed", std::uint64_t{0});
      data.provenance.stream_label = p.value("stream_label", "");
      data.provenance.model_name = p.value("model_name", "");
      data.provenance.created_at = p.value("created_at", "");
    }
    data.validate();
    return data;
  }

  auto in = open_in(path);
  const auto lines = read_csv_lines(in);
  std::size_t li = 0;
  while (li < lines.size() && (lines[li].empty() || lines[li][0] == '#')) ++li;
  if (li >= lines.size()) throw FormatError("dataset file has no header");
  const auto header = split_csv_line(lines[li]);

  std::size_t d = 0;
  bool has_y = false, has_f = false, has_batch = false;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "x_" + std::to_string(d + 1)) {
      if (has_y || has_f || has_batch) throw FormatError("input columns must come first");
      ++d;
    } else if (h == "y" && !has_y && !has_f && !has_batch) {
      has_y = true;
    } else if (h == "f" && !has_f && !has_batch) {
      has_f = true;
    } else if (h == "batch" && !has_batch && c + 1 == header.size()) {
      has_batch = true;
    } else {
      throw FormatError("unexpected dataset column '" + h + "'");
    }
  }
  if (d == 0) throw FormatError("dataset has no input columns x_1..x_d");
  const std::size_t expected_cols = d + (has_y ? 1 : 0) + (has_f ? 1 : 0) + (has_batch ? 1 : 0);

  EvaluatedDataset data;
  std::vector<std::array<double, 1>> dummy;
  std::vector<std::vector<double>> values;
  for (std::size_t r = li + 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = split_csv_line(lines[r]);
    const std::size_t row_no = r + 1;  // 1-based file row for error messages
    if (cells.size() != expected_cols)
      throw FormatError("row " + std::to_string(row_no) + ": expected " +
                        std::to_string(expected_cols) + " cells, found " +
                        std::to_string(cells.size()));
    std::vector<double> row(d);
    std::size_t c = 0;
    for (; c < d; ++c) row[c] = parse_double(cells[c], row_no);
    values.push_back(std::move(row));
    if (has_y) data.outputs.push_back(parse_double(cells[c++], row_no));
    if (has_f) data.surrogate_outputs.push_back(parse_double(cells[c++], row_no));
    if (has_batch) {
      if (!data.batch_ids) data.batch_ids.emplace();
      data.batch_ids->push_back(parse_int(cells[c++], row_no));
    }
  }
  if (values.empty()) throw FormatError("dataset has no data rows");
  data.inputs.resize(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t c = 0; c < d; ++c)
      data.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values[i][c];
  data.validate();
  return data;
}

void save_forcing(const ForcingSeries& forcing, const std::filesystem::path& path) {
  forcing.validate();
  auto out = open_out(path);
  out << kForcingMagic << "\n";
  out << "day,precip_mm,pet_mm" << (forcing.observed_flow_mm ? ",obs_flow_mm" : "") << "\n";
  for (std::size_t t = 0; t < forcing.length(); ++t) {
    out << (t + 1) << "," << csv_number(forcing.precipitation_mm[t], "precipitation") << ","
        << csv_number(forcing.pet_mm[t], "pet");
    if (forcing.observed_flow_mm)
      out << "," << csv_number((*forcing.observed_flow_mm)[t], "observed flow");
    out << "\n";
  }
}

ForcingSeries load_forcing(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto lines = read_csv_lines(in);
  std::size_t li = 0;
  while (li < lines.size() && (lines[li].empty() || lines[li][0] == '#')) ++li;
  if (li >= lines.size()) throw FormatError("forcing file has no header");
  const auto header = split_csv_line(lines[li]);
  const bool has_obs = header.size() == 4 && header[3] == "obs_flow_mm";
  if (!(header.size() >= 3 && header[0] == "day" && header[1] == "precip_mm" &&
        header[2] == "pet_mm" && (header.size() == 3 || has_obs)))
    throw FormatError("forcing header must be day,precip_mm,pet_mm[,obs_flow_mm]");

  ForcingSeries f;
  if (has_obs) f.observed_flow_mm.emplace();
  for (std::size_t r = li + 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const std::size_t row_no = r + 1;
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() != header.size())
      throw FormatError("row " + std::to_string(row_no) + ": ragged forcing row");
    parse_int(cells[0], row_no);
    const double precip = parse_double(cells[1], row_no);
    const double pet = parse_double(cells[2], row_no);
    if (precip < 0.0 || pet < 0.0)
      throw FormatError("row " + std::to_string(row_no) + ": negative forcing value");
    f.precipitation_mm.push_back(precip);
    f.pet_mm.push_back(pet);
    if (has_obs) {
      const double obs = parse_double(cells[3], row_no);
      if (obs < 0.0)
        throw FormatError("row " + std::to_string(row_no) + ": negative observed flow");
      f.observed_flow_mm->push_back(obs);
    }
  }
  f.validate();
  return f;
}

void save_krr(const KrrSurrogate& model, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << krr_to_json(model).dump(2) << "\n";
}

KrrSurrogate load_krr(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad KRR model JSON: " + std::string(e.what()));
  }
  if (j.value("format_version", 0) != 1 || j.value("kind", "") != "krr-rbf")
    throw FormatError("not a version-1 krr-rbf model file");
  try {
    const auto centers_rows = j.at("centers").get<std::vector<std::vector<double>>>();
    const auto weights_v = j.at("weights").get<std::vector<double>>();
    const auto lo_v = j.at("scale_lo").get<std::vector<double>>();
    const auto hi_v = j.at("scale_hi").get<std::vector<double>>();
    const std::size_t m = centers_rows.size();
    if (m == 0) throw FormatError("KRR model has no centers");
    const std::size_t d = centers_rows[0].size();
    Matrix centers(m, d);
    for (std::size_t i = 0; i < m; ++i) {
      if (centers_rows[i].size() != d) throw FormatError("ragged KRR centers");
      for (std::size_t c = 0; c < d; ++c)
        centers(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = centers_rows[i][c];
    }
    Vector weights(m), lo(d), hi(d);
    if (weights_v.size() != m || lo_v.size() != d || hi_v.size() != d)
      throw FormatError("KRR model arrays have inconsistent sizes");
    for (std::size_t i = 0; i < m; ++i) weights(static_cast<Eigen::Index>(i)) = weights_v[i];
    for (std::size_t c = 0; c < d; ++c) {
      lo(static_cast<Eigen::Index>(c)) = lo_v[c];
      hi(static_cast<Eigen::Index>(c)) = hi_v[c];
    }
    Surrogate::Metadata meta;
    if (j.contains("metadata")) {
      meta.training_size = j["metadata"].value("training_size", std::size_t{0});
      meta.provenance = j["metadata"].value("provenance", "");
    }
    meta.gamma = j.at("gamma").get<double>();
    meta.lambda = j.at("lambda").get<double>();
    return KrrSurrogate(std::move(centers), std::move(weights), meta.gamma, meta.lambda,
                        j.at("intercept").get<double>(), std::move(lo), std::move(hi),
                        std::move(meta));
  } catch (const json::exception& e) {
    throw FormatError("bad KRR model JSON: " + std::string(e.what()));
  }
}

void save_intervals_csv(std::span<const IntervalResult> results,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kIntervalsMagic << "\n";
  out << "input,method,lower,upper,point_lower,point_upper,n,K,alpha,degenerate\n";
  for (const auto& r : results) {
    out << r.input_index << "," << to_string(r.method) << "," << csv_number(r.lower, "lower")
        << "," << csv_number(r.upper, "upper") << "," << csv_number(r.point_lower, "point")
        << "," << csv_number(r.point_upper, "point") << "," << r.diagnostics.n_effective << ","
        << r.diagnostics.K << "," << csv_number(r.diagnostics.alpha, "alpha") << ","
        << (r.diagnostics.degenerate ? 1 : 0) << "\n";
  }
}

void save_intervals_json(std::span<const IntervalResult> results,
                         const std::filesystem::path& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "intervals";
  j["results"] = json::array();
  for (const auto& r : results) j["results"].push_back(interval_to_json(r));
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void save_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kTruthMagic << "\n";
  out << "input,s_total,stderr,source\n";
  for (std::size_t j = 0; j < truth.values.size(); ++j)
    out << j << "," << csv_number(truth.values[j], "value") << ","
        << csv_number(truth.stderrs[j], "stderr") << "," << truth.source << "\n";
}

GroundTruth load_ground_truth(const std::filesystem::path& path) {
  auto in = open_in(path);
  const auto lines = read_csv_lines(in);
  std::size_t li = 0;
  while (li < lines.size() && (lines[li].empty() || lines[li][0] == '#')) ++li;
  if (li >= lines.size() || split_csv_line(lines[li]).size() < 3)
    throw FormatError("ground-truth header must be input,s_total,stderr[,source]");
  GroundTruth truth;
  truth.source = "file";
  for (std::size_t r = li + 1; r < lines.size(); ++r) {
    if (lines[r].empty()) continue;
    const auto cells = split_csv_line(lines[r]);
    if (cells.size() < 3) throw FormatError("row " + std::to_string(r + 1) + ": ragged row");
    truth.values.push_back(parse_double(cells[1], r + 1));
    truth.stderrs.push_back(parse_double(cells[2], r + 1));
  }
  if (truth.values.empty()) throw FormatError("ground-truth file has no rows");
  return truth;
}

void save_coverage_csv(const CoverageReport& report, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kCoverageMagic << "\n";
  out << "method,input,N,n_used,trials,skipped,mean_lower,se_lower,mean_upper,se_upper,"
         "mean_width,se_width,mean_excess_width,coverage,coverage_se,nominal,truth\n";
  for (const auto& c : report.cells) {
    out << to_string(c.method) << "," << c.input << "," << c.N << "," << c.n_used << ","
        << c.trials_run << "," << (c.skipped ? 1 : 0) << ",";
    if (c.skipped) {
      out << ",,,,,,,,,";
    } else {
      out << csv_stat(c.mean_lower) << "," << csv_stat(c.se_lower) << ","
          << csv_stat(c.mean_upper) << "," << csv_stat(c.se_upper) << ","
          << csv_stat(c.mean_width) << "," << csv_stat(c.se_width) << ","
          << csv_stat(c.mean_excess_width) << "," << csv_stat(c.coverage) << ","
          << csv_stat(c.coverage_se) << ",";
    }
    // Nominal level rides along so coverage plots can draw their guide line.
    out << csv_stat(1.0 - report.alpha) << "," << csv_stat(report.truth.values.at(c.input))
        << "\n";
  }
}

void save_coverage_json(const CoverageReport& report, const std::filesystem::path& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "coverage-report";
  j["truth"] = {{"values", report.truth.values},
                {"stderrs", report.truth.stderrs},
                {"closed_form", report.truth.closed_form},
                {"source", report.truth.source},
                {"n_large", report.truth.n_large},
                {"seed", report.truth.seed}};
  j["surrogate_quality"] = {{"e2", report.surrogate_quality.e2},
                            {"se", report.surrogate_quality.se},
                            {"degenerate", report.surrogate_quality.degenerate}};
  j["training_fstar_evals"] = report.training_fstar_evals;
  j["ledger"] = json::array();
  for (const auto& e : report.ledger)
    j["ledger"].push_back({{"method", to_string(e.method)},
                           {"N", e.N},
                           {"planned_per_trial", e.planned_per_trial},
                           {"one_time_evals", e.one_time_evals},
                           {"actual_total", e.actual_total},
                           {"trials", e.trials}});
  j["cells"] = json::array();
  for (const auto& c : report.cells) {
    json cell = {{"method", to_string(c.method)}, {"input", c.input},       {"N", c.N},
                 {"n_used", c.n_used},            {"trials", c.trials_run}, {"skipped", c.skipped}};
    if (!c.skipped) {
      cell["mean_lower"] = c.mean_lower;
      cell["mean_upper"] = c.mean_upper;
      cell["mean_width"] = c.mean_width;
      cell["mean_excess_width"] = c.mean_excess_width;
      cell["coverage"] = c.coverage;
      if (std::isfinite(c.se_lower)) {
        cell["se_lower"] = c.se_lower;
        cell["se_upper"] = c.se_upper;
        cell["se_width"] = c.se_width;
        cell["coverage_se"] = c.coverage_se;
      }
    }
    j["cells"].push_back(cell);
  }
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

void save_width_curve_csv(const WidthCurve& curve, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kWidthMagic << "\n";
  out << "method,input,N,n_used,trials,mean_width,se_width,mean_excess_width,slope\n";
  for (const auto& c : curve.report.cells) {
    if (c.skipped) continue;
    double slope = std::numeric_limits<double>::quiet_NaN();
    for (const auto& s : curve.excess_width_slopes)
      if (s.method == c.method && s.input == c.input) slope = s.slope;
    out << to_string(c.method) << "," << c.input << "," << c.N << "," << c.n_used << ","
        << c.trials_run << "," << csv_stat(c.mean_width) << "," << csv_stat(c.se_width) << ","
        << csv_stat(c.mean_excess_width) << "," << csv_stat(slope) << "\n";
  }
}

void save_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  json j;
  j["format_version"] = 1;
  j["kind"] = "run-manifest";
  j["tool_version"] = manifest.tool_version;
  j["subcommand"] = manifest.subcommand;
  j["config"] = json::parse(manifest.config_json.empty() ? "{}" : manifest.config_json);
  j["config_hash"] = manifest.config_hash;
  j["seed"] = manifest.seed;
  j["evaluation_counts"] = json::object();
  for (const auto& [name, count] : manifest.evaluation_counts)
    j["evaluation_counts"][name] = count;
  j["wallclock_seconds"] = manifest.wallclock_seconds;
  j["created_at"] = manifest.created_at;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace floodgate::io
