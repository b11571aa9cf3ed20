#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "floodgate/dataset.hpp"
#include "floodgate/errors.hpp"
#include "floodgate/estimators.hpp"
#include "floodgate/harness.hpp"
#include "floodgate/input_space.hpp"
#include "floodgate/io.hpp"
#include "floodgate/models.hpp"
#include "floodgate/stats.hpp"
#include "floodgate/surrogate.hpp"

namespace py = pybind11;
using namespace floodgate;

namespace {

ModelFunction model_from_callable(const std::string& name, std::size_t dimension,
                                  const py::function& fn) {
  return ModelFunction(name, dimension, [fn](std::span<const double> x) {
    py::gil_scoped_acquire gil;
    return fn(std::vector<double>(x.begin(), x.end())).cast<double>();
  });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Surrogate-based global sensitivity analysis with valid confidence intervals";

  py::register_exception<InvalidArgumentError>(m, "InvalidArgumentError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<DegenerateInputError>(m, "DegenerateInputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  // ---- input space and sampling ----
  py::enum_<MarginalKind>(m, "MarginalKind").value("Uniform", MarginalKind::Uniform);

  py::class_<InputMarginal>(m, "InputMarginal")
      .def(py::init([](const std::string& name, double lo, double hi) {
             return InputMarginal{name, MarginalKind::Uniform, lo, hi};
           }),
           py::arg("name"), py::arg("min"), py::arg("max"))
      .def_readonly("name", &InputMarginal::name)
      .def_readonly("min", &InputMarginal::min)
      .def_readonly("max", &InputMarginal::max);

  py::class_<InputSpace>(m, "InputSpace")
      .def(py::init<std::vector<InputMarginal>>(), py::arg("marginals"))
      .def_static("uniform_cube", &InputSpace::uniform_cube, py::arg("d"),
                  py::arg("lo") = 0.0, py::arg("hi") = 1.0)
      .def_property_readonly("dimension", &InputSpace::dimension)
      .def("marginal", &InputSpace::marginal, py::return_value_policy::reference_internal);

  py::class_<SampleMatrix>(m, "SampleMatrix")
      .def_readonly("values", &SampleMatrix::values)
      .def_readonly("seed", &SampleMatrix::seed)
      .def_readonly("batch_ids", &SampleMatrix::batch_ids);

  py::class_<ResampleBlock>(m, "ResampleBlock")
      .def_readonly("input_index", &ResampleBlock::input_index)
      .def_readonly("values", &ResampleBlock::values)
      .def_readonly("seed", &ResampleBlock::seed);

  m.def("sample_iid", &sample_iid, py::arg("space"), py::arg("n"), py::arg("seed"));
  m.def("sample_lhs_batches", &sample_lhs_batches, py::arg("space"), py::arg("batch_size"),
        py::arg("num_batches"), py::arg("seed"));
  m.def("resample_conditional", &resample_conditional, py::arg("space"), py::arg("samples"),
        py::arg("j"), py::arg("K"), py::arg("seed"));

  // ---- models ----
  py::class_<ModelFunction>(m, "ModelFunction")
      .def(py::init(&model_from_callable), py::arg("name"), py::arg("dimension"),
           py::arg("fn"))
      .def_property_readonly("name", &ModelFunction::name)
      .def_property_readonly("dimension", &ModelFunction::dimension)
      .def_property_readonly("known_total_indices",
                             [](const ModelFunction& f) { return f.known_total_indices(); })
      .def("__call__",
           [](const ModelFunction& f, const std::vector<double>& x) { return f(x); })
      .def("evaluate_block", &ModelFunction::evaluate_block, py::arg("points"));

  py::class_<HymodParams>(m, "HymodParams")
      .def(py::init([](double sm, double beta, double alfa, double rs, double rf) {
             return HymodParams{sm, beta, alfa, rs, rf};
           }),
           py::arg("sm"), py::arg("beta"), py::arg("alfa"), py::arg("rs"), py::arg("rf"))
      .def_readwrite("sm", &HymodParams::sm)
      .def_readwrite("beta", &HymodParams::beta)
      .def_readwrite("alfa", &HymodParams::alfa)
      .def_readwrite("rs", &HymodParams::rs)
      .def_readwrite("rf", &HymodParams::rf);

  py::class_<ForcingSeries>(m, "ForcingSeries")
      .def(py::init([](std::vector<double> precip, std::vector<double> pet,
                       std::optional<std::vector<double>> obs) {
             ForcingSeries f{std::move(precip), std::move(pet), std::move(obs)};
             f.validate();
             return f;
           }),
           py::arg("precipitation_mm"), py::arg("pet_mm"),
           py::arg("observed_flow_mm") = std::nullopt)
      .def_readonly("precipitation_mm", &ForcingSeries::precipitation_mm)
      .def_readonly("pet_mm", &ForcingSeries::pet_mm)
      .def_readonly("observed_flow_mm", &ForcingSeries::observed_flow_mm);

  m.def("hymod_simulate", &hymod_simulate, py::arg("params"), py::arg("forcing"));
  m.def("nse", [](const std::vector<double>& sim, const std::vector<double>& obs) {
    return nse(sim, obs);
  });
  m.def("hymod_space", &hymod_space);
  m.def("hymod_nse_response", &hymod_nse_response, py::arg("forcing"));
  m.def("synthetic_forcing", &synthetic_forcing, py::arg("T"), py::arg("seed"),
        py::arg("true_params"), py::arg("noise_sd"));
  m.def("ishigami", &ishigami, py::arg("a") = 7.0, py::arg("b") = 0.1);
  m.def("ishigami_space", &ishigami_space);
  m.def("additive_linear", &additive_linear, py::arg("coeffs"));
  m.def("synthetic_highdim", &synthetic_highdim, py::arg("d"), py::arg("seed"));
  m.def("constant_model", &constant_model, py::arg("d"), py::arg("value"));

  // ---- datasets ----
  py::class_<DatasetProvenance>(m, "DatasetProvenance")
      .def_readonly("seed", &DatasetProvenance::seed)
      .def_readonly("stream_label", &DatasetProvenance::stream_label)
      .def_readonly("model_name", &DatasetProvenance::model_name)
      .def_readonly("created_at", &DatasetProvenance::created_at);

  py::class_<EvaluatedDataset>(m, "EvaluatedDataset")
      .def(py::init([](Matrix inputs, std::optional<std::vector<double>> outputs,
                       std::optional<std::vector<double>> surrogate_outputs,
                       std::optional<std::vector<std::int64_t>> batch_ids) {
             EvaluatedDataset d;
             d.inputs = std::move(inputs);
             if (outputs) d.outputs = std::move(*outputs);
             if (surrogate_outputs) d.surrogate_outputs = std::move(*surrogate_outputs);
             d.batch_ids = std::move(batch_ids);
             d.validate();
             return d;
           }),
           py::arg("inputs"), py::arg("outputs") = std::nullopt,
           py::arg("surrogate_outputs") = std::nullopt, py::arg("batch_ids") = std::nullopt)
      .def_readonly("inputs", &EvaluatedDataset::inputs)
      .def_readonly("outputs", &EvaluatedDataset::outputs)
      .def_readonly("surrogate_outputs", &EvaluatedDataset::surrogate_outputs)
      .def_readonly("batch_ids", &EvaluatedDataset::batch_ids)
      .def_readonly("provenance", &EvaluatedDataset::provenance)
      .def_property_readonly("n", &EvaluatedDataset::n)
      .def_property_readonly("d", &EvaluatedDataset::d);

  m.def("make_dataset", &make_dataset, py::arg("model"), py::arg("space"), py::arg("n"),
        py::arg("seed"), py::arg("label") = "data");
  m.def("evaluate_on", &evaluate_on, py::arg("model"), py::arg("samples"),
        py::arg("stream_label") = "iid");

  // ---- surrogates ----
  py::class_<Surrogate, std::shared_ptr<Surrogate>>(m, "Surrogate")
      .def_property_readonly("dimension", &Surrogate::dimension)
      .def("predict",
           [](const Surrogate& s, const std::vector<double>& x) { return s.predict(x); })
      .def("predict_block", &Surrogate::predict_block);

  py::class_<FunctionSurrogate, Surrogate, std::shared_ptr<FunctionSurrogate>>(
      m, "FunctionSurrogate")
      .def(py::init<const ModelFunction&>(), py::arg("model"))
      .def(py::init([](const std::string& name, std::size_t dimension, py::function fn) {
             return FunctionSurrogate(model_from_callable(name, dimension, fn));
           }),
           py::arg("name"), py::arg("dimension"), py::arg("fn"));

  py::class_<KrrSurrogate, Surrogate, std::shared_ptr<KrrSurrogate>>(m, "KrrSurrogate")
      .def_property_readonly("gamma", &KrrSurrogate::gamma)
      .def_property_readonly("lambda_", &KrrSurrogate::lambda)
      .def_property_readonly("training_size",
                             [](const KrrSurrogate& s) { return s.metadata().training_size; });

  m.def(
      "fit_krr",
      [](const EvaluatedDataset& train, const InputSpace& space, std::optional<double> gamma,
         std::optional<double> lambda, std::size_t max_centers, std::uint64_t seed) {
        KrrOptions opts;
        opts.gamma = gamma;
        opts.lambda = lambda;
        opts.max_centers = max_centers;
        opts.seed = seed;
        return fit_krr(train, space, opts);
      },
      py::arg("train"), py::arg("space"), py::arg("gamma") = std::nullopt,
      py::arg("lambda_") = std::nullopt, py::arg("max_centers") = 4000, py::arg("seed") = 0);

  py::class_<RelativeMse>(m, "RelativeMse")
      .def_readonly("e2", &RelativeMse::e2)
      .def_readonly("se", &RelativeMse::se)
      .def_readonly("degenerate", &RelativeMse::degenerate);
  m.def("estimate_relative_mse", &estimate_relative_mse, py::arg("surrogate"),
        py::arg("eval"));

  // ---- estimators ----
  py::enum_<Method>(m, "Method")
      .value("Floodgate", Method::Floodgate)
      .value("Spf", Method::Spf)
      .value("SpfSurrogate", Method::SpfSurrogate)
      .value("Panin", Method::Panin);

  py::class_<FloodgateTerms>(m, "FloodgateTerms")
      .def_readonly("input_index", &FloodgateTerms::input_index)
      .def_readonly("m_z", &FloodgateTerms::m_z)
      .def_readonly("m", &FloodgateTerms::m)
      .def_readonly("v", &FloodgateTerms::v)
      .def_readonly("K", &FloodgateTerms::K);

  py::class_<IntervalDiagnostics>(m, "IntervalDiagnostics")
      .def_readonly("mz_bar", &IntervalDiagnostics::mz_bar)
      .def_readonly("m_bar", &IntervalDiagnostics::m_bar)
      .def_readonly("v_bar", &IntervalDiagnostics::v_bar)
      .def_readonly("sigma", &IntervalDiagnostics::sigma)
      .def_readonly("s_lower", &IntervalDiagnostics::s_lower)
      .def_readonly("s_upper", &IntervalDiagnostics::s_upper)
      .def_readonly("n_effective", &IntervalDiagnostics::n_effective)
      .def_readonly("K", &IntervalDiagnostics::K)
      .def_readonly("alpha", &IntervalDiagnostics::alpha)
      .def_readonly("degenerate", &IntervalDiagnostics::degenerate)
      .def_readonly("notes", &IntervalDiagnostics::notes);

  py::class_<IntervalResult>(m, "IntervalResult")
      .def_readonly("input_index", &IntervalResult::input_index)
      .def_readonly("method", &IntervalResult::method)
      .def_readonly("lower", &IntervalResult::lower)
      .def_readonly("upper", &IntervalResult::upper)
      .def_readonly("point_lower", &IntervalResult::point_lower)
      .def_readonly("point_upper", &IntervalResult::point_upper)
      .def_readonly("diagnostics", &IntervalResult::diagnostics)
      .def_property_readonly("width", &IntervalResult::width)
      .def("covers", &IntervalResult::covers)
      .def("__repr__", [](const IntervalResult& r) {
        return "<IntervalResult " + to_string(r.method) + " input=" +
               std::to_string(r.input_index) + " [" + std::to_string(r.lower) + ", " +
               std::to_string(r.upper) + "]>";
      });

  m.def("floodgate_terms", &floodgate_terms, py::arg("data"), py::arg("surrogate"),
        py::arg("space"), py::arg("j"), py::arg("K"), py::arg("seed"));
  m.def(
      "floodgate_terms_from_values",
      [](std::size_t input_index, const std::vector<double>& y_star,
         const std::vector<double>& f_base, const Matrix& f_resampled,
         std::optional<std::vector<std::int64_t>> batch_ids) {
        return floodgate_terms_from_values(input_index, y_star, f_base, f_resampled,
                                           std::move(batch_ids));
      },
      py::arg("input_index"), py::arg("y_star"), py::arg("f_base"), py::arg("f_resampled"),
      py::arg("batch_ids") = std::nullopt);
  m.def("floodgate_interval", &floodgate_interval, py::arg("terms"), py::arg("alpha"));
  m.def("floodgate_all_inputs", &floodgate_all_inputs, py::arg("data"), py::arg("surrogate"),
        py::arg("space"), py::arg("K"), py::arg("seed"), py::arg("alpha"));

  py::class_<PairedDataset>(m, "PairedDataset")
      .def_readonly("base", &PairedDataset::base)
      .def_readonly("picked_inputs", &PairedDataset::picked_inputs)
      .def_readonly("paired_outputs", &PairedDataset::paired_outputs)
      .def_readonly("eval_count", &PairedDataset::eval_count);

  m.def("build_paired_dataset",
        py::overload_cast<const ModelFunction&, const InputSpace&, std::size_t, std::uint64_t>(
            &build_paired_dataset),
        py::arg("model"), py::arg("space"), py::arg("n"), py::arg("seed"));
  m.def("build_paired_dataset_surrogate",
        py::overload_cast<const Surrogate&, const InputSpace&, std::size_t, std::uint64_t>(
            &build_paired_dataset),
        py::arg("surrogate"), py::arg("space"), py::arg("n"), py::arg("seed"));
  m.def("spf_jansen", &spf_jansen, py::arg("pairs"), py::arg("j"), py::arg("alpha"));
  m.def("spf_surrogate", &spf_surrogate, py::arg("pairs"), py::arg("j"), py::arg("alpha"));
  m.def("panin_from_data", &panin_from_data, py::arg("surrogate_pairs"), py::arg("data"),
        py::arg("surrogate"), py::arg("j"), py::arg("alpha"));

  // ---- harness ----
  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("values", &GroundTruth::values)
      .def_readonly("stderrs", &GroundTruth::stderrs)
      .def_readonly("closed_form", &GroundTruth::closed_form)
      .def_readonly("source", &GroundTruth::source);
  m.def("ground_truth", &ground_truth, py::arg("model"), py::arg("space"),
        py::arg("n_large"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("apply_to_existing_dataset", &apply_to_existing_dataset, py::arg("data"),
        py::arg("surrogate"), py::arg("space"), py::arg("alpha"), py::arg("K"),
        py::arg("seed"));

  // ---- io ----
  auto io_mod = m.def_submodule("io", "dataset, forcing, model, and result files");
  io_mod.def("save_dataset", &io::save_dataset, py::arg("data"), py::arg("path"));
  io_mod.def("load_dataset", &io::load_dataset, py::arg("path"));
  io_mod.def("save_forcing", &io::save_forcing, py::arg("forcing"), py::arg("path"));
  io_mod.def("load_forcing", &io::load_forcing, py::arg("path"));
  io_mod.def("save_krr", &io::save_krr, py::arg("model"), py::arg("path"));
  io_mod.def("load_krr", &io::load_krr, py::arg("path"));
  io_mod.def("save_ground_truth", &io::save_ground_truth, py::arg("truth"), py::arg("path"));
  io_mod.def("load_ground_truth", &io::load_ground_truth, py::arg("path"));
  io_mod.def("save_intervals_csv",
             [](const std::vector<IntervalResult>& rs, const std::filesystem::path& p) {
               io::save_intervals_csv(rs, p);
             });
  io_mod.def("save_intervals_json",
             [](const std::vector<IntervalResult>& rs, const std::filesystem::path& p) {
               io::save_intervals_json(rs, p);
             });

  // ---- stats helpers ----
  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  m.attr("__version__") = "0.1.0";
}
