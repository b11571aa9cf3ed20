#include "floodgate/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>

#include "floodgate/errors.hpp"
#include "floodgate/harness.hpp"
#include "floodgate/io.hpp"
#include "floodgate/models.hpp"

namespace floodgate {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw FormatError("config: " + where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw FormatError("config: unknown key '" + key + "' in " + where);
  }
}

struct ResolvedModel {
  ModelFunction model;
  InputSpace space;
  std::shared_ptr<std::atomic<std::uint64_t>> counter;
  ModelFunction counted;  // wrapped with the evaluation counter
};

json default_model_config(const std::string& name) {
  if (name == "ishigami") return {{"name", "ishigami"}, {"a", 7.0}, {"b", 0.1}};
  if (name == "additive") return {{"name", "additive"}, {"coeffs", {1.0, 2.0}}};
  if (name == "highdim") return {{"name", "highdim"}, {"d", 100}, {"model_seed", 1}};
  if (name == "constant") return {{"name", "constant"}, {"d", 2}, {"value", 1.0}};
  if (name == "hymod")
    return {{"name", "hymod"},
            {"forcing", nullptr},
            {"T", 365},
            {"forcing_seed", 20240101},
            {"true_params", {150.0, 0.8, 0.6, 0.05, 0.5}},
            {"noise_sd", 1.0}};
  throw InvalidArgumentError("unknown model '" + name +
                             "' (known: ishigami, additive, highdim, constant, hymod)");
}

ResolvedModel resolve_model(const json& mj) {
  const std::string name = mj.value("name", "");
  ModelFunction* built = nullptr;
  std::optional<ModelFunction> model;
  std::optional<InputSpace> space;
  (void)built;

  if (name == "ishigami") {
    check_keys(mj, "model", {"name", "a", "b"});
    model = ishigami(mj.value("a", 7.0), mj.value("b", 0.1));
    space = ishigami_space();
  } else if (name == "additive") {
    check_keys(mj, "model", {"name", "coeffs"});
    const auto coeffs = mj.value("coeffs", std::vector<double>{1.0, 2.0});
    model = additive_linear(coeffs);
    space = InputSpace::uniform_cube(coeffs.size());
  } else if (name == "highdim") {
    check_keys(mj, "model", {"name", "d", "model_seed"});
    const std::size_t d = mj.value("d", std::size_t{100});
    model = synthetic_highdim(d, mj.value("model_seed", std::uint64_t{1}));
    space = InputSpace::uniform_cube(d);
  } else if (name == "constant") {
    check_keys(mj, "model", {"name", "d", "value"});
    const std::size_t d = mj.value("d", std::size_t{2});
    model = constant_model(d, mj.value("value", 1.0));
    space = InputSpace::uniform_cube(d);
  } else if (name == "hymod") {
    check_keys(mj, "model", {"name", "forcing", "T", "forcing_seed", "true_params", "noise_sd"});
    ForcingSeries forcing;
    if (mj.contains("forcing") && !mj["forcing"].is_null()) {
      forcing = io::load_forcing(mj["forcing"].get<std::string>());
    } else {
      const auto tp = mj.value("true_params", std::vector<double>{150.0, 0.8, 0.6, 0.05, 0.5});
      if (tp.size() != 5)
        throw InvalidArgumentError("hymod true_params must have 5 entries");
      forcing = synthetic_forcing(mj.value("T", std::size_t{365}),
                                  mj.value("forcing_seed", std::uint64_t{20240101}),
                                  HymodParams{tp[0], tp[1], tp[2], tp[3], tp[4]},
                                  mj.value("noise_sd", 1.0));
    }
    model = hymod_nse_response(forcing);
    space = hymod_space();
  } else {
    throw InvalidArgumentError("unknown model '" + name + "'");
  }

  ResolvedModel out{std::move(*model), std::move(*space),
                    std::make_shared<std::atomic<std::uint64_t>>(0),
                    constant_model(1, 0.0)};
  out.counted = with_eval_counter(out.model, out.counter);
  return out;
}

SurrogateSpec parse_surrogate_spec(const json& sj) {
  SurrogateSpec spec;
  const std::string type = sj.value("type", "krr");
  if (type == "krr") {
    check_keys(sj, "surrogate", {"type", "train_size", "gamma", "lambda", "max_centers"});
    spec.kind = SurrogateSpec::Kind::KrrTrain;
    spec.train_size = sj.value("train_size", std::size_t{1000});
    if (sj.contains("gamma") && !sj["gamma"].is_null()) spec.gamma = sj["gamma"].get<double>();
    if (sj.contains("lambda") && !sj["lambda"].is_null())
      spec.lambda = sj["lambda"].get<double>();
    spec.max_centers = sj.value("max_centers", std::size_t{4000});
  } else if (type == "krr-tier") {
    check_keys(sj, "surrogate", {"type", "target_e2", "max_size"});
    spec.kind = SurrogateSpec::Kind::KrrTier;
    spec.target_e2 = sj.value("target_e2", 0.01);
    spec.tier_max_size = sj.value("max_size", std::size_t{4096});
  } else if (type == "krr-file") {
    check_keys(sj, "surrogate", {"type", "path"});
    spec.kind = SurrogateSpec::Kind::KrrFile;
    spec.path = sj.value("path", "");
    if (spec.path.empty()) throw FormatError("config: surrogate.path required for krr-file");
  } else if (type == "exact") {
    check_keys(sj, "surrogate", {"type"});
    spec.kind = SurrogateSpec::Kind::Exact;
  } else {
    throw FormatError("config: unknown surrogate type '" + type + "'");
  }
  return spec;
}

Method parse_method(const std::string& name) {
  if (name == "floodgate") return Method::Floodgate;
  if (name == "spf") return Method::Spf;
  if (name == "spf-surrogate") return Method::SpfSurrogate;
  if (name == "panin") return Method::Panin;
  throw FormatError("config: unknown method '" + name + "'");
}

GroundTruthSpec parse_ground_truth_spec(const json& gj) {
  GroundTruthSpec spec;
  check_keys(gj, "ground_truth", {"mode", "n_large", "seed", "path"});
  const std::string mode = gj.value("mode", "auto");
  if (mode == "auto") spec.mode = GroundTruthSpec::Mode::Auto;
  else if (mode == "closed-form") spec.mode = GroundTruthSpec::Mode::ClosedForm;
  else if (mode == "jansen") spec.mode = GroundTruthSpec::Mode::Jansen;
  else if (mode == "file") spec.mode = GroundTruthSpec::Mode::File;
  else throw FormatError("config: unknown ground_truth mode '" + mode + "'");
  spec.n_large = gj.value("n_large", std::size_t{1000000});
  if (gj.contains("seed") && !gj["seed"].is_null())
    spec.seed = gj["seed"].get<std::uint64_t>();
  spec.path = gj.value("path", "");
  return spec;
}

/// CLI-level options; flags override the config file.
struct CliArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string model_name;
  std::string data_path;
  std::string surrogate_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<std::size_t> K;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_large;
  std::optional<std::size_t> lhs_batch_size;
  std::optional<std::size_t> lhs_num_batches;
  std::optional<std::size_t> workers;
};

json load_config_json(const CliArgs& args) {
  json cfg = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw IoError("cannot open config: " + args.config_path);
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      throw FormatError("bad config JSON: " + std::string(e.what()));
    }
  }
  check_keys(cfg, "config",
             {"format_version", "model", "surrogate", "methods", "budgets", "trials", "alpha",
              "K", "seed", "fresh_inputs_per_trial", "workers", "ground_truth", "data", "n",
              "lhs", "n_large"});
  if (cfg.value("format_version", 1) != 1)
    throw FormatError("config: unsupported format_version");

  // Flag overrides.
  if (!args.model_name.empty()) cfg["model"] = default_model_config(args.model_name);
  if (!cfg.contains("model")) cfg["model"] = default_model_config("ishigami");
  if (args.surrogate_path.empty()) {
    if (!cfg.contains("surrogate")) cfg["surrogate"] = {{"type", "krr"}};
  } else {
    cfg["surrogate"] = {{"type", "krr-file"}, {"path", args.surrogate_path}};
  }
  if (args.seed) cfg["seed"] = *args.seed;
  if (args.alpha) cfg["alpha"] = *args.alpha;
  if (args.K) cfg["K"] = *args.K;
  if (args.budget) cfg["budgets"] = {*args.budget};
  if (args.trials) cfg["trials"] = *args.trials;
  if (args.workers) cfg["workers"] = *args.workers;
  if (!args.data_path.empty()) cfg["data"] = args.data_path;
  if (args.n) cfg["n"] = *args.n;
  if (args.n_large) {
    if (!cfg.contains("ground_truth")) cfg["ground_truth"] = json::object();
    cfg["ground_truth"]["n_large"] = *args.n_large;
    cfg["ground_truth"]["mode"] = "jansen";
  }
  if (args.lhs_batch_size && args.lhs_num_batches)
    cfg["lhs"] = {{"batch_size", *args.lhs_batch_size}, {"num_batches", *args.lhs_num_batches}};
  return cfg;
}

ExperimentConfig experiment_from_json(const json& cfg) {
  ExperimentConfig out;
  if (cfg.contains("methods")) {
    out.methods.clear();
    for (const auto& m : cfg["methods"]) out.methods.push_back(parse_method(m.get<std::string>()));
  }
  if (cfg.contains("budgets")) out.budgets = cfg["budgets"].get<std::vector<std::size_t>>();
  out.trials = cfg.value("trials", std::size_t{100});
  out.alpha = cfg.value("alpha", 0.05);
  out.K = cfg.value("K", std::size_t{1});
  out.seed = cfg.value("seed", std::uint64_t{1});
  out.fresh_inputs_per_trial = cfg.value("fresh_inputs_per_trial", true);
  out.workers = cfg.value("workers", std::size_t{0});
  out.surrogate = parse_surrogate_spec(cfg.contains("surrogate") ? cfg["surrogate"]
                                                                 : json{{"type", "krr"}});
  out.ground_truth = parse_ground_truth_spec(
      cfg.contains("ground_truth") ? cfg["ground_truth"] : json::object());
  return out;
}

struct RunContext {
  json cfg;
  fs::path out_dir;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, std::uint64_t>> eval_counts;

  void finish(const std::string& subcommand, std::uint64_t seed) const {
    io::RunManifest manifest;
    manifest.tool_version = kToolVersion;
    manifest.subcommand = subcommand;
    manifest.config_json = cfg.dump();
    manifest.config_hash = io::fnv1a_hex(manifest.config_json);
    manifest.seed = seed;
    manifest.evaluation_counts = eval_counts;
    manifest.wallclock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.created_at = io::iso8601_utc_now();
    io::save_manifest(manifest, out_dir / "manifest.json");
  }
};

RunContext make_context(const CliArgs& args) {
  RunContext ctx;
  ctx.cfg = load_config_json(args);
  ctx.out_dir = args.out_dir;
  fs::create_directories(ctx.out_dir);
  return ctx;
}

std::shared_ptr<const Surrogate> resolve_surrogate_only(const SurrogateSpec& spec,
                                                        const ResolvedModel& rm,
                                                        std::uint64_t seed,
                                                        RunContext& ctx) {
  switch (spec.kind) {
    case SurrogateSpec::Kind::KrrFile:
      return std::make_shared<KrrSurrogate>(io::load_krr(spec.path));
    case SurrogateSpec::Kind::Exact:
      return std::make_shared<FunctionSurrogate>(rm.model);
    case SurrogateSpec::Kind::KrrTier: {
      TierFitResult tier =
          fit_krr_to_tier(rm.counted, rm.space, spec.target_e2, spec.tier_max_size, seed);
      std::cerr << "[surrogate] tier search: size=" << tier.train_size
                << " gamma=" << tier.gamma << " achieved E2=" << tier.achieved.e2 << " (se "
                << tier.achieved.se << ")\n";
      return std::make_shared<KrrSurrogate>(std::move(tier.surrogate));
    }
    case SurrogateSpec::Kind::KrrTrain:
    default: {
      EvaluatedDataset train =
          make_dataset(rm.counted, rm.space, spec.train_size, seed, "surrogate-train");
      KrrOptions opts;
      opts.gamma = spec.gamma;
      opts.lambda = spec.lambda;
      opts.max_centers = spec.max_centers;
      opts.seed = seed;
      auto s = std::make_shared<KrrSurrogate>(fit_krr(train, rm.space, opts));
      EvaluatedDataset verify =
          make_dataset(rm.counted, rm.space, 2000, seed, "surrogate-verify");
      const RelativeMse rel = estimate_relative_mse(*s, verify);
      std::cerr << "[surrogate] krr train_size=" << spec.train_size
                << " verified E2=" << rel.e2 << " (se " << rel.se << ")\n";
      ctx.eval_counts.emplace_back(rm.model.name() + ":surrogate", rm.counter->load());
      return s;
    }
  }
}

// ---------------------------------------------------------------------------
// Subcommand runners
// ---------------------------------------------------------------------------

int run_sample(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});

  SampleMatrix samples = [&] {
    if (ctx.cfg.contains("lhs")) {
      const json& lj = ctx.cfg["lhs"];
      check_keys(lj, "lhs", {"batch_size", "num_batches"});
      return sample_lhs_batches(rm.space, lj.value("batch_size", std::size_t{128}),
                                lj.value("num_batches", std::size_t{1}), seed);
    }
    return sample_iid(rm.space, ctx.cfg.value("n", std::size_t{1000}), seed);
  }();

  EvaluatedDataset data;
  data.inputs = std::move(samples.values);
  data.batch_ids = std::move(samples.batch_ids);
  data.provenance.seed = seed;
  data.provenance.stream_label = "cli-sample";
  io::save_dataset(data, ctx.out_dir / "samples.csv");
  ctx.finish("sample", seed);
  std::cout << "wrote " << (ctx.out_dir / "samples.csv").string() << " (" << data.n()
            << " rows)\n";
  return 0;
}

int run_evaluate(const CliArgs& args) {
  RunContext ctx = make_context(args);
  if (!ctx.cfg.contains("data")) throw InvalidArgumentError("evaluate: --data is required");
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});

  EvaluatedDataset data = io::load_dataset(ctx.cfg["data"].get<std::string>());
  if (data.d() != rm.model.dimension())
    throw InvalidArgumentError("evaluate: dataset dimension does not match the model");
  const Vector y = rm.counted.evaluate_block(data.inputs);
  data.outputs.assign(y.data(), y.data() + y.size());
  data.provenance.model_name = rm.model.name();
  io::save_dataset(data, ctx.out_dir / "dataset.csv");
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  ctx.finish("evaluate", seed);
  std::cout << "wrote " << (ctx.out_dir / "dataset.csv").string() << " (" << data.n()
            << " evaluations)\n";
  return 0;
}

int run_train_surrogate(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const SurrogateSpec spec = parse_surrogate_spec(ctx.cfg["surrogate"]);
  if (spec.kind != SurrogateSpec::Kind::KrrTrain && spec.kind != SurrogateSpec::Kind::KrrTier)
    throw InvalidArgumentError("train-surrogate: surrogate type must be krr or krr-tier");

  ExperimentConfig cfg = experiment_from_json(ctx.cfg);
  cfg.surrogate = spec;
  cfg.seed = seed;
  const ResolvedExperiment exp = resolve_experiment(rm.counted, rm.space, cfg);
  const auto* krr = dynamic_cast<const KrrSurrogate*>(exp.surrogate.get());
  if (!krr) throw NumericalError("train-surrogate: unexpected surrogate type");
  io::save_krr(*krr, ctx.out_dir / "surrogate.json");
  std::cerr << "[surrogate] verified E2=" << exp.surrogate_quality.e2 << " (se "
            << exp.surrogate_quality.se << ")\n";
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  ctx.finish("train-surrogate", seed);
  std::cout << "wrote " << (ctx.out_dir / "surrogate.json").string() << "\n";
  return 0;
}

void write_intervals(const RunContext& ctx, std::span<const IntervalResult> results) {
  io::save_intervals_csv(results, ctx.out_dir / "intervals.csv");
  io::save_intervals_json(results, ctx.out_dir / "intervals.json");
}

int run_floodgate(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const double alpha = ctx.cfg.value("alpha", 0.05);
  const std::size_t K = ctx.cfg.value("K", std::size_t{1});
  const SurrogateSpec spec = parse_surrogate_spec(ctx.cfg["surrogate"]);
  auto surrogate = resolve_surrogate_only(spec, rm, seed, ctx);

  EvaluatedDataset data;
  if (ctx.cfg.contains("data")) {
    // Pre-existing dataset: zero new f* evaluations.
    data = io::load_dataset(ctx.cfg["data"].get<std::string>());
  } else {
    const std::size_t N = ctx.cfg.value("budgets", std::vector<std::size_t>{1000}).front();
    data = make_dataset(rm.counted, rm.space, N, Rng::derive_seed(seed, "cli"), "fg-data");
  }
  const auto results = apply_to_existing_dataset(data, *surrogate, rm.space, alpha, K,
                                                 Rng::derive_seed(seed, "fg-resample"));
  write_intervals(ctx, results);
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  std::cerr << "[ledger] floodgate: n=" << data.n() << " rows, f* evaluations this run = "
            << rm.counter->load() << ", surrogate evaluations = " << data.n() * rm.space.dimension() * K
            << " + " << data.n() << " base\n";
  ctx.finish("floodgate", seed);
  std::cout << "wrote " << (ctx.out_dir / "intervals.csv").string() << "\n";
  return 0;
}

int run_spf(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const double alpha = ctx.cfg.value("alpha", 0.05);
  const std::size_t N = ctx.cfg.value("budgets", std::vector<std::size_t>{1000}).front();
  const BudgetPlan plan = BudgetPlan::make(N, rm.space.dimension());
  if (!plan.spf_feasible())
    throw InvalidArgumentError("spf: budget " + std::to_string(N) + " gives n = " +
                               std::to_string(plan.n_spf) + " < 2 pairs for d = " +
                               std::to_string(plan.d));

  const PairedDataset pairs =
      build_paired_dataset(rm.counted, rm.space, plan.n_spf, Rng::derive_seed(seed, "cli-spf"));
  std::vector<IntervalResult> results;
  for (std::size_t j = 0; j < plan.d; ++j) results.push_back(spf_jansen(pairs, j, alpha));
  write_intervals(ctx, results);
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  std::cerr << "[ledger] spf: budget N=" << N << " -> n=" << plan.n_spf
            << " pairs, f* evaluations = " << rm.counter->load() << " (= n(d+1) = "
            << plan.n_spf * (plan.d + 1) << ")\n";
  ctx.finish("spf", seed);
  std::cout << "wrote " << (ctx.out_dir / "intervals.csv").string() << "\n";
  return 0;
}

int run_spf_surrogate(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const double alpha = ctx.cfg.value("alpha", 0.05);
  const std::size_t N = ctx.cfg.value("budgets", std::vector<std::size_t>{1000}).front();
  const SurrogateSpec spec = parse_surrogate_spec(ctx.cfg["surrogate"]);
  auto surrogate = resolve_surrogate_only(spec, rm, seed, ctx);

  const std::uint64_t before = rm.counter->load();
  const PairedDataset pairs =
      build_paired_dataset(*surrogate, rm.space, N, Rng::derive_seed(seed, "cli-spfsurr"));
  std::vector<IntervalResult> results;
  for (std::size_t j = 0; j < rm.space.dimension(); ++j)
    results.push_back(spf_surrogate(pairs, j, alpha));
  write_intervals(ctx, results);
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  std::cerr << "[ledger] spf-surrogate: n=" << N << " pairs, new f* evaluations = "
            << rm.counter->load() - before << "\n";
  ctx.finish("spf-surrogate", seed);
  std::cout << "wrote " << (ctx.out_dir / "intervals.csv").string() << "\n";
  return 0;
}

int run_panin(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const double alpha = ctx.cfg.value("alpha", 0.05);
  const std::size_t N = ctx.cfg.value("budgets", std::vector<std::size_t>{1000}).front();
  const SurrogateSpec spec = parse_surrogate_spec(ctx.cfg["surrogate"]);
  auto surrogate = resolve_surrogate_only(spec, rm, seed, ctx);

  EvaluatedDataset data;
  if (ctx.cfg.contains("data"))
    data = io::load_dataset(ctx.cfg["data"].get<std::string>());
  else
    data = make_dataset(rm.counted, rm.space, N, Rng::derive_seed(seed, "cli"), "panin-data");
  const PairedDataset pairs =
      build_paired_dataset(*surrogate, rm.space, N, Rng::derive_seed(seed, "cli-panin"));
  std::vector<IntervalResult> results;
  for (std::size_t j = 0; j < rm.space.dimension(); ++j)
    results.push_back(panin_from_data(pairs, data, *surrogate, j, alpha));
  write_intervals(ctx, results);
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  ctx.finish("panin", seed);
  std::cout << "wrote " << (ctx.out_dir / "intervals.csv").string() << "\n";
  return 0;
}

int run_ground_truth(const CliArgs& args) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  const std::uint64_t seed = ctx.cfg.value("seed", std::uint64_t{1});
  const json gj = ctx.cfg.contains("ground_truth") ? ctx.cfg["ground_truth"] : json::object();
  const GroundTruthSpec spec = parse_ground_truth_spec(gj);

  const GroundTruth truth = ground_truth(
      rm.counted, rm.space, spec.n_large, spec.seed.value_or(Rng::derive_seed(seed, "ground-truth")));
  io::save_ground_truth(truth, ctx.out_dir / "ground_truth.csv");
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  ctx.finish("ground-truth", seed);
  std::cout << "wrote " << (ctx.out_dir / "ground_truth.csv").string() << "\n";
  return 0;
}

int run_coverage(const CliArgs& args, bool width_curve_mode) {
  RunContext ctx = make_context(args);
  ResolvedModel rm = resolve_model(ctx.cfg["model"]);
  ExperimentConfig cfg = experiment_from_json(ctx.cfg);

  const ResolvedExperiment exp = resolve_experiment(rm.counted, rm.space, cfg);
  std::cerr << "[surrogate] verified E2=" << exp.surrogate_quality.e2 << " (se "
            << exp.surrogate_quality.se << ")\n";
  if (width_curve_mode) {
    const WidthCurve curve = run_width_curve(exp);
    io::save_width_curve_csv(curve, ctx.out_dir / "width_curve.csv");
    io::save_coverage_csv(curve.report, ctx.out_dir / "coverage.csv");
    io::save_coverage_json(curve.report, ctx.out_dir / "coverage.json");
  } else {
    const CoverageReport report = run_coverage_experiment(exp);
    io::save_coverage_csv(report, ctx.out_dir / "coverage.csv");
    io::save_coverage_json(report, ctx.out_dir / "coverage.json");
  }
  ctx.eval_counts.emplace_back(rm.model.name(), rm.counter->load());
  ctx.finish(width_curve_mode ? "width-curve" : "coverage", cfg.seed);
  std::cout << "wrote " << (ctx.out_dir / "coverage.csv").string() << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Surrogate-based global sensitivity analysis with valid confidence intervals"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CliArgs args;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config_path, "JSON config file");
    sub->add_option("--out", args.out_dir, "output directory");
    sub->add_option("--seed", args.seed, "master seed (all randomness derives from it)");
    sub->add_option("--alpha", args.alpha, "confidence level alpha");
    sub->add_option("--K", args.K, "conditional resamples per row");
    sub->add_option("--model", args.model_name, "built-in model name");
    sub->add_option("--budget", args.budget, "f* evaluation budget N");
    sub->add_option("--trials", args.trials, "independent trials");
    sub->add_option("--workers", args.workers, "worker threads (0 = auto)");
  };

  auto* sample = app.add_subcommand("sample", "draw an input sample matrix");
  add_common(sample);
  sample->add_option("--n", args.n, "number of i.i.d. rows");
  sample->add_option("--lhs-batch-size", args.lhs_batch_size, "Latin hypercube batch size");
  sample->add_option("--lhs-batches", args.lhs_num_batches, "number of LHS batches");

  auto* evaluate = app.add_subcommand("evaluate", "run a built-in model over a dataset");
  add_common(evaluate);
  evaluate->add_option("--data", args.data_path, "input dataset CSV/JSON");

  auto* train = app.add_subcommand("train-surrogate", "fit and save a KRR surrogate");
  add_common(train);

  auto* fg = app.add_subcommand("floodgate", "surrogate-based confidence intervals");
  add_common(fg);
  fg->add_option("--data", args.data_path, "pre-existing evaluated dataset");
  fg->add_option("--surrogate", args.surrogate_path, "serialized KRR surrogate file");

  auto* spf = app.add_subcommand("spf", "pick-freeze estimator on the model");
  add_common(spf);

  auto* spfs = app.add_subcommand("spf-surrogate", "pick-freeze estimator on the surrogate");
  add_common(spfs);
  spfs->add_option("--surrogate", args.surrogate_path, "serialized KRR surrogate file");

  auto* panin = app.add_subcommand("panin", "surrogate-error-bound intervals");
  add_common(panin);
  panin->add_option("--data", args.data_path, "pre-existing evaluated dataset");
  panin->add_option("--surrogate", args.surrogate_path, "serialized KRR surrogate file");

  auto* cov = app.add_subcommand("coverage", "repeated-trial coverage experiment");
  add_common(cov);

  auto* width = app.add_subcommand("width-curve", "interval widths vs budget");
  add_common(width);

  auto* gt = app.add_subcommand("ground-truth", "large-n pick-freeze reference indices");
  add_common(gt);
  gt->add_option("--n-large", args.n_large, "sample size for the reference run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 2;
  }

  try {
    if (sample->parsed()) return run_sample(args);
    if (evaluate->parsed()) return run_evaluate(args);
    if (train->parsed()) return run_train_surrogate(args);
    if (fg->parsed()) return run_floodgate(args);
    if (spf->parsed()) return run_spf(args);
    if (spfs->parsed()) return run_spf_surrogate(args);
    if (panin->parsed()) return run_panin(args);
    if (cov->parsed()) return run_coverage(args, false);
    if (width->parsed()) return run_coverage(args, true);
    if (gt->parsed()) return run_ground_truth(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace floodgate
