// Command-line front end: one subcommand per stage of the recognition chain
// plus the transmission energy calculator.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "tagsense/cart.hpp"
#include "tagsense/codegen.hpp"
#include "tagsense/dataset.hpp"
#include "tagsense/energy.hpp"
#include "tagsense/error.hpp"
#include "tagsense/evaluation.hpp"
#include "tagsense/features.hpp"
#include "tagsense/manifest.hpp"
#include "tagsense/synth.hpp"
#include "tagsense/textio.hpp"

namespace fs = std::filesystem;
using namespace tagsense;

namespace {

enum ExitCode : int { kOk = 0, kUsage = 2, kFormat = 3, kData = 4, kIo = 5 };

std::string fmt(double v) { return textio::format_shortest(v); }

EvalMode parse_eval(const std::string& s) {
  if (s == "resub" || s == "resubstitution") return EvalMode::Resubstitution;
  if (s == "holdout") return EvalMode::Holdout;
  throw ConfigError("--eval must be resub or holdout");
}

struct SynthArgs {
  std::string preset;
  std::string protocol;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string dump_protocol;
};

void run_synth(const SynthArgs& a) {
  if (a.preset.empty() == a.protocol.empty()) {
    throw ConfigError("give exactly one of --preset or --protocol");
  }
  SynthProtocol proto = a.preset.empty() ? protocol_from_json(textio::read_file(a.protocol))
                                         : preset(a.preset);
  if (a.seed) proto.seed = *a.seed;
  const auto ds = synthesize(proto);
  export_csv(ds, a.out);

  RunManifest m{"synth", proto.seed, {}, {}, {{"dataset", a.out}}};
  if (!a.preset.empty()) m.parameters.emplace_back("preset", a.preset);
  if (!a.protocol.empty()) m.inputs.emplace_back("protocol", a.protocol);
  m.parameters.emplace_back("records", std::to_string(ds.size()));
  if (!a.dump_protocol.empty()) {
    textio::write_file_atomic(a.dump_protocol, protocol_to_json(proto));
    m.outputs.emplace_back("protocol", a.dump_protocol);
  }
  write_manifest(m, a.out);
  std::cout << "wrote " << ds.size() << " records (" << ds.behaviours().size()
            << " behaviours) to " << a.out << "\n";
}

void run_featurize(const std::string& in, const std::string& out) {
  const auto fm = featurize(ingest_csv(in));
  export_feature_csv(fm, out);
  write_manifest(RunManifest{"featurize", 0, {}, {{"dataset", in}}, {{"features", out}}}, out);
  std::cout << "wrote " << fm.size() << " feature rows to " << out << "\n";
}

struct TrainArgs {
  std::string features;
  int depth{7};
  std::string mask{"all"};
  std::string target{"standing"};
  bool oversample{false};
  std::uint64_t seed{0};
  std::string eval{"resub"};
  double train_fraction{0.7};
  std::string criterion{"gini"};
  std::string out;
  std::string confusion;
};

void run_train(const TrainArgs& a) {
  const auto fm = ingest_feature_csv(a.features);
  TrainConfig cfg;
  cfg.max_depth = a.depth;
  cfg.mask = FeatureMask::parse(a.mask);
  cfg.oversample = a.oversample;
  cfg.seed = a.seed;
  const auto crit = parse_criterion(a.criterion);
  if (!crit) throw ConfigError("--criterion must be gini or entropy");
  cfg.criterion = *crit;
  const auto mode = parse_eval(a.eval);
  if (!fm.behaviour_index(a.target)) throw LabelError("unknown target behaviour '" + a.target + "'");

  FeatureMatrix train = fm;
  FeatureMatrix scored;
  if (mode == EvalMode::Holdout) std::tie(train, scored) = split(fm, a.train_fraction, a.seed);
  const auto model = fit(train, cfg);
  const auto ev = evaluate(model, mode == EvalMode::Holdout ? scored : train, a.target);

  textio::write_file_atomic(a.out, serialize(model));
  RunManifest m{"train", a.seed, {}, {{"features", a.features}}, {{"model", a.out}}};
  m.parameters = {{"depth", std::to_string(a.depth)},
                  {"mask", cfg.mask.to_string()},
                  {"target", a.target},
                  {"oversample", a.oversample ? "true" : "false"},
                  {"eval", std::string(eval_mode_name(mode))},
                  {"train_fraction", fmt(a.train_fraction)},
                  {"criterion", a.criterion}};
  if (!a.confusion.empty()) {
    textio::write_file_atomic(a.confusion, ev.matrix.to_csv());
    m.outputs.emplace_back("confusion", a.confusion);
  }
  write_manifest(m, a.out);

  std::cout << "model: depth " << model.depth() << " (max " << model.max_depth() << "), "
            << model.leaf_count() << " leaves, features " << cfg.mask.to_string() << "\n"
            << "evaluation: " << eval_mode_name(mode) << " on " << ev.matrix.total() << " rows\n\n"
            << metrics_report(ev);
}

struct SweepArgs {
  std::string features;
  int depth{14};
  std::string target{"standing"};
  std::string eval{"resub"};
  double train_fraction{0.7};
  std::size_t top{10};
  std::uint64_t seed{0};
  unsigned threads{0};
  bool oversample{false};
  std::string out;
};

void run_sweep(const SweepArgs& a) {
  const auto fm = ingest_feature_csv(a.features);
  TrainConfig cfg;
  cfg.max_depth = a.depth;
  cfg.seed = a.seed;
  cfg.oversample = a.oversample;
  SweepOptions opts;
  opts.mode = parse_eval(a.eval);
  opts.train_fraction = a.train_fraction;
  opts.threads = a.threads;
  const auto sr = sweep(fm, cfg, a.target, opts);
  textio::write_file_atomic(a.out, sweep_csv(sr));
  RunManifest m{"sweep", a.seed, {}, {{"features", a.features}}, {{"ranking", a.out}}};
  m.parameters = {{"depth", std::to_string(a.depth)},
                  {"target", a.target},
                  {"eval", std::string(eval_mode_name(opts.mode))},
                  {"train_fraction", fmt(a.train_fraction)},
                  {"oversample", a.oversample ? "true" : "false"},
                  {"top", std::to_string(a.top)}};
  write_manifest(m, a.out);
  std::cout << rank_report(sr, a.top);
}

struct CodegenArgs {
  std::string model;
  std::string symbol{"classify_behaviour"};
  std::string values{"float"};
  std::string out;
  std::string vectors;
  std::size_t n{1000};
  std::uint64_t seed{0};
};

void run_codegen(const CodegenArgs& a) {
  const auto model = deserialize(textio::read_file(a.model));
  const auto type = parse_value_type(a.values);
  if (!type) throw ConfigError("--values must be float, double or int16");
  const auto ec = emit_header(model, {a.symbol, *type});
  textio::write_file_atomic(a.out, ec.source);
  RunManifest m{"codegen", a.seed, {}, {{"model", a.model}}, {{"header", a.out}}};
  m.parameters = {{"symbol", a.symbol},
                  {"values", a.values},
                  {"fingerprint", ec.fingerprint},
                  {"worst_case_comparisons", std::to_string(ec.worst_case_comparisons)}};
  if (!a.vectors.empty()) {
    const auto vecs = eval_vectors(model, a.n, a.seed, *type);
    textio::write_file_atomic(a.vectors, vectors_csv(model, vecs, *type));
    m.outputs.emplace_back("vectors", a.vectors);
    m.parameters.emplace_back("n", std::to_string(a.n));
    std::cout << "wrote " << vecs.size() << " test vectors to " << a.vectors << "\n";
  }
  write_manifest(m, a.out);
  std::cout << "wrote " << a.out << ": " << a.symbol << "(), "
            << ec.worst_case_comparisons << " worst-case comparisons, " << ec.fingerprint << "\n";
}

struct EnergyArgs {
  std::string profile{"wildfi"};
  std::string strategy{"regular"};
  double p{1.0};
  std::uint64_t n{0};
  double full_bytes{600.0};
  std::optional<double> selected_bytes;
  double signal_bytes{2.0};
  std::optional<double> base_days;
  std::optional<double> overhead;
  std::string model;
  long long cycles_per_comparison{1};
  std::string out;
};

void run_energy(const EnergyArgs& a) {
  const auto dp = load_profile(a.profile);
  const auto strategy = parse_strategy(a.strategy);
  if (!strategy) throw ConfigError("unknown strategy '" + a.strategy + "'");
  TransmissionPlan plan;
  plan.strategy = *strategy;
  plan.detection_fraction = a.p;
  plan.n_points = a.n;
  plan.full_bytes_per_point = a.full_bytes;
  plan.selected_bytes_per_point = a.selected_bytes.value_or(a.full_bytes);
  plan.signal_bytes = a.signal_bytes;
  const auto r = report(plan, dp);

  std::string text = "profile               " + dp.name + "\n" + to_text(r);
  if (a.base_days || a.overhead) {
    if (!a.base_days || !a.overhead) throw ConfigError("--base-days and --overhead go together");
    const double days = runtime_extension(*a.base_days, *a.overhead, r.fraction_of_regular);
    text += "residual overhead     " +
            textio::format_fixed(*a.overhead * r.fraction_of_regular * 100.0, 2) + " %\n";
    text += "runtime               " + textio::format_fixed(*a.base_days, 2) + " -> " +
            textio::format_fixed(days, 2) + " days\n";
  }
  if (!a.model.empty()) {
    const auto model = deserialize(textio::read_file(a.model));
    const double cost = classifier_cost(model, dp, a.cycles_per_comparison);
    text += "classifier cost       " + fmt(cost) + " J per classification (depth " +
            std::to_string(model.depth()) + ")\n";
  }
  std::cout << text;

  if (!a.out.empty()) {
    textio::write_file_atomic(a.out, to_csv(r));
    RunManifest m{"energy", 0, {}, {}, {{"report", a.out}}};
    m.parameters = {{"profile", a.profile},
                    {"strategy", a.strategy},
                    {"p", fmt(a.p)},
                    {"n", std::to_string(a.n)},
                    {"full_bytes", fmt(plan.full_bytes_per_point)},
                    {"selected_bytes", fmt(plan.selected_bytes_per_point)},
                    {"signal_bytes", fmt(a.signal_bytes)}};
    if (a.profile != "wildfi") m.inputs.emplace_back("profile", a.profile);
    if (!a.model.empty()) m.inputs.emplace_back("model", a.model);
    write_manifest(m, a.out);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tagsense: behaviour classification and transmission energy toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a labelled synthetic burst dataset");
  c_synth->add_option("--preset", synth.preset, "paper-ea60 | paper-ebf8 | paper-ed3c");
  c_synth->add_option("--protocol", synth.protocol, "JSON protocol file")->check(CLI::ExistingFile);
  c_synth->add_option("--seed", synth.seed, "Override the protocol seed");
  c_synth->add_option("--out", synth.out, "Output burst CSV")->required();
  c_synth->add_option("--dump-protocol", synth.dump_protocol, "Also write the resolved protocol as JSON");

  std::string feat_in;
  std::string feat_out;
  auto* c_feat = app.add_subcommand("featurize", "Compute the 8 per-second features");
  c_feat->add_option("dataset", feat_in, "Burst CSV")->required()->check(CLI::ExistingFile);
  c_feat->add_option("--out", feat_out, "Output feature CSV")->required();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Fit a depth-bounded decision tree");
  c_train->add_option("features", train.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  c_train->add_option("--depth", train.depth, "Maximum tree depth k")->check(CLI::PositiveNumber)->capture_default_str();
  c_train->add_option("--mask", train.mask, "Features, e.g. GX;GY;GZ;AX;AZ or all")->capture_default_str();
  c_train->add_option("--target", train.target, "Target behaviour")->capture_default_str();
  c_train->add_flag("--oversample", train.oversample, "Duplicate minority-class rows before training");
  c_train->add_option("--seed", train.seed, "Seed for the holdout split")->capture_default_str();
  c_train->add_option("--eval", train.eval, "resub | holdout")->capture_default_str();
  c_train->add_option("--train-fraction", train.train_fraction, "Holdout training share")->capture_default_str();
  c_train->add_option("--criterion", train.criterion, "gini | entropy")->capture_default_str();
  c_train->add_option("--out", train.out, "Output model file")->required();
  c_train->add_option("--confusion", train.confusion, "Also write the confusion matrix CSV");

  SweepArgs sw;
  auto* c_sweep = app.add_subcommand("sweep", "Rank all 255 feature subsets for a target behaviour");
  c_sweep->add_option("features", sw.features, "Feature CSV")->required()->check(CLI::ExistingFile);
  c_sweep->add_option("--depth", sw.depth, "Maximum tree depth k")->check(CLI::PositiveNumber)->capture_default_str();
  c_sweep->add_option("--target", sw.target, "Target behaviour")->capture_default_str();
  c_sweep->add_option("--eval", sw.eval, "resub | holdout")->capture_default_str();
  c_sweep->add_option("--train-fraction", sw.train_fraction, "Holdout training share")->capture_default_str();
  c_sweep->add_option("--top", sw.top, "Rows printed")->check(CLI::PositiveNumber)->capture_default_str();
  c_sweep->add_option("--seed", sw.seed, "Seed for the holdout split")->capture_default_str();
  c_sweep->add_option("--threads", sw.threads, "Worker threads (0 = all cores)")->capture_default_str();
  c_sweep->add_flag("--oversample", sw.oversample, "Duplicate minority-class rows before training");
  c_sweep->add_option("--out", sw.out, "Output ranking CSV")->required();

  CodegenArgs cg;
  auto* c_cg = app.add_subcommand("codegen", "Emit a model as a freestanding C header");
  c_cg->add_option("model", cg.model, "Model file")->required()->check(CLI::ExistingFile);
  c_cg->add_option("--symbol", cg.symbol, "Function name")->capture_default_str();
  c_cg->add_option("--values", cg.values, "float | double | int16")->capture_default_str();
  c_cg->add_option("--out", cg.out, "Output header")->required();
  c_cg->add_option("--vectors", cg.vectors, "Also write a test-vector CSV");
  c_cg->add_option("--n", cg.n, "Random test vectors (boundary vectors are added)")->check(CLI::PositiveNumber)->capture_default_str();
  c_cg->add_option("--seed", cg.seed, "Test-vector seed")->capture_default_str();

  EnergyArgs en;
  auto* c_en = app.add_subcommand("energy", "Transmission energy of a strategy");
  c_en->add_option("--profile", en.profile, "wildfi or a key=value profile file")->capture_default_str();
  c_en->add_option("--strategy", en.strategy, "regular | conditional | selected | both | signal_only")->capture_default_str();
  c_en->add_option("--p", en.p, "Detection fraction of the target behaviour")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  c_en->add_option("--n", en.n, "Number of data points")->required();
  c_en->add_option("--full-bytes", en.full_bytes, "Bytes per full data point")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_en->add_option("--selected-bytes", en.selected_bytes, "Bytes per selected data point")->check(CLI::NonNegativeNumber);
  c_en->add_option("--signal-bytes", en.signal_bytes, "Bytes per detection signal")->check(CLI::NonNegativeNumber)->capture_default_str();
  c_en->add_option("--base-days", en.base_days, "Runtime with full transmission")->check(CLI::PositiveNumber);
  c_en->add_option("--overhead", en.overhead, "Transmission overhead on top of sensing, fraction")->check(CLI::NonNegativeNumber);
  c_en->add_option("--model", en.model, "Model file for the per-classification compute cost")->check(CLI::ExistingFile);
  c_en->add_option("--cycles-per-comparison", en.cycles_per_comparison, "Clock cycles per comparison")->check(CLI::PositiveNumber)->capture_default_str();
  c_en->add_option("--out", en.out, "Also write the report as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*c_synth) run_synth(synth);
    if (*c_feat) run_featurize(feat_in, feat_out);
    if (*c_train) run_train(train);
    if (*c_sweep) run_sweep(sw);
    if (*c_cg) run_codegen(cg);
    if (*c_en) run_energy(en);
  } catch (const ConfigError& e) {
    std::cerr << "tagsense: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "tagsense: format error: " << e.what() << "\n";
    return kFormat;
  } catch (const IoError& e) {
    std::cerr << "tagsense: i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    std::cerr << "tagsense: data error: " << e.what() << "\n";
    return kData;
  }
  return kOk;
}
