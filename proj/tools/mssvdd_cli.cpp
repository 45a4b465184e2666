// Batch command-line front end: synth, train, predict, cv, gridsearch, report.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mssvdd/mssvdd.hpp"

namespace fs = std::filesystem;
using namespace mssvdd;

namespace {

/// Values shared by the data-consuming commands. Unset flags fall back to the
/// JSON config file, then to the library defaults.
struct CommonOptions {
  std::string config_path;
  std::vector<std::string> data;
  std::string labels;
  std::optional<int> target_label;
  std::optional<std::uint64_t> seed;

  std::optional<std::string> method, kernel, update, regularizer, decision;
  std::optional<double> sigma, gamma, theta, kappa, eta, beta, c, nu;
  std::optional<std::size_t> d, max_iter;
  bool normalize = false;
};

void add_data_options(CLI::App* cmd, CommonOptions& o, bool labels) {
  cmd->add_option("--config", o.config_path, "JSON experiment configuration");
  cmd->add_option("--data", o.data, "CSV per modality (repeat, in modality order)");
  if (labels) {
    cmd->add_option("--labels", o.labels, "label CSV (1 = target, 0 = non-target)");
    cmd->add_option("--target-label", o.target_label, "label value treated as the target class (1 or 0)")
        ->check(CLI::IsMember({0, 1}));
  }
}

void add_train_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--method", o.method, "svdd | ocsvm | s_svdd | ms_svdd");
  cmd->add_option("--kernel", o.kernel, "linear | gaussian | composite (non-linear kernels use the NPT embedding)");
  cmd->add_option("--sigma", o.sigma, "Gaussian scale");
  cmd->add_option("--gamma", o.gamma, "composite mixing weight");
  cmd->add_option("--theta", o.theta, "sigmoid offset");
  cmd->add_option("--kappa", o.kappa, "sigmoid slope (default 1/d)");
  cmd->add_option("--d", o.d, "subspace dimensionality");
  cmd->add_option("--eta", o.eta, "learning rate");
  cmd->add_option("--beta", o.beta, "regularization weight");
  cmd->add_option("--C", o.c, "SVDD penalty");
  cmd->add_option("--nu", o.nu, "OC-SVM nu");
  cmd->add_option("--max-iter", o.max_iter, "training iterations");
  cmd->add_option("--update", o.update, "SD- | SD+ | AD-+ | AD+-");
  cmd->add_option("--regularizer", o.regularizer, "omega0..omega6 | psi0..psi3");
  cmd->add_option("--decision", o.decision, "ds1 | ds2 | ds3 | ds4");
  cmd->add_flag("--normalize", o.normalize, "z-score features on the training portion");
}

Json load_config(const CommonOptions& o) {
  if (o.config_path.empty()) return Json::object();
  try {
    return Json::parse(read_file(o.config_path));
  } catch (const Json::parse_error& e) {
    throw DataFormatError(o.config_path + ": " + e.what());
  }
}

TrainConfig resolve_train_config(const CommonOptions& o, const Json& cfg) {
  TrainConfig c = config_from_json(cfg);
  if (o.method) c.method = parse_method(*o.method);
  if (o.kernel) {
    c.kernel_params.kind = parse_kernel_kind(*o.kernel);
    c.kernelized = c.kernel_params.kind != KernelKind::linear;
  }
  if (o.sigma) c.kernel_params.sigma = *o.sigma;
  if (o.gamma) c.kernel_params.gamma = *o.gamma;
  if (o.theta) c.kernel_params.theta = *o.theta;
  if (o.kappa) c.kernel_params.kappa = *o.kappa, c.kappa_from_d = false;
  if (o.d) c.d = *o.d;
  if (o.eta) c.eta = *o.eta;
  if (o.beta) c.beta = *o.beta;
  if (o.c) c.c_penalty = *o.c;
  if (o.nu) c.nu = *o.nu;
  if (o.max_iter) c.max_iter = *o.max_iter;
  if (o.update) c.update_strategy = parse_update_strategy(*o.update);
  if (o.regularizer) c.regularizer = parse_regularizer(*o.regularizer);
  if (o.decision) c.decision_strategy = parse_decision_strategy(*o.decision);
  if (o.normalize) c.normalize = true;
  return c;
}

std::uint64_t resolve_seed(const CommonOptions& o, const Json& cfg) {
  if (o.seed) return *o.seed;
  return cfg.value("seed", std::uint64_t{7});
}

std::vector<fs::path> resolve_data_paths(const CommonOptions& o, const Json& cfg) {
  std::vector<std::string> raw = o.data;
  if (raw.empty() && cfg.contains("data")) raw = cfg.at("data").get<std::vector<std::string>>();
  if (raw.empty()) throw InvalidArgument("no data files given (--data or \"data\" in the config)");
  return {raw.begin(), raw.end()};
}

/// Loads modalities and labels, remapping labels so that target_label becomes 1.
MultiModalDataset load_labelled(const CommonOptions& o, const Json& cfg) {
  const auto paths = resolve_data_paths(o, cfg);
  std::string label_path = o.labels;
  if (label_path.empty()) label_path = cfg.value("labels", std::string{});
  if (label_path.empty()) throw InvalidArgument("no label file given (--labels or \"labels\" in the config)");
  auto data = load_dataset(paths, fs::path(label_path));
  const int target = o.target_label.value_or(cfg.value("target_label", 1));
  if (target != 0 && target != 1) throw InvalidArgument("target_label must be 0 or 1");
  return target == 1 ? data : data.with_flipped_labels();
}

GridSpec resolve_grid(const Json& cfg) {
  return cfg.contains("grid") ? grid_from_json(cfg.at("grid")) : GridSpec{};
}

int cmd_synth(std::size_t n_target, std::size_t n_outlier, const std::vector<std::size_t>& dims, double separation,
              std::uint64_t seed, const std::string& out_dir) {
  SynthSpec spec{n_target, n_outlier, dims, separation, seed};
  const auto data = synth_multimodal(spec);
  fs::create_directories(out_dir);
  for (std::size_t v = 0; v < data.modality_count(); ++v)
    write_csv_matrix(fs::path(out_dir) / ("modality_" + std::to_string(v + 1) + ".csv"), data.modality(v).values());
  write_labels(fs::path(out_dir) / "labels.csv", data.labels());
  std::cout << "wrote " << data.modality_count() << " modality files and labels.csv to " << out_dir << "\n";
  return 0;
}

int cmd_train(const CommonOptions& o, const std::string& out) {
  const auto cfg = load_config(o);
  const auto data = load_labelled(o, cfg);
  const auto config = resolve_train_config(o, cfg);
  const auto model = train(data.targets_only(), config);
  Provenance prov;
  prov.seed = resolve_seed(o, cfg);
  prov.dataset_digest = dataset_digest(data);
  save_model(out, model, prov);
  if (!model.warning.empty()) std::cerr << "warning: " << model.warning << "\n";
  std::cout << "saved " << model_label(model.config) << " model to " << out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_path, const std::vector<std::string>& data, const std::string& out) {
  const auto model = load_model(model_path);
  if (data.size() != model.modality_dims.size()) {
    std::string msg = "modality count mismatch: model expects " + std::to_string(model.modality_dims.size()) +
                      " data files, got " + std::to_string(data.size());
    if (data.size() > model.modality_dims.size()) {
      msg += "; unexpected file(s):";
      for (std::size_t i = model.modality_dims.size(); i < data.size(); ++i) msg += " " + data[i];
    } else {
      msg += "; files given:";
      for (const auto& d : data) msg += " " + d;
    }
    throw InvalidArgument(msg);
  }
  std::vector<fs::path> paths(data.begin(), data.end());
  const auto dataset = load_dataset(paths);
  if (dataset.samples() > 0)
    for (std::size_t v = 0; v < paths.size(); ++v)
      if (dataset.modality(v).dims() != model.modality_dims[v])
        throw InvalidArgument(data[v] + " has " + std::to_string(dataset.modality(v).dims()) +
                              " columns, model expects " + std::to_string(model.modality_dims[v]));
  const auto pred = predict(model, dataset);
  write_file_atomically(out, prediction_to_csv(dataset, pred));
  return 0;
}

int cmd_cv(const CommonOptions& o, std::optional<std::size_t> folds, std::optional<std::size_t> inner_folds,
           bool nested_flag, std::optional<std::string> selection, const std::string& out, const std::string& table) {
  const auto cfg = load_config(o);
  const auto data = load_labelled(o, cfg);
  const auto config = resolve_train_config(o, cfg);
  const auto seed = resolve_seed(o, cfg);
  const std::size_t k = folds.value_or(cfg.value("folds", std::size_t{5}));
  const std::size_t inner_k = inner_folds.value_or(cfg.value("inner_folds", std::size_t{10}));
  const std::string sel = selection.value_or(cfg.value("selection", std::string{}));
  const bool search = nested_flag || !sel.empty();

  EvalReport report;
  if (search) {
    if (!sel.empty() && sel != "nested" && sel != "global")
      throw InvalidArgument("selection must be 'nested' or 'global'");
    report = nested_cv(data, config, resolve_grid(cfg), k, inner_k, seed,
                       sel == "global" ? Selection::global : Selection::nested);
  } else {
    report = run_cv(data, config, k, seed);
  }
  if (!table.empty()) write_file_atomically(table, render_table(report));
  write_file_atomically(out, report_to_csv(report));
  std::cout << render_table(report);
  return 0;
}

int cmd_gridsearch(const CommonOptions& o, std::optional<std::size_t> inner_folds, const std::string& out,
                   const std::string& scores) {
  const auto cfg = load_config(o);
  const auto data = load_labelled(o, cfg);
  const auto config = resolve_train_config(o, cfg);
  const auto seed = resolve_seed(o, cfg);
  const std::size_t inner_k = inner_folds.value_or(cfg.value("inner_folds", std::size_t{10}));
  const auto result = grid_search(data, config, resolve_grid(cfg), inner_k, seed);
  if (!scores.empty()) write_file_atomically(scores, grid_scores_to_csv(result));
  Json best = config_to_json(result.best);
  best["inner_mean_gm"] = result.best_score;
  write_file_atomically(out, best.dump(2) + "\n");
  std::cout << "best " << model_label(result.best) << " inner GM " << result.best_score << " -> " << out << "\n";
  return 0;
}

int cmd_report(const std::string& in, const std::string& out) {
  const auto text = render_table(read_report_csv(in));
  if (out.empty()) std::cout << text;
  else write_file_atomically(out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-modal subspace support vector data description toolkit"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic multi-modal dataset");
  std::size_t n_target = 60, n_outlier = 60;
  std::vector<std::size_t> dims{4, 4};
  double separation = 6.0;
  std::uint64_t synth_seed = 7;
  std::string synth_out = ".";
  synth->add_option("--n-target", n_target)->check(CLI::PositiveNumber);
  synth->add_option("--n-outlier", n_outlier)->check(CLI::PositiveNumber);
  synth->add_option("--dims", dims, "features per modality, e.g. --dims 4,4")->delimiter(',');
  synth->add_option("--separation", separation)->check(CLI::NonNegativeNumber);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--out-dir", synth_out)->required();

  // train
  CommonOptions train_opts;
  std::string train_out;
  auto* train_cmd = app.add_subcommand("train", "train a model on the target-class samples");
  add_data_options(train_cmd, train_opts, true);
  add_train_options(train_cmd, train_opts);
  train_cmd->add_option("--seed", train_opts.seed, "recorded in the model provenance");
  train_cmd->add_option("--out", train_out)->required();

  // predict
  std::string model_path, predict_out;
  std::vector<std::string> predict_data;
  auto* predict_cmd = app.add_subcommand("predict", "label samples with a saved model");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--data", predict_data, "CSV per modality")->required();
  predict_cmd->add_option("--out", predict_out)->required();

  // cv
  CommonOptions cv_opts;
  std::optional<std::size_t> cv_folds, cv_inner;
  std::optional<std::string> cv_selection;
  bool cv_nested = false;
  std::string cv_out, cv_table;
  auto* cv_cmd = app.add_subcommand("cv", "stratified k-fold cross-validation");
  add_data_options(cv_cmd, cv_opts, true);
  add_train_options(cv_cmd, cv_opts);
  cv_cmd->add_option("--seed", cv_opts.seed);
  cv_cmd->add_option("--folds", cv_folds, "outer folds (default 5)");
  cv_cmd->add_option("--inner-folds", cv_inner, "inner folds for hyperparameter search (default 10)");
  cv_cmd->add_flag("--nested", cv_nested, "select hyperparameters by inner grid search in every outer fold");
  cv_cmd->add_option("--selection", cv_selection, "nested | global");
  cv_cmd->add_option("--out", cv_out, "report CSV")->required();
  cv_cmd->add_option("--table", cv_table, "also write the text table here");

  // gridsearch
  CommonOptions gs_opts;
  std::optional<std::size_t> gs_inner;
  std::string gs_out, gs_scores;
  auto* gs_cmd = app.add_subcommand("gridsearch", "GM-maximizing grid search over inner stratified folds");
  add_data_options(gs_cmd, gs_opts, true);
  add_train_options(gs_cmd, gs_opts);
  gs_cmd->add_option("--seed", gs_opts.seed);
  gs_cmd->add_option("--inner-folds", gs_inner, "folds (default 10)");
  gs_cmd->add_option("--out", gs_out, "best configuration JSON")->required();
  gs_cmd->add_option("--scores", gs_scores, "per-cell score table CSV");

  // report
  std::string report_in, report_out;
  auto* report_cmd = app.add_subcommand("report", "render a saved report CSV as a table");
  report_cmd->add_option("--in", report_in)->required();
  report_cmd->add_option("--out", report_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(n_target, n_outlier, dims, separation, synth_seed, synth_out);
    if (*train_cmd) return cmd_train(train_opts, train_out);
    if (*predict_cmd) return cmd_predict(model_path, predict_data, predict_out);
    if (*cv_cmd) return cmd_cv(cv_opts, cv_folds, cv_inner, cv_nested, cv_selection, cv_out, cv_table);
    if (*gs_cmd) return cmd_gridsearch(gs_opts, gs_inner, gs_out, gs_scores);
    if (*report_cmd) return cmd_report(report_in, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
