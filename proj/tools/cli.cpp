#include "cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string_view>
#include <utility>

#include "binrbm/binrbm.hpp"

namespace binrbm::cli {
namespace {

constexpr std::string_view kDefaultAlphas = "1/5,1/4,1/3,2/5,1/2,3/5,2/3,3/4,4/5";

std::string show(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
std::string show(unsigned x) { return std::to_string(x); }
std::string show(std::uint64_t x) { return std::to_string(x); }
std::string show(const std::string& x) { return x; }

template <typename T>
T parse_value(std::string_view text, const std::string& key) {
  if constexpr (std::is_same_v<T, std::string>) {
    return std::string(text);
  } else {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
      throw ValidationError("config key '" + key + "': cannot parse '" + std::string(text) + "'");
    return value;
  }
}

/// Options that may also come from a key=value config file. Flags given on
/// the command line win over the file, which wins over built-in defaults.
class Settings {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& key, const std::string& flag, T& target,
           const std::string& help) {
    CLI::Option* opt = app->add_option(flag, target, help)->capture_default_str();
    items_.push_back({key, opt,
                      [&target, key](std::string_view v) { target = parse_value<T>(v, key); },
                      [&target] { return show(target); }});
  }

  void apply_config(const std::map<std::string, std::string>& config) {
    for (const auto& [key, value] : config) {
      if (is_metadata_key(key)) continue;
      auto it = std::find_if(items_.begin(), items_.end(), [&](const Item& i) { return i.key == key; });
      if (it == items_.end()) throw ValidationError("unknown config key '" + key + "'");
      if (it->option->count() == 0) it->assign(value);
    }
  }

  void write(std::ostream& out) const {
    for (const auto& item : items_) out << item.key << '=' << item.show() << '\n';
  }

 private:
  // Manifests double as config files; their bookkeeping keys are skipped.
  static bool is_metadata_key(std::string_view key) {
    for (std::string_view prefix : {"manifest.", "run.", "input.", "output."})
      if (key.starts_with(prefix)) return true;
    return false;
  }

  struct Item {
    std::string key;
    CLI::Option* option;
    std::function<void(std::string_view)> assign;
    std::function<std::string()> show;
  };
  std::vector<Item> items_;
};

struct TrainFlags {
  TrainConfig train;
  OffsetFitConfig fit;

  void add_to(CLI::App* app, Settings& settings) {
    settings.add(app, "hidden", "--hidden", train.hidden_units, "hidden units per class RBM");
    settings.add(app, "lr", "--lr", train.learning_rate, "CD-1 learning rate");
    settings.add(app, "momentum", "--momentum", train.momentum, "momentum in [0,1)");
    settings.add(app, "epochs", "--epochs", train.epochs, "training epochs (>= 1)");
    settings.add(app, "weight_decay", "--weight-decay", train.weight_decay, "L2 penalty on weights");
    settings.add(app, "seed", "--seed", train.seed, "base training seed");
    settings.add(app, "init_scale", "--init-scale", train.init_weight_scale,
                 "initial weights ~ init_scale * N(0,1)");
    settings.add(app, "offset_lr", "--offset-lr", fit.learning_rate, "soft-max offset ascent step");
    settings.add(app, "offset_iters", "--offset-iters", fit.iterations, "max offset iterations");
    settings.add(app, "offset_tol", "--offset-tol", fit.tolerance, "offset gradient tolerance");
  }
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string out;
  for (std::size_t k = 0; k < args.size(); ++k) out += (k ? " " : "") + args[k];
  return out;
}

struct ManifestInput {
  std::string name;
  std::string path;
};

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& args, const std::vector<ManifestInput>& inputs,
                    const Settings& settings,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest '" + path + "'");
  out << "# binrbm run manifest; usable as --config for a replay\n";
  out << "manifest.version=1\n";
  out << "run.command=" << command << '\n';
  out << "run.argv=" << join_args(args) << '\n';
  out << "run.library_version=" << kVersion << '\n';
  out << "run.timestamp_utc=" << utc_timestamp() << '\n';
  for (const auto& in : inputs) {
    out << "input." << in.name << ".path=" << in.path << '\n';
    out << "input." << in.name << ".fnv1a64=" << file_digest(in.path) << '\n';
  }
  settings.write(out);
  for (const auto& [key, value] : extra) out << key << '=' << value << '\n';
  if (!out) throw IoError("write error on '" + path + "'");
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write error on '" + path + "'");
}

double parse_alpha(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_value<double>(text, "alpha");
  const double num = parse_value<double>(text.substr(0, slash), "alpha");
  const double den = parse_value<double>(text.substr(slash + 1), "alpha");
  detail::require(den != 0.0, "alpha: zero denominator");
  return num / den;
}

std::vector<std::pair<std::string, double>> parse_alpha_list(std::string_view text) {
  std::vector<std::pair<std::string, double>> out;
  for (auto cell : detail::split_commas(text)) {
    if (cell.empty()) continue;
    out.emplace_back(std::string(cell), parse_alpha(cell));
  }
  detail::require(!out.empty(), "alphas: empty list");
  return out;
}

// Sidecar describing how a training file was binarized.
struct RangeSidecar {
  double alpha = 0.5;
  RangeScope scope = RangeScope::PerMatrix;
  ValueRange global;
  std::map<int, ValueRange> per_class;
};

void write_sidecar(const std::string& path, const RangeSidecar& s) {
  std::ostringstream out;
  out << "ranges.version=1\n";
  out << "alpha=" << show(s.alpha) << '\n';
  out << "scope=" << to_string(s.scope) << '\n';
  out << "global.min=" << show(s.global.min) << '\n';
  out << "global.max=" << show(s.global.max) << '\n';
  for (const auto& [id, r] : s.per_class) {
    out << "class." << id << ".min=" << show(r.min) << '\n';
    out << "class." << id << ".max=" << show(r.max) << '\n';
  }
  out << "test_binarization=global\n";
  write_text_file(path, out.str());
}

RangeSidecar read_sidecar(const std::string& path) {
  const auto kv = read_key_values(path);
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("ranges file '" + path + "' lacks '" + key + "'");
    return it->second;
  };
  detail::require(get("ranges.version") == "1", "ranges file: unsupported version");
  RangeSidecar s;
  s.alpha = parse_value<double>(get("alpha"), "alpha");
  s.scope = parse_range_scope(get("scope"));
  s.global = {parse_value<double>(get("global.min"), "global.min"),
              parse_value<double>(get("global.max"), "global.max")};
  return s;
}

void require_binary_features(const LabeledDataset& ds, const std::string& path) {
  if (!is_binary(ds.features.data()))
    throw ValidationError("'" + path +
                          "' has non-binary features; run 'binrbm preprocess' on it first");
}

struct SweepRow {
  std::string alpha_text;
  double alpha;
  EvalReport report;
};

// ---------------------------------------------------------------------------

int cmd_synth(SynthSpec spec, const std::string& out_path, std::ostream& out) {
  const LabeledDataset ds = synth_generate(spec);
  save_csv(ds, out_path);
  out << "wrote " << ds.size() << " rows x " << ds.dim() << " features to " << out_path << '\n';
  return kOk;
}

int cmd_split(const std::string& in_path, const std::string& label_column, SplitSpec spec,
              const std::string& train_path, const std::string& test_path, std::ostream& out) {
  const LabeledDataset ds = load_csv(in_path, label_column);
  const SplitResult parts = split(ds, spec);
  save_csv(parts.train, train_path, label_column);
  save_csv(parts.test, test_path, label_column);
  out << "train " << parts.train.size() << " rows -> " << train_path << '\n';
  out << "test  " << parts.test.size() << " rows -> " << test_path << '\n';
  return kOk;
}

int cmd_preprocess(const std::string& in_path, const std::string& label_column,
                   std::optional<double> alpha, const std::string& scope_text,
                   const std::string& ranges_in, std::string ranges_out, const std::string& out_path,
                   std::ostream& out) {
  const LabeledDataset ds = load_csv(in_path, label_column);
  LabeledDataset result{Matrix(), ds.labels, ds.feature_names};

  if (!ranges_in.empty()) {
    // Test-time: rows are binarized with the training data's pooled range.
    const RangeSidecar sidecar = read_sidecar(ranges_in);
    const BinarizationRule rule{alpha.value_or(sidecar.alpha), RangeScope::Global};
    result.features = binarize(l2_normalize_rows(ds.features), rule, sidecar.global);
    save_csv(result, out_path, label_column);
    out << "binarized " << ds.size() << " rows with pooled training range from " << ranges_in
        << " -> " << out_path << '\n';
    return kOk;
  }

  detail::require(alpha.has_value(), "preprocess: --alpha is required unless --ranges is given");
  const BinarizationRule rule{*alpha, parse_range_scope(scope_text)};
  rule.validate();
  LabeledBinarization bin = preprocess_labeled(ds.features, ds.labels, rule);
  result.features = std::move(bin.binary);
  save_csv(result, out_path, label_column);
  if (ranges_out.empty()) ranges_out = out_path + ".ranges";
  write_sidecar(ranges_out, {rule.alpha, rule.scope, bin.global_range, bin.class_ranges});
  out << "binarized " << ds.size() << " rows (alpha " << show(rule.alpha) << ", scope "
      << to_string(rule.scope) << ") -> " << out_path << "; ranges -> " << ranges_out << '\n';
  return kOk;
}

int cmd_train(const std::string& train_path, const std::string& label_column, const TrainFlags& flags,
              const std::string& model_path, std::string manifest_path, const Settings& settings,
              const std::vector<std::string>& args, std::ostream& out) {
  const LabeledDataset ds = load_csv(train_path, label_column);
  require_binary_features(ds, train_path);
  const ClassEnsemble ensemble = train_ensemble(ds, flags.train, flags.fit);
  save_ensemble(ensemble, model_path);
  if (manifest_path.empty()) manifest_path = model_path + ".manifest";
  write_manifest(manifest_path, "train", args, {{"train", train_path}}, settings,
                 {{"output.model.path", model_path},
                  {"output.model.fnv1a64", file_digest(model_path)}});
  out << "trained " << ensemble.classes.size() << " class models on " << ds.size() << " rows -> "
      << model_path << '\n';
  for (std::size_t c = 0; c < ensemble.classes.size(); ++c)
    out << "  class " << ensemble.classes[c] << " offset " << show(ensemble.offsets[c]) << '\n';
  return kOk;
}

int cmd_evaluate(const std::string& model_path, const std::string& data_path,
                 const std::string& label_column, const std::string& report_path, std::ostream& out) {
  const ClassEnsemble ensemble = load_ensemble(model_path);
  const LabeledDataset ds = load_csv(data_path, label_column);
  if (ds.dim() != ensemble.visible())
    throw ValidationError("model expects " + std::to_string(ensemble.visible()) + " features, '" +
                          data_path + "' has " + std::to_string(ds.dim()));
  require_binary_features(ds, data_path);
  const EvalReport report = evaluate(predict_labels(ds.features, ensemble), ds.labels);
  out << to_text(report);
  if (!report_path.empty()) write_text_file(report_path, to_key_values(report));
  return kOk;
}

std::vector<SweepRow> run_sweep(const LabeledDataset& raw, const std::vector<std::pair<std::string, double>>& alphas,
                                RangeScope scope, const SplitSpec& split_spec, const TrainFlags& flags) {
  const SplitResult parts = split(raw, split_spec);
  const Matrix test_normalized = l2_normalize_rows(parts.test.features);
  std::vector<SweepRow> rows;
  for (const auto& [text, alpha] : alphas) {
    const BinarizationRule rule{alpha, scope};
    rule.validate();
    const LabeledBinarization train_bin = preprocess_labeled(parts.train.features, parts.train.labels, rule);
    const Matrix test_bin = binarize(test_normalized, {alpha, RangeScope::Global}, train_bin.global_range);
    const LabeledDataset train{train_bin.binary, parts.train.labels, {}};
    const ClassEnsemble ensemble = train_ensemble(train, flags.train, flags.fit);
    rows.push_back({text, alpha, evaluate(predict_labels(test_bin, ensemble), parts.test.labels)});
  }
  return rows;
}

int cmd_sweep(const std::string& raw_path, const std::string& label_column, const std::string& alphas_text,
              const std::string& scope_text, const SplitSpec& split_spec, const TrainFlags& flags,
              const std::string& table_path, std::string manifest_path, const Settings& settings,
              const std::vector<std::string>& args, std::ostream& out) {
  const LabeledDataset raw = load_csv(raw_path, label_column);
  const auto alphas = parse_alpha_list(alphas_text);
  const auto rows = run_sweep(raw, alphas, parse_range_scope(scope_text), split_spec, flags);

  const std::vector<int> classes = raw.classes();
  std::ostringstream table;
  table << "alpha\talpha_value\taccuracy";
  for (int id : classes) table << "\trecall." << id;
  table << '\n';
  char buf[32];
  for (const auto& row : rows) {
    table << row.alpha_text;
    std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f", row.alpha, row.report.accuracy);
    table << buf;
    for (int id : classes) {
      auto it = std::find(row.report.classes.begin(), row.report.classes.end(), id);
      const auto recall = it == row.report.classes.end() ? std::nullopt : row.report.recall(id);
      if (recall) {
        std::snprintf(buf, sizeof buf, "\t%.6f", *recall);
        table << buf;
      } else {
        table << "\tundefined";
      }
    }
    table << '\n';
  }
  out << table.str();
  if (!table_path.empty()) write_text_file(table_path, table.str());
  if (!manifest_path.empty())
    write_manifest(manifest_path, "sweep-alpha", args, {{"raw", raw_path}}, settings,
                   {{"output.table.path", table_path}});
  return kOk;
}

}  // namespace

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ParseError(line_no, "", "'" + path + "' line " + std::to_string(line_no) +
                                        ": expected key=value");
    kv[std::string(detail::trim(text.substr(0, eq)))] = std::string(detail::trim(text.substr(eq + 1)));
  }
  return kv;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize k = 0; k < in.gcount(); ++k) {
      h ^= static_cast<unsigned char>(buf[k]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Binary RBM per-class classifier: preprocess, train, evaluate, sweep", "binrbm"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string label_column = "label";
  auto add_label = [&](CLI::App* sub) {
    sub->add_option("--label-column", label_column, "name of the integer label column")
        ->capture_default_str();
  };

  // synth
  SynthSpec synth_spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic binary labelled dataset");
  synth->add_option("--classes", synth_spec.classes)->capture_default_str();
  synth->add_option("--samples-per-class,-n", synth_spec.samples_per_class)->capture_default_str();
  synth->add_option("--dim", synth_spec.dim)->capture_default_str();
  synth->add_option("--separation", synth_spec.separation)->capture_default_str();
  synth->add_option("--noise", synth_spec.noise)->capture_default_str();
  synth->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth->add_option("--out", synth_out, "output CSV")->required();

  // split
  std::string split_in, split_train_out, split_test_out;
  SplitSpec split_spec;
  bool unstratified = false;
  auto* split_cmd = app.add_subcommand("split", "seeded per-class train/test split of a CSV");
  split_cmd->add_option("input", split_in, "input CSV")->required();
  split_cmd->add_option("--train-out", split_train_out)->required();
  split_cmd->add_option("--test-out", split_test_out)->required();
  split_cmd->add_option("--train-fraction", split_spec.train_fraction)->capture_default_str();
  split_cmd->add_option("--seed", split_spec.seed)->capture_default_str();
  split_cmd->add_flag("--unstratified", unstratified, "split without regard to class");
  add_label(split_cmd);

  // preprocess
  std::string pre_in, pre_out, pre_scope = "per-matrix", pre_ranges_in, pre_ranges_out;
  std::optional<double> pre_alpha;
  auto* pre = app.add_subcommand("preprocess", "l2-normalize rows and binarize with threshold alpha");
  pre->add_option("input", pre_in, "real-valued input CSV")->required();
  pre->add_option("--alpha", pre_alpha, "threshold fraction in (0,1)");
  pre->add_option("--scope", pre_scope, "per-matrix (per class) or global")->capture_default_str();
  pre->add_option("--ranges", pre_ranges_in,
                  "apply a training ranges file (test-time; uses its pooled min/max)");
  pre->add_option("--ranges-out", pre_ranges_out, "where to write the ranges file (default OUT.ranges)");
  pre->add_option("--out", pre_out, "output CSV")->required();
  add_label(pre);

  // train
  std::string train_in, model_out, train_manifest, train_config;
  TrainFlags train_flags;
  Settings train_settings;
  auto* train = app.add_subcommand("train", "train one RBM per class and fit soft-max offsets");
  train->add_option("input", train_in, "binary training CSV")->required();
  train->add_option("--out", model_out, "ensemble model file")->required();
  train->add_option("--manifest", train_manifest, "run manifest path (default OUT.manifest)");
  train->add_option("--config", train_config, "key=value config file (flags override it)");
  train_flags.add_to(train, train_settings);
  add_label(train);

  // evaluate
  std::string eval_model, eval_in, eval_report;
  auto* eval = app.add_subcommand("evaluate", "accuracy, confusion matrix and recall on a labelled CSV");
  eval->add_option("model", eval_model, "ensemble model file")->required();
  eval->add_option("input", eval_in, "binary labelled CSV")->required();
  eval->add_option("--report-out", eval_report, "also write a key=value report here");
  add_label(eval);

  // sweep-alpha
  std::string sweep_in, sweep_alphas(kDefaultAlphas), sweep_scope = "per-matrix", sweep_out,
      sweep_manifest, sweep_config;
  SplitSpec sweep_split;
  TrainFlags sweep_flags;
  Settings sweep_settings;
  auto* sweep = app.add_subcommand("sweep-alpha", "split, binarize, train and evaluate for each alpha");
  sweep->add_option("input", sweep_in, "raw real-valued labelled CSV")->required();
  sweep->add_option("--out", sweep_out, "write the result table here as well");
  sweep->add_option("--manifest", sweep_manifest, "run manifest path");
  sweep->add_option("--config", sweep_config, "key=value config file (flags override it)");
  sweep_settings.add(sweep, "alphas", "--alphas", sweep_alphas, "comma list; fractions allowed");
  sweep_settings.add(sweep, "scope", "--scope", sweep_scope, "per-matrix or global");
  sweep_settings.add(sweep, "train_fraction", "--train-fraction", sweep_split.train_fraction,
                     "per-class training fraction");
  sweep_settings.add(sweep, "split_seed", "--split-seed", sweep_split.seed, "split seed");
  sweep_flags.add_to(sweep, sweep_settings);
  add_label(sweep);

  std::vector<std::string> argv_storage(args.begin(), args.end());
  if (argv_storage.empty()) argv_storage.push_back("binrbm");
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*synth) return cmd_synth(synth_spec, synth_out, out);
    if (*split_cmd) {
      split_spec.stratified = !unstratified;
      return cmd_split(split_in, label_column, split_spec, split_train_out, split_test_out, out);
    }
    if (*pre)
      return cmd_preprocess(pre_in, label_column, pre_alpha, pre_scope, pre_ranges_in, pre_ranges_out,
                            pre_out, out);
    if (*train) {
      if (!train_config.empty()) train_settings.apply_config(read_key_values(train_config));
      return cmd_train(train_in, label_column, train_flags, model_out, train_manifest, train_settings,
                       args, out);
    }
    if (*eval) return cmd_evaluate(eval_model, eval_in, label_column, eval_report, out);
    if (*sweep) {
      if (!sweep_config.empty()) sweep_settings.apply_config(read_key_values(sweep_config));
      return cmd_sweep(sweep_in, label_column, sweep_alphas, sweep_scope, sweep_split, sweep_flags,
                       sweep_out, sweep_manifest, sweep_settings, args, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kConvergence;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}

}  // namespace binrbm::cli
