// Command line front end for the volatility toolkit. Talks to the library
// exclusively through the C interface; every artifact is a file under --out
// so runs can be chained, diffed and replayed.
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ginn/ginn.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommandError : std::runtime_error {
  int code;
  CommandError(int code, const std::string& what)
      : std::runtime_error(what), code(code) {}
};

int exit_code_for(ginn_status status) {
  switch (status) {
    case GINN_ERR_DATA:
      return kExitData;
    case GINN_ERR_NUMERIC:
      return kExitNumeric;
    default:
      return kExitUsage;
  }
}

void call(ginn_status status) {
  if (status != GINN_OK) {
    throw CommandError(exit_code_for(status), ginn_last_error());
  }
}

struct series_ptr {
  ginn_series* p = nullptr;
  series_ptr() = default;
  series_ptr(const series_ptr&) = delete;
  series_ptr& operator=(const series_ptr&) = delete;
  ~series_ptr() { ginn_series_free(p); }
  ginn_series** slot() { return &p; }
};

struct model_ptr {
  ginn_model* p = nullptr;
  model_ptr() = default;
  model_ptr(const model_ptr&) = delete;
  model_ptr& operator=(const model_ptr&) = delete;
  ~model_ptr() { ginn_model_free(p); }
  ginn_model** slot() { return &p; }
};

std::string grab(char* text) {
  std::string copy(text == nullptr ? "" : text);
  ginn_string_free(text);
  return copy;
}

// ---- config file ----------------------------------------------------------

using KeyValues = std::map<std::string, std::string>;

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Flat "key = value" lines; '#' starts a comment. Keys outside `allowed`
// are usage errors so typos never silently fall back to defaults.
KeyValues read_config(const std::string& path,
                      const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw CommandError(kExitUsage, "cannot open config '" + path + "'");
  KeyValues values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = path + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CommandError(kExitUsage, where + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw CommandError(kExitUsage, where + ": expected key = value");
    }
    if (allowed.find(key) == allowed.end()) {
      throw CommandError(kExitUsage, where + ": unknown key '" + key + "'");
    }
    if (!values.emplace(key, value).second) {
      throw CommandError(kExitUsage, where + ": duplicate key '" + key + "'");
    }
  }
  return values;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const double value = std::stod(text, &used);
    if (used == text.size()) return value;
  } catch (const std::exception&) {
  }
  throw CommandError(kExitUsage, "'" + key + "' is not a number: '" + text + "'");
}

uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    size_t used = 0;
    const unsigned long long value = std::stoull(text, &used);
    if (used == text.size() && text.find('-') == std::string::npos) {
      return value;
    }
  } catch (const std::exception&) {
  }
  throw CommandError(kExitUsage,
                     "'" + key + "' is not a non-negative integer: '" + text + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, ',')) {
    piece = trim(piece);
    if (!piece.empty()) parts.push_back(piece);
  }
  return parts;
}

std::string cfg_string(const KeyValues& cfg, const std::string& key,
                       const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

double cfg_double(const KeyValues& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : parse_double(key, it->second);
}

uint64_t cfg_u64(const KeyValues& cfg, const std::string& key, uint64_t fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : parse_u64(key, it->second);
}

int32_t parse_day(const std::string& text) {
  int32_t day = 0;
  if (ginn_date_parse(text.c_str(), &day) != GINN_OK) {
    throw CommandError(kExitUsage, ginn_last_error());
  }
  return day;
}

// ---- artifacts --------------------------------------------------------------

fs::path out_path(const std::string& out_dir, const std::string& name) {
  return fs::path(out_dir) / name;
}

void ensure_out(const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw CommandError(kExitData,
                       "cannot create output directory '" + out_dir + "'");
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CommandError(kExitData, "cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) throw CommandError(kExitData, "failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CommandError(kExitData, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void save_series(const ginn_series* series, const fs::path& path,
                 const std::string& header) {
  call(ginn_series_save_csv(series, path.string().c_str(), header.c_str()));
}

void load_required(const fs::path& path, const std::string& hint,
                   series_ptr& out) {
  if (!fs::exists(path)) {
    throw CommandError(kExitData, "missing '" + path.string() + "'; " + hint);
  }
  call(ginn_series_load_csv(path.string().c_str(), out.slot()));
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    ordered_json settings, std::vector<std::string> outputs,
                    ordered_json results = ordered_json()) {
  ordered_json doc;
  doc["command"] = command;
  doc["version"] = ginn_version();
  doc["settings"] = std::move(settings);
  if (!results.is_null()) doc["results"] = std::move(results);
  doc["outputs"] = std::move(outputs);
  write_text(out_path(out_dir, "manifest_" + command + ".json"),
             doc.dump(2) + "\n");
}

// ---- network settings shared by train, sweep and persistence ---------------

struct NetSettings {
  int layers = 3;
  int width = 256;
  double dropout = 0.2;
  uint64_t window = 90;
  double lambda = 0.01;
  uint64_t epochs = 300;
  uint64_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-2;
  double epsilon = 1e-8;

  static const std::set<std::string>& config_keys() {
    static const std::set<std::string> keys = {
        "layers",     "width", "dropout",       "window",
        "lambda",     "epochs", "batch_size",   "learning_rate",
        "beta1",      "beta2", "weight_decay",  "epsilon"};
    return keys;
  }

  void apply(const KeyValues& cfg) {
    layers = static_cast<int>(cfg_u64(cfg, "layers", layers));
    width = static_cast<int>(cfg_u64(cfg, "width", width));
    dropout = cfg_double(cfg, "dropout", dropout);
    window = cfg_u64(cfg, "window", window);
    lambda = cfg_double(cfg, "lambda", lambda);
    epochs = cfg_u64(cfg, "epochs", epochs);
    batch_size = cfg_u64(cfg, "batch_size", batch_size);
    learning_rate = cfg_double(cfg, "learning_rate", learning_rate);
    beta1 = cfg_double(cfg, "beta1", beta1);
    beta2 = cfg_double(cfg, "beta2", beta2);
    weight_decay = cfg_double(cfg, "weight_decay", weight_decay);
    epsilon = cfg_double(cfg, "epsilon", epsilon);
  }

  std::string config_json(uint64_t seed) const {
    ordered_json doc;
    doc["network"] = {{"num_lstm_layers", layers},
                      {"hidden_width", width},
                      {"dropout_rate", dropout},
                      {"input_window", window}};
    doc["training"] = {{"lambda", lambda},
                       {"epochs", epochs},
                       {"batch_size", batch_size},
                       {"learning_rate", learning_rate},
                       {"beta1", beta1},
                       {"beta2", beta2},
                       {"weight_decay", weight_decay},
                       {"epsilon", epsilon},
                       {"seed", seed}};
    return doc.dump();
  }

  ordered_json manifest_settings() const {
    ordered_json doc;
    doc["layers"] = layers;
    doc["width"] = width;
    doc["dropout"] = dropout;
    doc["window"] = window;
    doc["lambda"] = lambda;
    doc["epochs"] = epochs;
    doc["batch_size"] = batch_size;
    doc["learning_rate"] = learning_rate;
    doc["beta1"] = beta1;
    doc["beta2"] = beta2;
    doc["weight_decay"] = weight_decay;
    doc["epsilon"] = epsilon;
    return doc;
  }
};

const std::set<std::string> kClassicalModels = {"garch", "gjr", "tgarch"};
const std::set<std::string> kNeuralModels = {"lstm", "ginn", "ginn0"};

// ---- commands ---------------------------------------------------------------

struct CommonFlags {
  std::string config;
  std::string out = ".";
};

KeyValues load_cfg(const CommonFlags& common, std::set<std::string> allowed) {
  if (common.config.empty()) return {};
  return read_config(common.config, allowed);
}

std::set<std::string> with_net_keys(std::set<std::string> keys) {
  const auto& net = NetSettings::config_keys();
  keys.insert(net.begin(), net.end());
  return keys;
}

void run_ingest(const CommonFlags& common, const std::string& csv_arg,
                uint64_t window_flag, bool window_given) {
  const KeyValues cfg =
      load_cfg(common, {"dataset", "date_format", "window"});
  const std::string dataset = !csv_arg.empty() ? csv_arg
                                               : cfg_string(cfg, "dataset", "");
  if (dataset.empty()) {
    throw CommandError(kExitUsage,
                       "ingest needs a price CSV (argument or dataset= in config)");
  }
  const std::string date_format = cfg_string(cfg, "date_format", "iso");
  const uint64_t window =
      window_given ? window_flag : cfg_u64(cfg, "window", 90);

  ensure_out(common.out);
  series_ptr returns, truth;
  call(ginn_ingest_csv(dataset.c_str(), date_format.c_str(), window,
                       returns.slot(), truth.slot()));
  save_series(returns.p, out_path(common.out, "returns.csv"), "log_return");
  save_series(truth.p, out_path(common.out, "sigma2_true.csv"), "sigma2");

  ordered_json settings;
  settings["dataset"] = dataset;
  settings["date_format"] = date_format;
  settings["window"] = window;
  write_manifest(common.out, "ingest", std::move(settings),
                 {"returns.csv", "sigma2_true.csv"});
}

void run_simulate(const CommonFlags& common, uint64_t seed_flag,
                  bool seed_given) {
  const KeyValues cfg = load_cfg(
      common, {"alpha0", "alpha", "beta", "length", "burn_in", "seed"});
  const double alpha0 = cfg_double(cfg, "alpha0", 0.1);
  const double alpha = cfg_double(cfg, "alpha", 0.2);
  const double beta = cfg_double(cfg, "beta", 0.5);
  const uint64_t length = cfg_u64(cfg, "length", 2000);
  const uint64_t burn_in = cfg_u64(cfg, "burn_in", 500);
  const uint64_t seed = seed_given ? seed_flag : cfg_u64(cfg, "seed", 42);

  ensure_out(common.out);
  series_ptr returns, truth;
  call(ginn_simulate(alpha0, alpha, beta, length, burn_in, seed,
                     returns.slot(), truth.slot()));
  save_series(returns.p, out_path(common.out, "returns.csv"), "log_return");
  save_series(truth.p, out_path(common.out, "sigma2_true.csv"), "sigma2");

  ordered_json settings;
  settings["alpha0"] = alpha0;
  settings["alpha"] = alpha;
  settings["beta"] = beta;
  settings["length"] = length;
  settings["burn_in"] = burn_in;
  settings["seed"] = seed;
  write_manifest(common.out, "simulate", std::move(settings),
                 {"returns.csv", "sigma2_true.csv"});
}

void run_forecast(const CommonFlags& common, const std::string& model_flag,
                  bool model_given, uint64_t window_flag, bool window_given,
                  uint64_t seed_flag, bool seed_given) {
  const KeyValues cfg =
      load_cfg(common, {"model", "window", "refit_every", "seed"});
  const std::string model =
      model_given ? model_flag : cfg_string(cfg, "model", "garch");
  ensure_out(common.out);

  if (kClassicalModels.count(model) > 0) {
    const uint64_t window = window_given ? window_flag : cfg_u64(cfg, "window", 90);
    const uint64_t refit_every = cfg_u64(cfg, "refit_every", 1);

    series_ptr returns;
    load_required(out_path(common.out, "returns.csv"),
                  "run ingest or simulate first", returns);
    series_ptr forecasts;
    char* fit_text = nullptr;
    call(ginn_garch_roll(returns.p, model.c_str(), window,
                         static_cast<int>(refit_every), forecasts.slot(),
                         &fit_text));
    const std::string fit_json = grab(fit_text);

    const std::string pred_name = "pred_" + model + ".csv";
    const std::string fit_name = "fit_" + model + ".json";
    save_series(forecasts.p, out_path(common.out, pred_name), "sigma2_pred");
    write_text(out_path(common.out, fit_name), fit_json + "\n");

    ordered_json settings;
    settings["model"] = model;
    settings["window"] = window;
    settings["refit_every"] = refit_every;
    write_manifest(common.out, "forecast", std::move(settings),
                   {pred_name, fit_name});
    return;
  }

  if (kNeuralModels.count(model) > 0) {
    const uint64_t seed = seed_given ? seed_flag : cfg_u64(cfg, "seed", 1);
    const std::string checkpoint_name =
        "checkpoint_" + model + "_seed" + std::to_string(seed) + ".json";
    const fs::path checkpoint_path = out_path(common.out, checkpoint_name);
    if (!fs::exists(checkpoint_path)) {
      throw CommandError(kExitData,
                         "no checkpoint at '" + checkpoint_path.string() +
                             "'; run train --model " + model + " first");
    }
    model_ptr net;
    call(ginn_model_from_json(read_text(checkpoint_path).c_str(), net.slot()));

    size_t input_window = 0;
    call(ginn_model_input_window(net.p, &input_window));
    const uint64_t window =
        window_given ? window_flag : cfg_u64(cfg, "window", input_window);
    if (window != input_window) {
      throw CommandError(
          kExitUsage, "window " + std::to_string(window) +
                          " does not match the checkpoint input window " +
                          std::to_string(input_window));
    }

    series_ptr truth;
    load_required(out_path(common.out, "sigma2_true.csv"),
                  "run ingest or simulate first", truth);
    series_ptr pred;
    call(ginn_model_predict(net.p, truth.p, pred.slot()));

    const std::string pred_name = "pred_" + model + ".csv";
    save_series(pred.p, out_path(common.out, pred_name), "sigma2_pred");

    ordered_json settings;
    settings["model"] = model;
    settings["seed"] = seed;
    settings["window"] = input_window;
    settings["checkpoint"] = checkpoint_name;
    write_manifest(common.out, "forecast", std::move(settings), {pred_name});
    return;
  }

  throw CommandError(kExitUsage,
                     "unknown model '" + model +
                         "' (expected garch, gjr, tgarch, lstm, ginn, ginn0)");
}

void run_train(const CommonFlags& common, const std::string& model_flag,
               bool model_given, double lambda_flag, bool lambda_given,
               uint64_t epochs_flag, bool epochs_given,
               const std::vector<uint64_t>& seed_flags, uint64_t window_flag,
               bool window_given, const std::string& split_flag,
               bool split_given) {
  const KeyValues cfg = load_cfg(
      common, with_net_keys({"model", "seeds", "split_date"}));

  NetSettings net;
  net.apply(cfg);
  if (lambda_given) net.lambda = lambda_flag;
  if (epochs_given) net.epochs = epochs_flag;
  if (window_given) net.window = window_flag;

  const std::string model =
      model_given ? model_flag : cfg_string(cfg, "model", "ginn");
  const bool lambda_pinned = lambda_given || cfg.count("lambda") > 0;
  if (model == "ginn0") {
    if (lambda_pinned && net.lambda != 0.0) {
      throw CommandError(kExitUsage, "ginn0 trains with lambda 0; drop --lambda");
    }
    net.lambda = 0.0;
  } else if (model == "lstm") {
    if (lambda_pinned && net.lambda != 1.0) {
      throw CommandError(kExitUsage, "lstm trains with lambda 1; drop --lambda");
    }
    net.lambda = 1.0;
  } else if (model != "ginn") {
    throw CommandError(kExitUsage,
                       "train handles lstm, ginn and ginn0, not '" + model + "'");
  }

  std::vector<uint64_t> seeds = seed_flags;
  if (seeds.empty()) {
    for (const std::string& piece : split_list(cfg_string(cfg, "seeds", "1"))) {
      seeds.push_back(parse_u64("seeds", piece));
    }
  }
  if (seeds.empty()) throw CommandError(kExitUsage, "no training seeds given");

  const std::string split_text =
      split_given ? split_flag : cfg_string(cfg, "split_date", "");
  const bool has_split = !split_text.empty();
  const int32_t split_day = has_split ? parse_day(split_text) : 0;

  ensure_out(common.out);
  series_ptr truth;
  load_required(out_path(common.out, "sigma2_true.csv"),
                "run ingest or simulate first", truth);
  series_ptr garch;
  if (net.lambda < 1.0) {
    load_required(out_path(common.out, "pred_garch.csv"),
                  "run forecast --model garch first", garch);
  }

  std::vector<std::string> outputs;
  for (uint64_t seed : seeds) {
    char* checkpoint_text = nullptr;
    char* loss_text = nullptr;
    call(ginn_train(truth.p, garch.p, net.config_json(seed).c_str(), split_day,
                    has_split ? 1 : 0, &checkpoint_text, &loss_text));
    const std::string checkpoint = grab(checkpoint_text);
    const std::string loss_csv = grab(loss_text);

    const std::string suffix = model + "_seed" + std::to_string(seed);
    const std::string checkpoint_name = "checkpoint_" + suffix + ".json";
    const std::string loss_name = "loss_" + suffix + ".csv";
    write_text(out_path(common.out, checkpoint_name), checkpoint + "\n");
    write_text(out_path(common.out, loss_name), loss_csv);
    outputs.push_back(checkpoint_name);
    outputs.push_back(loss_name);
  }

  ordered_json settings = net.manifest_settings();
  settings["model"] = model;
  settings["seeds"] = seeds;
  if (has_split) settings["split_date"] = split_text;
  write_manifest(common.out, "train", std::move(settings), std::move(outputs));
}

void run_evaluate(const CommonFlags& common,
                  const std::vector<std::string>& model_flags,
                  const std::string& split_flag, bool split_given) {
  const KeyValues cfg = load_cfg(common, {"models", "split_date"});

  std::vector<std::string> models = model_flags;
  if (models.empty()) models = split_list(cfg_string(cfg, "models", ""));
  if (models.empty()) {
    // score whatever predictions are sitting in the output directory
    for (const auto& entry : fs::directory_iterator(common.out)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("pred_", 0) == 0 && name.size() > 9 &&
          name.substr(name.size() - 4) == ".csv") {
        models.push_back(name.substr(5, name.size() - 9));
      }
    }
    std::sort(models.begin(), models.end());
  }
  if (models.empty()) {
    throw CommandError(kExitData,
                       "no prediction files to evaluate; run forecast first");
  }

  const std::string split_text =
      split_given ? split_flag : cfg_string(cfg, "split_date", "");
  const bool has_from = !split_text.empty();
  const int32_t from_day = has_from ? parse_day(split_text) : 0;

  ensure_out(common.out);
  series_ptr truth;
  load_required(out_path(common.out, "sigma2_true.csv"),
                "run ingest or simulate first", truth);

  std::vector<std::string> outputs;
  for (const std::string& model : models) {
    series_ptr pred;
    load_required(out_path(common.out, "pred_" + model + ".csv"),
                  "run forecast --model " + model + " first", pred);

    char* report_text = nullptr;
    call(ginn_evaluate(model.c_str(), truth.p, pred.p, from_day,
                       has_from ? 1 : 0, &report_text));
    char* spectrum_text = nullptr;
    call(ginn_spectrum_csv(truth.p, pred.p, from_day, has_from ? 1 : 0,
                           &spectrum_text));

    const std::string metrics_name = "metrics_" + model + ".json";
    const std::string spectrum_name = "spectrum_" + model + ".csv";
    write_text(out_path(common.out, metrics_name), grab(report_text) + "\n");
    write_text(out_path(common.out, spectrum_name), grab(spectrum_text));
    outputs.push_back(metrics_name);
    outputs.push_back(spectrum_name);
  }

  ordered_json settings;
  settings["models"] = models;
  if (has_from) settings["split_date"] = split_text;
  write_manifest(common.out, "evaluate", std::move(settings),
                 std::move(outputs));
}

void run_sweep(const CommonFlags& common, const std::vector<double>& lambda_flags,
               const std::vector<uint64_t>& seed_flags, uint64_t epochs_flag,
               bool epochs_given, uint64_t window_flag, bool window_given,
               const std::string& split_flag, bool split_given) {
  const KeyValues cfg =
      load_cfg(common, with_net_keys({"lambdas", "seeds", "split_date"}));

  NetSettings net;
  net.apply(cfg);
  if (epochs_given) net.epochs = epochs_flag;
  if (window_given) net.window = window_flag;

  std::vector<double> lambdas = lambda_flags;
  if (lambdas.empty()) {
    for (const std::string& piece : split_list(cfg_string(cfg, "lambdas", ""))) {
      lambdas.push_back(parse_double("lambdas", piece));
    }
  }

  std::vector<uint64_t> seeds = seed_flags;
  if (seeds.empty()) {
    for (const std::string& piece : split_list(cfg_string(cfg, "seeds", "1"))) {
      seeds.push_back(parse_u64("seeds", piece));
    }
  }
  if (seeds.empty()) throw CommandError(kExitUsage, "no sweep seeds given");

  const std::string split_text =
      split_given ? split_flag : cfg_string(cfg, "split_date", "");
  if (split_text.empty()) {
    throw CommandError(kExitUsage, "sweep needs --split-date");
  }
  const int32_t split_day = parse_day(split_text);

  ensure_out(common.out);
  series_ptr truth, garch;
  load_required(out_path(common.out, "sigma2_true.csv"),
                "run ingest or simulate first", truth);
  load_required(out_path(common.out, "pred_garch.csv"),
                "run forecast --model garch first", garch);

  char* csv_text = nullptr;
  double best_lambda = 0.0;
  call(ginn_lambda_sweep(truth.p, garch.p, split_day,
                         net.config_json(seeds.front()).c_str(),
                         lambdas.empty() ? nullptr : lambdas.data(),
                         lambdas.size(), seeds.data(), seeds.size(), &csv_text,
                         &best_lambda));
  write_text(out_path(common.out, "sweep.csv"), grab(csv_text));

  ordered_json settings = net.manifest_settings();
  settings.erase("lambda");  // swept, not fixed
  if (lambdas.empty()) {
    settings["lambdas"] = "built-in grid";
  } else {
    settings["lambdas"] = lambdas;
  }
  settings["seeds"] = seeds;
  settings["split_date"] = split_text;
  ordered_json results;
  results["best_lambda"] = best_lambda;
  write_manifest(common.out, "sweep", std::move(settings), {"sweep.csv"},
                 std::move(results));
}

void run_persistence(const CommonFlags& common, uint64_t seed_flag,
                     bool seed_given, uint64_t epochs_flag, bool epochs_given,
                     uint64_t window_flag, bool window_given) {
  const KeyValues cfg = load_cfg(
      common, with_net_keys({"alphas", "betas", "alpha0", "length", "burn_in",
                             "seed", "train_seeds"}));

  NetSettings net;
  net.apply(cfg);
  if (epochs_given) net.epochs = epochs_flag;
  if (window_given) net.window = window_flag;

  std::vector<double> alphas;
  for (const std::string& piece :
       split_list(cfg_string(cfg, "alphas", "0.1,0.2"))) {
    alphas.push_back(parse_double("alphas", piece));
  }
  std::vector<double> betas;
  for (const std::string& piece :
       split_list(cfg_string(cfg, "betas", "0.5,0.7"))) {
    betas.push_back(parse_double("betas", piece));
  }
  const double alpha0 = cfg_double(cfg, "alpha0", 0.1);
  const uint64_t length = cfg_u64(cfg, "length", 500);
  const uint64_t burn_in = cfg_u64(cfg, "burn_in", 500);
  const uint64_t seed_base = seed_given ? seed_flag : cfg_u64(cfg, "seed", 7);

  std::vector<uint64_t> train_seeds;
  for (const std::string& piece :
       split_list(cfg_string(cfg, "train_seeds", "1"))) {
    train_seeds.push_back(parse_u64("train_seeds", piece));
  }
  if (alphas.empty() || betas.empty() || train_seeds.empty()) {
    throw CommandError(kExitUsage,
                       "persistence needs alphas, betas and train_seeds");
  }

  ensure_out(common.out);
  char* csv_text = nullptr;
  call(ginn_persistence(alphas.data(), alphas.size(), betas.data(),
                        betas.size(), alpha0, length, burn_in, seed_base,
                        train_seeds.data(), train_seeds.size(),
                        net.config_json(train_seeds.front()).c_str(),
                        &csv_text));
  write_text(out_path(common.out, "persistence.csv"), grab(csv_text));

  ordered_json settings = net.manifest_settings();
  settings["alphas"] = alphas;
  settings["betas"] = betas;
  settings["alpha0"] = alpha0;
  settings["length"] = length;
  settings["burn_in"] = burn_in;
  settings["seed"] = seed_base;
  settings["train_seeds"] = train_seeds;
  write_manifest(common.out, "persistence", std::move(settings),
                 {"persistence.csv"});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GARCH and LSTM volatility forecasting workbench"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* cmd, CommonFlags& common) {
    cmd->add_option("--config", common.config,
                    "flat key = value settings file; flags win over it");
    cmd->add_option("--out", common.out, "artifact directory (default .)");
  };

  // ingest
  CommonFlags ingest_common;
  std::string ingest_csv;
  uint64_t ingest_window = 90;
  auto* ingest = app.add_subcommand(
      "ingest", "price CSV to returns and ground-truth variance files");
  add_common(ingest, ingest_common);
  ingest->add_option("csv", ingest_csv, "price CSV with a date,close header");
  ingest->add_option("--window", ingest_window,
                     "rolling mean window for the variance proxy");
  ingest->callback([&] {
    run_ingest(ingest_common, ingest_csv, ingest_window,
               ingest->count("--window") > 0);
  });

  // simulate
  CommonFlags sim_common;
  uint64_t sim_seed = 42;
  auto* simulate = app.add_subcommand(
      "simulate", "seeded GARCH process to returns and variance files");
  add_common(simulate, sim_common);
  simulate->add_option("--seed", sim_seed, "generator seed");
  simulate->callback([&] {
    run_simulate(sim_common, sim_seed, simulate->count("--seed") > 0);
  });

  // forecast
  CommonFlags forecast_common;
  std::string forecast_model = "garch";
  uint64_t forecast_window = 90;
  uint64_t forecast_seed = 1;
  auto* forecast = app.add_subcommand(
      "forecast", "rolling one-step forecasts from a model");
  add_common(forecast, forecast_common);
  forecast->add_option("--model", forecast_model,
                       "garch, gjr, tgarch, lstm, ginn or ginn0");
  forecast->add_option("--window", forecast_window, "rolling window length");
  forecast->add_option("--seed", forecast_seed,
                       "checkpoint seed for neural models");
  forecast->callback([&] {
    run_forecast(forecast_common, forecast_model,
                 forecast->count("--model") > 0, forecast_window,
                 forecast->count("--window") > 0, forecast_seed,
                 forecast->count("--seed") > 0);
  });

  // train
  CommonFlags train_common;
  std::string train_model = "ginn";
  double train_lambda = 0.01;
  uint64_t train_epochs = 300;
  std::vector<uint64_t> train_seeds;
  uint64_t train_window = 90;
  std::string train_split;
  auto* train = app.add_subcommand("train", "fit neural forecasters");
  add_common(train, train_common);
  train->add_option("--model", train_model, "lstm, ginn or ginn0");
  train->add_option("--lambda", train_lambda,
                    "weight on ground truth in the hybrid loss");
  train->add_option("--epochs", train_epochs, "training epochs");
  train->add_option("--seed", train_seeds, "training seeds (repeatable)");
  train->add_option("--window", train_window, "input window length");
  train->add_option("--split-date", train_split,
                    "train only on dates before this ISO date");
  train->callback([&] {
    run_train(train_common, train_model, train->count("--model") > 0,
              train_lambda, train->count("--lambda") > 0, train_epochs,
              train->count("--epochs") > 0, train_seeds, train_window,
              train->count("--window") > 0, train_split,
              train->count("--split-date") > 0);
  });

  // evaluate
  CommonFlags eval_common;
  std::vector<std::string> eval_models;
  std::string eval_split;
  auto* evaluate = app.add_subcommand(
      "evaluate", "score predictions against the ground truth");
  add_common(evaluate, eval_common);
  evaluate->add_option("--model", eval_models,
                       "models to score (default: every pred_*.csv)");
  evaluate->add_option("--split-date", eval_split,
                       "score only dates at or after this ISO date");
  evaluate->callback([&] {
    run_evaluate(eval_common, eval_models, eval_split,
                 evaluate->count("--split-date") > 0);
  });

  // sweep
  CommonFlags sweep_common;
  std::vector<double> sweep_lambdas;
  std::vector<uint64_t> sweep_seeds;
  uint64_t sweep_epochs = 300;
  uint64_t sweep_window = 90;
  std::string sweep_split;
  auto* sweep = app.add_subcommand(
      "sweep", "grid the hybrid loss weight over seeds");
  add_common(sweep, sweep_common);
  sweep->add_option("--lambda", sweep_lambdas,
                    "weights to try (default: built-in grid)");
  sweep->add_option("--seed", sweep_seeds, "training seeds (repeatable)");
  sweep->add_option("--epochs", sweep_epochs, "training epochs");
  sweep->add_option("--window", sweep_window, "input window length");
  sweep->add_option("--split-date", sweep_split,
                    "train before, score at and after this ISO date");
  sweep->callback([&] {
    run_sweep(sweep_common, sweep_lambdas, sweep_seeds, sweep_epochs,
              sweep->count("--epochs") > 0, sweep_window,
              sweep->count("--window") > 0, sweep_split,
              sweep->count("--split-date") > 0);
  });

  // persistence
  CommonFlags persist_common;
  uint64_t persist_seed = 7;
  uint64_t persist_epochs = 300;
  uint64_t persist_window = 90;
  auto* persistence = app.add_subcommand(
      "persistence", "compare models across simulated persistence regimes");
  add_common(persistence, persist_common);
  persistence->add_option("--seed", persist_seed, "simulation seed base");
  persistence->add_option("--epochs", persist_epochs, "training epochs");
  persistence->add_option("--window", persist_window, "input window length");
  persistence->callback([&] {
    run_persistence(persist_common, persist_seed,
                    persistence->count("--seed") > 0, persist_epochs,
                    persistence->count("--epochs") > 0, persist_window,
                    persistence->count("--window") > 0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const CommandError& e) {
    std::cerr << "ginn: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "ginn: " << e.what() << "\n";
    return kExitUsage;
  }
  return 0;
}
