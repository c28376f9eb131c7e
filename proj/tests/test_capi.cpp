// Exercises the C boundary the way an external client would: only the
// installed header, opaque handles, status codes and strings. No core
// headers on purpose.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ginn/ginn.h"

namespace {

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

// Copies a library-owned string into std::string and releases it.
std::string grab(char* text) {
  REQUIRE(text != nullptr);
  std::string copy(text);
  ginn_string_free(text);
  return copy;
}

std::vector<int32_t> series_days(const ginn_series* s) {
  std::vector<int32_t> days(ginn_series_size(s));
  for (size_t i = 0; i < days.size(); ++i) {
    double value = 0.0;
    REQUIRE(ginn_series_get(s, i, &days[i], &value) == GINN_OK);
  }
  return days;
}

std::vector<double> series_values(const ginn_series* s) {
  std::vector<double> values(ginn_series_size(s));
  for (size_t i = 0; i < values.size(); ++i) {
    int32_t day = 0;
    REQUIRE(ginn_series_get(s, i, &day, &values[i]) == GINN_OK);
  }
  return values;
}

std::filesystem::path scratch_dir() {
  const std::filesystem::path dir = "capi_scratch";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

size_t count_lines(const std::string& text) {
  size_t lines = 0;
  for (char c : text) {
    if (c == '\n') ++lines;
  }
  return lines;
}

// Small deterministic market: returns and variance proxy from the seeded
// GARCH generator, sized for fast hybrid training.
void tiny_market(series_ptr& returns, series_ptr& truth, uint64_t seed = 31) {
  REQUIRE(ginn_simulate(0.1, 0.1, 0.6, 160, 50, seed, returns.slot(),
                        truth.slot()) == GINN_OK);
}

const char* kTinyConfig = R"({
  "network": {"num_lstm_layers": 1, "hidden_width": 8, "dropout_rate": 0.0,
              "input_window": 20},
  "training": {"lambda": 0.5, "epochs": 3, "batch_size": 32, "seed": 7}
})";

}  // namespace

TEST_CASE("version and per-thread error reporting") {
  CHECK(std::string(ginn_version()) == "0.1.0");
  CHECK(std::string(ginn_last_error()).empty());

  int32_t day = 0;
  CHECK(ginn_date_parse("not a date", &day) == GINN_ERR_ARGUMENT);
  CHECK_FALSE(std::string(ginn_last_error()).empty());

  CHECK(ginn_date_parse("2020-01-02", &day) == GINN_OK);
  CHECK(std::string(ginn_last_error()).empty());

  ginn_string_free(nullptr);
  ginn_series_free(nullptr);
  ginn_model_free(nullptr);
}

TEST_CASE("date parsing round trips through epoch days") {
  int32_t day = 0;
  REQUIRE(ginn_date_parse("1970-01-01", &day) == GINN_OK);
  CHECK(day == 0);

  REQUIRE(ginn_date_parse("2021-02-28", &day) == GINN_OK);
  char* text = nullptr;
  REQUIRE(ginn_date_to_string(day, &text) == GINN_OK);
  CHECK(grab(text) == "2021-02-28");

  CHECK(ginn_date_parse("2021-02-30", &day) == GINN_ERR_ARGUMENT);
  CHECK(ginn_date_parse(nullptr, &day) == GINN_ERR_ARGUMENT);
  CHECK(ginn_date_parse("2021-02-28", nullptr) == GINN_ERR_ARGUMENT);
}

TEST_CASE("format_double emits shortest round-trip text") {
  const double cases[] = {0.1, 1.0 / 3.0, 2.0, -123.456e-7, 1e300};
  for (double value : cases) {
    char* text = nullptr;
    REQUIRE(ginn_format_double(value, &text) == GINN_OK);
    const std::string s = grab(text);
    CHECK(std::strtod(s.c_str(), nullptr) == value);
  }
  char* text = nullptr;
  REQUIRE(ginn_format_double(0.1, &text) == GINN_OK);
  CHECK(grab(text) == "0.1");
}

TEST_CASE("series creation sorts by day and validates entries") {
  const int32_t days[] = {3, 1, 2};
  const double values[] = {30.0, 10.0, 20.0};
  series_ptr s;
  REQUIRE(ginn_series_create(days, values, 3, s.slot()) == GINN_OK);
  REQUIRE(ginn_series_size(s.p) == 3);
  CHECK(series_days(s.p) == std::vector<int32_t>{1, 2, 3});
  CHECK(series_values(s.p) == std::vector<double>{10.0, 20.0, 30.0});

  int32_t day = 0;
  double value = 0.0;
  CHECK(ginn_series_get(s.p, 3, &day, &value) == GINN_ERR_ARGUMENT);
  CHECK(ginn_series_size(nullptr) == 0);

  const int32_t dup_days[] = {1, 1};
  const double dup_values[] = {1.0, 2.0};
  series_ptr bad;
  CHECK(ginn_series_create(dup_days, dup_values, 2, bad.slot()) == GINN_ERR_DATA);

  const int32_t one_day[] = {5};
  const double nan_value[] = {std::nan("")};
  CHECK(ginn_series_create(one_day, nan_value, 1, bad.slot()) == GINN_ERR_DATA);
  CHECK(ginn_series_create(nullptr, values, 3, bad.slot()) == GINN_ERR_ARGUMENT);
}

TEST_CASE("series CSV save and load round trip byte for byte") {
  const auto dir = scratch_dir();
  const int32_t days[] = {0, 1, 5};
  const double values[] = {0.25, -1.5, 3.141592653589793};
  series_ptr s;
  REQUIRE(ginn_series_create(days, values, 3, s.slot()) == GINN_OK);

  const auto first = dir / "roundtrip_a.csv";
  const auto second = dir / "roundtrip_b.csv";
  REQUIRE(ginn_series_save_csv(s.p, first.string().c_str(), "value") == GINN_OK);

  series_ptr loaded;
  REQUIRE(ginn_series_load_csv(first.string().c_str(), loaded.slot()) == GINN_OK);
  CHECK(series_days(loaded.p) == series_days(s.p));
  CHECK(series_values(loaded.p) == series_values(s.p));

  REQUIRE(ginn_series_save_csv(loaded.p, second.string().c_str(), "value") ==
          GINN_OK);
  CHECK(read_file(first) == read_file(second));

  series_ptr missing;
  CHECK(ginn_series_load_csv((dir / "no_such.csv").string().c_str(),
                             missing.slot()) == GINN_ERR_DATA);
}

TEST_CASE("ingest builds returns and a variance proxy from prices") {
  const auto dir = scratch_dir();
  const auto path = dir / "prices.csv";
  std::ostringstream csv;
  csv << "date,close\n";
  double price = 100.0;
  for (int32_t i = 0; i < 40; ++i) {
    price *= 1.0 + 0.01 * ((i % 5) - 2);
    char* day = nullptr;
    REQUIRE(ginn_date_to_string(18262 + i, &day) == GINN_OK);
    csv << grab(day) << "," << price << "\n";
  }
  write_file(path, csv.str());

  series_ptr returns, truth;
  REQUIRE(ginn_ingest_csv(path.string().c_str(), "iso", 5, returns.slot(),
                          truth.slot()) == GINN_OK);
  CHECK(ginn_series_size(returns.p) == 39);
  CHECK(ginn_series_size(truth.p) == 34);

  // the variance proxy starts one mean window into the returns
  const auto return_days = series_days(returns.p);
  const auto truth_days = series_days(truth.p);
  CHECK(truth_days.front() == return_days[5]);
  CHECK(truth_days.back() == return_days.back());

  series_ptr r2, t2;
  CHECK(ginn_ingest_csv(path.string().c_str(), "dmy", 5, r2.slot(), t2.slot()) ==
        GINN_ERR_ARGUMENT);

  const auto broken = dir / "broken.csv";
  write_file(broken, "date,close\n2020-01-01,10\n2020-01-02,zero\n");
  CHECK(ginn_ingest_csv(broken.string().c_str(), "iso", 5, r2.slot(),
                        t2.slot()) == GINN_ERR_DATA);
  CHECK(std::string(ginn_last_error()).find(":3:") != std::string::npos);
}

TEST_CASE("simulate is deterministic per seed and validates parameters") {
  series_ptr ra, ta, rb, tb;
  REQUIRE(ginn_simulate(0.1, 0.1, 0.6, 100, 50, 42, ra.slot(), ta.slot()) ==
          GINN_OK);
  REQUIRE(ginn_simulate(0.1, 0.1, 0.6, 100, 50, 42, rb.slot(), tb.slot()) ==
          GINN_OK);
  CHECK(ginn_series_size(ra.p) == 100);
  CHECK(series_values(ra.p) == series_values(rb.p));
  CHECK(series_values(ta.p) == series_values(tb.p));

  const auto days = series_days(ra.p);
  CHECK(days.front() == 0);
  CHECK(days.back() == 99);

  series_ptr rc, tc;
  CHECK(ginn_simulate(0.1, 0.5, 0.5, 100, 50, 1, rc.slot(), tc.slot()) ==
        GINN_ERR_ARGUMENT);
  CHECK(ginn_simulate(-0.1, 0.1, 0.6, 100, 50, 1, rc.slot(), tc.slot()) ==
        GINN_ERR_ARGUMENT);
}

TEST_CASE("rolling classical forecasts come back with a fit report") {
  series_ptr returns, truth;
  REQUIRE(ginn_simulate(0.1, 0.1, 0.6, 400, 100, 5, returns.slot(),
                        truth.slot()) == GINN_OK);

  series_ptr forecasts;
  char* fit_text = nullptr;
  REQUIRE(ginn_garch_roll(returns.p, "garch", 90, 1, forecasts.slot(),
                          &fit_text) == GINN_OK);
  const std::string fit_json = grab(fit_text);

  const size_t n = ginn_series_size(forecasts.p);
  REQUIRE(n > 0);
  CHECK(n <= 310);
  CHECK(series_days(forecasts.p).front() >= 90);
  for (double v : series_values(forecasts.p)) CHECK(v > 0.0);

  const auto doc = nlohmann::json::parse(fit_json);
  CHECK(doc.contains("fit"));
  CHECK(doc.contains("pi"));
  CHECK(doc["windows_total"].get<size_t>() == 310);
  CHECK(doc["refits"].get<size_t>() >= 1);
  CHECK(doc["skipped"].is_array());
  CHECK(n + doc["skipped"].size() == 310);

  // same inputs, same outputs
  series_ptr again;
  REQUIRE(ginn_garch_roll(returns.p, "garch", 90, 1, again.slot(), nullptr) ==
          GINN_OK);
  CHECK(series_values(again.p) == series_values(forecasts.p));

  series_ptr bad;
  CHECK(ginn_garch_roll(returns.p, "egarch", 90, 1, bad.slot(), nullptr) ==
        GINN_ERR_ARGUMENT);
  CHECK(ginn_garch_roll(nullptr, "garch", 90, 1, bad.slot(), nullptr) ==
        GINN_ERR_ARGUMENT);
}

TEST_CASE("training produces a checkpoint and loss curve deterministically") {
  series_ptr returns, truth;
  tiny_market(returns, truth);
  series_ptr garch;
  REQUIRE(ginn_garch_roll(returns.p, "garch", 20, 5, garch.slot(), nullptr) ==
          GINN_OK);

  char* checkpoint_a = nullptr;
  char* loss_a = nullptr;
  REQUIRE(ginn_train(truth.p, garch.p, kTinyConfig, 0, 0, &checkpoint_a,
                     &loss_a) == GINN_OK);
  const std::string ckpt_a = grab(checkpoint_a);
  const std::string curve_a = grab(loss_a);

  CHECK(curve_a.rfind("epoch,loss\n", 0) == 0);
  CHECK(count_lines(curve_a) == 4);  // header plus one row per epoch

  const auto doc = nlohmann::json::parse(ckpt_a);
  CHECK(doc["format"] == "ginn-checkpoint-v1");
  CHECK(doc["network"]["hidden_width"] == 8);
  CHECK(doc["training"]["lambda"] == 0.5);
  CHECK(doc.contains("normalizer"));
  CHECK(doc.contains("batch_norm"));
  CHECK(doc.contains("parameters"));

  char* checkpoint_b = nullptr;
  REQUIRE(ginn_train(truth.p, garch.p, kTinyConfig, 0, 0, &checkpoint_b,
                     nullptr) == GINN_OK);
  CHECK(grab(checkpoint_b) == ckpt_a);

  // a split keeps later targets out of training, so the fit changes
  int32_t split_day = 0;
  double unused = 0.0;
  REQUIRE(ginn_series_get(truth.p, ginn_series_size(truth.p) * 7 / 10,
                          &split_day, &unused) == GINN_OK);
  char* checkpoint_c = nullptr;
  REQUIRE(ginn_train(truth.p, garch.p, kTinyConfig, split_day, 1,
                     &checkpoint_c, nullptr) == GINN_OK);
  CHECK(grab(checkpoint_c) != ckpt_a);

  char* out = nullptr;
  CHECK(ginn_train(truth.p, nullptr, kTinyConfig, 0, 0, &out, nullptr) ==
        GINN_ERR_ARGUMENT);
  CHECK(ginn_train(truth.p, garch.p, "{not json", 0, 0, &out, nullptr) ==
        GINN_ERR_ARGUMENT);
  CHECK(ginn_train(truth.p, garch.p, R"({"network":{"depth":2}})", 0, 0, &out,
                   nullptr) == GINN_ERR_ARGUMENT);
  CHECK(std::string(ginn_last_error()).find("depth") != std::string::npos);
}

TEST_CASE("checkpoints reload into working models") {
  series_ptr returns, truth;
  tiny_market(returns, truth);
  series_ptr garch;
  REQUIRE(ginn_garch_roll(returns.p, "garch", 20, 5, garch.slot(), nullptr) ==
          GINN_OK);

  char* checkpoint = nullptr;
  REQUIRE(ginn_train(truth.p, garch.p, kTinyConfig, 0, 0, &checkpoint,
                     nullptr) == GINN_OK);
  const std::string ckpt = grab(checkpoint);

  model_ptr model;
  REQUIRE(ginn_model_from_json(ckpt.c_str(), model.slot()) == GINN_OK);

  size_t window = 0;
  REQUIRE(ginn_model_input_window(model.p, &window) == GINN_OK);
  CHECK(window == 20);

  char* rewritten = nullptr;
  REQUIRE(ginn_model_to_json(model.p, &rewritten) == GINN_OK);
  CHECK(grab(rewritten) == ckpt);

  series_ptr pred;
  REQUIRE(ginn_model_predict(model.p, truth.p, pred.slot()) == GINN_OK);
  REQUIRE(ginn_series_size(pred.p) == ginn_series_size(truth.p) - 20);
  CHECK(series_days(pred.p).front() == series_days(truth.p)[20]);
  for (double v : series_values(pred.p)) {
    CHECK(v >= 0.0);
    CHECK(std::isfinite(v));
  }

  // an independent reload predicts the same values
  model_ptr twin;
  REQUIRE(ginn_model_from_json(ckpt.c_str(), twin.slot()) == GINN_OK);
  series_ptr pred_twin;
  REQUIRE(ginn_model_predict(twin.p, truth.p, pred_twin.slot()) == GINN_OK);
  CHECK(series_values(pred_twin.p) == series_values(pred.p));

  model_ptr junk;
  CHECK(ginn_model_from_json("junk", junk.slot()) == GINN_ERR_DATA);

  // history shorter than the input window cannot be scored
  const int32_t days[] = {0, 1, 2};
  const double values[] = {1.0, 2.0, 3.0};
  series_ptr tiny;
  REQUIRE(ginn_series_create(days, values, 3, tiny.slot()) == GINN_OK);
  series_ptr no_pred;
  CHECK(ginn_model_predict(model.p, tiny.p, no_pred.slot()) == GINN_ERR_DATA);
}

TEST_CASE("evaluation scores aligned series and filters by date") {
  const int32_t days[] = {0, 1, 2, 3};
  const double truth_values[] = {1.0, 2.0, 3.0, 4.0};
  const double pred_values[] = {2.0, 2.0, 2.0, 2.0};
  series_ptr truth, pred;
  REQUIRE(ginn_series_create(days, truth_values, 4, truth.slot()) == GINN_OK);
  REQUIRE(ginn_series_create(days, pred_values, 4, pred.slot()) == GINN_OK);

  char* text = nullptr;
  REQUIRE(ginn_evaluate("flat", truth.p, pred.p, 0, 0, &text) == GINN_OK);
  const auto doc = nlohmann::json::parse(grab(text));
  CHECK(doc["model"] == "flat");
  CHECK(doc["n"] == 4);
  CHECK(doc["mse"].get<double>() == 1.5);
  CHECK(doc["mae"].get<double>() == 1.0);
  // mean 2.5, ss_tot 5, ss_res 6
  CHECK(doc["r2"].get<double>() == doctest::Approx(-0.2).epsilon(1e-12));

  REQUIRE(ginn_evaluate("flat", truth.p, pred.p, 2, 1, &text) == GINN_OK);
  CHECK(nlohmann::json::parse(grab(text))["n"] == 2);

  // no overlap in the requested range
  CHECK(ginn_evaluate("flat", truth.p, pred.p, 10, 1, &text) == GINN_ERR_DATA);

  // constant truth has no variance to explain
  series_ptr flat_truth;
  REQUIRE(ginn_series_create(days, pred_values, 4, flat_truth.slot()) ==
          GINN_OK);
  CHECK(ginn_evaluate("flat", flat_truth.p, pred.p, 0, 0, &text) ==
        GINN_ERR_DATA);
}

TEST_CASE("spectrum CSV lists one-sided amplitudes per frequency") {
  std::vector<int32_t> days(16);
  std::vector<double> truth_values(16), pred_values(16);
  for (int i = 0; i < 16; ++i) {
    days[i] = i;
    truth_values[i] = 0.1 * i;
    pred_values[i] = 0.1 * i + ((i % 2 == 0) ? 0.5 : -0.5);
  }
  series_ptr truth, pred;
  REQUIRE(ginn_series_create(days.data(), truth_values.data(), 16,
                             truth.slot()) == GINN_OK);
  REQUIRE(ginn_series_create(days.data(), pred_values.data(), 16,
                             pred.slot()) == GINN_OK);

  char* text = nullptr;
  REQUIRE(ginn_spectrum_csv(truth.p, pred.p, 0, 0, &text) == GINN_OK);
  const std::string csv = grab(text);
  CHECK(csv.rfind("frequency,amplitude\n", 0) == 0);
  CHECK(count_lines(csv) == 10);  // header plus floor(16/2)+1 bins

  // the alternating residual is a pure Nyquist tone
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  std::string last;
  while (std::getline(rows, line)) last = line;
  CHECK(last.rfind("0.5,", 0) == 0);
  CHECK(std::strtod(last.c_str() + 4, nullptr) == doctest::Approx(0.5));

  series_ptr short_truth, short_pred;
  REQUIRE(ginn_series_create(days.data(), truth_values.data(), 4,
                             short_truth.slot()) == GINN_OK);
  REQUIRE(ginn_series_create(days.data(), pred_values.data(), 4,
                             short_pred.slot()) == GINN_OK);
  CHECK(ginn_spectrum_csv(short_truth.p, short_pred.p, 0, 0, &text) ==
        GINN_ERR_DATA);
}

TEST_CASE("lambda sweep grids over weights and seeds") {
  series_ptr returns, truth;
  tiny_market(returns, truth);
  series_ptr garch;
  REQUIRE(ginn_garch_roll(returns.p, "garch", 20, 5, garch.slot(), nullptr) ==
          GINN_OK);

  int32_t split_day = 0;
  double unused = 0.0;
  REQUIRE(ginn_series_get(truth.p, ginn_series_size(truth.p) * 7 / 10,
                          &split_day, &unused) == GINN_OK);

  const double lambdas[] = {0.0, 1.0};
  const uint64_t seeds[] = {1, 2};
  char* text = nullptr;
  double best = -1.0;
  REQUIRE(ginn_lambda_sweep(truth.p, garch.p, split_day, kTinyConfig, lambdas,
                            2, seeds, 2, &text, &best) == GINN_OK);
  const std::string csv = grab(text);
  CHECK(csv.rfind("lambda,seed,r2,mse,mae\n", 0) == 0);
  CHECK(count_lines(csv) == 5);  // header plus one row per (lambda, seed)
  CHECK((best == 0.0 || best == 1.0));

  // one seed over the built-in grid
  const char* quick = R"({
    "network": {"num_lstm_layers": 1, "hidden_width": 8, "dropout_rate": 0.0,
                "input_window": 20},
    "training": {"epochs": 1, "batch_size": 32}
  })";
  REQUIRE(ginn_lambda_sweep(truth.p, garch.p, split_day, quick, nullptr, 0,
                            seeds, 1, &text, nullptr) == GINN_OK);
  CHECK(count_lines(grab(text)) == 38);  // header plus 37 grid weights

  CHECK(ginn_lambda_sweep(truth.p, garch.p, split_day, kTinyConfig, lambdas, 2,
                          nullptr, 0, &text, nullptr) == GINN_ERR_ARGUMENT);
}

TEST_CASE("persistence study reports regimes across the grid") {
  const double alphas[] = {0.1};
  const double betas[] = {0.5, 0.82};
  const uint64_t seeds[] = {1};
  const char* quick = R"({
    "network": {"num_lstm_layers": 1, "hidden_width": 8, "dropout_rate": 0.0,
                "input_window": 20},
    "training": {"lambda": 0.5, "epochs": 1, "batch_size": 32}
  })";

  char* text = nullptr;
  REQUIRE(ginn_persistence(alphas, 1, betas, 2, 0.1, 120, 50, 9, seeds, 1,
                           quick, &text) == GINN_OK);
  const std::string csv = grab(text);
  CHECK(csv.rfind("pi,regime,model,seed,r2,mse,mae\n", 0) == 0);
  CHECK(count_lines(csv) == 5);  // header plus (garch + one seed) per cell
  CHECK(csv.find("0.6,low,garch,") != std::string::npos);
  CHECK(csv.find("0.6,low,ginn,1,") != std::string::npos);
  CHECK(csv.find("low") != std::string::npos);
  CHECK(csv.find("high") != std::string::npos);

  CHECK(ginn_persistence(alphas, 1, betas, 2, 0.1, 120, 50, 9, nullptr, 0,
                         quick, &text) == GINN_ERR_ARGUMENT);
}
