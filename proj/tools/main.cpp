// Command-line driver: simulation, training, prediction, baselines and
// backtesting as reproducible runs.  Every command writes a run_config.json
// describing the exact options used next to its outputs.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tailvar/backtest.hpp"
#include "tailvar/errors.hpp"
#include "tailvar/garch.hpp"
#include "tailvar/htqf.hpp"
#include "tailvar/lstm.hpp"
#include "tailvar/series.hpp"
#include "tailvar/simulate.hpp"
#include "tailvar/train.hpp"
#include "quantile_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace tailvar;
using cli::QuantileTable;

void ensure_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw DataError("cannot create output directory '" + out + "'");
  }
}

void write_run_config(const std::string& out, const std::string& command,
                      const json& options) {
  const fs::path path = fs::path(out) / "run_config.json";
  std::ofstream f(path);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  json config;
  config["command"] = command;
  config["options"] = options;
  f << config.dump(2) << '\n';
}

InputKind parse_input_kind(const std::string& kind) {
  return kind == "prices" ? InputKind::prices : InputKind::returns;
}

TauGrid taus_or_default(const std::vector<double>& taus) {
  if (taus.empty()) return TauGrid::default_grid();
  return TauGrid(Vec(taus.begin(), taus.end()));
}

json taus_to_json(const TauGrid& grid) { return json(grid.levels()); }

// Realized returns for the rows listed in a quantile table.
Vec align_returns(const ReturnSeries& series, const QuantileTable& table,
                  const std::string& quantile_path) {
  Vec aligned;
  aligned.reserve(table.t.size());
  for (std::size_t t : table.t) {
    if (t >= series.size()) {
      throw DataError("'" + quantile_path + "': row t=" + std::to_string(t) +
                      " is beyond the return series (length " +
                      std::to_string(series.size()) + ")");
    }
    aligned.push_back(series.values[t]);
  }
  return aligned;
}

std::size_t find_tau_column(const Vec& taus, double tau,
                            const std::string& context) {
  for (std::size_t k = 0; k < taus.size(); ++k) {
    if (std::abs(taus[k] - tau) <= 1e-12) return k;
  }
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", tau);
  throw DataError(context + ": no quantile column for tau=" + buffer);
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  std::string out;
};

void run_simulate(const SimulateOptions& opt) {
  ensure_out_dir(opt.out);
  const SimOutput sim = generate_htqf_benchmark(opt.n, opt.seed);
  write_sim_csv(sim, (fs::path(opt.out) / "sim.csv").string());
  write_run_config(opt.out, "simulate",
                   {{"n", opt.n}, {"seed", opt.seed}, {"out", opt.out}});
}

// ------------------------------------------------------------------- train

struct TrainOptions {
  std::string input;
  std::string column = "r";
  std::string input_kind = "returns";
  std::string out;
  std::string head = "htqf";
  std::string head_map = "bounded";
  TrainConfig config;
  std::vector<double> taus;
  std::vector<std::size_t> grid_window_lens;
  std::vector<std::size_t> grid_hiddens;
  std::size_t jobs = 1;
};

void write_grid_csv(const std::string& path,
                    const std::vector<GridSearchEntry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "window_len,hidden,validation_loss,ok,message\n";
  char buffer[64];
  for (const auto& e : entries) {
    std::snprintf(buffer, sizeof buffer, "%.9g", e.validation_loss);
    std::string message = e.message;
    for (char& c : message) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << e.window_len << ',' << e.hidden << ',' << (e.ok ? buffer : "")
        << ',' << (e.ok ? 1 : 0) << ',' << message << '\n';
  }
}

void run_train(const TrainOptions& opt) {
  ensure_out_dir(opt.out);
  const ReturnSeries series =
      load_csv(opt.input, opt.column, parse_input_kind(opt.input_kind));
  const SeriesSplit split = split_normalize(series);
  const TauGrid taus = taus_or_default(opt.taus);
  const HeadKind head = opt.head == "tqr" ? HeadKind::tqr : HeadKind::htqf;

  TrainConfig config = opt.config;
  config.head_bounds.map = opt.head_map == "identity" ? HeadMapKind::identity
                                                      : HeadMapKind::bounded;

  FitResult result;
  if (!opt.grid_window_lens.empty() || !opt.grid_hiddens.empty()) {
    const auto lens = opt.grid_window_lens.empty()
                          ? std::vector<std::size_t>{config.window_len}
                          : opt.grid_window_lens;
    const auto hiddens = opt.grid_hiddens.empty()
                             ? std::vector<std::size_t>{config.hidden}
                             : opt.grid_hiddens;
    GridSearchResult gs =
        grid_search(split, lens, hiddens, head, config, taus, opt.jobs);
    write_grid_csv((fs::path(opt.out) / "grid_search.csv").string(),
                   gs.entries);
    result = std::move(gs.best);
  } else {
    result = fit(split, config, head, taus);
  }

  save_model(result.model, (fs::path(opt.out) / "model.txt").string());
  write_normalization((fs::path(opt.out) / "normalization.txt").string(),
                      split.norm_mean, split.norm_std);
  write_loss_history((fs::path(opt.out) / "loss_history.csv").string(),
                     result.history);

  json options = {
      {"input", opt.input},
      {"column", opt.column},
      {"input_kind", opt.input_kind},
      {"out", opt.out},
      {"head", opt.head},
      {"head_map", opt.head_map},
      {"window_len", result.model.window_len},
      {"hidden", result.model.hidden},
      {"learning_rate", config.learning_rate},
      {"batch_size", config.batch_size},
      {"max_epochs", config.max_epochs},
      {"patience", config.patience},
      {"seed", config.seed},
      {"clip_norm", config.clip_norm},
      {"taus", taus_to_json(taus)},
      {"c_mu", config.head_bounds.c_mu},
      {"sigma_min", config.head_bounds.sigma_min},
      {"sigma_max", config.head_bounds.sigma_max},
      {"u_max", config.head_bounds.u_max},
      {"v_max", config.head_bounds.v_max},
      {"c_q", config.head_bounds.c_q},
      {"A", config.head_bounds.A},
      {"grid_window_lens", opt.grid_window_lens},
      {"grid_hiddens", opt.grid_hiddens},
      {"jobs", opt.jobs},
      {"best_epoch", result.best_epoch},
  };
  write_run_config(opt.out, "train", options);
}

// ----------------------------------------------------------------- predict

struct PredictOptions {
  std::string model;
  std::string norm;
  std::string input;
  std::string column = "r";
  std::string input_kind = "returns";
  std::string out;
  std::size_t window_len = 0;  // 0: take the length recorded in the model
  std::vector<double> taus;
};

void run_predict(const PredictOptions& opt) {
  ensure_out_dir(opt.out);
  const LstmModel model = load_model(opt.model);
  const auto [norm_mean, norm_std] = read_normalization(opt.norm);
  const ReturnSeries series =
      load_csv(opt.input, opt.column, parse_input_kind(opt.input_kind));

  const std::size_t window_len =
      opt.window_len > 0 ? opt.window_len : model.window_len;
  if (window_len < 2) {
    throw std::invalid_argument(
        "predict: the model records no window length; pass --window-len");
  }

  Vec normalized;
  normalized.reserve(series.size());
  for (double r : series.values) {
    normalized.push_back((r - norm_mean) / norm_std);
  }
  const auto windows =
      build_windows(std::span<const double>(normalized), window_len);
  const TauGrid taus = taus_or_default(opt.taus);
  const Prediction pred = predict(model, windows, taus);

  // Forecast quantiles map back to the input scale affinely.
  Matrix q(pred.quantiles.rows(), pred.quantiles.cols());
  for (std::size_t r = 0; r < q.rows(); ++r) {
    for (std::size_t k = 0; k < q.cols(); ++k) {
      q(r, k) = norm_mean + norm_std * pred.quantiles(r, k);
    }
  }
  std::vector<std::size_t> t;
  t.reserve(windows.size());
  for (const auto& w : windows) t.push_back(w.t_index);
  cli::write_quantile_csv((fs::path(opt.out) / "quantiles.csv").string(), t,
                          taus.levels(), q);

  if (model.head_kind == HeadKind::htqf) {
    const fs::path path = fs::path(opt.out) / "htqf_params.csv";
    std::ofstream f(path);
    if (!f) throw DataError("cannot write '" + path.string() + "'");
    f << "t,mu,sigma,u,v\n";
    char buffer[64];
    for (std::size_t i = 0; i < windows.size(); ++i) {
      const HtqfParams& p = pred.params[i];
      f << t[i];
      for (double value : {p.mu, p.sigma, p.u, p.v}) {
        std::snprintf(buffer, sizeof buffer, ",%.9g", value);
        f << buffer;
      }
      f << '\n';
    }
  }

  write_run_config(opt.out, "predict",
                   {{"model", opt.model},
                    {"norm", opt.norm},
                    {"input", opt.input},
                    {"column", opt.column},
                    {"input_kind", opt.input_kind},
                    {"out", opt.out},
                    {"window_len", window_len},
                    {"taus", taus_to_json(taus)}});
}

// ---------------------------------------------------------------- backtest

struct BacktestOptions {
  std::string returns_path;
  std::string column = "r";
  std::string input_kind = "returns";
  std::string quantiles_path;
  std::string out;
  std::vector<double> taus;
};

void run_backtest(const BacktestOptions& opt) {
  ensure_out_dir(opt.out);
  const ReturnSeries series =
      load_csv(opt.returns_path, opt.column, parse_input_kind(opt.input_kind));
  const QuantileTable table = cli::read_quantile_csv(opt.quantiles_path);
  const Vec aligned = align_returns(series, table, opt.quantiles_path);
  const Vec levels = opt.taus.empty() ? TauGrid::var_subset()
                                      : Vec(opt.taus.begin(), opt.taus.end());

  std::vector<BacktestReport> reports;
  for (double tau : levels) {
    const std::size_t k = find_tau_column(table.taus, tau, opt.quantiles_path);
    Vec forecasts(table.q.rows());
    for (std::size_t r = 0; r < table.q.rows(); ++r) {
      forecasts[r] = table.q(r, k);
    }
    reports.push_back(backtest_level(aligned, forecasts, tau));
  }
  write_backtest_csv((fs::path(opt.out) / "backtest.csv").string(), reports);
  write_backtest_text((fs::path(opt.out) / "backtest.txt").string(), reports);
  write_run_config(opt.out, "backtest",
                   {{"returns", opt.returns_path},
                    {"column", opt.column},
                    {"input_kind", opt.input_kind},
                    {"quantiles", opt.quantiles_path},
                    {"out", opt.out},
                    {"taus", levels}});
}

// ---------------------------------------------------------------- baseline

struct BaselineOptions {
  std::string input;
  std::string column = "r";
  std::string input_kind = "returns";
  std::string innovation = "normal";
  std::string out;
  std::vector<double> taus;
};

void write_pinball_csv(const std::string& path, double full, double subset) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  char buffer[64];
  out << "set,mean_pinball\n";
  std::snprintf(buffer, sizeof buffer, "%.9g", full);
  out << "full," << buffer << '\n';
  std::snprintf(buffer, sizeof buffer, "%.9g", subset);
  out << "var_subset," << buffer << '\n';
}

void run_baseline(const BaselineOptions& opt) {
  ensure_out_dir(opt.out);
  const ReturnSeries series =
      load_csv(opt.input, opt.column, parse_input_kind(opt.input_kind));
  const TauGrid taus = taus_or_default(opt.taus);
  const Innovation kind = opt.innovation == "t" ? Innovation::student_t
                                                : Innovation::normal;

  // Fit once on train+validation, filter forward over the whole series, and
  // evaluate on the held-out tail.
  const std::size_t n = series.size();
  const std::size_t fit_len = (n * 8) / 10 + n / 10;
  const std::span<const double> all(series.values);
  const GarchFitReport fit_report = fit_mle(all.subspan(0, fit_len), kind);

  write_garch_params((fs::path(opt.out) / "garch_params.txt").string(),
                     fit_report.params);

  const Matrix q_all = forecast_quantiles(fit_report.params, all, taus);
  const std::size_t n_test = n - fit_len;
  if (n_test == 0) throw DataError("baseline: empty test segment");
  Matrix q_test(n_test, taus.size());
  std::vector<std::size_t> t(n_test);
  Vec r_test(n_test);
  for (std::size_t i = 0; i < n_test; ++i) {
    t[i] = fit_len + i;
    r_test[i] = series.values[fit_len + i];
    for (std::size_t k = 0; k < taus.size(); ++k) {
      q_test(i, k) = q_all(fit_len + i, k);
    }
  }
  cli::write_quantile_csv((fs::path(opt.out) / "garch_quantiles.csv").string(),
                          t, taus.levels(), q_test);

  const double full =
      pinball_table(r_test, q_test, taus, taus.levels());
  const double subset =
      pinball_table(r_test, q_test, taus, TauGrid::var_subset());
  write_pinball_csv((fs::path(opt.out) / "pinball.csv").string(), full,
                    subset);

  write_run_config(opt.out, "baseline",
                   {{"input", opt.input},
                    {"column", opt.column},
                    {"input_kind", opt.input_kind},
                    {"innovation", opt.innovation},
                    {"out", opt.out},
                    {"taus", taus_to_json(taus)},
                    {"fit_length", fit_len},
                    {"converged", fit_report.converged}});
}

// ------------------------------------------------------------------ report

struct ReportOptions {
  std::string returns_path;
  std::string column = "r";
  std::string input_kind = "returns";
  std::string quantiles_path;
  std::string out;
  std::vector<double> var_taus;
};

void run_report(const ReportOptions& opt) {
  ensure_out_dir(opt.out);
  const ReturnSeries series =
      load_csv(opt.returns_path, opt.column, parse_input_kind(opt.input_kind));
  const QuantileTable table = cli::read_quantile_csv(opt.quantiles_path);
  const Vec aligned = align_returns(series, table, opt.quantiles_path);
  const TauGrid grid{Vec(table.taus)};
  const Vec var_levels = opt.var_taus.empty()
                             ? TauGrid::var_subset()
                             : Vec(opt.var_taus.begin(), opt.var_taus.end());

  const double full = pinball_table(aligned, table.q, grid, grid.levels());
  const double subset = pinball_table(aligned, table.q, grid, var_levels);
  write_pinball_csv((fs::path(opt.out) / "pinball.csv").string(), full,
                    subset);

  std::vector<BacktestReport> reports;
  for (double tau : var_levels) {
    const std::size_t k = find_tau_column(table.taus, tau, opt.quantiles_path);
    Vec forecasts(table.q.rows());
    for (std::size_t r = 0; r < table.q.rows(); ++r) {
      forecasts[r] = table.q(r, k);
    }
    reports.push_back(backtest_level(aligned, forecasts, tau));
  }
  write_backtest_csv((fs::path(opt.out) / "backtest.csv").string(), reports);
  write_backtest_text((fs::path(opt.out) / "backtest.txt").string(), reports);

  write_run_config(opt.out, "report",
                   {{"returns", opt.returns_path},
                    {"column", opt.column},
                    {"input_kind", opt.input_kind},
                    {"quantiles", opt.quantiles_path},
                    {"out", opt.out},
                    {"var_taus", var_levels}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tailvar: conditional quantile (VaR) forecasting for heavy-tailed "
      "return series"};
  app.require_subcommand(1);

  SimulateOptions sim_opt;
  auto* sim = app.add_subcommand(
      "simulate", "Generate the synthetic benchmark series");
  sim->add_option("--n", sim_opt.n, "Series length")
      ->default_val(10000)
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000000}));
  sim->add_option("--seed", sim_opt.seed, "PRNG seed")->default_val(1);
  sim->add_option("--out", sim_opt.out, "Output directory")->required();

  TrainOptions train_opt;
  auto* train = app.add_subcommand(
      "train", "Fit the sequence model under multi-level pinball loss");
  train->add_option("--input", train_opt.input, "Input CSV")->required();
  train->add_option("--column", train_opt.column, "Value column name")
      ->default_val("r");
  train->add_option("--input-kind", train_opt.input_kind,
                    "Interpret the column as returns or prices")
      ->default_val("returns")
      ->check(CLI::IsMember({"returns", "prices"}));
  train->add_option("--out", train_opt.out, "Output directory")->required();
  train->add_option("--head", train_opt.head, "Output head")
      ->default_val("htqf")
      ->check(CLI::IsMember({"htqf", "tqr"}));
  train->add_option("--head-map", train_opt.head_map,
                    "Head output mapping (bounded keeps parameters valid)")
      ->default_val("bounded")
      ->check(CLI::IsMember({"bounded", "identity"}));
  train->add_option("--window-len", train_opt.config.window_len,
                    "Feature window length L")
      ->default_val(40)
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  train->add_option("--hidden", train_opt.config.hidden, "Hidden size H")
      ->default_val(8)
      ->check(CLI::PositiveNumber);
  train->add_option("--learning-rate", train_opt.config.learning_rate,
                    "Optimizer step size")
      ->default_val(1e-3)
      ->check(CLI::PositiveNumber);
  train->add_option("--batch-size", train_opt.config.batch_size, "Batch size")
      ->default_val(128)
      ->check(CLI::PositiveNumber);
  train->add_option("--max-epochs", train_opt.config.max_epochs, "Epoch cap")
      ->default_val(200)
      ->check(CLI::PositiveNumber);
  train->add_option("--patience", train_opt.config.patience,
                    "Non-improving validation epochs before stopping")
      ->default_val(10)
      ->check(CLI::PositiveNumber);
  train->add_option("--seed", train_opt.config.seed, "PRNG seed")
      ->default_val(1);
  train->add_option("--clip-norm", train_opt.config.clip_norm,
                    "Global gradient-norm clip (<= 0 disables)")
      ->default_val(5.0);
  train->add_option("--taus", train_opt.taus,
                    "Probability levels (default: the 21-level grid)")
      ->delimiter(',');
  train->add_option("--c-mu", train_opt.config.head_bounds.c_mu,
                    "Head bound: mu scale")
      ->default_val(2.0);
  train->add_option("--sigma-min", train_opt.config.head_bounds.sigma_min,
                    "Head bound: lower sigma")
      ->default_val(1e-3);
  train->add_option("--sigma-max", train_opt.config.head_bounds.sigma_max,
                    "Head bound: upper sigma")
      ->default_val(3.0);
  train->add_option("--u-max", train_opt.config.head_bounds.u_max,
                    "Head bound: upper u")
      ->default_val(2.0);
  train->add_option("--v-max", train_opt.config.head_bounds.v_max,
                    "Head bound: upper v")
      ->default_val(2.0);
  train->add_option("--c-q", train_opt.config.head_bounds.c_q,
                    "Head bound: TQR quantile scale")
      ->default_val(5.0);
  train->add_option("--grid-window-lens", train_opt.grid_window_lens,
                    "Grid search over these L values")
      ->delimiter(',');
  train->add_option("--grid-hiddens", train_opt.grid_hiddens,
                    "Grid search over these H values")
      ->delimiter(',');
  train->add_option("--jobs", train_opt.jobs,
                    "Concurrent grid-search configurations")
      ->default_val(1)
      ->check(CLI::PositiveNumber);

  PredictOptions pred_opt;
  auto* pred = app.add_subcommand(
      "predict", "Per-step quantile forecasts from a trained model");
  pred->add_option("--model", pred_opt.model, "Model file")->required();
  pred->add_option("--norm", pred_opt.norm, "Normalization file")->required();
  pred->add_option("--input", pred_opt.input, "Input CSV")->required();
  pred->add_option("--column", pred_opt.column, "Value column name")
      ->default_val("r");
  pred->add_option("--input-kind", pred_opt.input_kind, "returns or prices")
      ->default_val("returns")
      ->check(CLI::IsMember({"returns", "prices"}));
  pred->add_option("--out", pred_opt.out, "Output directory")->required();
  pred->add_option("--window-len", pred_opt.window_len,
                   "Override the window length recorded in the model");
  pred->add_option("--taus", pred_opt.taus, "Probability levels")
      ->delimiter(',');

  BacktestOptions bt_opt;
  auto* bt = app.add_subcommand(
      "backtest", "Coverage tests of quantile forecasts against returns");
  bt->add_option("--returns", bt_opt.returns_path, "Return series CSV")
      ->required();
  bt->add_option("--column", bt_opt.column, "Value column name")
      ->default_val("r");
  bt->add_option("--input-kind", bt_opt.input_kind, "returns or prices")
      ->default_val("returns")
      ->check(CLI::IsMember({"returns", "prices"}));
  bt->add_option("--quantiles", bt_opt.quantiles_path,
                 "Quantile forecast CSV (from predict or baseline)")
      ->required();
  bt->add_option("--out", bt_opt.out, "Output directory")->required();
  bt->add_option("--taus", bt_opt.taus,
                 "Levels to test (default: 0.01,0.05,0.1)")
      ->delimiter(',');

  BaselineOptions base_opt;
  auto* base = app.add_subcommand(
      "baseline", "GARCH(1,1) maximum-likelihood baseline");
  base->add_option("--input", base_opt.input, "Input CSV")->required();
  base->add_option("--column", base_opt.column, "Value column name")
      ->default_val("r");
  base->add_option("--input-kind", base_opt.input_kind, "returns or prices")
      ->default_val("returns")
      ->check(CLI::IsMember({"returns", "prices"}));
  base->add_option("--innovation", base_opt.innovation,
                   "Innovation distribution")
      ->default_val("normal")
      ->check(CLI::IsMember({"normal", "t"}));
  base->add_option("--out", base_opt.out, "Output directory")->required();
  base->add_option("--taus", base_opt.taus, "Probability levels")
      ->delimiter(',');

  ReportOptions rep_opt;
  auto* rep = app.add_subcommand(
      "report", "Pinball table plus coverage tests for a forecast file");
  rep->add_option("--returns", rep_opt.returns_path, "Return series CSV")
      ->required();
  rep->add_option("--column", rep_opt.column, "Value column name")
      ->default_val("r");
  rep->add_option("--input-kind", rep_opt.input_kind, "returns or prices")
      ->default_val("returns")
      ->check(CLI::IsMember({"returns", "prices"}));
  rep->add_option("--quantiles", rep_opt.quantiles_path,
                  "Quantile forecast CSV")
      ->required();
  rep->add_option("--out", rep_opt.out, "Output directory")->required();
  rep->add_option("--var-taus", rep_opt.var_taus,
                  "Levels treated as VaR (default: 0.01,0.05,0.1)")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) run_simulate(sim_opt);
    if (train->parsed()) run_train(train_opt);
    if (pred->parsed()) run_predict(pred_opt);
    if (bt->parsed()) run_backtest(bt_opt);
    if (base->parsed()) run_baseline(base_opt);
    if (rep->parsed()) run_report(rep_opt);
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
