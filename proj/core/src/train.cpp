#include "tailvar/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tailvar/errors.hpp"
#include "tailvar/special_functions.hpp"

namespace tailvar {

TauGrid::TauGrid(Vec levels) : levels_(std::move(levels)) {
  if (levels_.empty()) {
    throw std::invalid_argument("TauGrid: need at least one level");
  }
  double prev = 0.0;
  for (double tau : levels_) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw std::invalid_argument("TauGrid: levels must lie in (0, 1)");
    }
    if (!(tau > prev)) {
      throw std::invalid_argument("TauGrid: levels must strictly increase");
    }
    prev = tau;
  }
}

TauGrid TauGrid::default_grid() {
  Vec levels;
  levels.reserve(21);
  levels.push_back(0.01);
  for (int k = 1; k <= 19; ++k) levels.push_back(k / 20.0);
  levels.push_back(0.99);
  return TauGrid(std::move(levels));
}

const Vec& TauGrid::var_subset() {
  static const Vec subset = {0.01, 0.05, 0.1};
  return subset;
}

double pinball(double tau, double y, double q) {
  if (!(tau > 0.0 && tau < 1.0)) {
    throw std::domain_error("pinball: tau must lie in (0, 1)");
  }
  const double diff = y - q;
  return diff > 0.0 ? tau * diff : (tau - 1.0) * diff;
}

double pinball_subgrad_q(double tau, double y, double q) {
  return y > q ? -tau : 1.0 - tau;
}

EarlyStopping::EarlyStopping(std::size_t patience)
    : patience_(patience),
      best_loss_(std::numeric_limits<double>::infinity()) {
  if (patience == 0) {
    throw std::invalid_argument("EarlyStopping: patience must be >= 1");
  }
}

bool EarlyStopping::observe(double validation_loss) {
  improved_last_ = validation_loss < best_loss_;
  if (improved_last_) {
    best_loss_ = validation_loss;
    best_index_ = seen_;
    since_best_ = 0;
  } else {
    ++since_best_;
  }
  ++seen_;
  return since_best_ >= patience_;
}

namespace {

// Standard normal quantiles of the grid, computed once per pass.
Vec grid_z(const TauGrid& taus) {
  Vec z;
  z.reserve(taus.size());
  for (double tau : taus.levels()) {
    z.push_back(std_normal_quantile(
        std::clamp(tau, kTauClampLow, kTauClampHigh)));
  }
  return z;
}

HtqfParams params_from_output(std::span<const double> out,
                              const HeadBounds& bounds) {
  return HtqfParams::unchecked(out[0], out[1], out[2], out[3], bounds.A);
}

// Mean pinball loss of one window over the grid; when d_out is non-null also
// writes the gradient of that mean with respect to the mapped head output.
double window_loss(const LstmModel& model, const FeatureWindow& window,
                   const TauGrid& taus, const Vec& z, ForwardTrace& trace,
                   Vec* d_out) {
  const Vec out = lstm_forward(model, window.features, &trace);
  const std::size_t K = taus.size();
  const double y = window.target;
  double loss = 0.0;
  if (d_out) d_out->assign(out.size(), 0.0);

  if (model.head_kind == HeadKind::htqf) {
    const HtqfParams p = params_from_output(out, model.bounds);
    for (std::size_t k = 0; k < K; ++k) {
      const double q = htqf_quantile_at_z(p, z[k]);
      loss += pinball(taus.levels()[k], y, q);
      if (d_out) {
        const double sub = pinball_subgrad_q(taus.levels()[k], y, q);
        const auto dq = htqf_gradient_at_z(p, z[k]);
        for (std::size_t c = 0; c < 4; ++c) (*d_out)[c] += sub * dq[c];
      }
    }
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      loss += pinball(taus.levels()[k], y, out[k]);
      if (d_out) (*d_out)[k] = pinball_subgrad_q(taus.levels()[k], y, out[k]);
    }
  }
  if (d_out) {
    for (double& g : *d_out) g /= static_cast<double>(K);
  }
  return loss / static_cast<double>(K);
}

struct AdamState {
  Vec m, v;
  std::size_t step = 0;
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamState(std::size_t params) : m(params, 0.0), v(params, 0.0) {}

  void update(LstmWeights& weights, const LstmWeights& grad, double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
    auto wb = weights.blocks();
    auto gb = grad.blocks();
    std::size_t pos = 0;
    for (std::size_t b = 0; b < wb.size(); ++b) {
      for (std::size_t k = 0; k < wb[b].size(); ++k, ++pos) {
        const double g = gb[b][k];
        m[pos] = kBeta1 * m[pos] + (1.0 - kBeta1) * g;
        v[pos] = kBeta2 * v[pos] + (1.0 - kBeta2) * g * g;
        wb[b][k] -= lr * (m[pos] / bc1) / (std::sqrt(v[pos] / bc2) + kEps);
      }
    }
  }
};

void validate_config(const TrainConfig& config) {
  if (config.window_len < 2 || config.hidden < 1 || config.patience < 1 ||
      config.batch_size < 1 || config.max_epochs < 1 ||
      !(config.learning_rate > 0.0)) {
    throw std::invalid_argument("TrainConfig: invalid hyperparameters");
  }
}

}  // namespace

double objective(const LstmModel& model,
                 const std::vector<FeatureWindow>& windows,
                 const TauGrid& taus) {
  if (windows.empty()) {
    throw std::invalid_argument("objective: no windows");
  }
  const Vec z = grid_z(taus);
  ForwardTrace trace;
  double total = 0.0;
  for (const auto& w : windows) {
    total += window_loss(model, w, taus, z, trace, nullptr);
  }
  return total / static_cast<double>(windows.size());
}

FitResult fit(const SeriesSplit& split, const TrainConfig& config,
              HeadKind head_kind, const TauGrid& taus) {
  validate_config(config);
  const auto train_windows =
      build_windows(std::span<const double>(split.train.values),
                    config.window_len);
  const auto val_windows =
      build_windows(std::span<const double>(split.validation.values),
                    config.window_len);

  const std::size_t head_dim =
      head_kind == HeadKind::htqf ? 4 : taus.size();
  Prng rng(config.seed);
  FitResult result;
  result.model =
      lstm_init(config.hidden, head_kind, head_dim, rng, config.head_bounds);
  result.model.window_len = config.window_len;
  LstmModel& model = result.model;

  const Vec z = grid_z(taus);
  AdamState adam(model.weights.param_count());
  LstmWeights grad =
      LstmWeights::shaped(model.hidden, model.input, head_dim);
  EarlyStopping stopper(config.patience);
  Vec best_flat = model.weights.flatten();

  std::vector<std::size_t> order(train_windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ForwardTrace trace;
  Vec d_out;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // Fisher-Yates pass driven by the run's single Prng stream.
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.next_uniform() * i);
      std::swap(order[i - 1], order[j < i ? j : i - 1]);
    }

    for (std::size_t begin = 0; begin < order.size();
         begin += config.batch_size) {
      const std::size_t end =
          std::min(begin + config.batch_size, order.size());
      grad.scale(0.0);
      for (std::size_t k = begin; k < end; ++k) {
        window_loss(model, train_windows[order[k]], taus, z, trace, &d_out);
        lstm_backward_into(model, trace, d_out, grad);
      }
      grad.scale(1.0 / static_cast<double>(end - begin));
      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(grad.squared_norm());
        if (norm > config.clip_norm) grad.scale(config.clip_norm / norm);
      }
      adam.update(model.weights, grad, config.learning_rate);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = objective(model, train_windows, taus);
    stats.validation_loss = objective(model, val_windows, taus);
    result.history.push_back(stats);
    if (!std::isfinite(stats.train_loss) ||
        !std::isfinite(stats.validation_loss)) {
      throw NumericError("fit: loss became non-finite at epoch " +
                         std::to_string(epoch));
    }

    const bool stop = stopper.observe(stats.validation_loss);
    if (stopper.improved_last()) {
      best_flat = model.weights.flatten();
      result.best_epoch = epoch;
    }
    if (stop) break;
  }

  model.weights.assign_flat(best_flat);
  result.best_validation_loss = stopper.best_loss();
  return result;
}

Prediction predict(const LstmModel& model,
                   const std::vector<FeatureWindow>& windows,
                   const TauGrid& taus) {
  if (windows.empty()) {
    throw std::invalid_argument("predict: no windows");
  }
  const std::size_t K = taus.size();
  if (model.head_kind == HeadKind::tqr && model.head_dim != K) {
    throw std::invalid_argument(
        "predict: tqr head dimension does not match tau grid");
  }
  const Vec z = grid_z(taus);
  Prediction pred;
  pred.quantiles = Matrix(windows.size(), K);
  if (model.head_kind == HeadKind::htqf) {
    pred.params.reserve(windows.size());
  }
  ForwardTrace trace;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const Vec out = lstm_forward(model, windows[i].features, &trace);
    if (model.head_kind == HeadKind::htqf) {
      const HtqfParams p = params_from_output(out, model.bounds);
      pred.params.push_back(p);
      for (std::size_t k = 0; k < K; ++k) {
        pred.quantiles(i, k) = htqf_quantile_at_z(p, z[k]);
      }
    } else {
      Vec sorted = out;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t k = 0; k < K; ++k) pred.quantiles(i, k) = sorted[k];
    }
  }
  return pred;
}

GridSearchResult grid_search(const SeriesSplit& split,
                             const std::vector<std::size_t>& window_lens,
                             const std::vector<std::size_t>& hiddens,
                             HeadKind head_kind, const TrainConfig& base,
                             const TauGrid& taus, std::size_t jobs) {
  if (window_lens.empty() || hiddens.empty()) {
    throw std::invalid_argument("grid_search: empty hyperparameter set");
  }
  std::vector<std::size_t> ls = window_lens;
  std::vector<std::size_t> hs = hiddens;
  std::sort(ls.begin(), ls.end());
  std::sort(hs.begin(), hs.end());

  struct Job {
    TrainConfig config;
    GridSearchEntry entry;
    FitResult fit_result;
  };
  std::vector<Job> table;
  for (std::size_t l : ls) {
    for (std::size_t h : hs) {
      Job job;
      job.config = base;
      job.config.window_len = l;
      job.config.hidden = h;
      job.entry.window_len = l;
      job.entry.hidden = h;
      table.push_back(std::move(job));
    }
  }

  auto run_one = [&](Job& job) {
    try {
      job.fit_result = fit(split, job.config, head_kind, taus);
      job.entry.validation_loss = job.fit_result.best_validation_loss;
      job.entry.ok = true;
    } catch (const std::exception& e) {
      job.entry.ok = false;
      job.entry.message = e.what();
    }
  };

  if (jobs <= 1) {
    for (auto& job : table) run_one(job);
  } else {
    for (std::size_t begin = 0; begin < table.size(); begin += jobs) {
      const std::size_t end = std::min(begin + jobs, table.size());
      std::vector<std::future<void>> wave;
      for (std::size_t k = begin; k < end; ++k) {
        wave.push_back(
            std::async(std::launch::async, run_one, std::ref(table[k])));
      }
      for (auto& f : wave) f.get();
    }
  }

  GridSearchResult result;
  std::size_t best = table.size();
  for (std::size_t k = 0; k < table.size(); ++k) {
    result.entries.push_back(table[k].entry);
    if (!table[k].entry.ok) continue;
    // Strict < keeps the first (smallest L, then H) config on ties.
    if (best == table.size() ||
        table[k].entry.validation_loss < table[best].entry.validation_loss) {
      best = k;
    }
  }
  if (best == table.size()) {
    throw NumericError("grid_search: every configuration failed");
  }
  result.best_config = table[best].config;
  result.best = std::move(table[best].fit_result);
  return result;
}

void write_loss_history(const std::string& path,
                        const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "epoch,train_loss,validation_loss\n";
  char buffer[64];
  for (const auto& row : history) {
    out << row.epoch << ',';
    std::snprintf(buffer, sizeof buffer, "%.9g", row.train_loss);
    out << buffer << ',';
    std::snprintf(buffer, sizeof buffer, "%.9g", row.validation_loss);
    out << buffer << '\n';
  }
}

}  // namespace tailvar
