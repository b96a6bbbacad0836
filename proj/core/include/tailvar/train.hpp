#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tailvar/features.hpp"
#include "tailvar/htqf.hpp"
#include "tailvar/linalg.hpp"
#include "tailvar/lstm.hpp"
#include "tailvar/series.hpp"

namespace tailvar {

// The probability levels the models are fitted and evaluated on.
class TauGrid {
 public:
  // Requires strictly increasing levels inside (0,1); throws
  // std::invalid_argument otherwise.
  explicit TauGrid(Vec levels);

  // 21 levels: 0.01, then 0.05 through 0.95 in steps of 0.05, then 0.99.
  static TauGrid default_grid();

  // The levels whose quantiles are read as VaR: 0.01, 0.05, 0.1.
  static const Vec& var_subset();

  const Vec& levels() const { return levels_; }
  std::size_t size() const { return levels_.size(); }

 private:
  Vec levels_;
};

// Pinball (quantile) loss: tau |y - q| above the quantile, (1 - tau) |y - q|
// at or below it.  Throws std::domain_error unless 0 < tau < 1.
double pinball(double tau, double y, double q);

// Subgradient of pinball with respect to q.  The tie y = q takes the
// (1 - tau) branch.
double pinball_subgrad_q(double tau, double y, double q);

struct TrainConfig {
  std::size_t window_len = 40;  // L
  std::size_t hidden = 8;       // H
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;  // non-improving validation epochs before stop
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // global-norm gradient clip; <= 0 disables
  HeadBounds head_bounds{};
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_loss = 0.0;
};

// Tracks the best validation loss seen and how long ago it was seen.
// Kept separate from fit() so the stopping rule is testable on arbitrary
// loss schedules.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  // Feeds one validation loss; returns true when training should stop.
  bool observe(double validation_loss);

  bool improved_last() const { return improved_last_; }
  std::size_t best_index() const { return best_index_; }  // 0-based
  double best_loss() const { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t seen_ = 0;
  std::size_t best_index_ = 0;
  std::size_t since_best_ = 0;
  double best_loss_;
  bool improved_last_ = false;
};

struct FitResult {
  LstmModel model;  // the best-validation weights, not the last ones
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;  // 1-based epoch the returned weights come from
  double best_validation_loss = 0.0;
};

// Mean multi-level pinball loss of the model over the windows:
// (1/K)(1/N) sum over levels and windows.  The htqf head is scored through
// its quantile function; the tqr head on its raw predicted quantiles.
double objective(const LstmModel& model,
                 const std::vector<FeatureWindow>& windows,
                 const TauGrid& taus);

// Minibatch adaptive-moment training with early stopping on the validation
// objective.  Deterministic for a fixed config.  Throws NumericError with
// the epoch number if the loss turns non-finite, DataError if a split
// segment is too short for the window length.
FitResult fit(const SeriesSplit& split, const TrainConfig& config,
              HeadKind head_kind, const TauGrid& taus = TauGrid::default_grid());

struct Prediction {
  Matrix quantiles;                // windows x K, each row non-decreasing
  std::vector<HtqfParams> params;  // per window for the htqf head, else empty
};

// Quantile forecasts for each window.  The htqf head evaluates its quantile
// function (monotone by construction); tqr rows are sorted ascending.
Prediction predict(const LstmModel& model,
                   const std::vector<FeatureWindow>& windows,
                   const TauGrid& taus);

struct GridSearchEntry {
  std::size_t window_len = 0;
  std::size_t hidden = 0;
  double validation_loss = 0.0;
  bool ok = false;
  std::string message;  // failure description when !ok
};

struct GridSearchResult {
  TrainConfig best_config;
  FitResult best;
  std::vector<GridSearchEntry> entries;
};

// Trains one model per (L, H) pair, carrying every other setting from
// `base`.  Configurations that throw are recorded as failed entries instead
// of aborting the search.  Ties on validation loss prefer smaller L, then
// smaller H.  `jobs` > 1 trains that many configurations concurrently.
GridSearchResult grid_search(const SeriesSplit& split,
                             const std::vector<std::size_t>& window_lens,
                             const std::vector<std::size_t>& hiddens,
                             HeadKind head_kind, const TrainConfig& base,
                             const TauGrid& taus = TauGrid::default_grid(),
                             std::size_t jobs = 1);

// CSV export: epoch,train_loss,validation_loss.
void write_loss_history(const std::string& path,
                        const std::vector<EpochStats>& history);

}  // namespace tailvar
