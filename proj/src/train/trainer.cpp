#include "act/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "act/data/csv.hpp"
#include "act/data/windows.hpp"
#include "act/error.hpp"
#include "act/eval/metrics.hpp"
#include "act/model/model.hpp"
#include "act/tensor/ops.hpp"
#include "act/train/loss.hpp"

namespace act {

namespace {

std::size_t date_position(const PanelDataset& ds, const std::string& date, const char* what) {
  const auto it = std::lower_bound(ds.dates.begin(), ds.dates.end(), date);
  if (it == ds.dates.end()) throw ConfigError(std::string(what) + " " + date + " is after the last date");
  return static_cast<std::size_t>(it - ds.dates.begin());
}

void check_graphs(const PanelDataset& ds, const RelationGraphs& g) {
  if (g.industry.size() != ds.num_instruments() || g.region.size() != ds.num_instruments()) {
    throw ShapeError("relation graphs cover " + std::to_string(g.industry.size()) + " instruments, dataset has " +
                     std::to_string(ds.num_instruments()));
  }
}

}  // namespace

DateSplit resolve_split(const PanelDataset& ds, const TrainOptions& opt) {
  const std::size_t d = ds.num_dates();
  DateSplit s;
  if (!opt.valid_start.empty()) {
    s.valid_start = date_position(ds, opt.valid_start, "valid_start");
  } else {
    s.valid_start = static_cast<std::size_t>(std::floor(opt.train_fraction * static_cast<double>(d)));
  }
  if (!opt.test_start.empty()) {
    s.test_start = date_position(ds, opt.test_start, "test_start");
  } else {
    s.test_start = static_cast<std::size_t>(
        std::floor((opt.train_fraction + opt.valid_fraction) * static_cast<double>(d)));
  }
  if (!(s.valid_start < s.test_start && s.test_start <= d)) {
    throw ConfigError("split: need valid_start < test_start <= number of dates");
  }
  return s;
}

double validation_ic(const Params& params, const PanelDataset& ds, const RelationGraphs& graphs,
                     const ActConfig& cfg, std::size_t first_end, std::size_t last_end) {
  const auto samples = make_windows(ds, cfg.T, first_end, last_end);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& s : samples) {
    const Tensor y = act_forward(s.features, graphs, params, cfg).y;
    std::vector<double> a, b;
    for (std::size_t i = 0; i < s.mask.size(); ++i) {
      if (s.mask[i]) {
        a.push_back(y[i]);
        b.push_back(s.labels[i]);
      }
    }
    if (const auto ic = pearson(a, b)) {
      sum += *ic;
      ++count;
    }
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

TrainResult train(const PanelDataset& ds, const RelationGraphs& graphs, const ActConfig& cfg,
                  const TrainOptions& opt) {
  cfg.validate();
  check_graphs(ds, graphs);
  if (ds.num_features != cfg.F) {
    throw ConfigError("config F=" + std::to_string(cfg.F) + " but dataset has " + std::to_string(ds.num_features) +
                      " features");
  }
  if (opt.batch == 0 || opt.epochs == 0) throw ConfigError("batch and epochs must be positive");
  if (!ds.features.all_finite()) throw DataError("training features must be finite; preprocess first");

  TrainResult result;
  result.split = resolve_split(ds, opt);
  const auto train_set = make_windows(ds, cfg.T, 0, result.split.valid_start == 0 ? 0 : result.split.valid_start - 1);
  if (train_set.empty()) throw ConfigError("no training windows before the validation period");
  if (make_windows(ds, cfg.T, result.split.valid_start, result.split.test_start - 1).empty()) {
    throw ConfigError("no validation windows; widen the validation period");
  }

  std::mt19937_64 init_rng(opt.seed);
  Params params = init_params(cfg, init_rng());
  std::mt19937_64 shuffle_rng(init_rng());
  std::mt19937_64 dropout_rng(init_rng());
  Adam adam(opt.adam);

  Params best = params;
  double best_ic = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train_set.size());

  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng() % i]);

    EpochRecord rec;
    rec.epoch = epoch;
    std::size_t batches = 0, ic_terms = 0, mse_terms = 0;
    for (std::size_t start = 0; start < order.size(); start += opt.batch) {
      const std::size_t stop = std::min(order.size(), start + opt.batch);
      try {
        Tape tape;
        TapeScope scope(tape);
        const Params w = params.watched(tape);
        ForwardOptions fo{true, &dropout_rng};
        Tensor sum;
        std::size_t used = 0;
        for (std::size_t b = start; b < stop; ++b) {
          const Sample& s = train_set[order[b]];
          if (std::none_of(s.mask.begin(), s.mask.end(), [](auto m) { return m != 0; })) continue;
          const Tensor y = act_forward(s.features, graphs, w, cfg, fo).y;
          const LossTerms lt = total_loss(y, s.labels, s.mask, cfg.lambda);
          if (lt.ic_skipped) {
            ++result.history.skipped_ic_samples;
          } else {
            rec.train_ic_term += lt.ic;
            ++ic_terms;
          }
          rec.train_mse_term += lt.mse;
          ++mse_terms;
          sum = used == 0 ? lt.total : ops::add(sum, lt.total);
          ++used;
        }
        if (used == 0) continue;
        const Tensor loss = ops::mul(sum, Tensor::scalar(1.0 / static_cast<double>(used)));
        tape.backward(loss);
        std::map<std::string, std::vector<double>> grads;
        for (const auto& name : w.names()) {
          const Tensor g = tape.gradient(w.at(name));
          grads.emplace(name, std::vector<double>(g.values().begin(), g.values().end()));
        }
        adam.step(params, grads);
        rec.train_loss += loss.item();
        ++batches;
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " step " + std::to_string(start / opt.batch + 1) +
                           ": " + e.what());
      }
    }
    if (batches > 0) rec.train_loss /= static_cast<double>(batches);
    if (ic_terms > 0) rec.train_ic_term /= static_cast<double>(ic_terms);
    if (mse_terms > 0) rec.train_mse_term /= static_cast<double>(mse_terms);
    rec.valid_ic = validation_ic(params, ds, graphs, cfg, result.split.valid_start, result.split.test_start - 1);
    result.history.epochs.push_back(rec);
    if (opt.log != nullptr) {
      *opt.log << "epoch " << epoch << " loss " << rec.train_loss << " valid_ic " << rec.valid_ic << '\n';
    }
    if (rec.valid_ic > best_ic) {
      best_ic = rec.valid_ic;
      best = params;
      result.history.selected_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= opt.patience) {
      break;
    }
  }
  if (result.history.selected_epoch == 0) {
    // Validation IC never defined: keep the final weights.
    best = params;
    result.history.selected_epoch = result.history.epochs.back().epoch;
  }
  result.params = std::move(best);
  return result;
}

PredictionSeries predict_sliding(const Params& params, const PanelDataset& ds, const RelationGraphs& graphs,
                                 const ActConfig& cfg, std::size_t first_end, std::size_t last_end) {
  cfg.validate();
  check_graphs(ds, graphs);
  first_end = std::max(first_end, cfg.T == 0 ? 0 : cfg.T - 1);
  last_end = std::min(last_end, ds.num_dates());
  if (first_end >= last_end) {
    throw DataError("insufficient history: no window of length " + std::to_string(cfg.T) + " ends in range");
  }
  const std::size_t n = ds.num_instruments();
  PredictionSeries out;
  for (std::size_t t = first_end; t < last_end; ++t) {
    const Tensor y = act_forward(window_features(ds, t, cfg.T), graphs, params, cfg).y;
    for (std::size_t i = 0; i < n; ++i) {
      if (ds.tradable[t * n + i]) out.records.push_back({ds.dates[t], ds.instruments[i], y[i]});
    }
  }
  out.normalize();
  return out;
}

std::string format_history_csv(const TrainHistory& h) {
  std::string out = "epoch,train_loss,train_ic_term,train_mse_term,valid_ic,selected\n";
  for (const auto& e : h.epochs) {
    out += std::to_string(e.epoch) + ',' + csv::format_double(e.train_loss) + ',' +
           csv::format_double(e.train_ic_term) + ',' + csv::format_double(e.train_mse_term) + ',' +
           (std::isnan(e.valid_ic) ? std::string("nan") : csv::format_double(e.valid_ic)) + ',' +
           (e.epoch == h.selected_epoch ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace act
