#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tagsense/cart.hpp"
#include "tagsense/features.hpp"

namespace tagsense {

// Rows are actual behaviours, columns predicted ones.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> behaviours);

  void add(std::size_t actual, std::size_t predicted);

  std::size_t classes() const { return behaviours_.size(); }
  const std::vector<std::string>& behaviours() const { return behaviours_; }
  std::uint64_t at(std::size_t actual, std::size_t predicted) const {
    return counts_[actual * classes() + predicted];
  }
  std::uint64_t total() const { return total_; }
  std::uint64_t trace() const;
  std::uint64_t support(std::size_t cls) const;      // row sum
  std::uint64_t predictions(std::size_t cls) const;  // column sum

  // Grid with behaviour names as the header row and first column.
  std::string to_csv() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> behaviours_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_{0};
};

struct ClassMetrics {
  double precision{0.0};
  double recall{0.0};
  double f1{0.0};
  std::uint64_t support{0};
};

struct Metrics {
  double accuracy{0.0};
  std::vector<ClassMetrics> per_class;
  double macro_f1{0.0};
  double weighted_f1{0.0};
  std::size_t target{0};
  double target_f1{0.0};
};

// Derived from the matrix alone. Precision/recall with a zero denominator
// are 0, and so is F1 when precision + recall is 0.
Metrics compute_metrics(const ConfusionMatrix& cm, std::size_t target);

struct Evaluation {
  ConfusionMatrix matrix;
  Metrics metrics;
};

// Labels of `fm` are mapped onto the model's behaviour list by name; a
// behaviour the model does not know raises LabelError, as does an unknown
// target.
Evaluation evaluate(const TreeModel& m, const FeatureMatrix& fm, std::string_view target);

// Stratified, seeded partition; `train_fraction` of every class goes to the
// first part (at least one row on each side). Both parts keep the original
// row order. Throws DataError for a class with fewer than two rows and
// ConfigError unless 0 < train_fraction < 1.
std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& fm, double train_fraction,
                                              std::uint64_t seed);

enum class EvalMode { Resubstitution, Holdout };

std::string_view eval_mode_name(EvalMode mode);

struct SweepOptions {
  EvalMode mode{EvalMode::Resubstitution};
  double train_fraction{0.7};
  // 0 = one per hardware thread.
  unsigned threads{0};
};

struct SweepEntry {
  FeatureMask mask;
  double target_f1{0.0};
  double accuracy{0.0};
  double macro_f1{0.0};
  int depth{0};
  std::size_t rank{0};

  bool operator==(const SweepEntry&) const = default;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // rank order
  std::string target;
  TrainConfig config;
  SweepOptions options;
};

// Trains and evaluates one model per non-empty feature subset (255), ranked
// by target F1 descending, then accuracy descending, then mask bits
// ascending. cfg.mask is ignored. Output does not depend on thread count.
SweepResult sweep(const FeatureMatrix& fm, const TrainConfig& cfg, std::string_view target,
                  const SweepOptions& options = {});

std::string rank_report(const SweepResult& sr, std::size_t top_n);
// rank,mask,target_f1,accuracy
std::string sweep_csv(const SweepResult& sr);

// Human-readable confusion matrix and per-class metrics.
std::string metrics_report(const Evaluation& ev);

}  // namespace tagsense
