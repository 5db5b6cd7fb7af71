#include "tagsense/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "tagsense/error.hpp"
#include "tagsense/rng.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> behaviours)
    : behaviours_(std::move(behaviours)), counts_(behaviours_.size() * behaviours_.size(), 0) {}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted) {
  if (actual >= classes() || predicted >= classes()) {
    throw LabelError("confusion matrix: class index out of range");
  }
  counts_[actual * classes() + predicted]++;
  total_++;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t c = 0; c < classes(); ++c) t += at(c, c);
  return t;
}

std::uint64_t ConfusionMatrix::support(std::size_t cls) const {
  std::uint64_t s = 0;
  for (std::size_t p = 0; p < classes(); ++p) s += at(cls, p);
  return s;
}

std::uint64_t ConfusionMatrix::predictions(std::size_t cls) const {
  std::uint64_t s = 0;
  for (std::size_t a = 0; a < classes(); ++a) s += at(a, cls);
  return s;
}

std::string ConfusionMatrix::to_csv() const {
  std::string out = "actual\\predicted";
  for (const auto& b : behaviours_) out += "," + b;
  out += "\n";
  for (std::size_t a = 0; a < classes(); ++a) {
    out += behaviours_[a];
    for (std::size_t p = 0; p < classes(); ++p) out += "," + std::to_string(at(a, p));
    out += "\n";
  }
  return out;
}

Metrics compute_metrics(const ConfusionMatrix& cm, std::size_t target) {
  if (target >= cm.classes()) throw LabelError("target class out of range");
  Metrics m;
  m.target = target;
  m.accuracy = cm.total() == 0 ? 0.0
                                : static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  double f1_sum = 0.0;
  double weighted = 0.0;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    ClassMetrics k;
    const auto tp = static_cast<double>(cm.at(c, c));
    const auto pred = cm.predictions(c);
    k.support = cm.support(c);
    k.precision = pred == 0 ? 0.0 : tp / static_cast<double>(pred);
    k.recall = k.support == 0 ? 0.0 : tp / static_cast<double>(k.support);
    const double pr = k.precision + k.recall;
    k.f1 = pr == 0.0 ? 0.0 : 2.0 * k.precision * k.recall / pr;
    f1_sum += k.f1;
    weighted += k.f1 * static_cast<double>(k.support);
    m.per_class.push_back(k);
  }
  m.macro_f1 = cm.classes() == 0 ? 0.0 : f1_sum / static_cast<double>(cm.classes());
  m.weighted_f1 = cm.total() == 0 ? 0.0 : weighted / static_cast<double>(cm.total());
  m.target_f1 = m.per_class[target].f1;
  return m;
}

Evaluation evaluate(const TreeModel& m, const FeatureMatrix& fm, std::string_view target) {
  const auto& names = m.behaviours();
  const auto target_it = std::find(names.begin(), names.end(), target);
  if (target_it == names.end()) {
    throw LabelError("target behaviour '" + std::string(target) + "' is not known to the model");
  }
  std::vector<std::size_t> to_model(fm.behaviours.size());
  for (std::size_t i = 0; i < fm.behaviours.size(); ++i) {
    const auto it = std::find(names.begin(), names.end(), fm.behaviours[i]);
    if (it == names.end()) {
      throw LabelError("behaviour '" + fm.behaviours[i] + "' is not known to the model");
    }
    to_model[i] = static_cast<std::size_t>(it - names.begin());
  }
  ConfusionMatrix cm(names);
  for (const auto& row : fm.rows) cm.add(to_model.at(row.label), predict(m, row.values));
  auto metrics = compute_metrics(cm, static_cast<std::size_t>(target_it - names.begin()));
  return {std::move(cm), std::move(metrics)};
}

std::pair<FeatureMatrix, FeatureMatrix> split(const FeatureMatrix& fm, double train_fraction,
                                              std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("split ratio must lie strictly between 0 and 1");
  }
  std::vector<std::vector<std::size_t>> by_class(fm.behaviours.size());
  for (std::size_t i = 0; i < fm.rows.size(); ++i) by_class.at(fm.rows[i].label).push_back(i);

  Rng rng(seed);
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& rows = by_class[c];
    if (rows.empty()) continue;
    if (rows.size() < 2) {
      throw DataError("behaviour '" + fm.behaviours[c] + "' has fewer than 2 rows; cannot split");
    }
    rng.shuffle(rows.begin(), rows.end());
    const auto n = static_cast<double>(rows.size());
    auto n_train = static_cast<std::size_t>(std::floor(train_fraction * n + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
    train_idx.insert(train_idx.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  FeatureMatrix train{{}, fm.behaviours};
  FeatureMatrix test{{}, fm.behaviours};
  for (const auto i : train_idx) train.rows.push_back(fm.rows[i]);
  for (const auto i : test_idx) test.rows.push_back(fm.rows[i]);
  return {std::move(train), std::move(test)};
}

std::string_view eval_mode_name(EvalMode mode) {
  return mode == EvalMode::Resubstitution ? "resubstitution" : "holdout";
}

SweepResult sweep(const FeatureMatrix& fm, const TrainConfig& cfg, std::string_view target,
                  const SweepOptions& options) {
  const auto present = std::count_if(fm.behaviours.begin(), fm.behaviours.end(), [&](const auto& b) {
    const auto idx = fm.behaviour_index(b);
    return std::any_of(fm.rows.begin(), fm.rows.end(),
                       [&](const FeatureVector& r) { return r.label == *idx; });
  });
  if (present < 2) throw DataError("sweep needs at least two behaviours with rows");
  if (!fm.behaviour_index(target)) {
    throw LabelError("unknown target behaviour '" + std::string(target) + "'");
  }

  FeatureMatrix train = fm;
  FeatureMatrix test;
  if (options.mode == EvalMode::Holdout) {
    std::tie(train, test) = split(fm, options.train_fraction, cfg.seed);
  }
  const FeatureMatrix& scored = options.mode == EvalMode::Holdout ? test : train;

  constexpr std::size_t kSubsets = (1U << kFeatureCount) - 1;
  std::vector<SweepEntry> entries(kSubsets);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (true) {
      const auto i = next.fetch_add(1);
      if (i >= kSubsets) return;
      try {
        TrainConfig c = cfg;
        c.mask = FeatureMask(static_cast<std::uint8_t>(i + 1));
        const auto model = fit(train, c);
        const auto ev = evaluate(model, scored, target);
        entries[i] = SweepEntry{c.mask, ev.metrics.target_f1, ev.metrics.accuracy,
                                ev.metrics.macro_f1, model.depth(), 0};
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = kSubsets;
        return;
      }
    }
  };

  unsigned n_threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  n_threads = std::clamp<unsigned>(n_threads, 1, kSubsets);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(entries.begin(), entries.end(), [](const SweepEntry& a, const SweepEntry& b) {
    if (a.target_f1 != b.target_f1) return a.target_f1 > b.target_f1;
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return a.mask.bits() < b.mask.bits();
  });
  for (std::size_t r = 0; r < entries.size(); ++r) entries[r].rank = r + 1;

  return SweepResult{std::move(entries), std::string(target), cfg, options};
}

std::string rank_report(const SweepResult& sr, std::size_t top_n) {
  const std::size_t n = std::min(std::max<std::size_t>(top_n, 1), sr.entries.size());
  std::size_t mask_width = std::string_view("Feature Permutation").size();
  for (std::size_t i = 0; i < n; ++i) {
    mask_width = std::max(mask_width, sr.entries[i].mask.to_string().size());
  }
  std::ostringstream out;
  out << std::left << std::setw(9) << "n-th best" << " | " << std::setw(static_cast<int>(mask_width))
      << "Feature Permutation" << " | " << std::setw(7) << "F1 in %" << " | Accuracy in %\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = sr.entries[i];
    out << std::right << std::setw(9) << e.rank << " | " << std::left
        << std::setw(static_cast<int>(mask_width)) << e.mask.to_string() << " | " << std::right
        << std::setw(7) << textio::format_fixed(e.target_f1 * 100.0, 2) << " | " << std::setw(13)
        << textio::format_fixed(e.accuracy * 100.0, 2) << "\n";
  }
  out << "# " << sr.entries.size() << " non-empty feature subsets ranked (of 2^8 = 256 subsets, "
      << "the empty one cannot be trained); target '" << sr.target << "', depth "
      << sr.config.max_depth << ", " << eval_mode_name(sr.options.mode) << "\n";
  return out.str();
}

std::string sweep_csv(const SweepResult& sr) {
  std::string out = "rank,mask,target_f1,accuracy\n";
  for (const auto& e : sr.entries) {
    out += std::to_string(e.rank) + "," + e.mask.to_string() + "," +
           textio::format_shortest(e.target_f1) + "," + textio::format_shortest(e.accuracy) + "\n";
  }
  return out;
}

std::string metrics_report(const Evaluation& ev) {
  const auto& cm = ev.matrix;
  const auto& m = ev.metrics;
  std::size_t w = 9;
  for (const auto& b : cm.behaviours()) w = std::max(w, b.size());
  const auto iw = static_cast<int>(w);

  std::ostringstream out;
  out << "confusion matrix (rows = actual, columns = predicted)\n" << std::setw(iw) << "";
  for (const auto& b : cm.behaviours()) out << " " << std::setw(iw) << b;
  out << "\n";
  for (std::size_t a = 0; a < cm.classes(); ++a) {
    out << std::setw(iw) << cm.behaviours()[a];
    for (std::size_t p = 0; p < cm.classes(); ++p) out << " " << std::setw(iw) << cm.at(a, p);
    out << "\n";
  }
  out << "\n" << std::setw(iw) << "behaviour" << "  precision     recall         F1  support\n";
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const auto& k = m.per_class[c];
    out << std::setw(iw) << cm.behaviours()[c] << std::setw(11)
        << textio::format_fixed(k.precision * 100.0, 2) + "%" << std::setw(11)
        << textio::format_fixed(k.recall * 100.0, 2) + "%" << std::setw(11)
        << textio::format_fixed(k.f1 * 100.0, 2) + "%" << std::setw(9) << k.support << "\n";
  }
  out << "\naccuracy    " << textio::format_fixed(m.accuracy * 100.0, 2) << "%\n"
      << "target F1   " << textio::format_fixed(m.target_f1 * 100.0, 2) << "% ("
      << cm.behaviours()[m.target] << ")\n"
      << "macro F1    " << textio::format_fixed(m.macro_f1 * 100.0, 2) << "%\n"
      << "weighted F1 " << textio::format_fixed(m.weighted_f1 * 100.0, 2) << "%\n";
  return out.str();
}

}  // namespace tagsense
