// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "tagsense/cart.hpp"
#include "tagsense/codegen.hpp"
#include "tagsense/energy.hpp"
#include "tagsense/evaluation.hpp"
#include "tagsense/rng.hpp"
#include "tagsense/synth.hpp"
#include "tagsense/textio.hpp"

using namespace tagsense;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %2d: %s | %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  if (!ok) ++failures;
}

bool rel_within(double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); }

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void criterion_1() {
  const auto dp = wildfi_profile();
  const double e = tx_energy(20, dp);
  verdict(1, rel_within(e, 3.52e-5, 0.005), "tx_energy(20 B) = 3.52e-5 J +-0.5%", "got " + sci(e) + " J");
}

void criterion_2() {
  const auto dp = wildfi_profile();
  const double a = compute_energy(1000, dp);
  const double b = compute_energy(3200, dp);
  verdict(2, rel_within(a, 3.753e-6, 0.001) && rel_within(b, 1.2e-5, 0.01),
          "compute_energy 1000 cyc = 3.753e-6 J +-0.1%, 3200 cyc = 1.2e-5 J +-1%",
          "got " + sci(a) + " J, " + sci(b) + " J");
}

void criterion_3() {
  const auto dp = wildfi_profile();
  const double a = tx_charge(1'410'000, dp);
  const double b = tx_charge(248'400, dp);
  const double c = tx_charge(1'175'000, dp);
  verdict(3, rel_within(a, 662.1, 0.002) && rel_within(b, 116.64, 0.002) && rel_within(c, 551.74, 0.002),
          "tx_charge 662.1 / 116.64 / 551.74 mA*s +-0.2%",
          "got " + sci(a) + ", " + sci(b) + ", " + sci(c) + " mA*s");
}

TransmissionPlan scenario(Strategy s) {
  TransmissionPlan p;
  p.strategy = s;
  p.detection_fraction = 0.1762;
  p.n_points = 2350;
  p.full_bytes_per_point = 600;
  p.selected_bytes_per_point = 500;
  p.signal_bytes = 2;
  return p;
}

void criterion_4() {
  const auto dp = wildfi_profile();
  const auto cond = scenario(Strategy::Conditional);
  const auto points = points_sent(cond);
  const double cond_bytes = plan_bytes(cond);
  const auto both = report(scenario(Strategy::Both), dp);
  const auto sig = report(scenario(Strategy::SignalOnly), dp);
  const bool ok = points == 414 && cond_bytes == 248'400.0 && std::abs(both.fraction_of_regular - 0.1468) <= 1e-4 &&
                  sig.bytes_total == 828.0;
  verdict(4, ok, "conditional 414 pts / 248400 B, both fraction 0.1468 +-1e-4, signal-only 828 B",
          "got " + std::to_string(points) + " pts, " + textio::format_shortest(cond_bytes) + " B, fraction " +
              textio::format_fixed(both.fraction_of_regular, 6) + ", " + textio::format_shortest(sig.bytes_total) +
              " B; signal-only reduction " + textio::format_fixed(sig.reduction_vs_regular * 100.0, 2) +
              "% (1 - 828/1410000; the published 99.9903% does not follow from these byte counts)");
}

void criterion_5() {
  const double days = runtime_extension(94, 0.58, 0.1468);
  const double residual = 0.58 * 0.1468 * 100.0;
  const double computed_fraction = report(scenario(Strategy::Both), wildfi_profile()).fraction_of_regular;
  verdict(5, std::abs(days - 136.9) <= 0.5 && std::abs(residual - 8.51) <= 0.02,
          "runtime_extension(94, 0.58, 0.1468) = 136.9 +-0.5 d, residual overhead 8.51% +-0.02",
          "got " + textio::format_fixed(days, 2) + " d, " + textio::format_fixed(residual, 3) +
              "%; with the computed fraction " + textio::format_fixed(runtime_extension(94, 0.58, computed_fraction), 2) +
              " d");
}

double train_accuracy(const TreeModel& m, const FeatureMatrix& fm) {
  std::size_t ok = 0;
  for (const auto& r : fm.rows) ok += predict(m, r.values) == r.label;
  return static_cast<double>(ok) / static_cast<double>(fm.size());
}

void criterion_6() {
  Rng rng(6006);
  int consistent = 0, exact = 0, depth_violations = 0, monotone_violations = 0;
  constexpr int kUnlimited = 64;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_rows = 1 + rng.below(64);
    const std::size_t n_feat = 1 + rng.below(3);
    const std::size_t n_cls = 1 + rng.below(3);
    std::vector<FeatureId> pool(kAllFeatures.begin(), kAllFeatures.end());
    rng.shuffle(pool.begin(), pool.end());
    pool.resize(n_feat);
    FeatureMask mask(0);
    for (const auto f : pool) mask = FeatureMask(static_cast<std::uint8_t>(mask.bits() | (1U << index(f))));

    FeatureMatrix fm;
    for (std::size_t c = 0; c < n_cls; ++c) fm.behaviours.push_back("c" + std::to_string(c));
    const double grid = 1 + rng.below(8);
    for (std::size_t i = 0; i < n_rows; ++i) {
      FeatureVector r;
      for (const auto f : pool) r.values[index(f)] = std::floor(rng.uniform(0.0, grid));
      r.label = rng.below(n_cls);
      r.timestamp = static_cast<std::int64_t>(i);
      fm.rows.push_back(r);
    }
    std::map<std::vector<double>, std::size_t> seen;
    bool ok = true;
    for (const auto& r : fm.rows) {
      std::vector<double> key;
      for (const auto f : pool) key.push_back(r.values[index(f)]);
      const auto [it, fresh] = seen.emplace(key, r.label);
      if (!fresh && it->second != r.label) ok = false;
    }

    double prev = -1.0;
    for (const int k : {1, 2, 3, 4, 5, 6, 7, 8, kUnlimited}) {
      TrainConfig cfg;
      cfg.mask = mask;
      cfg.max_depth = k;
      const auto m = fit(fm, cfg);
      if (m.depth() > k) ++depth_violations;
      const double acc = train_accuracy(m, fm);
      if (acc < prev) ++monotone_violations;
      prev = acc;
    }
    const double full = prev;
    if (ok) {
      ++consistent;
      exact += full == 1.0;
    }
  }
  verdict(6, exact == consistent && depth_violations == 0 && monotone_violations == 0,
          "200 random small matrices: consistent ones fit exactly, depth bound held, accuracy monotone in k",
          std::to_string(exact) + "/" + std::to_string(consistent) + " consistent fitted exactly, " +
              std::to_string(depth_violations) + " depth violations, " + std::to_string(monotone_violations) +
              " monotonicity violations");
}

void criterion_7() {
  Rng rng(7007);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 2 + rng.below(5);
    const std::size_t n = 1 + rng.below(300);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < k; ++c) names.push_back("b" + std::to_string(c));
    ConfusionMatrix cm(names);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = rng.below(k);
      const std::size_t p = rng.uniform() < 0.5 ? a : rng.below(k);
      pairs.emplace_back(a, p);
      cm.add(a, p);
    }
    const auto m = compute_metrics(cm, 0);
    double hits = 0;
    for (const auto& [a, p] : pairs) hits += a == p;
    worst = std::max(worst, std::abs(m.accuracy - hits / static_cast<double>(n)));
    for (std::size_t c = 0; c < k; ++c) {
      double tp = 0, fp = 0, fn = 0;
      for (const auto& [a, p] : pairs) {
        tp += a == c && p == c;
        fp += a != c && p == c;
        fn += a == c && p != c;
      }
      const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      worst = std::max({worst, std::abs(m.per_class[c].precision - prec), std::abs(m.per_class[c].recall - rec),
                        std::abs(m.per_class[c].f1 - f1)});
    }
  }
  verdict(7, worst <= 1e-12, "metrics of 1000 random multisets match brute force within 1e-12",
          "max deviation " + sci(worst));
}

void criterion_8(const FeatureMatrix& fm) {
  TrainConfig cfg;
  cfg.max_depth = 14;
  SweepOptions many;
  many.mode = EvalMode::Holdout;
  SweepOptions one = many;
  one.threads = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = sweep(fm, cfg, "standing", many);
  const auto b = sweep(fm, cfg, "standing", many);
  const auto c = sweep(fm, cfg, "standing", one);
  const double secs = seconds_since(t0);
  const auto full = std::find_if(a.entries.begin(), a.entries.end(),
                                 [](const auto& e) { return e.mask == FeatureMask::full(); });
  const bool ok = a.entries.size() == 255 && full != a.entries.end() &&
                  a.entries.front().target_f1 >= full->target_f1 && a.entries == b.entries && a.entries == c.entries;
  verdict(8, ok, "sweep: 255 entries, rank 1 >= full mask, identical across runs and 1 vs many threads",
          std::to_string(a.entries.size()) + " entries, rank 1 " + a.entries.front().mask.to_string() + " F1 " +
              textio::format_fixed(a.entries.front().target_f1 * 100, 2) + "% vs full " +
              (full != a.entries.end() ? textio::format_fixed(full->target_f1 * 100, 2) : std::string("n/a")) +
              "%, " + textio::format_fixed(secs, 1) + " s for 3 sweeps");
}

TreeModel criterion_9(const FeatureMatrix& fm) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto [train, test] = split(fm, 0.7, 0);
  TrainConfig cfg;
  cfg.max_depth = 14;
  const auto deep = fit(train, cfg);
  const auto ev14 = evaluate(deep, test, "standing");
  cfg.max_depth = 7;
  const auto ev7 = evaluate(fit(train, cfg), test, "standing");
  const double secs = seconds_since(t0);
  const bool ok = ev14.metrics.accuracy >= 0.95 && ev14.metrics.target_f1 >= 0.90 && ev7.metrics.accuracy >= 0.80 &&
                  secs <= 120.0;
  verdict(9, ok, "paper-ea60 holdout 70/30: k=14 accuracy >= 0.95 and standing F1 >= 0.90, k=7 accuracy >= 0.80",
          "k=14 accuracy " + textio::format_fixed(ev14.metrics.accuracy, 4) + ", standing F1 " +
              textio::format_fixed(ev14.metrics.target_f1, 4) + "; k=7 accuracy " +
              textio::format_fixed(ev7.metrics.accuracy, 4) + "; " + textio::format_fixed(secs, 2) + " s");
  return deep;
}

void criterion_10(const TreeModel& m) {
  std::string detail;
  bool ok = true;
  for (const auto type : {ValueType::Float, ValueType::Double, ValueType::Int16Scaled}) {
    CodegenOptions opts;
    opts.value_type = type;
    const auto ec = emit_header(m, opts);
    const EmittedInterpreter interp(ec.source, ec.symbol);
    const auto vs = eval_vectors(m, 10000, 10, type);
    std::size_t boundary = 0, mismatches = 0;
    for (const auto& v : vs) {
      boundary += v.boundary;
      mismatches += interp.run(v.args) != predict(m, v.values);
    }
    ok = ok && mismatches == 0 && vs.size() - boundary == 10000;
    detail += std::string(detail.empty() ? "" : "; ") + std::string(value_type_name(type)) + ": " +
              std::to_string(vs.size() - mismatches) + "/" + std::to_string(vs.size()) + " agree (" +
              std::to_string(boundary) + " boundary)";
  }
  verdict(10, ok, "emitted classifier agrees with predict on 10000 random + all boundary vectors", detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  const auto fm = featurize(synthesize(preset("paper-ea60")));
  criterion_8(fm);
  const auto deep = criterion_9(fm);
  criterion_10(deep);
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
