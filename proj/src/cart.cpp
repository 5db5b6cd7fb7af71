#include "tagsense/cart.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "tagsense/error.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr std::string_view kMagic = "tagsense-tree";
constexpr int kFormatVersion = 1;

std::size_t argmax_lowest(std::span<const std::uint64_t> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

// Split quality. Gini candidates are compared exactly: minimizing the
// weighted Gini impurity is maximizing S_l/N_l + S_r/N_r (S = sum of squared
// class counts), kept as the fraction num/den.
struct SplitScore {
  u128 num{0};
  u128 den{1};
  double weighted_entropy{0.0};
};

bool better(const SplitScore& a, const SplitScore& b, Criterion c) {
  if (c == Criterion::Gini) return a.num * b.den > b.num * a.den;
  return a.weighted_entropy < b.weighted_entropy;
}

double entropy_of(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
  double h = 0.0;
  for (const auto n : counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  return h;
}

struct Candidate {
  FeatureId feature{};
  double threshold{0.0};
  SplitScore score;
};

class Builder {
 public:
  Builder(const FeatureMatrix& fm, const TrainConfig& cfg)
      : fm_(fm), cfg_(cfg), n_classes_(fm.behaviours.size()), features_(cfg.mask.features()) {}

  std::vector<TreeNode> take() { return std::move(nodes_); }

  std::size_t build(std::vector<std::size_t> idx, int depth) {
    std::vector<std::uint64_t> counts(n_classes_, 0);
    for (const auto i : idx) counts[fm_.rows[i].label]++;
    const auto present = std::count_if(counts.begin(), counts.end(), [](auto n) { return n > 0; });

    const std::size_t self = nodes_.size();
    const bool stop = present <= 1 || depth >= cfg_.max_depth ||
                      idx.size() < cfg_.min_samples_split ||
                      idx.size() < 2 * cfg_.min_samples_leaf;
    const auto split = stop ? std::nullopt : best_split(idx);
    if (!split) {
      const auto cls = argmax_lowest(counts);
      nodes_.emplace_back(LeafNode{cls, std::move(counts)});
      return self;
    }

    nodes_.emplace_back(InternalNode{split->feature, split->threshold, 0, 0});
    const auto f = index(split->feature);
    const auto mid = std::stable_partition(idx.begin(), idx.end(), [&](std::size_t i) {
      return fm_.rows[i].values[f] <= split->threshold;
    });
    std::vector<std::size_t> right(mid, idx.end());
    idx.erase(mid, idx.end());
    const auto l = build(std::move(idx), depth + 1);
    const auto r = build(std::move(right), depth + 1);
    auto& node = std::get<InternalNode>(nodes_[self]);
    node.left = l;
    node.right = r;
    return self;
  }

 private:
  std::optional<Candidate> best_split(const std::vector<std::size_t>& idx) {
    std::optional<Candidate> best;
    std::vector<std::size_t> order(idx);
    const std::size_t n = idx.size();
    const std::size_t min_leaf = cfg_.min_samples_leaf;

    std::vector<std::uint64_t> total(n_classes_, 0);
    for (const auto i : idx) total[fm_.rows[i].label]++;

    for (const auto feature : features_) {
      const auto f = index(feature);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = fm_.rows[a].values[f];
        const double vb = fm_.rows[b].values[f];
        return va < vb || (va == vb && a < b);
      });
      std::vector<std::uint64_t> left(n_classes_, 0);
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left[fm_.rows[order[k]].label]++;
        const double lo = fm_.rows[order[k]].values[f];
        const double hi = fm_.rows[order[k + 1]].values[f];
        if (!(lo < hi)) continue;
        const std::size_t n_left = k + 1;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf || n_right < min_leaf) continue;

        SplitScore score;
        if (cfg_.criterion == Criterion::Gini) {
          u128 sl = 0;
          u128 sr = 0;
          for (std::size_t c = 0; c < n_classes_; ++c) {
            const u128 a = left[c];
            const u128 b = total[c] - left[c];
            sl += a * a;
            sr += b * b;
          }
          score.num = sl * n_right + sr * n_left;
          score.den = static_cast<u128>(n_left) * n_right;
        } else {
          std::vector<std::uint64_t> right(n_classes_);
          for (std::size_t c = 0; c < n_classes_; ++c) right[c] = total[c] - left[c];
          score.weighted_entropy = static_cast<double>(n_left) * entropy_of(left, n_left) +
                                   static_cast<double>(n_right) * entropy_of(right, n_right);
        }
        // Strictly better only: earlier features and lower thresholds win ties.
        if (!best || better(score, best->score, cfg_.criterion)) {
          double t = std::midpoint(lo, hi);
          if (!(t < hi)) t = lo;
          best = Candidate{feature, t, score};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& fm_;
  const TrainConfig& cfg_;
  std::size_t n_classes_;
  std::vector<FeatureId> features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::string_view criterion_name(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

std::optional<Criterion> parse_criterion(std::string_view name) {
  if (name == "gini") return Criterion::Gini;
  if (name == "entropy") return Criterion::Entropy;
  return std::nullopt;
}

void validate(const TrainConfig& cfg) {
  if (cfg.max_depth < 1) throw ConfigError("max_depth must be >= 1");
  if (cfg.min_samples_split < 2) throw ConfigError("min_samples_split must be >= 2");
  if (cfg.min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (cfg.mask.empty()) throw ConfigError("feature mask is empty");
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, int max_depth, FeatureMask mask,
                     std::vector<std::string> behaviours, TrainingMeta meta)
    : nodes_(std::move(nodes)),
      max_depth_(max_depth),
      mask_(mask),
      behaviours_(std::move(behaviours)),
      meta_(meta) {
  if (max_depth_ < 1) throw ConfigError("max_depth must be >= 1");
  if (mask_.empty()) throw ConfigError("feature mask is empty");
  if (nodes_.empty()) throw ConfigError("tree has no nodes");
  if (behaviours_.empty()) throw ConfigError("tree has no behaviours");
  for (const auto& b : behaviours_) validate_behaviour_name(b);

  std::vector<bool> seen(nodes_.size(), false);
  // Iterative walk from the root; children must come after their parent so
  // the structure cannot contain cycles.
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    if (seen[i]) throw ConfigError("node " + std::to_string(i) + " is reachable twice");
    seen[i] = true;
    depth_ = std::max(depth_, d);
    if (const auto* in = std::get_if<InternalNode>(&nodes_[i])) {
      if (!mask_.contains(in->feature)) {
        throw ConfigError("node " + std::to_string(i) + " splits on a feature outside the mask");
      }
      if (!std::isfinite(in->threshold)) throw ConfigError("non-finite threshold");
      for (const auto c : {in->left, in->right}) {
        if (c <= i || c >= nodes_.size()) {
          throw ConfigError("node " + std::to_string(i) + " has an invalid child index");
        }
        stack.emplace_back(c, d + 1);
      }
    } else {
      const auto& leaf = std::get<LeafNode>(nodes_[i]);
      if (leaf.cls >= behaviours_.size()) throw ConfigError("leaf class out of range");
      if (!leaf.class_counts.empty() && leaf.class_counts.size() != behaviours_.size()) {
        throw ConfigError("leaf class counts do not match the behaviour list");
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ConfigError("tree contains unreachable nodes");
  }
  if (depth_ > max_depth_) {
    throw ConfigError("tree depth " + std::to_string(depth_) + " exceeds max_depth " +
                      std::to_string(max_depth_));
  }
}

std::size_t TreeModel::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) {
    return std::holds_alternative<LeafNode>(n);
  }));
}

double gini(std::span<const std::uint64_t> counts) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw DataError("gini of an empty count vector");
  double sum_sq = 0.0;
  for (const auto n : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

double entropy(std::span<const std::uint64_t> counts) {
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw DataError("entropy of an empty count vector");
  return entropy_of(std::vector<std::uint64_t>(counts.begin(), counts.end()), total);
}

std::vector<std::size_t> oversample_indices(const FeatureMatrix& fm) {
  std::vector<std::vector<std::size_t>> by_class(fm.behaviours.size());
  for (std::size_t i = 0; i < fm.rows.size(); ++i) by_class[fm.rows[i].label].push_back(i);
  std::size_t majority = 0;
  for (const auto& rows : by_class) majority = std::max(majority, rows.size());

  std::vector<std::size_t> out(fm.rows.size());
  std::iota(out.begin(), out.end(), 0);
  for (const auto& rows : by_class) {
    for (std::size_t k = rows.size(); !rows.empty() && k < majority; ++k) {
      out.push_back(rows[k % rows.size()]);
    }
  }
  return out;
}

TreeModel fit(const FeatureMatrix& fm, const TrainConfig& cfg) {
  validate(cfg);
  if (fm.empty()) throw DataError("cannot train on an empty feature matrix");
  validate(fm);

  std::vector<std::size_t> idx;
  if (cfg.oversample) {
    idx = oversample_indices(fm);
  } else {
    idx.resize(fm.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
  }

  TrainingMeta meta;
  meta.seed = cfg.seed;
  meta.rows = fm.rows.size();
  meta.criterion = cfg.criterion;
  for (const auto f : cfg.mask.features()) {
    FeatureRange r{fm.rows.front()[f], fm.rows.front()[f]};
    for (const auto& row : fm.rows) {
      r.min = std::min(r.min, row[f]);
      r.max = std::max(r.max, row[f]);
    }
    meta.ranges[index(f)] = r;
  }

  Builder builder(fm, cfg);
  builder.build(std::move(idx), 0);
  return TreeModel(builder.take(), cfg.max_depth, cfg.mask, fm.behaviours, meta);
}

std::size_t predict(const TreeModel& m, const FeatureValues& values) {
  for (const auto f : m.mask().features()) {
    if (!std::isfinite(values[index(f)])) {
      throw ValueError("non-finite value for feature " + std::string(feature_name(f)));
    }
  }
  std::size_t i = 0;
  while (const auto* in = std::get_if<InternalNode>(&m.node(i))) {
    i = values[index(in->feature)] <= in->threshold ? in->left : in->right;
  }
  return std::get<LeafNode>(m.node(i)).cls;
}

std::string serialize(const TreeModel& m) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kFormatVersion) + "\n";
  out += "behaviours " + std::to_string(m.behaviours().size());
  for (const auto& b : m.behaviours()) out += " " + b;
  out += "\nfeatures";
  for (const auto f : kAllFeatures) out += " " + std::string(feature_name(f));
  out += "\nmask";
  for (const auto f : m.mask().features()) out += " " + std::string(feature_name(f));
  out += "\nmax_depth " + std::to_string(m.max_depth());
  out += "\ncriterion " + std::string(criterion_name(m.meta().criterion));
  out += "\nseed " + std::to_string(m.meta().seed);
  out += "\nrows " + std::to_string(m.meta().rows);
  out += "\n";
  for (const auto f : kAllFeatures) {
    if (const auto& r = m.meta().ranges[index(f)]) {
      out += "range " + std::string(feature_name(f)) + " " + textio::format_shortest(r->min) +
             " " + textio::format_shortest(r->max) + "\n";
    }
  }
  out += "nodes " + std::to_string(m.nodes().size()) + "\n";

  std::function<void(std::size_t)> emit = [&](std::size_t i) {
    if (const auto* in = std::get_if<InternalNode>(&m.node(i))) {
      out += "internal " + std::string(feature_name(in->feature)) + " " +
             textio::format_shortest(in->threshold) + "\n";
      emit(in->left);
      emit(in->right);
    } else {
      const auto& leaf = std::get<LeafNode>(m.node(i));
      out += "leaf " + std::to_string(leaf.cls);
      for (const auto c : leaf.class_counts) out += " " + std::to_string(c);
      out += "\n";
    }
  };
  emit(0);
  out += "end\n";
  return out;
}

namespace {

class ModelReader {
 public:
  explicit ModelReader(std::string_view text) : lines_(textio::lines(text)) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw FormatError("model text line " + std::to_string(pos_) + ": " + msg);
  }

  // Next non-empty line, split on single spaces.
  std::vector<std::string_view> next() {
    while (pos_ < lines_.size()) {
      const auto line = textio::trim(lines_[pos_++]);
      if (line.empty()) continue;
      std::vector<std::string_view> toks;
      for (const auto t : textio::split(line, ' ')) {
        if (!t.empty()) toks.push_back(t);
      }
      return toks;
    }
    ++pos_;
    fail("unexpected end of input");
  }

  std::vector<std::string_view> expect(std::string_view key, std::size_t min_tokens) {
    auto toks = next();
    if (toks.front() != key) fail("expected '" + std::string(key) + "'");
    if (toks.size() < min_tokens) fail("'" + std::string(key) + "' line is incomplete");
    return toks;
  }

  long long integer(std::string_view tok) const {
    const auto v = textio::parse_int(tok);
    if (!v || *v < 0) fail("bad integer '" + std::string(tok) + "'");
    return *v;
  }

  double real(std::string_view tok) const {
    const auto v = textio::parse_double(tok);
    if (!v || !std::isfinite(*v)) fail("bad number '" + std::string(tok) + "'");
    return *v;
  }

  FeatureId feature(std::string_view tok) const {
    const auto f = parse_feature(tok);
    if (!f) fail("unknown feature '" + std::string(tok) + "'");
    return *f;
  }

  std::size_t line() const { return pos_; }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_{0};
};

}  // namespace

TreeModel deserialize(std::string_view text) {
  ModelReader in(text);

  auto toks = in.expect(kMagic, 2);
  if (in.integer(toks[1]) != kFormatVersion) in.fail("unsupported version");

  toks = in.expect("behaviours", 2);
  const auto n_behaviours = static_cast<std::size_t>(in.integer(toks[1]));
  if (toks.size() != n_behaviours + 2) in.fail("behaviour count does not match names");
  std::vector<std::string> behaviours(toks.begin() + 2, toks.end());

  toks = in.expect("features", 1);
  if (toks.size() != kFeatureCount + 1) in.fail("feature order must list 8 features");
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (in.feature(toks[i + 1]) != kAllFeatures[i]) in.fail("unsupported feature order");
  }

  toks = in.expect("mask", 2);
  std::uint8_t bits = 0;
  for (std::size_t i = 1; i < toks.size(); ++i) bits |= static_cast<std::uint8_t>(1U << index(in.feature(toks[i])));
  const FeatureMask mask(bits);

  toks = in.expect("max_depth", 2);
  const auto max_depth = in.integer(toks[1]);

  TrainingMeta meta;
  toks = in.expect("criterion", 2);
  const auto crit = parse_criterion(toks[1]);
  if (!crit) in.fail("unknown criterion");
  meta.criterion = *crit;
  toks = in.expect("seed", 2);
  const auto seed = textio::parse_int(toks[1]);
  meta.seed = seed ? static_cast<std::uint64_t>(*seed) : 0;
  if (!seed) {
    // Seeds above INT64_MAX.
    std::uint64_t u = 0;
    for (const char c : toks[1]) {
      if (c < '0' || c > '9') in.fail("bad seed");
      u = u * 10 + static_cast<std::uint64_t>(c - '0');
    }
    meta.seed = u;
  }
  toks = in.expect("rows", 2);
  meta.rows = static_cast<std::size_t>(in.integer(toks[1]));

  toks = in.next();
  while (toks.front() == "range") {
    if (toks.size() != 4) in.fail("range needs feature, min and max");
    meta.ranges[index(in.feature(toks[1]))] = FeatureRange{in.real(toks[2]), in.real(toks[3])};
    toks = in.next();
  }
  if (toks.front() != "nodes" || toks.size() != 2) in.fail("expected 'nodes'");
  const auto n_nodes = static_cast<std::size_t>(in.integer(toks[1]));

  std::vector<TreeNode> nodes;
  std::function<std::size_t(int)> read_node = [&](int depth) -> std::size_t {
    if (nodes.size() >= n_nodes) in.fail("more nodes than declared");
    if (depth > max_depth) in.fail("tree deeper than max_depth");
    const auto t = in.next();
    const std::size_t self = nodes.size();
    if (t.front() == "internal") {
      if (t.size() != 3) in.fail("internal node needs feature and threshold");
      nodes.emplace_back(InternalNode{in.feature(t[1]), in.real(t[2]), 0, 0});
      const auto l = read_node(depth + 1);
      const auto r = read_node(depth + 1);
      auto& node = std::get<InternalNode>(nodes[self]);
      node.left = l;
      node.right = r;
    } else if (t.front() == "leaf") {
      if (t.size() < 2) in.fail("leaf needs a class");
      LeafNode leaf;
      leaf.cls = static_cast<std::size_t>(in.integer(t[1]));
      for (std::size_t i = 2; i < t.size(); ++i) {
        leaf.class_counts.push_back(static_cast<std::uint64_t>(in.integer(t[i])));
      }
      nodes.emplace_back(std::move(leaf));
    } else {
      in.fail("expected 'internal' or 'leaf'");
    }
    return self;
  };
  read_node(0);
  if (nodes.size() != n_nodes) in.fail("node count does not match declaration");
  toks = in.next();
  if (toks.front() != "end") in.fail("expected 'end'");

  try {
    return TreeModel(std::move(nodes), static_cast<int>(max_depth), mask, std::move(behaviours), meta);
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model text: ") + e.what());
  } catch (const LabelError& e) {
    throw FormatError(std::string("model text: ") + e.what());
  }
}

}  // namespace tagsense
