#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tagsense/features.hpp"

namespace tagsense {

enum class Criterion { Gini, Entropy };

std::string_view criterion_name(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);

struct TrainConfig {
  int max_depth{7};
  FeatureMask mask{FeatureMask::full()};
  std::size_t min_samples_split{2};
  std::size_t min_samples_leaf{1};
  bool oversample{false};
  std::uint64_t seed{0};
  Criterion criterion{Criterion::Gini};
};

// Throws ConfigError unless max_depth >= 1, min_samples_split >= 2,
// min_samples_leaf >= 1 and the mask is non-empty.
void validate(const TrainConfig& cfg);

// Rows with value <= threshold descend left.
struct InternalNode {
  FeatureId feature{FeatureId::AX};
  double threshold{0.0};
  std::size_t left{0};
  std::size_t right{0};

  bool operator==(const InternalNode&) const = default;
};

struct LeafNode {
  std::size_t cls{0};
  std::vector<std::uint64_t> class_counts;

  bool operator==(const LeafNode&) const = default;
};

using TreeNode = std::variant<InternalNode, LeafNode>;

struct FeatureRange {
  double min{0.0};
  double max{0.0};

  bool operator==(const FeatureRange&) const = default;
};

struct TrainingMeta {
  std::uint64_t seed{0};
  std::size_t rows{0};
  Criterion criterion{Criterion::Gini};
  // Observed training range of every masked feature.
  std::array<std::optional<FeatureRange>, kFeatureCount> ranges{};

  bool operator==(const TrainingMeta&) const = default;
};

// Binary decision tree stored as a flat preorder node list; node 0 is the
// root. Immutable after construction.
class TreeModel {
 public:
  // Validates structure (every node reachable exactly once, children after
  // parents), mask membership of split features, leaf classes and the depth
  // bound. Throws ConfigError on violation.
  TreeModel(std::vector<TreeNode> nodes, int max_depth, FeatureMask mask,
            std::vector<std::string> behaviours, TrainingMeta meta = {});

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(std::size_t i) const { return nodes_.at(i); }
  int max_depth() const { return max_depth_; }
  // Edges on the longest root-to-leaf path; a lone leaf has depth 0.
  int depth() const { return depth_; }
  FeatureMask mask() const { return mask_; }
  const std::vector<std::string>& behaviours() const { return behaviours_; }
  const TrainingMeta& meta() const { return meta_; }
  std::size_t leaf_count() const;

  bool operator==(const TreeModel&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  int max_depth_{1};
  int depth_{0};
  FeatureMask mask_;
  std::vector<std::string> behaviours_;
  TrainingMeta meta_;
};

// 1 - sum (n_i / N)^2. Throws DataError when the total is zero.
double gini(std::span<const std::uint64_t> counts);
// Shannon entropy in bits. Throws DataError when the total is zero.
double entropy(std::span<const std::uint64_t> counts);

// Row indices after deterministic oversampling: every present minority class
// is topped up to the majority count by repeating its rows cyclically in
// their original order.
std::vector<std::size_t> oversample_indices(const FeatureMatrix& fm);

// Greedy depth-bounded CART. Deterministic: split candidates are compared by
// impurity, then feature index, then threshold. Throws DataError on an empty
// matrix and ConfigError on an invalid config.
TreeModel fit(const FeatureMatrix& fm, const TrainConfig& cfg);

// Throws ValueError if a masked feature value is not finite.
std::size_t predict(const TreeModel& m, const FeatureValues& values);

// Portable model text; thresholds use the shortest round-trip decimal.
std::string serialize(const TreeModel& m);
// Throws FormatError naming the offending line.
TreeModel deserialize(std::string_view text);

}  // namespace tagsense
