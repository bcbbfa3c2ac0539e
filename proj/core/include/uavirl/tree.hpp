#pragma once

#include <span>
#include <string>
#include <vector>

#include "uavirl/policy.hpp"
#include "uavirl/trajectories.hpp"

namespace uavirl::bc {

struct TreeNode {
  bool leaf = true;
  int feature = 0;         // split only
  double threshold = 0.0;  // go left iff phi[feature] <= threshold
  int left = -1;
  int right = -1;
  int label = 0;  // leaf only: joint action class

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int root = 0;

  int depth() const;
  int num_leaves() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

// Greedy CART with Gini impurity. Splits until a node is pure or no split
// lowers the weighted impurity; no depth cap.
DecisionTree fit_tree(std::span<const LabeledState> dataset);

int predict_class(const DecisionTree& tree, const FeatureVector& phi);
Action predict(const DecisionTree& tree, const FeatureVector& phi);

// Fraction of exact action matches. Throws ContractError on an empty set.
double evaluate_bc(const DecisionTree& tree, std::span<const LabeledState> held_out);

struct Split {
  std::vector<LabeledState> train;
  std::vector<LabeledState> test;
};
// Seeded shuffle then split; test gets round((1 - train_fraction) * n) samples.
Split train_test_split(std::vector<LabeledState> data, double train_fraction, std::uint64_t seed);

double gini(std::span<const int> labels);

class TreePolicy final : public Policy {
 public:
  explicit TreePolicy(DecisionTree tree) : tree_(std::move(tree)) {}
  std::string name() const override { return "bc"; }
  Action act(const Observation& obs) override { return predict(tree_, obs.features); }
  const DecisionTree& tree() const { return tree_; }

 private:
  DecisionTree tree_;
};

std::string tree_to_json(const DecisionTree& tree, const std::string& scenario_id);
DecisionTree tree_from_json(const std::string& text, std::string* scenario_id = nullptr);

}  // namespace uavirl::bc
