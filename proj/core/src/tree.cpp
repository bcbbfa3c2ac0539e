#include "uavirl/tree.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"

namespace uavirl::bc {

using detail::format_double;
using detail::ojson;
using detail::parse_double;
using detail::require;

namespace {

using Counts = std::array<int, kNumActions>;

double gini_of(const Counts& counts, int total) {
  if (total == 0) return 0.0;
  double s = 0.0;
  for (int c : counts) {
    const double p = static_cast<double>(c) / total;
    s += p * p;
  }
  return 1.0 - s;
}

int majority(const Counts& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct Builder {
  std::span<const LabeledState> data;
  DecisionTree tree;

  int build(std::vector<std::size_t> idx) {
    Counts counts{};
    for (std::size_t i : idx) ++counts[static_cast<std::size_t>(data[i].action)];
    const int n = static_cast<int>(idx.size());
    const double parent = gini_of(counts, n);
    const int node = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{true, 0, 0.0, -1, -1, majority(counts)});
    if (parent == 0.0) return node;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = parent;
    for (int f = 0; f < kNumFeatures; ++f) {
      std::vector<std::size_t> order = idx;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data[a].features[static_cast<std::size_t>(f)] < data[b].features[static_cast<std::size_t>(f)];
      });
      Counts left{};
      Counts right = counts;
      for (int k = 0; k + 1 < n; ++k) {
        const auto& s = data[order[static_cast<std::size_t>(k)]];
        ++left[static_cast<std::size_t>(s.action)];
        --right[static_cast<std::size_t>(s.action)];
        const double v = s.features[static_cast<std::size_t>(f)];
        const double next = data[order[static_cast<std::size_t>(k + 1)]].features[static_cast<std::size_t>(f)];
        if (!(next > v)) continue;
        const int nl = k + 1;
        const int nr = n - nl;
        const double impurity = (nl * gini_of(left, nl) + nr * gini_of(right, nr)) / n;
        if (impurity < best_impurity - 1e-12) {
          best_impurity = impurity;
          best_feature = f;
          best_threshold = 0.5 * (v + next);
        }
      }
    }
    if (best_feature < 0) return node;

    std::vector<std::size_t> li, ri;
    for (std::size_t i : idx) {
      (data[i].features[static_cast<std::size_t>(best_feature)] <= best_threshold ? li : ri).push_back(i);
    }
    const int l = build(std::move(li));
    const int r = build(std::move(ri));
    TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    nd.leaf = false;
    nd.feature = best_feature;
    nd.threshold = best_threshold;
    nd.left = l;
    nd.right = r;
    return node;
  }
};

}  // namespace

double gini(std::span<const int> labels) {
  Counts counts{};
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return gini_of(counts, static_cast<int>(labels.size()));
}

int DecisionTree::depth() const {
  std::function<int(int)> d = [&](int n) -> int {
    const TreeNode& nd = nodes[static_cast<std::size_t>(n)];
    return nd.leaf ? 0 : 1 + std::max(d(nd.left), d(nd.right));
  };
  return nodes.empty() ? 0 : d(root);
}

int DecisionTree::num_leaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

DecisionTree fit_tree(std::span<const LabeledState> dataset) {
  if (dataset.empty()) throw ContractError("fit_tree: empty dataset");
  for (const auto& s : dataset) {
    if (s.action < 0 || s.action >= kNumActions) throw ContractError("fit_tree: label out of range");
  }
  Builder b{dataset, {}};
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  b.tree.root = b.build(std::move(idx));
  return std::move(b.tree);
}

int predict_class(const DecisionTree& tree, const FeatureVector& phi) {
  int n = tree.root;
  for (;;) {
    const TreeNode& nd = tree.nodes.at(static_cast<std::size_t>(n));
    if (nd.leaf) return nd.label;
    n = phi[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
}

Action predict(const DecisionTree& tree, const FeatureVector& phi) { return Action::from_joint(predict_class(tree, phi)); }

double evaluate_bc(const DecisionTree& tree, std::span<const LabeledState> held_out) {
  if (held_out.empty()) throw ContractError("evaluate_bc: empty held-out set");
  int hits = 0;
  for (const auto& s : held_out) hits += predict_class(tree, s.features) == s.action ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(held_out.size());
}

Split train_test_split(std::vector<LabeledState> data, double train_fraction, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "bc-split"));
  for (std::size_t i = data.size(); i > 1; --i) std::swap(data[i - 1], data[rng.below(i)]);
  const auto n_test = static_cast<std::size_t>(std::llround((1.0 - train_fraction) * static_cast<double>(data.size())));
  Split s;
  s.test.assign(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.train.assign(data.begin() + static_cast<std::ptrdiff_t>(n_test), data.end());
  return s;
}

std::string tree_to_json(const DecisionTree& tree, const std::string& scenario_id) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = "tree";
  j["scenario_id"] = scenario_id;
  j["root"] = tree.root;
  ojson nodes = ojson::array();
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const TreeNode& n = tree.nodes[i];
    ojson nj;
    nj["id"] = i;
    nj["kind"] = n.leaf ? "leaf" : "split";
    nj["class"] = n.label;  // majority class on split nodes
    if (!n.leaf) {
      nj["feature"] = n.feature;
      nj["threshold"] = format_double(n.threshold);
      nj["left"] = n.left;
      nj["right"] = n.right;
    }
    nodes.push_back(nj);
  }
  j["nodes"] = nodes;
  return j.dump(2) + "\n";
}

DecisionTree tree_from_json(const std::string& text, std::string* scenario_id) {
  try {
    const ojson j = ojson::parse(text);
    if (require(j, "kind").get<std::string>() != "tree") throw CorruptRecordError("tree: wrong kind");
    DecisionTree t;
    t.root = require(j, "root").get<int>();
    for (const auto& nj : require(j, "nodes")) {
      TreeNode n;
      n.leaf = require(nj, "kind").get<std::string>() == "leaf";
      n.label = require(nj, "class").get<int>();
      if (!n.leaf) {
        n.feature = require(nj, "feature").get<int>();
        n.threshold = parse_double(require(nj, "threshold"), "threshold");
        n.left = require(nj, "left").get<int>();
        n.right = require(nj, "right").get<int>();
      }
      t.nodes.push_back(n);
    }
    const int count = static_cast<int>(t.nodes.size());
    if (t.root < 0 || t.root >= count) throw CorruptRecordError("tree: root out of range");
    for (int i = 0; i < count; ++i) {
      const TreeNode& n = t.nodes[static_cast<std::size_t>(i)];
      if (n.label < 0 || n.label >= kNumActions) throw CorruptRecordError("tree: class out of range");
      if (!n.leaf && (n.feature < 0 || n.feature >= kNumFeatures || n.left <= i || n.right <= i || n.left >= count ||
                 n.right >= count)) {
        // Children always follow their parent, which also rules out cycles.
        throw CorruptRecordError("tree: malformed split node");
      }
    }
    if (scenario_id) *scenario_id = require(j, "scenario_id").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("tree: ") + e.what());
  }
}

}  // namespace uavirl::bc
