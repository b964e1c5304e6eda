#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "facet/expert.hpp"
#include "facet/relief.hpp"

namespace facet {

// Maps a raw metric value to a preference in [0,1]. Piecewise-linear functions
// interpolate between strictly increasing breakpoints and extrapolate as
// constants; categorical functions map levels with a declared default.
class ValueFunction {
 public:
  static ValueFunction piecewise(std::vector<std::pair<double, double>> points);
  static ValueFunction categorical(std::map<std::string, double> categories,
                                   double fallback);

  bool is_piecewise() const { return std::holds_alternative<Piecewise>(repr_); }
  double operator()(double x) const;
  double operator()(const std::string& level) const;

  const std::vector<std::pair<double, double>>& points() const;
  const std::map<std::string, double>& categories() const;
  double fallback() const;

 private:
  struct Piecewise {
    std::vector<std::pair<double, double>> points;
  };
  struct Categorical {
    std::map<std::string, double> categories;
    double fallback;
  };
  std::variant<Piecewise, Categorical> repr_;
};

enum class NodeKind { Root, Directory, Criterion, Model };

std::string_view to_string(NodeKind kind);

// One node of the decision hierarchy. A model node is a leaf binding a value
// function to a named metric; every other kind aggregates its children by
// weighted sum. Sibling weights sum to 1; the root carries no weight of its
// own and is treated as 1.
struct McdaNode {
  NodeKind kind = NodeKind::Criterion;
  std::string name;
  double weight = 1.0;
  bool locked = false;
  std::vector<McdaNode> children;
  std::string metric;                 // model nodes only
  std::optional<ValueFunction> val;   // model nodes only
};

void validate_tree(const McdaNode& root);

using MetricValue = std::variant<double, std::string>;

struct Alternative {
  std::string name;
  std::map<std::string, MetricValue> metrics;
};

struct PreferenceRanking {
  std::vector<std::pair<std::string, double>> entries;  // preference descending, ties by name

  double at(std::string_view name) const;
};

double evaluate(const McdaNode& tree, const Alternative& a);
PreferenceRanking rank_alternatives(const McdaNode& tree, std::span<const Alternative> alts);

// Sets the weight of the node addressed by child names from the root and
// redistributes the remaining mass over its unlocked siblings proportionally
// to their prior weights (uniformly when those are all zero).
McdaNode rebalance_weights(const McdaNode& tree, std::span<const std::string> path,
                           double new_weight);

struct DefaultTree {
  McdaNode tree;
  std::vector<Alternative> alternatives;
};

// Two-branch default hierarchy: a data-evidence branch (weight = data_share)
// scoring the RReliefF weight through an anchored piecewise val, and an
// expert-judgment branch with equally weighted impact, controllability and
// difficulty criteria on the 1..5 scale (difficulty decreasing). Alternatives
// cover every factor named by either source; a factor missing a weight gets 0,
// missing criterion scores stay at the neutral 3.
DefaultTree build_default_tree(const WeightVector& wv,
                               const std::map<std::string, MeanCriteria>& scores,
                               double data_share);

McdaNode load_tree_json(const std::filesystem::path& path);
void write_tree_json(const McdaNode& tree, std::ostream& out);

// CSV rows factor,preference,rank.
void write_ranking_csv(const PreferenceRanking& ranking, std::ostream& out);

}  // namespace facet
