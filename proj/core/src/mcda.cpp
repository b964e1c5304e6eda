#include "facet/mcda.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "csv.hpp"
#include "facet/errors.hpp"

namespace facet {

namespace {

constexpr double kWeightTolerance = 1e-9;

void check_unit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError(fmt::format("{} must lie in [0,1], got {}", what, v));
}

bool kind_allows_child(NodeKind parent, NodeKind child) {
  switch (parent) {
    case NodeKind::Root:
    case NodeKind::Directory:
      return child == NodeKind::Directory || child == NodeKind::Criterion;
    case NodeKind::Criterion:
      return child == NodeKind::Model || child == NodeKind::Criterion;
    case NodeKind::Model:
      return false;
  }
  return false;
}

void validate_node(const McdaNode& node, bool is_root) {
  if (is_root != (node.kind == NodeKind::Root))
    throw ValidationError(is_root ? "tree root must have kind root"
                                  : fmt::format("node '{}': kind root below the root", node.name));
  if (node.kind == NodeKind::Model) {
    if (!node.children.empty())
      throw ValidationError(fmt::format("model node '{}' cannot have children", node.name));
    if (node.metric.empty())
      throw ValidationError(fmt::format("model node '{}' is missing its metric", node.name));
    if (!node.val)
      throw ValidationError(fmt::format("model node '{}' is missing its value function", node.name));
    return;
  }
  if (!node.metric.empty() || node.val)
    throw ValidationError(
        fmt::format("node '{}' is not a model and cannot bind a metric", node.name));
  if (node.children.empty())
    throw ValidationError(fmt::format("{} node '{}' needs at least one child",
                                      to_string(node.kind), node.name));

  double sum = 0.0;
  std::set<std::string_view> names;
  for (const McdaNode& child : node.children) {
    if (!kind_allows_child(node.kind, child.kind))
      throw ValidationError(fmt::format("{} node '{}' cannot hold a {} child",
                                        to_string(node.kind), node.name, to_string(child.kind)));
    check_unit(child.weight, fmt::format("weight of node '{}'", child.name));
    if (!child.name.empty() && !names.insert(child.name).second)
      throw ValidationError(fmt::format("node '{}': duplicate child name '{}'", node.name,
                                        child.name));
    sum += child.weight;
    validate_node(child, false);
  }
  if (std::fabs(sum - 1.0) > kWeightTolerance)
    throw ValidationError(fmt::format("children of node '{}' have weights summing to {}, not 1",
                                      node.name, sum));
}

const McdaNode* find_node(const McdaNode& node, std::span<const std::string> path) {
  if (path.empty()) return &node;
  for (const McdaNode& child : node.children)
    if (child.name == path.front())
      return find_node(child, path.subspan(1));
  return nullptr;
}

NodeKind parse_kind(const std::string& s) {
  if (s == "root") return NodeKind::Root;
  if (s == "directory") return NodeKind::Directory;
  if (s == "criterion") return NodeKind::Criterion;
  if (s == "model") return NodeKind::Model;
  throw ValidationError(fmt::format("unknown node kind '{}'", s));
}

ValueFunction parse_val(const nlohmann::json& spec, const std::string& node_name) {
  if (!spec.is_object())
    throw ValidationError(fmt::format("node '{}': val must be an object", node_name));
  for (const auto& [key, value] : spec.items())
    if (key != "points" && key != "categories" && key != "default")
      throw ValidationError(fmt::format("node '{}': unknown val key '{}'", node_name, key));
  if (spec.contains("points") == spec.contains("categories"))
    throw ValidationError(
        fmt::format("node '{}': val needs exactly one of points or categories", node_name));
  if (spec.contains("points")) {
    std::vector<std::pair<double, double>> points;
    for (const nlohmann::json& p : spec.at("points")) {
      if (!p.is_array() || p.size() != 2)
        throw ValidationError(fmt::format("node '{}': each point must be [x, value]", node_name));
      points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    return ValueFunction::piecewise(std::move(points));
  }
  std::map<std::string, double> categories;
  for (const auto& [level, v] : spec.at("categories").items())
    categories[level] = v.get<double>();
  if (!spec.contains("default"))
    throw ValidationError(
        fmt::format("node '{}': categorical val needs a default", node_name));
  return ValueFunction::categorical(std::move(categories), spec.at("default").get<double>());
}

McdaNode parse_node(const nlohmann::json& spec, bool is_root) {
  if (!spec.is_object()) throw ValidationError("tree node must be a JSON object");
  for (const auto& [key, value] : spec.items())
    if (key != "kind" && key != "name" && key != "weight" && key != "lock" && key != "children" &&
        key != "model")
      throw ValidationError(fmt::format("unknown tree key '{}'", key));
  McdaNode node;
  if (!spec.contains("kind")) throw ValidationError("tree node is missing its kind");
  node.kind = parse_kind(spec.at("kind").get<std::string>());
  if (spec.contains("name")) node.name = spec.at("name").get<std::string>();
  if (is_root) {
    if (spec.contains("weight")) throw ValidationError("the root node carries no weight");
    node.weight = 1.0;
  } else {
    if (!spec.contains("weight"))
      throw ValidationError(fmt::format("node '{}' is missing its weight", node.name));
    node.weight = spec.at("weight").get<double>();
  }
  if (spec.contains("lock")) node.locked = spec.at("lock").get<bool>();
  if (spec.contains("model")) {
    const nlohmann::json& model = spec.at("model");
    for (const auto& [key, value] : model.items())
      if (key != "metric" && key != "val")
        throw ValidationError(fmt::format("node '{}': unknown model key '{}'", node.name, key));
    node.metric = model.at("metric").get<std::string>();
    node.val = parse_val(model.at("val"), node.name.empty() ? node.metric : node.name);
    if (node.name.empty()) node.name = node.metric;
  }
  if (spec.contains("children"))
    for (const nlohmann::json& child : spec.at("children"))
      node.children.push_back(parse_node(child, false));
  return node;
}

nlohmann::ordered_json node_to_json(const McdaNode& node, bool is_root) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(node.kind));
  if (!node.name.empty()) j["name"] = node.name;
  if (!is_root) j["weight"] = node.weight;
  if (node.locked) j["lock"] = true;
  if (node.kind == NodeKind::Model) {
    nlohmann::ordered_json val;
    if (node.val->is_piecewise()) {
      nlohmann::ordered_json points = nlohmann::ordered_json::array();
      for (const auto& [x, y] : node.val->points()) points.push_back({x, y});
      val["points"] = std::move(points);
    } else {
      nlohmann::ordered_json categories = nlohmann::ordered_json::object();
      for (const auto& [level, v] : node.val->categories()) categories[level] = v;
      val["categories"] = std::move(categories);
      val["default"] = node.val->fallback();
    }
    j["model"] = {{"metric", node.metric}, {"val", std::move(val)}};
  } else {
    nlohmann::ordered_json children = nlohmann::ordered_json::array();
    for (const McdaNode& child : node.children) children.push_back(node_to_json(child, false));
    j["children"] = std::move(children);
  }
  return j;
}

// Anchors (min,0), (0,0.5), (max,1), skipping any anchor that does not extend
// the x order strictly.
ValueFunction weight_val(const WeightVector& wv) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& [name, w] : wv.weights) {
    lo = any ? std::min(lo, w) : w;
    hi = any ? std::max(hi, w) : w;
    any = true;
  }
  std::vector<std::pair<double, double>> points{{lo, 0.0}};
  if (0.0 > lo) points.emplace_back(0.0, 0.5);
  if (hi > points.back().first) points.emplace_back(hi, 1.0);
  return ValueFunction::piecewise(std::move(points));
}

ValueFunction likert_val(bool increasing) {
  std::vector<std::pair<double, double>> points;
  for (int level = 1; level <= 5; ++level) {
    const double v = static_cast<double>(level - 1) / 4.0;
    points.emplace_back(level, increasing ? v : 1.0 - v);
  }
  return ValueFunction::piecewise(std::move(points));
}

McdaNode model_node(std::string name, std::string metric, ValueFunction val, double weight) {
  McdaNode node;
  node.kind = NodeKind::Model;
  node.name = std::move(name);
  node.weight = weight;
  node.metric = std::move(metric);
  node.val = std::move(val);
  return node;
}

McdaNode criterion_node(std::string name, double weight, McdaNode model) {
  McdaNode node;
  node.kind = NodeKind::Criterion;
  node.name = std::move(name);
  node.weight = weight;
  model.weight = 1.0;
  node.children.push_back(std::move(model));
  return node;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Root: return "root";
    case NodeKind::Directory: return "directory";
    case NodeKind::Criterion: return "criterion";
    case NodeKind::Model: return "model";
  }
  return "?";
}

ValueFunction ValueFunction::piecewise(std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw ValidationError("piecewise val needs at least one breakpoint");
  for (std::size_t i = 0; i < points.size(); ++i) {
    check_unit(points[i].second, "piecewise val output");
    if (i > 0 && points[i].first <= points[i - 1].first)
      throw ValidationError(
          fmt::format("piecewise val breakpoints must strictly increase ({} after {})",
                      points[i].first, points[i - 1].first));
  }
  ValueFunction f;
  f.repr_ = Piecewise{std::move(points)};
  return f;
}

ValueFunction ValueFunction::categorical(std::map<std::string, double> categories,
                                         double fallback) {
  check_unit(fallback, "categorical val default");
  for (const auto& [level, v] : categories)
    check_unit(v, fmt::format("categorical val output for '{}'", level));
  ValueFunction f;
  f.repr_ = Categorical{std::move(categories), fallback};
  return f;
}

double ValueFunction::operator()(double x) const {
  const auto* pw = std::get_if<Piecewise>(&repr_);
  if (!pw) throw ValidationError("categorical val applied to a numeric metric");
  const auto& pts = pw->points;
  if (x <= pts.front().first) return pts.front().second;
  if (x >= pts.back().first) return pts.back().second;
  auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const auto& p) { return v < p.first; });
  auto lo = hi - 1;
  const double t = (x - lo->first) / (hi->first - lo->first);
  return lo->second + t * (hi->second - lo->second);
}

double ValueFunction::operator()(const std::string& level) const {
  const auto* cat = std::get_if<Categorical>(&repr_);
  if (!cat) throw ValidationError("piecewise val applied to a categorical metric");
  auto it = cat->categories.find(level);
  return it == cat->categories.end() ? cat->fallback : it->second;
}

const std::vector<std::pair<double, double>>& ValueFunction::points() const {
  return std::get<Piecewise>(repr_).points;
}

const std::map<std::string, double>& ValueFunction::categories() const {
  return std::get<Categorical>(repr_).categories;
}

double ValueFunction::fallback() const { return std::get<Categorical>(repr_).fallback; }

void validate_tree(const McdaNode& root) { validate_node(root, true); }

double evaluate(const McdaNode& tree, const Alternative& a) {
  if (tree.kind == NodeKind::Model) {
    auto it = a.metrics.find(tree.metric);
    if (it == a.metrics.end())
      throw ValidationError(fmt::format("alternative '{}' lacks metric '{}' required by node '{}'",
                                        a.name, tree.metric, tree.name));
    const double v = std::holds_alternative<double>(it->second)
                         ? (*tree.val)(std::get<double>(it->second))
                         : (*tree.val)(std::get<std::string>(it->second));
    if (!(v >= 0.0 && v <= 1.0))
      throw Error(fmt::format("val of node '{}' produced {} outside [0,1]", tree.name, v));
    return v;
  }
  double pref = 0.0;
  for (const McdaNode& child : tree.children) pref += child.weight * evaluate(child, a);
  return pref;
}

PreferenceRanking rank_alternatives(const McdaNode& tree, std::span<const Alternative> alts) {
  PreferenceRanking ranking;
  ranking.entries.reserve(alts.size());
  for (const Alternative& a : alts) ranking.entries.emplace_back(a.name, evaluate(tree, a));
  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranking;
}

double PreferenceRanking::at(std::string_view name) const {
  for (const auto& [factor, pref] : entries)
    if (factor == name) return pref;
  throw ValidationError(fmt::format("no preference for '{}'", name));
}

McdaNode rebalance_weights(const McdaNode& tree, std::span<const std::string> path,
                           double new_weight) {
  if (path.empty()) throw ValidationError("rebalancing needs a non-empty node path");
  check_unit(new_weight, "rebalanced weight");

  McdaNode result = tree;
  McdaNode* parent = &result;
  for (std::size_t depth = 0; depth + 1 < path.size(); ++depth) {
    McdaNode* next = nullptr;
    for (McdaNode& child : parent->children)
      if (child.name == path[depth]) next = &child;
    if (!next)
      throw ValidationError(fmt::format("no node named '{}' under '{}'", path[depth],
                                        parent->name));
    parent = next;
  }
  McdaNode* edited = nullptr;
  for (McdaNode& child : parent->children)
    if (child.name == path.back()) edited = &child;
  if (!edited)
    throw ValidationError(fmt::format("no node named '{}' under '{}'", path.back(), parent->name));

  double locked_sum = 0.0;
  double unlocked_sum = 0.0;
  std::size_t unlocked = 0;
  for (const McdaNode& child : parent->children) {
    if (&child == edited) continue;
    if (child.locked) {
      locked_sum += child.weight;
    } else {
      unlocked_sum += child.weight;
      ++unlocked;
    }
  }
  double remainder = 1.0 - new_weight - locked_sum;
  if (remainder < -kWeightTolerance)
    throw ValidationError(
        fmt::format("locked siblings hold {}, leaving no mass for weight {}", locked_sum,
                    new_weight));
  remainder = std::max(remainder, 0.0);
  if (unlocked == 0) {
    if (std::fabs(edited->weight - new_weight) > kWeightTolerance)
      throw ValidationError(
          fmt::format("all siblings of '{}' are locked; its weight cannot change", path.back()));
    return result;
  }

  edited->weight = new_weight;
  for (McdaNode& child : parent->children) {
    if (&child == edited || child.locked) continue;
    child.weight = unlocked_sum > 0.0
                       ? remainder * (child.weight / unlocked_sum)
                       : remainder / static_cast<double>(unlocked);
  }
  return result;
}

DefaultTree build_default_tree(const WeightVector& wv,
                               const std::map<std::string, MeanCriteria>& scores,
                               double data_share) {
  check_unit(data_share, "data share");
  std::set<std::string> universe;
  for (const auto& [name, w] : wv.weights) universe.insert(name);
  for (const auto& [name, s] : scores) universe.insert(name);
  if (universe.empty())
    throw ValidationError("no factors available to build the decision tree");

  McdaNode data_dir;
  data_dir.kind = NodeKind::Directory;
  data_dir.name = "data-evidence";
  data_dir.weight = data_share;
  data_dir.children.push_back(criterion_node(
      "weighting", 1.0, model_node("rrf-weight", "rrf_weight", weight_val(wv), 1.0)));

  McdaNode expert_dir;
  expert_dir.kind = NodeKind::Directory;
  expert_dir.name = "expert-judgment";
  expert_dir.weight = 1.0 - data_share;
  const double third = 1.0 / 3.0;
  expert_dir.children.push_back(criterion_node(
      "impact", third, model_node("impact", "expert_impact", likert_val(true), 1.0)));
  expert_dir.children.push_back(
      criterion_node("controllability", third,
                     model_node("controllability", "expert_controllability", likert_val(true), 1.0)));
  expert_dir.children.push_back(criterion_node(
      "difficulty", 1.0 - 2.0 * third,
      model_node("difficulty", "expert_difficulty", likert_val(false), 1.0)));

  McdaNode root;
  root.kind = NodeKind::Root;
  root.name = "relevancy";
  root.children.push_back(std::move(data_dir));
  root.children.push_back(std::move(expert_dir));
  validate_tree(root);

  std::vector<Alternative> alternatives;
  alternatives.reserve(universe.size());
  for (const std::string& factor : universe) {
    Alternative a;
    a.name = factor;
    double weight = 0.0;
    for (const auto& [name, w] : wv.weights)
      if (name == factor) weight = w;
    MeanCriteria criteria;
    if (auto it = scores.find(factor); it != scores.end()) criteria = it->second;
    a.metrics["rrf_weight"] = weight;
    a.metrics["expert_impact"] = criteria.impact;
    a.metrics["expert_difficulty"] = criteria.difficulty;
    a.metrics["expert_controllability"] = criteria.controllability;
    alternatives.push_back(std::move(a));
  }
  return DefaultTree{std::move(root), std::move(alternatives)};
}

McdaNode load_tree_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open '{}'", path.string()));
  nlohmann::json spec;
  try {
    spec = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.filename().string(), e.what()));
  }
  McdaNode root = parse_node(spec, true);
  validate_tree(root);
  return root;
}

void write_tree_json(const McdaNode& tree, std::ostream& out) {
  out << node_to_json(tree, true).dump(2) << '\n';
}

void write_ranking_csv(const PreferenceRanking& ranking, std::ostream& out) {
  out << "factor,preference,rank\n";
  for (std::size_t i = 0; i < ranking.entries.size(); ++i)
    out << csv::escape(ranking.entries[i].first) << ','
        << csv::format_double(ranking.entries[i].second) << ',' << (i + 1) << '\n';
}

}  // namespace facet
