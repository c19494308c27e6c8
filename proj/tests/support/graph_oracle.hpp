#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace deriva::test {

// Independent containment-graph oracle. Tests mirror every membership edge
// they create into this structure; ancestor/closure queries run plain BFS
// over it, with no catalog involvement.
class GraphOracle {
public:
  void add_edge(const std::string& parent, const std::string& child) {
    parents_of_[child].insert(parent);
    children_of_[parent].insert(child);
  }
  void remove_edge(const std::string& parent, const std::string& child) {
    parents_of_[child].erase(parent);
    children_of_[parent].erase(child);
  }

  std::set<std::string> ancestors(const std::string& node) const {
    std::set<std::string> seen;
    std::vector<std::string> frontier{node};
    while (!frontier.empty()) {
      auto current = frontier.back();
      frontier.pop_back();
      auto it = parents_of_.find(current);
      if (it == parents_of_.end()) continue;
      for (const auto& p : it->second)
        if (seen.insert(p).second) frontier.push_back(p);
    }
    seen.erase(node);
    return seen;
  }

  // Reachable descendants (nested datasets and leaves), node excluded.
  std::set<std::string> closure(const std::string& node) const {
    std::set<std::string> seen;
    std::vector<std::string> frontier{node};
    while (!frontier.empty()) {
      auto current = frontier.back();
      frontier.pop_back();
      auto it = children_of_.find(current);
      if (it == children_of_.end()) continue;
      for (const auto& c : it->second)
        if (seen.insert(c).second) frontier.push_back(c);
    }
    seen.erase(node);
    return seen;
  }

  bool would_cycle(const std::string& parent, const std::string& child) const {
    if (parent == child) return true;
    auto reach = closure(child);
    return reach.count(parent) > 0;
  }

private:
  std::map<std::string, std::set<std::string>> parents_of_;
  std::map<std::string, std::set<std::string>> children_of_;
};

} // namespace deriva::test
