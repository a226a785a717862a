#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmc/annotations.hpp"
#include "hmc/network.hpp"

namespace hmc {

// Class hierarchy as a DAG of ancestral relations (parent -> child edges).
class Hierarchy {
 public:
  int add_class(const std::string& id);
  void add_edge(const std::string& parent, const std::string& child);

  std::size_t class_count() const { return ids_.size(); }
  std::size_t edge_count() const { return edges_; }
  int index_of(const std::string& id) const;
  int require(const std::string& id) const;
  const std::string& class_id(int i) const { return ids_[i]; }
  const std::vector<std::string>& class_ids() const { return ids_; }
  const std::vector<int>& parents(int i) const { return parents_[i]; }
  const std::vector<int>& children(int i) const { return children_[i]; }

  // Kahn order, parents before children; throws on cycle.
  std::vector<int> topological_order() const;

  // Sorted strict-ancestor index sets, one per class.
  std::vector<std::vector<int>> ancestor_sets() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;
  std::vector<std::vector<int>> children_;
  std::size_t edges_ = 0;
};

Hierarchy hierarchy_from_edges(
    const std::vector<std::pair<std::string, std::string>>& parent_child);

// Tab-separated `parent<TAB>child` directed edges, '#' comments ignored.
Hierarchy load_hierarchy_file(const std::string& path);

// Smallest superset of phi closed under ancestors; idempotent.
AnnotationMap close_annotations(const AnnotationMap& phi, const Hierarchy& h);

// Per-class counts aligned with a Hierarchy's dense indexing.
struct ClassCensus {
  std::vector<std::int64_t> annotated_count;
  std::vector<std::int64_t> descendant_count;
};

// Fills the annotated_count part from a closed annotation map.
ClassCensus annotation_census(const Hierarchy& h, const AnnotationMap& closed);

// Fills the descendant_count part: rho(C) = distinct strict descendants.
ClassCensus descendant_counts(const Hierarchy& h);

// w(parent, child) = |phi-hat^-1(child)| / |phi-hat^-1(parent)|, counts taken
// from the closed annotation map. Throws when the parent count is zero.
double edge_weight(const Hierarchy& h, const ClassCensus& census,
                   const std::string& parent, const std::string& child);

// Tree/forest produced by hierarchy normalization. Shares the source
// hierarchy's class universe and dense indexing.
struct TreeHierarchy {
  std::vector<std::string> class_ids;
  std::unordered_map<std::string, int> index;
  std::vector<int> parent;  // -1 for roots
  std::vector<std::vector<int>> children;
  std::vector<int> roots;

  int index_of(const std::string& id) const;
  int require(const std::string& id) const;
  std::size_t class_count() const { return class_ids.size(); }
  // Roots first, children in identifier order underneath.
  std::vector<int> topological_order() const;
};

// Keeps, for every multi-parent class, the incoming edge whose weight is
// maximal; ties break toward the lexicographically smallest parent. Classes
// with an unpopulated parent extent weigh 0 on that edge.
TreeHierarchy normalize(const Hierarchy& h, const ClassCensus& census);

// Edges of h dropped by normalization, sorted.
std::vector<std::pair<std::string, std::string>> removed_edges(
    const Hierarchy& h, const TreeHierarchy& t);

void save_tree_file(const TreeHierarchy& t, const std::string& path);
TreeHierarchy load_tree_file(const std::string& path);

// A retained subtree of the normalized hierarchy with its node subgraph.
struct SubHierarchy {
  std::string root;
  std::vector<std::string> classes;  // topological order, root first
  std::set<std::string> targets;     // classes inside [min_count, max_count]
  TreeHierarchy tree;                // local tree over `classes`
  Network subgraph;                  // induced on phi-hat^-1(root)
  std::vector<std::string> row_nodes;  // canonical row order (subgraph order)
};

// Sub-hierarchies are the maximal subtrees rooted at each child of every
// global root; subtrees without any target class are discarded. Returned
// ascending by class count, then root identifier.
std::vector<SubHierarchy> split_subhierarchies(const TreeHierarchy& t,
                                               const AnnotationMap& closed,
                                               const Network& net,
                                               std::int64_t min_count = 5,
                                               std::int64_t max_count = 300);

}  // namespace hmc
