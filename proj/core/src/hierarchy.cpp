#include "hmc/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace hmc {

int Hierarchy::add_class(const std::string& id) {
  auto it = index_.find(id);
  if (it != index_.end()) return it->second;
  int i = static_cast<int>(ids_.size());
  ids_.push_back(id);
  index_.emplace(id, i);
  parents_.emplace_back();
  children_.emplace_back();
  return i;
}

void Hierarchy::add_edge(const std::string& parent, const std::string& child) {
  if (parent == child)
    throw InputError("hierarchy self-edge on class '" + parent + "'");
  int p = add_class(parent);
  int c = add_class(child);
  auto& kids = children_[p];
  if (std::find(kids.begin(), kids.end(), c) != kids.end()) return;
  kids.push_back(c);
  parents_[c].push_back(p);
  ++edges_;
}

int Hierarchy::index_of(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

int Hierarchy::require(const std::string& id) const {
  int i = index_of(id);
  if (i < 0) throw std::invalid_argument("unknown class '" + id + "'");
  return i;
}

std::vector<int> Hierarchy::topological_order() const {
  const int n = static_cast<int>(ids_.size());
  std::vector<int> in_degree(n, 0);
  for (int c = 0; c < n; ++c) in_degree[c] = static_cast<int>(parents_[c].size());
  std::deque<int> queue;
  for (int c = 0; c < n; ++c)
    if (in_degree[c] == 0) queue.push_back(c);
  std::vector<int> order;
  order.reserve(n);
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    order.push_back(v);
    for (int u : children_[v])
      if (--in_degree[u] == 0) queue.push_back(u);
  }
  if (static_cast<int>(order.size()) != n)
    throw std::invalid_argument("hierarchy contains a cycle");
  return order;
}

std::vector<std::vector<int>> Hierarchy::ancestor_sets() const {
  const auto order = topological_order();
  std::vector<std::set<int>> anc(ids_.size());
  for (int v : order) {
    for (int p : parents_[v]) {
      anc[v].insert(p);
      anc[v].insert(anc[p].begin(), anc[p].end());
    }
  }
  std::vector<std::vector<int>> out(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i)
    out[i].assign(anc[i].begin(), anc[i].end());
  return out;
}

Hierarchy hierarchy_from_edges(
    const std::vector<std::pair<std::string, std::string>>& parent_child) {
  Hierarchy h;
  for (const auto& [p, c] : parent_child) h.add_edge(p, c);
  return h;
}

Hierarchy load_hierarchy_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  Hierarchy h;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": expected `parent<TAB>child`");
    h.add_edge(trim(fields[0]), trim(fields[1]));
  }
  if (h.class_count() == 0) throw InputError(path + ": no hierarchy edges");
  return h;
}

AnnotationMap close_annotations(const AnnotationMap& phi, const Hierarchy& h) {
  for (const auto& cls : phi.class_set())
    if (h.index_of(cls) < 0)
      throw std::invalid_argument("unknown class '" + cls +
                                  "' in annotation map");
  const auto ancestors = h.ancestor_sets();  // validates acyclicity
  AnnotationMap closed;
  for (const auto& [node, classes] : phi.by_node()) {
    for (const auto& cls : classes) {
      int c = h.index_of(cls);
      closed.add(node, cls);
      for (int a : ancestors[c]) closed.add(node, h.class_id(a));
    }
  }
  return closed;
}

ClassCensus annotation_census(const Hierarchy& h, const AnnotationMap& closed) {
  ClassCensus census;
  census.annotated_count.assign(h.class_count(), 0);
  census.descendant_count.assign(h.class_count(), 0);
  for (const auto& [node, classes] : closed.by_node()) {
    (void)node;
    for (const auto& cls : classes) {
      int i = h.index_of(cls);
      if (i < 0)
        throw std::invalid_argument("annotation references unknown class '" +
                                    cls + "'");
      ++census.annotated_count[i];
    }
  }
  return census;
}

ClassCensus descendant_counts(const Hierarchy& h) {
  const auto order = h.topological_order();
  const std::size_t n = h.class_count();
  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> reach(n);
  ClassCensus census;
  census.annotated_count.assign(n, 0);
  census.descendant_count.assign(n, 0);
  // Reverse topological order: children processed before parents.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    int v = *it;
    auto& bits = reach[v];
    bits.assign(words, 0);
    for (int c : h.children(v)) {
      bits[c / 64] |= (1ull << (c % 64));
      const auto& cb = reach[c];
      for (std::size_t w = 0; w < words; ++w) bits[w] |= cb[w];
    }
    std::int64_t count = 0;
    for (std::size_t w = 0; w < words; ++w)
      count += __builtin_popcountll(bits[w]);
    census.descendant_count[v] = count;
  }
  return census;
}

double edge_weight(const Hierarchy& h, const ClassCensus& census,
                   const std::string& parent, const std::string& child) {
  int p = h.require(parent);
  int c = h.require(child);
  std::int64_t pc = census.annotated_count[p];
  if (pc <= 0)
    throw std::invalid_argument("unpopulated ancestor '" + parent +
                                "': annotated count is zero");
  return static_cast<double>(census.annotated_count[c]) /
         static_cast<double>(pc);
}

int TreeHierarchy::index_of(const std::string& id) const {
  auto it = index.find(id);
  return it == index.end() ? -1 : it->second;
}

int TreeHierarchy::require(const std::string& id) const {
  int i = index_of(id);
  if (i < 0) throw std::invalid_argument("unknown class '" + id + "'");
  return i;
}

std::vector<int> TreeHierarchy::topological_order() const {
  std::vector<int> order;
  order.reserve(class_ids.size());
  std::vector<int> sorted_roots = roots;
  std::sort(sorted_roots.begin(), sorted_roots.end(),
            [&](int a, int b) { return class_ids[a] < class_ids[b]; });
  std::deque<int> queue(sorted_roots.begin(), sorted_roots.end());
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    order.push_back(v);
    std::vector<int> kids = children[v];
    std::sort(kids.begin(), kids.end(),
              [&](int a, int b) { return class_ids[a] < class_ids[b]; });
    for (int k : kids) queue.push_back(k);
  }
  return order;
}

TreeHierarchy normalize(const Hierarchy& h, const ClassCensus& census) {
  if (census.annotated_count.size() != h.class_count())
    throw std::invalid_argument("census does not cover all classes");
  h.topological_order();  // cycle check

  TreeHierarchy t;
  t.class_ids = h.class_ids();
  for (std::size_t i = 0; i < t.class_ids.size(); ++i)
    t.index.emplace(t.class_ids[i], static_cast<int>(i));
  t.parent.assign(h.class_count(), -1);
  t.children.assign(h.class_count(), {});

  for (int c = 0; c < static_cast<int>(h.class_count()); ++c) {
    const auto& parents = h.parents(c);
    if (parents.empty()) {
      t.roots.push_back(c);
      continue;
    }
    // w(p, c) = count(c)/count(p). For a fixed child the numerator is shared,
    // so the maximal weight is the minimal positive parent count; parents with
    // count 0 weigh 0. Integer comparison keeps ties exact.
    int best = -1;
    for (int p : parents) {
      if (best < 0) {
        best = p;
        continue;
      }
      std::int64_t bp = census.annotated_count[best];
      std::int64_t np = census.annotated_count[p];
      bool better;
      if ((np > 0) != (bp > 0)) {
        better = np > 0;  // positive weight beats zero weight
      } else if (np > 0 && np != bp) {
        better = np < bp;  // smaller parent extent means larger ratio
      } else {
        better = h.class_id(p) < h.class_id(best);  // lexicographic tie-break
      }
      if (better) best = p;
    }
    t.parent[c] = best;
    t.children[best].push_back(c);
  }
  std::sort(t.roots.begin(), t.roots.end());
  for (auto& kids : t.children) std::sort(kids.begin(), kids.end());
  return t;
}

std::vector<std::pair<std::string, std::string>> removed_edges(
    const Hierarchy& h, const TreeHierarchy& t) {
  std::vector<std::pair<std::string, std::string>> out;
  for (int c = 0; c < static_cast<int>(h.class_count()); ++c)
    for (int p : h.parents(c))
      if (t.parent[c] != p) out.emplace_back(h.class_id(p), h.class_id(c));
  std::sort(out.begin(), out.end());
  return out;
}

void save_tree_file(const TreeHierarchy& t, const std::string& path) {
  std::string out;
  std::vector<std::pair<std::string, std::string>> edges;
  for (std::size_t c = 0; c < t.class_ids.size(); ++c)
    if (t.parent[c] >= 0)
      edges.emplace_back(t.class_ids[t.parent[c]], t.class_ids[c]);
  std::sort(edges.begin(), edges.end());
  for (const auto& [p, c] : edges) out += p + "\t" + c + "\n";
  // Single-class forests still need their roots recorded.
  for (int r : t.roots)
    if (t.children[r].empty() && t.parent[r] < 0)
      out += "# root\t" + t.class_ids[r] + "\n";
  write_text_file(path, out);
}

TreeHierarchy load_tree_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  Hierarchy h;
  std::vector<std::string> isolated;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t.rfind("# root\t", 0) == 0) {
      isolated.push_back(trim(t.substr(7)));
      continue;
    }
    if (t[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 2)
      throw InputError(path + ": expected `parent<TAB>child` tree edge");
    h.add_edge(trim(fields[0]), trim(fields[1]));
  }
  for (const auto& id : isolated) h.add_class(id);
  TreeHierarchy t;
  t.class_ids = h.class_ids();
  for (std::size_t i = 0; i < t.class_ids.size(); ++i)
    t.index.emplace(t.class_ids[i], static_cast<int>(i));
  t.parent.assign(h.class_count(), -1);
  t.children.assign(h.class_count(), {});
  for (int c = 0; c < static_cast<int>(h.class_count()); ++c) {
    const auto& parents = h.parents(c);
    if (parents.size() > 1)
      throw InputError(path + ": class '" + h.class_id(c) +
                       "' has multiple parents; not a tree");
    if (parents.empty()) {
      t.roots.push_back(c);
    } else {
      t.parent[c] = parents[0];
      t.children[parents[0]].push_back(c);
    }
  }
  std::sort(t.roots.begin(), t.roots.end());
  for (auto& kids : t.children) std::sort(kids.begin(), kids.end());
  return t;
}

namespace {

Network induce_subgraph(const Network& net,
                        const std::vector<std::string>& node_ids) {
  std::vector<NodeId> indices;
  indices.reserve(node_ids.size());
  for (const auto& id : node_ids) {
    auto v = net.find(id);
    if (!v)
      throw std::invalid_argument("annotated node '" + id +
                                  "' is missing from the network");
    indices.push_back(*v);
  }
  std::sort(indices.begin(), indices.end());
  std::vector<char> member(net.node_count(), 0);
  for (NodeId v : indices) member[v] = 1;
  NetworkBuilder builder;
  std::vector<std::string> ordered_ids;
  ordered_ids.reserve(indices.size());
  for (NodeId v : indices) ordered_ids.push_back(net.node_id(v));
  builder.declare_nodes(ordered_ids);
  for (NodeId v : indices)
    for (const auto& [u, w] : net.neighbors(v))
      if (v < u && member[u])
        builder.add_edge(net.node_id(v), net.node_id(u), w, "subgraph");
  return builder.build();
}

}  // namespace

std::vector<SubHierarchy> split_subhierarchies(const TreeHierarchy& t,
                                               const AnnotationMap& closed,
                                               const Network& net,
                                               std::int64_t min_count,
                                               std::int64_t max_count) {
  if (min_count < 1 || min_count > max_count)
    throw std::invalid_argument("class-size bounds must satisfy 1 <= min <= max");

  std::unordered_map<std::string, std::int64_t> count;
  for (const auto& [node, classes] : closed.by_node()) {
    (void)node;
    for (const auto& cls : classes) ++count[cls];
  }
  auto count_of = [&](const std::string& cls) {
    auto it = count.find(cls);
    return it == count.end() ? 0 : it->second;
  };

  // Sub-hierarchy roots: the children of every global root.
  std::vector<int> sub_roots;
  for (int r : t.roots)
    for (int c : t.children[r]) sub_roots.push_back(c);
  std::sort(sub_roots.begin(), sub_roots.end(), [&](int a, int b) {
    return t.class_ids[a] < t.class_ids[b];
  });

  std::vector<SubHierarchy> subs;
  for (int root : sub_roots) {
    // Collect the subtree in BFS order, children sorted by identifier.
    std::vector<int> subtree;
    std::deque<int> queue{root};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      subtree.push_back(v);
      std::vector<int> kids = t.children[v];
      std::sort(kids.begin(), kids.end(), [&](int a, int b) {
        return t.class_ids[a] < t.class_ids[b];
      });
      for (int k : kids) queue.push_back(k);
    }

    SubHierarchy sub;
    sub.root = t.class_ids[root];
    for (int v : subtree) {
      const std::string& id = t.class_ids[v];
      sub.classes.push_back(id);
      std::int64_t n = count_of(id);
      if (n >= min_count && n <= max_count) sub.targets.insert(id);
    }
    if (sub.targets.empty()) continue;

    // Local tree over the subtree classes.
    sub.tree.class_ids = sub.classes;
    for (std::size_t i = 0; i < sub.classes.size(); ++i)
      sub.tree.index.emplace(sub.classes[i], static_cast<int>(i));
    sub.tree.parent.assign(sub.classes.size(), -1);
    sub.tree.children.assign(sub.classes.size(), {});
    for (std::size_t i = 1; i < sub.classes.size(); ++i) {
      int global = t.require(sub.classes[i]);
      int gp = t.parent[global];
      int lp = sub.tree.index_of(t.class_ids[gp]);
      sub.tree.parent[i] = lp;
      sub.tree.children[lp].push_back(static_cast<int>(i));
    }
    sub.tree.roots = {0};
    for (auto& kids : sub.tree.children) std::sort(kids.begin(), kids.end());

    sub.subgraph = induce_subgraph(net, closed.extent(sub.root));
    sub.row_nodes = sub.subgraph.node_ids();
    subs.push_back(std::move(sub));
  }

  if (subs.empty()) throw std::invalid_argument("no classes in range");
  std::sort(subs.begin(), subs.end(), [](const SubHierarchy& a,
                                         const SubHierarchy& b) {
    if (a.classes.size() != b.classes.size())
      return a.classes.size() < b.classes.size();
    return a.root < b.root;
  });
  return subs;
}

}  // namespace hmc
