#include "hmc/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace hmc {

std::optional<NodeId> Network::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId Network::require(const std::string& id) const {
  auto v = find(id);
  if (!v) throw std::invalid_argument("unknown network node '" + id + "'");
  return *v;
}

bool Network::has_edge(NodeId a, NodeId b) const {
  const auto& adj = adj_[a];
  auto it = std::lower_bound(
      adj.begin(), adj.end(), b,
      [](const std::pair<NodeId, double>& e, NodeId v) { return e.first < v; });
  return it != adj.end() && it->first == b;
}

void NetworkBuilder::declare_nodes(const std::vector<std::string>& ids) {
  for (const auto& id : ids) intern(id, "node list");
  declared_only_ = true;
}

NodeId NetworkBuilder::intern(const std::string& id, const std::string& context) {
  auto it = net_.index_.find(id);
  if (it != net_.index_.end()) return it->second;
  if (declared_only_)
    throw InputError(context + ": edge endpoint '" + id +
                     "' is not a declared node");
  NodeId v = static_cast<NodeId>(net_.ids_.size());
  net_.ids_.push_back(id);
  net_.index_.emplace(id, v);
  net_.adj_.emplace_back();
  return v;
}

void NetworkBuilder::add_edge(const std::string& a, const std::string& b,
                              double weight, const std::string& context) {
  if (a == b)
    throw InputError(context + ": self-loop on node '" + a + "' rejected");
  if (!(weight >= 0.0))
    throw InputError(context + ": negative or non-finite weight " +
                     format_double(weight) + " rejected");
  NodeId va = intern(a, context);
  NodeId vb = intern(b, context);
  NodeId lo = std::min(va, vb);
  NodeId hi = std::max(va, vb);
  std::uint64_t key = (static_cast<std::uint64_t>(lo) << 32) | hi;
  auto [it, inserted] = seen_pairs_.emplace(key, weight);
  if (!inserted) {
    if (it->second != weight)
      throw InputError(context + ": duplicate pair (" + a + ", " + b +
                       ") with conflicting weight rejected");
    throw InputError(context + ": duplicate unordered pair (" + a + ", " + b +
                     ") rejected");
  }
  net_.adj_[va].emplace_back(vb, weight);
  net_.adj_[vb].emplace_back(va, weight);
  ++net_.edges_;
}

Network NetworkBuilder::build() {
  for (auto& adj : net_.adj_) std::sort(adj.begin(), adj.end());
  return std::move(net_);
}

Network load_network(const std::vector<EdgeRecord>& records,
                     const std::vector<std::string>* node_list) {
  if (records.empty() && (node_list == nullptr || node_list->empty()))
    throw InputError("empty edge record set");
  NetworkBuilder builder;
  if (node_list != nullptr) builder.declare_nodes(*node_list);
  std::size_t i = 0;
  for (const auto& r : records) {
    ++i;
    builder.add_edge(r.a, r.b, r.weight, "record " + std::to_string(i));
  }
  return builder.build();
}

Network load_network_file(const std::string& edge_path,
                          const std::string& node_list_path) {
  NetworkBuilder builder;
  if (!node_list_path.empty()) {
    std::istringstream in(read_text_file(node_list_path));
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      ids.push_back(t);
    }
    builder.declare_nodes(ids);
  }
  std::istringstream in(read_text_file(edge_path));
  std::string line;
  std::size_t lineno = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3)
      throw InputError(edge_path + ":" + std::to_string(lineno) +
                       ": expected `node_a<TAB>node_b<TAB>weight`");
    const std::string context = edge_path + ":" + std::to_string(lineno);
    double w = parse_double(fields[2], context);
    if (w < 0.0) throw InputError(context + ": negative weight rejected");
    builder.add_edge(trim(fields[0]), trim(fields[1]), w, context);
    ++records;
  }
  if (records == 0 && node_list_path.empty())
    throw InputError(edge_path + ": no edge records");
  return builder.build();
}

void save_network_file(const Network& net, const std::string& path) {
  std::string out;
  for (NodeId v = 0; v < net.node_count(); ++v)
    for (const auto& [u, w] : net.neighbors(v))
      if (v < u)
        out += net.node_id(v) + "\t" + net.node_id(u) + "\t" + format_double(w) +
               "\n";
  write_text_file(path, out);
}

const std::vector<std::string>& NodeFeatureTable::column_names() {
  static const std::vector<std::string> names = {
      "degree", "average_neighbor_degree", "degree_centrality",
      "closeness_centrality", "eccentricity", "clustering_coefficient"};
  return names;
}

double NodeFeatureTable::value(NodeId v, std::size_t column) const {
  const NodeFeatureRow& r = rows[v];
  switch (column) {
    case 0: return r.degree;
    case 1: return r.average_neighbor_degree;
    case 2: return r.degree_centrality;
    case 3: return r.closeness_centrality;
    case 4: return r.eccentricity;
    case 5: return r.clustering_coefficient;
    default: throw std::out_of_range("feature column");
  }
}

namespace {

// BFS distances from src; unreachable entries stay -1.
void bfs_distances(const Network& net, NodeId src, std::vector<int>& dist) {
  std::fill(dist.begin(), dist.end(), -1);
  std::queue<NodeId> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (const auto& [u, w] : net.neighbors(v)) {
      (void)w;
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push(u);
      }
    }
  }
}

}  // namespace

NodeFeatureTable topological_features(const Network& net) {
  const std::size_t n = net.node_count();
  if (n == 0) throw std::invalid_argument("empty network");
  NodeFeatureTable table;
  table.rows.resize(n);

  for (NodeId v = 0; v < n; ++v) {
    NodeFeatureRow& row = table.rows[v];
    const auto& adj = net.neighbors(v);
    row.degree = static_cast<double>(adj.size());
    row.degree_centrality = n > 1 ? row.degree / static_cast<double>(n - 1) : 0.0;
    if (!adj.empty()) {
      double sum = 0;
      for (const auto& [u, w] : adj) {
        (void)w;
        sum += static_cast<double>(net.degree(u));
      }
      row.average_neighbor_degree = sum / static_cast<double>(adj.size());
    }
    // Triangle count over the sorted adjacency.
    if (adj.size() >= 2) {
      std::size_t links = 0;
      for (std::size_t i = 0; i < adj.size(); ++i)
        for (std::size_t j = i + 1; j < adj.size(); ++j)
          if (net.has_edge(adj[i].first, adj[j].first)) ++links;
      double possible = row.degree * (row.degree - 1.0) / 2.0;
      row.clustering_coefficient = static_cast<double>(links) / possible;
    }
  }

  // Closeness (harmonic, normalized by |V|-1) and per-component eccentricity.
  std::vector<int> dist(n);
  for (NodeId v = 0; v < n; ++v) {
    bfs_distances(net, v, dist);
    double inv_sum = 0;
    int ecc = 0;
    for (NodeId u = 0; u < n; ++u) {
      if (u == v || dist[u] < 0) continue;
      inv_sum += 1.0 / static_cast<double>(dist[u]);
      ecc = std::max(ecc, dist[u]);
    }
    table.rows[v].closeness_centrality =
        n > 1 ? inv_sum / static_cast<double>(n - 1) : 0.0;
    table.rows[v].eccentricity = static_cast<double>(ecc);
  }
  return table;
}

void save_features_file(const NodeFeatureTable& table, const Network& net,
                        const std::string& path) {
  std::string out = "node";
  for (const auto& name : NodeFeatureTable::column_names()) out += "\t" + name;
  out += "\n";
  for (NodeId v = 0; v < net.node_count(); ++v) {
    out += net.node_id(v);
    for (std::size_t c = 0; c < NodeFeatureTable::column_names().size(); ++c)
      out += "\t" + format_double(table.value(v, c));
    out += "\n";
  }
  write_text_file(path, out);
}

NodeFeatureTable load_features_file(const std::string& path,
                                    const Network& net) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty feature file");
  NodeFeatureTable table;
  table.rows.resize(net.node_count());
  std::size_t seen = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 1 + NodeFeatureTable::column_names().size())
      throw InputError(path + ": malformed feature row '" + line + "'");
    NodeId v = net.require(fields[0]);
    NodeFeatureRow& r = table.rows[v];
    r.degree = parse_double(fields[1], path);
    r.average_neighbor_degree = parse_double(fields[2], path);
    r.degree_centrality = parse_double(fields[3], path);
    r.closeness_centrality = parse_double(fields[4], path);
    r.eccentricity = parse_double(fields[5], path);
    r.clustering_coefficient = parse_double(fields[6], path);
    ++seen;
  }
  if (seen != net.node_count())
    throw InputError(path + ": feature rows do not cover every network node");
  return table;
}

std::vector<double> neighborhood_class_ratio(const Network& net,
                                             const AnnotationMap& closed,
                                             const std::string& cls) {
  if (!closed.knows_class(cls))
    throw std::invalid_argument("unknown class '" + cls + "'");
  std::vector<char> annotated(net.node_count(), 0);
  for (NodeId v = 0; v < net.node_count(); ++v)
    if (closed.has(net.node_id(v), cls)) annotated[v] = 1;
  std::vector<double> out(net.node_count(), 0.0);
  for (NodeId v = 0; v < net.node_count(); ++v) {
    const auto& adj = net.neighbors(v);
    if (adj.empty()) continue;
    std::size_t hits = 0;
    for (const auto& [u, w] : adj) {
      (void)w;
      if (annotated[u]) ++hits;
    }
    out[v] = static_cast<double>(hits) / static_cast<double>(adj.size());
  }
  return out;
}

}  // namespace hmc
