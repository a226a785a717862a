#include "hmc/annotations.hpp"

#include <sstream>

#include "hmc/util.hpp"

namespace hmc {

void AnnotationMap::add(const std::string& node, const std::string& cls) {
  if (by_node_[node].insert(cls).second) ++assignments_;
  classes_.insert(cls);
}

bool AnnotationMap::has(const std::string& node, const std::string& cls) const {
  auto it = by_node_.find(node);
  return it != by_node_.end() && it->second.count(cls) > 0;
}

const std::set<std::string>* AnnotationMap::classes_of(
    const std::string& node) const {
  auto it = by_node_.find(node);
  return it == by_node_.end() ? nullptr : &it->second;
}

bool AnnotationMap::knows_class(const std::string& cls) const {
  return classes_.count(cls) > 0;
}

std::vector<std::string> AnnotationMap::extent(const std::string& cls) const {
  std::vector<std::string> out;
  for (const auto& [node, classes] : by_node_)
    if (classes.count(cls)) out.push_back(node);
  return out;
}

AnnotationMap load_annotations_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  AnnotationMap map;
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
                       ": expected `node<TAB>class`, got '" + line + "'");
    const std::string node = trim(fields[0]);
    const std::string cls = trim(fields[1]);
    if (node.empty() || cls.empty())
      throw InputError(path + ":" + std::to_string(lineno) +
                       ": empty node or class identifier");
    map.add(node, cls);
  }
  if (map.empty()) throw InputError(path + ": no annotation records");
  return map;
}

void save_annotations_file(const AnnotationMap& map, const std::string& path) {
  std::string out;
  for (const auto& [node, classes] : map.by_node())
    for (const auto& cls : classes) out += node + "\t" + cls + "\n";
  write_text_file(path, out);
}

}  // namespace hmc
