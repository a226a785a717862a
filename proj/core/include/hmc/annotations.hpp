#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace hmc {

// Partial assignment of classes to network nodes (phi), and after closure
// its true-path completion (phi-hat). Ordered containers keep iteration
// deterministic everywhere the map is serialized.
class AnnotationMap {
 public:
  void add(const std::string& node, const std::string& cls);

  bool has(const std::string& node, const std::string& cls) const;
  const std::set<std::string>* classes_of(const std::string& node) const;
  bool knows_class(const std::string& cls) const;

  const std::map<std::string, std::set<std::string>>& by_node() const {
    return by_node_;
  }
  const std::set<std::string>& class_set() const { return classes_; }

  // phi^-1(cls): sorted node identifiers carrying cls.
  std::vector<std::string> extent(const std::string& cls) const;

  std::size_t node_count() const { return by_node_.size(); }
  std::size_t assignment_count() const { return assignments_; }
  bool empty() const { return by_node_.empty(); }

 private:
  std::map<std::string, std::set<std::string>> by_node_;
  std::set<std::string> classes_;
  std::size_t assignments_ = 0;
};

// Tab-separated `node<TAB>class`, one pair per line, '#' comments ignored.
AnnotationMap load_annotations_file(const std::string& path);
void save_annotations_file(const AnnotationMap& map, const std::string& path);

}  // namespace hmc
