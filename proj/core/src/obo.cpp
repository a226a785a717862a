#include "hmc/obo.hpp"

#include <set>
#include <sstream>

#include "hmc/util.hpp"

namespace hmc {

namespace {

struct Stanza {
  std::string id;
  std::vector<std::string> is_a;
  bool obsolete = false;
};

std::string strip_obo_comment(const std::string& value) {
  auto pos = value.find(" ! ");
  if (pos == std::string::npos) pos = value.find('!');
  return trim(pos == std::string::npos ? value : value.substr(0, pos));
}

}  // namespace

Hierarchy parse_obo_lite(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<Stanza> terms;
  Stanza current;
  bool in_term = false;

  auto flush = [&] {
    if (in_term && !current.id.empty() && !current.obsolete)
      terms.push_back(current);
    current = Stanza{};
  };

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '[') {
      flush();
      in_term = t == "[Term]";
      continue;
    }
    if (!in_term) continue;
    auto colon = t.find(':');
    if (colon == std::string::npos) continue;
    std::string key = trim(t.substr(0, colon));
    std::string value = trim(t.substr(colon + 1));
    if (key == "id") {
      current.id = strip_obo_comment(value);
    } else if (key == "is_a") {
      current.is_a.push_back(strip_obo_comment(value));
    } else if (key == "is_obsolete") {
      if (strip_obo_comment(value) == "true") current.obsolete = true;
    }
    // relationship:, part_of and friends are intentionally ignored.
  }
  flush();

  std::set<std::string> declared;
  for (const auto& term : terms) declared.insert(term.id);

  std::vector<std::string> dangling;
  Hierarchy h;
  for (const auto& term : terms) h.add_class(term.id);
  for (const auto& term : terms)
    for (const auto& parent : term.is_a) {
      if (!declared.count(parent)) {
        dangling.push_back(term.id + " is_a " + parent);
        continue;
      }
      h.add_edge(parent, term.id);
    }
  if (!dangling.empty()) {
    std::string msg = "dangling is_a references:";
    for (const auto& d : dangling) msg += " [" + d + "]";
    throw InputError(msg);
  }
  try {
    h.topological_order();
  } catch (const std::exception&) {
    throw InputError("ontology contains an is_a cycle");
  }
  if (h.class_count() == 0) throw InputError("no [Term] stanzas found");
  return h;
}

Hierarchy load_obo_file(const std::string& path) {
  return parse_obo_lite(read_text_file(path));
}

}  // namespace hmc
