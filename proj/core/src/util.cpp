#include "hmc/util.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace hmc {

std::uint64_t fnv1a64(const void* bytes, std::size_t len, std::uint64_t state) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  for (std::size_t i = 0; i < len; ++i) {
    state ^= p[i];
    state *= 0x100000001b3ull;
  }
  return state;
}

std::uint64_t fnv1a64(const std::string& s, std::uint64_t state) {
  return fnv1a64(s.data(), s.size(), state);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  if (t.empty()) throw InputError(context + ": empty numeric field");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0' || errno == ERANGE)
    throw InputError(context + ": cannot parse '" + t + "' as a real number");
  return v;
}

std::int64_t parse_int(const std::string& s, const std::string& context) {
  const std::string t = trim(s);
  if (t.empty()) throw InputError(context + ": empty integer field");
  errno = 0;
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 10);
  if (end == t.c_str() || *end != '\0' || errno == ERANGE)
    throw InputError(context + ": cannot parse '" + t + "' as an integer");
  return static_cast<std::int64_t>(v);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

bool file_exists(const std::string& path) {
  return std::filesystem::exists(path);
}

std::uint64_t hash_file(const std::string& path) {
  return fnv1a64(read_text_file(path));
}

std::string sanitize_for_path(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
        c == '_')
      out.push_back(c);
    else
      out.push_back('_');
  }
  return out.empty() ? "_" : out;
}

}  // namespace hmc
