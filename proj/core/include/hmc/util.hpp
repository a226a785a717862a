#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmc {

// Malformed user input: files, config values, CLI arguments. Maps to exit code 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A pipeline stage failure; carries the stage name and, when known, the
// sub-hierarchy root. Maps to exit code 2 unless caused by bad input.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, std::string sub, const std::string& what,
                bool input_error = false)
      : std::runtime_error(what),
        stage_(std::move(stage)),
        sub_(std::move(sub)),
        input_error_(input_error) {}

  const std::string& stage() const { return stage_; }
  const std::string& sub() const { return sub_; }
  bool is_input_error() const { return input_error_; }

 private:
  std::string stage_;
  std::string sub_;
  bool input_error_;
};

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

std::uint64_t fnv1a64(const void* bytes, std::size_t len,
                      std::uint64_t state = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s,
                      std::uint64_t state = 0xcbf29ce484222325ull);

std::string to_hex(std::uint64_t v);

// %.17g: shortest decimal that round-trips an IEEE double exactly.
std::string format_double(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char delim);

// Strict numeric parsers: reject trailing garbage.
double parse_double(const std::string& s, const std::string& context);
std::int64_t parse_int(const std::string& s, const std::string& context);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
bool file_exists(const std::string& path);
std::uint64_t hash_file(const std::string& path);

// Replaces path-hostile characters in identifiers used as directory names.
std::string sanitize_for_path(const std::string& id);

}  // namespace hmc
