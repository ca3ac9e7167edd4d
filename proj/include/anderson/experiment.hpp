#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anderson/geometry.hpp"

namespace anderson {

// Flat sectioned key-value configuration ("[section]" headers, "key = value"
// lines, '#' or ';' comments). Keys before the first header belong to the
// "run" section.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(const std::string& text, const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key) const;
  std::string get_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;
  long integer_or(const std::string& section, const std::string& key, long fallback) const;
  bool flag_or(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& section, const std::string& key) const;
  std::vector<std::string> words(const std::string& section, const std::string& key) const;

  // Canonical "key=value;" listing of one section, keys sorted.
  std::string canonical(const std::string& section) const;
  const std::string& base_dir() const { return base_dir_; }

  // Builds the [domain] section. Vertex files are resolved against base_dir.
  PlanarDomain domain() const;

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
  std::string base_dir_ = ".";
};

struct RunOptions {
  std::string out_dir = ".";
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;  // overrides [run] seed
};

struct RunResult {
  int exit_code = 0;  // 0 pass, 1 usage/schema error, 2 statistical-quality failure
  std::string message;
  std::vector<std::string> files;  // written CSVs
};

inline constexpr const char* kCsvSchema = "anderson-lab/v1";

// Commands: silt-validate, trace, mass, recover, minkowski.
RunResult run_command(const std::string& command, const ExperimentConfig& config,
                      const RunOptions& options);

// Exact decimal formatting used in every CSV ("%.17g").
std::string format_number(double v);

// Parsed CSV produced by one of the commands.
struct CsvTable {
  std::map<std::string, std::string> header;  // "# key=value" lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws Schema if absent
};

CsvTable read_csv(const std::string& path);

}  // namespace anderson
