#pragma once

// Command-line front end: matrix files, reports and pipeline dispatch.
//
// Matrix files are JSON documents
//
//   {"rows": 2, "cols": 2, "entries": [[re, im], [re, im], ...]}
//
// with entries in row-major order. Numbers are written in shortest
// round-trip form, so read(write(m)) == m bit for bit.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "blocktri/block_tridiag.hpp"

namespace blocktri::cli {

/// Malformed matrix file. Line and column are 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

ComplexMatrix parse_matrix(const std::string& text);
std::string format_matrix(const ComplexMatrix& m);

ComplexMatrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const ComplexMatrix& m);

/// Writes through a sibling temporary file and renames it into place.
void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents);

enum class Command {
  tridiagonalize,
  triangularize,
  certify,
  counterexample,
  decompose,
  stripped_checks,
};

enum class OutputFormat { json, csv };

std::optional<Command> parse_command(const std::string& name);
const char* to_string(Command c);

struct ExperimentConfig {
  Command command = Command::counterexample;
  std::vector<std::filesystem::path> inputs;
  ScheduleKind schedule = ScheduleKind::pair;
  bool schedule_given = false;
  /// 0 selects the schedule default: 4 for pair, 5 for single.
  int levels = 0;
  std::map<std::string, double> tolerances;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output;
  OutputFormat format = OutputFormat::json;
  bool verify = false;
  bool counterexample = false;
  /// Maximum word length; 0 selects the command default.
  int word_len = 0;
  /// Seeded generated inputs in place of files.
  bool random = false;
  /// Dimension of generated dense inputs; defaults to the schedule total.
  std::optional<Index> size;
  bool padded = false;
};

/// Tolerance names accepted as --tol-<name>.
const std::vector<std::string>& tolerance_names();

inline constexpr int exit_pass = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_input = 3;

/// Runs one pipeline, writes the report to config.output (or `out`), and
/// returns the exit status: 0 pass/certified, 1 refuted or failed checks,
/// 2 usage or I/O errors, 3 malformed or mismatched inputs.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv (CLI11) and calls run.
int main_entry(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err);

}  // namespace blocktri::cli
