#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "blocktri/cli.hpp"

namespace blocktri::cli {

namespace {

using Json = nlohmann::json;

struct Location {
  std::size_t line = 1;
  std::size_t column = 1;
};

Location locate(const std::string& text, std::size_t offset) {
  Location loc;
  offset = std::min(offset, text.size());
  for (std::size_t i = 0; i < offset; ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

[[noreturn]] void fail_at(const std::string& text, std::size_t offset,
                          const std::string& message) {
  const Location loc = locate(text, offset);
  throw ParseError(message, loc.line, loc.column);
}

// Schema errors are reported at the offending key, or at the start of the
// document when the key is missing.
std::size_t key_offset(const std::string& text, const std::string& key) {
  const std::size_t pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : pos;
}

Index read_extent(const Json& doc, const std::string& text,
                  const std::string& key) {
  if (!doc.contains(key))
    fail_at(text, 0, "missing field \"" + key + "\"");
  const Json& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() < 0)
    fail_at(text, key_offset(text, key),
            "field \"" + key + "\" must be a non-negative integer");
  return static_cast<Index>(v.get<long long>());
}

std::string format_double(double x) { return Json(x).dump(); }

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t line,
                       std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) +
                         ": " + message),
      line_(line),
      column_(column) {}

ComplexMatrix parse_matrix(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail_at(text, e.byte > 0 ? e.byte - 1 : 0, "malformed document");
  }
  if (!doc.is_object()) fail_at(text, 0, "expected an object");

  const Index rows = read_extent(doc, text, "rows");
  const Index cols = read_extent(doc, text, "cols");
  if (!doc.contains("entries")) fail_at(text, 0, "missing field \"entries\"");
  const Json& entries = doc["entries"];
  const std::size_t at = key_offset(text, "entries");
  if (!entries.is_array()) fail_at(text, at, "\"entries\" must be an array");
  if (entries.size() != static_cast<std::size_t>(rows * cols))
    fail_at(text, at,
            "expected " + std::to_string(rows * cols) + " entries, found " +
                std::to_string(entries.size()));

  ComplexMatrix m(rows, cols);
  std::size_t k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j, ++k) {
      const Json& e = entries[k];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
          !e[1].is_number())
        fail_at(text, at,
                "entry " + std::to_string(k) + " must be a [re, im] pair");
      m(i, j) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

std::string format_matrix(const ComplexMatrix& m) {
  std::ostringstream os;
  os << "{\n  \"rows\": " << m.rows() << ",\n  \"cols\": " << m.cols()
     << ",\n  \"entries\": [";
  bool first = true;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      const Complex z = m(i, j);
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("format_matrix: non-finite entry at (" +
                                    std::to_string(i) + ", " +
                                    std::to_string(j) + ")");
      os << (first ? "\n    [" : ",\n    [") << format_double(z.real()) << ", "
         << format_double(z.imag()) << "]";
      first = false;
    }
  }
  os << (first ? "]\n}\n" : "\n  ]\n}\n");
  return os.str();
}

ComplexMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_matrix(buffer.str());
}

void write_matrix(const std::filesystem::path& path, const ComplexMatrix& m) {
  write_file_atomically(path, format_matrix(m));
}

void write_file_atomically(const std::filesystem::path& path,
                           const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace blocktri::cli
