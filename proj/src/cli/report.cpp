#include "report.hpp"

#include <sstream>

namespace blocktri::cli {

namespace {

std::string csv_cell(const OrderedJson& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return v.dump();
}

}  // namespace

void add_row(Report& report, OrderedJson row) {
  for (const auto& item : row.items()) {
    bool known = false;
    for (const auto& c : report.columns) known = known || c == item.key();
    if (!known) report.columns.push_back(item.key());
  }
  report.rows.push_back(std::move(row));
}

std::string render(const Report& report, OutputFormat format) {
  if (format == OutputFormat::json) {
    OrderedJson doc = report.document;
    doc["levels"] = OrderedJson::array();
    for (const auto& row : report.rows) doc["levels"].push_back(row);
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  for (std::size_t c = 0; c < report.columns.size(); ++c)
    os << (c ? "," : "") << report.columns[c];
  os << "\n";
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      const auto it = row.find(report.columns[c]);
      os << (c ? "," : "") << (it == row.end() ? "" : csv_cell(*it));
    }
    os << "\n";
  }
  return os.str();
}

OrderedJson matrix_to_json(const ComplexMatrix& m) {
  OrderedJson entries = OrderedJson::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      entries.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

OrderedJson vector_to_json(const ComplexVector& v) {
  OrderedJson out = OrderedJson::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

OrderedJson config_to_json(const ExperimentConfig& config) {
  OrderedJson out;
  out["command"] = to_string(config.command);
  OrderedJson inputs = OrderedJson::array();
  for (const auto& p : config.inputs) inputs.push_back(p.string());
  out["inputs"] = inputs;
  out["schedule"] = to_string(config.schedule);
  out["levels"] = config.levels;
  OrderedJson tolerances = OrderedJson::object();
  for (const auto& [name, value] : config.tolerances) tolerances[name] = value;
  out["tolerances"] = tolerances;
  out["seed"] = config.seed;
  out["format"] = config.format == OutputFormat::json ? "json" : "csv";
  out["verify"] = config.verify;
  out["counterexample"] = config.counterexample;
  out["word_len"] = config.word_len;
  out["random"] = config.random;
  if (config.size) out["size"] = *config.size;
  out["padded"] = config.padded;
  return out;
}

}  // namespace blocktri::cli
