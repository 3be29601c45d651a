#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "blocktri/cli.hpp"

namespace blocktri::cli {

using OrderedJson = nlohmann::ordered_json;

struct Report {
  /// Top-level document; keys keep insertion order.
  OrderedJson document = OrderedJson::object();
  /// Per-level table, also embedded in the document under "levels".
  std::vector<std::string> columns;
  std::vector<OrderedJson> rows;
};

void add_row(Report& report, OrderedJson row);

std::string render(const Report& report, OutputFormat format);

OrderedJson matrix_to_json(const ComplexMatrix& m);
OrderedJson vector_to_json(const ComplexVector& v);
OrderedJson config_to_json(const ExperimentConfig& config);

}  // namespace blocktri::cli
