#include "cli/output.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "json.hpp"

namespace onsager::cli {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

void write_csv_header(std::ostream& os, const std::string& command, unsigned long long seed, const Params& params) {
  os << "# onsager " << ONSAGER_VERSION << "\n";
  os << "# command: " << command << "\n";
  os << "# seed: " << seed << "\n";
  for (const auto& [k, v] : params) os << "# " << k << ": " << v << "\n";
}

void write_csv(std::ostream& os, const Table& table) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_number(row[c]);
    os << "\n";
  }
}

std::string table_json(const std::string& command, unsigned long long seed, const Params& params,
                       const Table& table) {
  nlohmann::ordered_json doc;
  doc["header"]["version"] = ONSAGER_VERSION;
  doc["header"]["command"] = command;
  doc["header"]["seed"] = seed;
  for (const auto& [k, v] : params) doc["header"]["parameters"][k] = v;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json obj;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (std::isfinite(row[c])) {
        obj[table.columns[c]] = row[c];
      } else {
        obj[table.columns[c]] = nullptr;
      }
    }
    doc["rows"].push_back(obj);
  }
  return doc.dump(2) + "\n";
}

}  // namespace onsager::cli
