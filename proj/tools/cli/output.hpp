#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace onsager::cli {

using Params = std::vector<std::pair<std::string, std::string>>;

std::string format_number(double x);

/// Numeric table emitted as CSV (comma, LF) or as a JSON array of row objects.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// "# key: value" lines: version, command, seed, then every parameter.
void write_csv_header(std::ostream& os, const std::string& command, unsigned long long seed, const Params& params);
void write_csv(std::ostream& os, const Table& table);
std::string table_json(const std::string& command, unsigned long long seed, const Params& params,
                       const Table& table);

}  // namespace onsager::cli
