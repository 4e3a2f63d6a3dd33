#pragma once

#include "mfgp/grid.hpp"

#include <string>
#include <vector>

namespace mfgp {

// Row-per-time-node table: header "t,<x_0>,...,<x_{n-1}>", values printed with %.17g.
struct Table {
    std::vector<double> t, x;
    std::vector<double> values;  // row-major t.size() x x.size()
};

Table table_from_field(const Field& f);
// single-column table with header "t,<name>"
void write_series_csv(const std::string& path, const std::vector<double>& t, const std::vector<double>& v,
                      const std::string& name);
void write_table_csv(const std::string& path, const Table& table);
Table read_table_csv(const std::string& path);
std::vector<double> read_series_csv(const std::string& path);

// Generic CSV with a header row and numeric rows.
void write_rows_csv(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_rows_csv(const std::string& path, std::vector<std::string>* header = nullptr);

std::string format_double(double v);

}  // namespace mfgp
