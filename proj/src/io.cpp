#include "mfgp/io.hpp"

#include "mfgp/error.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace mfgp {

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    return out;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    return cells;
}

double parse_cell(const std::string& s, const std::string& path, int line)
{
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
        throw Error(path + ":" + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

}  // namespace

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Table table_from_field(const Field& f)
{
    const Grid& g = f.grid();
    Table t;
    for (int n = 0; n < g.nt(); ++n) t.t.push_back(g.t(n));
    for (int j = 0; j < g.nx(); ++j) t.x.push_back(g.x(j));
    t.values = f.values();
    return t;
}

void write_table_csv(const std::string& path, const Table& table)
{
    std::ofstream out = open_out(path);
    out << "t";
    for (double x : table.x) out << ',' << format_double(x);
    out << '\n';
    const std::size_t nx = table.x.size();
    for (std::size_t n = 0; n < table.t.size(); ++n) {
        out << format_double(table.t[n]);
        for (std::size_t j = 0; j < nx; ++j) out << ',' << format_double(table.values[n * nx + j]);
        out << '\n';
    }
}

Table read_table_csv(const std::string& path)
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows = read_rows_csv(path, &header);
    Table t;
    for (std::size_t j = 1; j < header.size(); ++j) t.x.push_back(parse_cell(header[j], path, 1));
    for (const auto& r : rows) {
        t.t.push_back(r[0]);
        t.values.insert(t.values.end(), r.begin() + 1, r.end());
    }
    return t;
}

void write_series_csv(const std::string& path, const std::vector<double>& t, const std::vector<double>& v,
                      const std::string& name)
{
    std::vector<std::vector<double>> rows;
    for (std::size_t n = 0; n < t.size(); ++n) rows.push_back({t[n], v[n]});
    write_rows_csv(path, {"t", name}, rows);
}

std::vector<double> read_series_csv(const std::string& path)
{
    std::vector<double> v;
    for (const auto& r : read_rows_csv(path)) {
        if (r.size() != 2) throw Error(path + ": expected two columns");
        v.push_back(r[1]);
    }
    return v;
}

void write_rows_csv(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<double>>& rows)
{
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_double(r[i]);
        out << '\n';
    }
}

std::vector<std::vector<double>> read_rows_csv(const std::string& path, std::vector<std::string>* header)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::string line;
    if (!std::getline(in, line)) throw Error(path + ": empty file");
    std::vector<std::string> head = split(line);
    if (header) *header = head;
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split(line);
        if (cells.size() != head.size())
            throw Error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(head.size()) + " columns");
        std::vector<double> r;
        for (const auto& c : cells) r.push_back(parse_cell(c, path, lineno));
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace mfgp
