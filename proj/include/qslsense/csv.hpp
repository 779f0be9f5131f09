#pragma once

// Numeric CSV tables: one header line of column names (units in the names),
// then rows of numbers written with a fixed number of significant digits.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qslsense/policy.hpp"

namespace qsl::csv {

inline constexpr int kDefaultDigits = 12;

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ConfigError("csv: no column named '" + name + "'");
    }

    std::vector<double> column_values(const std::string &name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto &r : rows) out.push_back(r.at(c));
        return out;
    }
};

/// Shortest "%.<digits>g" rendering; identical doubles always print identically.
inline std::string format_number(double v, int digits = kDefaultDigits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline void write(std::ostream &os, const Table &t, int digits = kDefaultDigits) {
    for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
    os << '\n';
    for (const auto &row : t.rows) {
        if (row.size() != t.header.size()) throw ContractError("csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_number(row[i], digits);
        os << '\n';
    }
}

inline std::string to_string(const Table &t, int digits = kDefaultDigits) {
    std::ostringstream os;
    write(os, t, digits);
    return os.str();
}

/// Thrown when an output file cannot be created.
class WriteError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void write_file(const std::filesystem::path &path, const Table &t, int digits = kDefaultDigits) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw WriteError("cannot open '" + path.string() + "' for writing");
    write(f, t, digits);
    if (!f) throw WriteError("failed while writing '" + path.string() + "'");
}

inline Table read(std::istream &is) {
    Table t;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: empty input");
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) t.header.push_back(cell);
    }
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception &) {
                throw ConfigError("csv: line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
            }
        }
        if (row.size() != t.header.size())
            throw ConfigError("csv: line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                              " fields, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table read_string(const std::string &text) {
    std::istringstream is(text);
    return read(is);
}

inline Table read_file(const std::filesystem::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open '" + path.string() + "'");
    return read(f);
}

}  // namespace qsl::csv
