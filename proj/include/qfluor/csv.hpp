// csv.hpp: numeric tables with a versioned comment header
//
// Layout:
//   # format=qfluor-<kind> version=1 method=<m> run=<id>
//   # config=<single-line JSON>
//   col1,col2,...
//   rows of numbers, shortest round-trip formatting
//
// dynamics:  t,P_z[,norm,sigma2]
// spectrum:  t, then one column per mode named by its frequency

#pragma once

#include <string>
#include <vector>

namespace qfluor {

struct Table {
    std::string kind;   // dynamics | spectrum
    std::string method; // davydov | tlme | rwa_tlme | heom
    std::string run_id;
    std::string config; // JSON echo
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const; // -1 if absent
    std::vector<double> column_values(int c) const;
};

inline constexpr int kCsvVersion = 1;

// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

void write_table(const std::string& path, const Table& table);
Table read_table(const std::string& path);

} // namespace qfluor
