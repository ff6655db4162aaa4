#include "qfluor/csv.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "qfluor/types.hpp"

namespace qfluor {

namespace {

std::map<std::string, std::string> parse_fields(const std::string& line)
{
    std::map<std::string, std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& path)
{
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) throw ConfigError(path + ": bad number '" + s + "'");
    return v;
}

} // namespace

int Table::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    return -1;
}

std::vector<double> Table::column_values(int c) const
{
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.at(static_cast<std::size_t>(c)));
    return v;
}

std::string format_number(double v)
{
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_number failed");
    return std::string(buf, p);
}

void write_table(const std::string& path, const Table& t)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << "# format=qfluor-" << t.kind << " version=" << kCsvVersion << " method=" << t.method << " run=" << t.run_id
        << '\n';
    out << "# config=" << t.config << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
        out << '\n';
    }
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

Table read_table(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    Table t;
    std::string line;
    bool have_columns = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# config=", 0) == 0) {
            t.config = line.substr(9);
            continue;
        }
        if (line.rfind("# format=", 0) == 0) {
            auto f = parse_fields(line.substr(2));
            const std::string fmt = f["format"];
            if (fmt.rfind("qfluor-", 0) != 0) throw ConfigError(path + ": not a qfluor table");
            if (f["version"] != std::to_string(kCsvVersion)) throw ConfigError(path + ": unsupported table version");
            t.kind = fmt.substr(7);
            t.method = f["method"];
            t.run_id = f["run"];
            continue;
        }
        if (line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!have_columns) {
            t.columns = cells;
            have_columns = true;
            continue;
        }
        if (cells.size() != t.columns.size()) throw ConfigError(path + ": ragged row");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_number(c, path));
        t.rows.push_back(std::move(row));
    }
    if (t.kind.empty() || !have_columns) throw ConfigError(path + ": missing header");
    return t;
}

} // namespace qfluor
