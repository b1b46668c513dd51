#include "cuspsim/csv.hpp"
#include "cuspsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cuspsim {

void CsvTable::add_column(std::string name, std::vector<double> values) {
    if (!data.empty() && values.size() != rows()) {
        throw ConfigError("column '" + name + "' has " + std::to_string(values.size()) + " rows, table has " +
                          std::to_string(rows()));
    }
    if (has_column(name)) throw ConfigError("duplicate column '" + name + "'");
    columns.push_back(std::move(name));
    data.push_back(std::move(values));
}

bool CsvTable::has_column(const std::string& name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
}

const std::vector<double>& CsvTable::column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ConfigError("no column named '" + name + "'");
    return data[static_cast<std::size_t>(it - columns.begin())];
}

std::string CsvTable::meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return {};
}

RealSeries CsvTable::series(const std::string& name) const {
    return {column("t"), column(name), name};
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string to_csv_string(const CsvTable& table) {
    std::ostringstream out;
    for (const auto& [k, v] : table.metadata) out << "# " << k << ": " << v << '\n';
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << format_double(table.data[c][r]);
        out << '\n';
    }
    return out.str();
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ConfigError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    }
    return v;
}

} // namespace

CsvTable parse_csv_string(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (line.front() == '#') {
            const std::string body = trim(std::string_view(line).substr(1));
            const auto colon = body.find(':');
            if (colon != std::string::npos) {
                table.metadata.emplace_back(trim(std::string_view(body).substr(0, colon)),
                                            trim(std::string_view(body).substr(colon + 1)));
            }
            continue;
        }
        auto fields = split(line);
        if (!have_header) {
            for (auto& f : fields) table.add_column(std::move(f), {});
            have_header = true;
            continue;
        }
        if (fields.size() != table.columns.size()) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(table.columns.size()) + " fields, got " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < fields.size(); ++c) table.data[c].push_back(parse_double(fields[c], line_no));
    }
    if (!have_header) throw ConfigError("CSV has no header row");
    return table;
}

void write_csv(const std::string& path, const CsvTable& table) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        out << to_csv_string(table);
        if (!out.flush()) throw ConfigError("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv_string(buf.str());
}

} // namespace cuspsim
