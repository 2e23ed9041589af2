#include "felis/csv.hpp"

#include <algorithm>
#include <fstream>

#include "felis/error.hpp"

namespace felis::csv {

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

std::string join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) line.push_back(',');
        line += escape(fields[i]);
    }
    return line;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(ch);
        }
    }
    if (quoted) {
        throw InvalidInput("CSV: unterminated quoted field");
    }
    fields.push_back(std::move(current));
    return fields;
}

std::size_t Table::column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw InvalidInput("CSV: missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("cannot open CSV file " + path.string());
    }
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InvalidInput(path.string() + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(table.header.size()) + " fields, found " +
                               std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) {
        throw InvalidInput("CSV file " + path.string() + " has no header");
    }
    return table;
}

}  // namespace felis::csv
