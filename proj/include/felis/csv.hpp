#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace felis::csv {

/// Quotes a field when it contains a comma, quote or line break.
std::string escape(const std::string& field);

std::string join(const std::vector<std::string>& fields);

/// Splits one RFC 4180 record (no embedded line breaks).
std::vector<std::string> split(const std::string& line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header; throws InvalidInput when absent.
    std::size_t column(const std::string& name) const;
};

/// Reads a CSV file with a header line. Every row must have the header's
/// field count. Blank lines are skipped.
Table read(const std::filesystem::path& path);

}  // namespace felis::csv
