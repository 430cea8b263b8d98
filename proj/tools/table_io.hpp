#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace singspec::cli {

using json = nlohmann::json;

// Uniform command output: parameters, scalar summary, and a row table.
struct table {
    std::string command;
    json params = json::object();
    json summary = json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<json>> rows; // cells are numbers, strings or booleans
};

enum class output_format { csv, json };

output_format parse_format(const std::string& s);
// csv unless the path ends in .json.
output_format format_for_path(const std::string& path);

std::string to_csv(const table& t);
std::string to_json(const table& t);
table from_csv(const std::string& text);
table from_json(const std::string& text);

// Writes to path.tmp and renames, so readers never see a partial file.
void write_atomic(const std::string& path, const std::string& content);

// Reads either format (sniffed from the first character) and checks the schema.
table load_table(const std::string& path);

} // namespace singspec::cli
