#include "table_io.hpp"

#include "singspec/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace singspec::cli {

namespace {

const char* magic = "#singspec-table";
constexpr int version = 1;

std::string csv_cell(const json& c) {
    if (c.is_string()) {
        std::string s = "\"";
        for (char ch : c.get<std::string>()) {
            if (ch == '"') s += '"';
            s += ch;
        }
        return s + '"';
    }
    if (c.is_null()) return "";
    if (c.is_number_float() && !std::isfinite(c.get<double>())) return "";
    return c.dump();
}

// Splits one CSV record; quoted fields keep a flag so "1" stays a string.
std::vector<std::pair<std::string, bool>> split_record(const std::string& line) {
    std::vector<std::pair<std::string, bool>> out;
    std::string cur;
    bool quoted = false, in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty()) throw validation_error("csv: stray quote");
            in_quotes = quoted = true;
        } else if (ch == ',') {
            out.emplace_back(cur, quoted);
            cur.clear();
            quoted = false;
        } else {
            cur += ch;
        }
    }
    if (in_quotes) throw validation_error("csv: unterminated quote");
    out.emplace_back(cur, quoted);
    return out;
}

json parse_cell(const std::string& s, bool quoted) {
    if (quoted) return s;
    if (s.empty()) return nullptr;
    if (s == "true") return true;
    if (s == "false") return false;
    try {
        json v = json::parse(s);
        if (v.is_number()) return v;
    } catch (const json::exception&) {
    }
    throw validation_error("csv: cell is neither quoted text nor a number: " + s);
}

void check_schema(const table& t) {
    if (t.command.empty()) throw validation_error("table: missing command");
    if (t.columns.empty()) throw validation_error("table: no columns");
    if (!t.params.is_object() || !t.summary.is_object()) throw validation_error("table: params and summary must be objects");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != t.columns.size())
            throw validation_error("table: row " + std::to_string(r) + " has " + std::to_string(t.rows[r].size()) +
                                   " cells, expected " + std::to_string(t.columns.size()));
        for (const auto& c : t.rows[r])
            if (!(c.is_number() || c.is_string() || c.is_boolean() || c.is_null()))
                throw validation_error("table: cells must be scalars");
    }
}

json sanitize(const json& c) {
    if (c.is_number_float() && !std::isfinite(c.get<double>())) return nullptr;
    return c;
}

} // namespace

output_format parse_format(const std::string& s) {
    if (s == "csv") return output_format::csv;
    if (s == "json") return output_format::json;
    throw validation_error("unknown format '" + s + "' (csv or json)");
}

output_format format_for_path(const std::string& path) {
    return std::filesystem::path(path).extension() == ".json" ? output_format::json : output_format::csv;
}

std::string to_csv(const table& t) {
    check_schema(t);
    std::ostringstream s;
    s << magic << ",v" << version << '\n';
    s << "#command," << json(t.command).dump() << '\n';
    s << "#params," << t.params.dump() << '\n';
    s << "#summary," << t.summary.dump() << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) s << (i ? "," : "") << t.columns[i];
    s << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << csv_cell(row[i]);
        s << '\n';
    }
    return s.str();
}

std::string to_json(const table& t) {
    check_schema(t);
    json rows = json::array();
    for (const auto& r : t.rows) {
        json row = json::array();
        for (const auto& c : r) row.push_back(sanitize(c));
        rows.push_back(row);
    }
    json j{{"format", "singspec-table"}, {"version", version}, {"command", t.command}, {"params", t.params},
           {"summary", t.summary},       {"columns", t.columns}, {"rows", rows}};
    return j.dump(2) + '\n';
}

table from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    table t;
    auto meta = [&](const std::string& key) {
        if (!std::getline(in, line) || line.rfind("#" + key + ",", 0) != 0)
            throw validation_error("csv: expected #" + key + " line");
        try {
            return json::parse(line.substr(key.size() + 2));
        } catch (const json::exception& e) {
            throw validation_error("csv: bad #" + key + " line: " + e.what());
        }
    };
    if (!std::getline(in, line) || line != std::string(magic) + ",v" + std::to_string(version))
        throw validation_error("csv: not a singspec table (bad first line)");
    const json cmd = meta("command");
    if (!cmd.is_string()) throw validation_error("csv: command must be a string");
    t.command = cmd.get<std::string>();
    t.params = meta("params");
    t.summary = meta("summary");
    if (!std::getline(in, line)) throw validation_error("csv: missing header");
    for (auto& [name, q] : split_record(line)) t.columns.push_back(name);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<json> row;
        for (auto& [cell, q] : split_record(line)) row.push_back(parse_cell(cell, q));
        t.rows.push_back(std::move(row));
    }
    check_schema(t);
    return t;
}

table from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw validation_error(std::string("json: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "singspec-table" || j.value("version", 0) != version)
        throw validation_error("json: not a singspec table");
    table t;
    try {
        t.command = j.at("command").get<std::string>();
        t.params = j.at("params");
        t.summary = j.at("summary");
        t.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows")) {
            if (!r.is_array()) throw validation_error("json: rows must be arrays");
            t.rows.emplace_back(r.begin(), r.end());
        }
    } catch (const json::exception& e) {
        throw validation_error(std::string("json: ") + e.what());
    }
    check_schema(t);
    return t;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw validation_error("cannot open " + tmp + " for writing");
        f << content;
        if (!f) throw validation_error("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw validation_error("cannot rename " + tmp + ": " + ec.message());
    }
}

table load_table(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return from_json(text);
    return from_csv(text);
}

} // namespace singspec::cli
