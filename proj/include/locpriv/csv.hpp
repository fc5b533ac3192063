#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace locpriv {

// Minimal delimiter-separated text handling. None of the formats used by
// this project quote fields, so no quoting logic is implemented; writers
// reject fields containing the delimiter instead of silently corrupting.

std::vector<std::string> split(std::string_view line, char delim);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(std::string_view name) const;  // -1 when absent
};

// Throws std::runtime_error when the file cannot be opened.
Table read_table(const std::filesystem::path& path, char delim,
                 bool has_header);

class TableWriter {
public:
    TableWriter(const std::filesystem::path& path, char delim = ',');
    ~TableWriter();

    void write_row(const std::vector<std::string>& fields);

private:
    struct Impl;
    Impl* impl_;
};

// Stable, locale-independent numeric formatting for deterministic outputs.
std::string fmt_double(double v);
std::string fmt_int(std::int64_t v);

// Joins values with `sep` (used for the ';'-packed list columns).
std::string join_int64(const std::vector<std::int64_t>& values, char sep);
std::string join_int(const std::vector<int>& values, char sep);
std::vector<std::int64_t> parse_int64_list(std::string_view field, char sep);
std::vector<int> parse_int_list(std::string_view field, char sep);

}  // namespace locpriv
