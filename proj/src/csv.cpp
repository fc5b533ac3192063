#include "locpriv/csv.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace locpriv {

std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == delim) {
            out.emplace_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

int Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table read_table(const std::filesystem::path& path, char delim,
                 bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split(line, delim);
        if (first && has_header) {
            t.header = std::move(fields);
        } else {
            t.rows.push_back(std::move(fields));
        }
        first = false;
    }
    return t;
}

struct TableWriter::Impl {
    std::ofstream out;
    char delim;
};

TableWriter::TableWriter(const std::filesystem::path& path, char delim)
    : impl_(new Impl{std::ofstream(path), delim}) {
    if (!impl_->out) {
        delete impl_;
        throw std::runtime_error("cannot write " + path.string());
    }
}

TableWriter::~TableWriter() { delete impl_; }

void TableWriter::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i].find(impl_->delim) != std::string::npos)
            throw std::runtime_error("field contains the delimiter: " + fields[i]);
        if (i) impl_->out << impl_->delim;
        impl_->out << fields[i];
    }
    impl_->out << '\n';
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_int(std::int64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
}

std::string join_int64(const std::vector<std::int64_t>& values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += fmt_int(values[i]);
    }
    return out;
}

std::string join_int(const std::vector<int>& values, char sep) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += sep;
        out += fmt_int(values[i]);
    }
    return out;
}

std::vector<std::int64_t> parse_int64_list(std::string_view field, char sep) {
    std::vector<std::int64_t> out;
    if (field.empty()) return out;
    for (const auto& part : split(field, sep)) out.push_back(std::stoll(part));
    return out;
}

std::vector<int> parse_int_list(std::string_view field, char sep) {
    std::vector<int> out;
    if (field.empty()) return out;
    for (const auto& part : split(field, sep)) out.push_back(std::stoi(part));
    return out;
}

}  // namespace locpriv
