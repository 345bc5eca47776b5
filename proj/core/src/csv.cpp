#include "fbmclt/csv.hpp"

#include "fbmclt/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fbmclt {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()), in_row_(0) {
    if (header.empty()) throw config_error("csv: header must not be empty");
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += header[i];
    }
    buffer_ += '\n';
}

void CsvWriter::begin_row() {
    if (row_open_) throw config_error("csv: row already open");
    row_open_ = true;
    in_row_ = 0;
}

void CsvWriter::add(double v) { add(format_full(v)); }

void CsvWriter::add(std::int64_t v) { add(std::to_string(v)); }

void CsvWriter::add(const std::string& v) {
    if (!row_open_) throw config_error("csv: no open row");
    if (in_row_ >= columns_) throw config_error("csv: too many fields in row");
    if (in_row_) buffer_ += ',';
    buffer_ += v;
    ++in_row_;
}

void CsvWriter::end_row() {
    if (!row_open_) throw config_error("csv: no open row");
    if (in_row_ != columns_) throw config_error("csv: row has wrong number of fields");
    buffer_ += '\n';
    row_open_ = false;
}

void write_text_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open for writing: " + path);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw config_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fbmclt
