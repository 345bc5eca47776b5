#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace fbmclt {

// 17 significant digits: the shortest form that round-trips every double
std::string format_full(double v);

// buffered CSV assembly; the whole table is built in memory and written once,
// so partially written files never hit disk on error
class CsvWriter {
  public:
    explicit CsvWriter(std::vector<std::string> header);

    void begin_row();
    void add(double v);
    void add(std::int64_t v);
    void add(const std::string& v);
    void end_row();

    const std::string& contents() const { return buffer_; }
    void write(const std::string& path) const;

  private:
    std::size_t columns_;
    std::size_t in_row_;
    bool row_open_ = false;
    std::string buffer_;
};

void write_text_file(const std::string& path, const std::string& contents);
std::string read_text_file(const std::string& path);

} // namespace fbmclt
