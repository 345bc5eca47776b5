#pragma once

#include <string>

namespace fbmclt {

// lowercase hex SHA-256 of a byte string
std::string sha256_hex(const std::string& bytes);

std::string sha256_file_hex(const std::string& path);

} // namespace fbmclt
