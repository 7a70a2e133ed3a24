#pragma once

#include <string>

namespace mmrl {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& contents);
void ensure_directory(const std::string& path);

}  // namespace mmrl
