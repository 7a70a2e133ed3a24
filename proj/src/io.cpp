#include "mmrl/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmrl/errors.hpp"

namespace mmrl {

std::string format_double(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << contents;
}

void ensure_directory(const std::string& path) { std::filesystem::create_directories(path); }

}  // namespace mmrl
