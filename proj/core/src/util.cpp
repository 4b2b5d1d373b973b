#include "sgvae/util.hpp"

#include <charconv>
#include <stdexcept>

namespace sgvae {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc())
    throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, ptr);
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

std::string join_ints(const std::vector<int>& values, char sep) {
  std::vector<std::string> parts;
  parts.reserve(values.size());
  for (int v : values) parts.push_back(std::to_string(v));
  return join(parts, sep);
}

}  // namespace sgvae
