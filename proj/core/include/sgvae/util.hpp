#pragma once

#include <string>
#include <vector>

namespace sgvae {

// Shortest decimal form that parses back to exactly the same float64.
// Used for every number we write to CSV or stdout so output bytes are
// stable across runs and platforms with the same libc++.
std::string format_double(double v);

std::string join(const std::vector<std::string>& parts, char sep);
std::string join_ints(const std::vector<int>& values, char sep);

}  // namespace sgvae
