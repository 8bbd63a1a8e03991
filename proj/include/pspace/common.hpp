#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace pspace {

// Sorted, duplicate-free list of country or product codes. Matrix rows and
// columns follow this order, so index order is lexicographic code order.
using CodeList = std::vector<std::string>;

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline std::optional<std::size_t> find_code(const CodeList& codes, std::string_view code) {
  auto it = std::lower_bound(codes.begin(), codes.end(), code,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == codes.end() || *it != code) return std::nullopt;
  return static_cast<std::size_t>(it - codes.begin());
}

bool is_sorted_unique(const CodeList& codes);
CodeList intersect_codes(const CodeList& a, const CodeList& b);

// Inclusive range of calendar years.
struct YearWindow {
  int first = 0;
  int last = 0;

  bool contains(int year) const noexcept { return year >= first && year <= last; }
  int years() const noexcept { return last - first + 1; }
  bool valid() const noexcept { return first <= last; }
  friend bool operator==(const YearWindow&, const YearWindow&) = default;
};

// Accepts "1998:2000" or a single year "1995".
YearWindow parse_window(std::string_view text);
std::string to_string(const YearWindow& window);

}  // namespace pspace
