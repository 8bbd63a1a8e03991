#include "pspace/common.hpp"

#include <iostream>
#include <iterator>

#include "pspace/csv.hpp"
#include "pspace/error.hpp"

namespace pspace {

void warn(Warnings* sink, std::string message) {
  if (sink) {
    sink->add(std::move(message));
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

bool is_sorted_unique(const CodeList& codes) {
  return std::adjacent_find(codes.begin(), codes.end(),
                            [](const std::string& a, const std::string& b) { return !(a < b); }) ==
         codes.end();
}

CodeList intersect_codes(const CodeList& a, const CodeList& b) {
  CodeList out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

YearWindow parse_window(std::string_view text) {
  YearWindow w;
  auto colon = text.find(':');
  bool ok = false;
  if (colon == std::string_view::npos) {
    ok = csv::parse_int(text, w.first);
    w.last = w.first;
  } else {
    ok = csv::parse_int(text.substr(0, colon), w.first) &&
         csv::parse_int(text.substr(colon + 1), w.last);
  }
  if (!ok || !w.valid()) {
    throw Error("invalid year window '" + std::string(text) + "' (expected FIRST:LAST)");
  }
  return w;
}

std::string to_string(const YearWindow& window) {
  return std::to_string(window.first) + ":" + std::to_string(window.last);
}

}  // namespace pspace
