#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pspace::csv {

// Splits one CSV record. Handles double-quoted fields with "" escapes;
// surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> split(std::string_view line);

// Reads a CSV file line by line, validating the header first.
class Reader {
 public:
  // `required` columns must appear first and in order; `optional_tail`
  // columns may follow.
  Reader(const std::filesystem::path& path, std::vector<std::string> required,
         std::vector<std::string> optional_tail = {});

  // Next non-empty record, or nullopt at EOF.
  std::optional<std::vector<std::string>> next();

  std::size_t line() const noexcept { return line_; }
  std::size_t columns() const noexcept { return columns_; }
  const std::string& file() const noexcept { return file_; }

  [[noreturn]] void fail(const std::string& reason) const;

 private:
  std::ifstream in_;
  std::string file_;
  std::size_t line_ = 0;
  std::size_t columns_ = 0;
};

// Numeric output used by every writer: 12 significant digits, shortest form.
std::string format_real(double value);

// Rounds a value to what format_real would print, for JSON emitters.
double round_output(double value);

std::string quote(std::string_view field);

// Opens for writing, throwing IoError when the path is unwritable.
std::ofstream open_output(const std::filesystem::path& path);

bool parse_real(std::string_view text, double& out);
bool parse_int(std::string_view text, int& out);

}  // namespace pspace::csv
