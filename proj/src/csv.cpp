#include "pspace/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "pspace/error.hpp"

namespace pspace::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (true) {
    // skip leading blanks of the field
    while (i < n && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::string field;
    if (i < n && line[i] == '"') {
      ++i;
      while (i < n) {
        if (line[i] == '"') {
          if (i + 1 < n && line[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            ++i;
            break;
          }
        } else {
          field.push_back(line[i++]);
        }
      }
      while (i < n && line[i] != ',') ++i;
    } else {
      std::size_t start = i;
      while (i < n && line[i] != ',') ++i;
      field = std::string(trim(line.substr(start, i - start)));
    }
    fields.push_back(std::move(field));
    if (i >= n) break;
    ++i;  // comma
  }
  return fields;
}

Reader::Reader(const std::filesystem::path& path, std::vector<std::string> required,
               std::vector<std::string> optional_tail)
    : in_(path), file_(path.string()) {
  if (!in_) throw IoError("cannot open " + file_);
  std::string header;
  if (!std::getline(in_, header)) throw EmptyInputError(file_ + ": empty file (missing header)");
  line_ = 1;
  if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  auto cols = split(header);
  for (auto& c : cols) c = lower(c);

  auto expected = [&] {
    std::string s;
    for (auto& r : required) s += (s.empty() ? "" : ",") + r;
    for (auto& o : optional_tail) s += "[," + o + "]";
    return s;
  };
  if (cols.size() < required.size() || cols.size() > required.size() + optional_tail.size()) {
    fail("bad header, expected " + expected());
  }
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto& want = k < required.size() ? required[k] : optional_tail[k - required.size()];
    if (cols[k] != want) fail("bad header column '" + cols[k] + "', expected " + expected());
  }
  columns_ = cols.size();
}

std::optional<std::vector<std::string>> Reader::next() {
  std::string raw;
  while (std::getline(in_, raw)) {
    ++line_;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (trim(raw).empty()) continue;
    auto fields = split(raw);
    if (fields.size() != columns_) {
      fail("expected " + std::to_string(columns_) + " columns, got " +
           std::to_string(fields.size()));
    }
    return fields;
  }
  return std::nullopt;
}

void Reader::fail(const std::string& reason) const { throw ParseError(file_, line_, reason); }

std::string format_real(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

double round_output(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_real(value).c_str(), nullptr);
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos && trim(field) == field) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

bool parse_real(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

bool parse_int(std::string_view text, int& out) {
  text = trim(text);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace pspace::csv
