#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pspace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input row. line() is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& reason)
      : Error(file + ":" + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class DuplicateKeyError : public Error {
 public:
  using Error::Error;
};

class UnknownCodeError : public Error {
 public:
  explicit UnknownCodeError(std::string code, const std::string& context = "")
      : Error("unknown code '" + code + "'" + (context.empty() ? "" : " in " + context)),
        code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// A statistic that has no value on the given input (too few samples, zero
// variance, ...).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Collects non-fatal diagnostics. Functions taking a `Warnings*` print to
// stderr when handed nullptr.
class Warnings {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }
  const std::vector<std::string>& messages() const noexcept { return messages_; }
  bool empty() const noexcept { return messages_.empty(); }

 private:
  std::vector<std::string> messages_;
};

void warn(Warnings* sink, std::string message);

}  // namespace pspace
