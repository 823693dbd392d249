#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace vgmgc {

/// Operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A caller broke an API contract (e.g. backward on a non-scalar).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dataset or config file could not be parsed. The message always names the file.
class LoadError : public std::runtime_error {
 public:
  LoadError(const std::filesystem::path& file, std::size_t line, const std::string& what)
      : std::runtime_error(format(file, line, what)), file_(file), line_(line) {}

  const std::filesystem::path& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::filesystem::path& file, std::size_t line,
                            const std::string& what) {
    std::string msg = file.filename().string();
    if (line > 0) msg += ":" + std::to_string(line);
    return msg + ": " + what;
  }

  std::filesystem::path file_;
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a NaN/Inf; the message names the offending loss term.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vgmgc
