#pragma once

#include <stdexcept>
#include <string>

namespace fpm {

/// Error categories, mapped to CLI exit codes by the front end.
enum class ErrorKind {
  invalid_argument,  ///< bad value or shape passed to an operation
  config,            ///< inconsistent geometry / plan / manifest
  io,                ///< file format or filesystem failure
  numeric,           ///< non-finite values produced during iteration
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_invalid(const std::string& msg) {
  throw Error(ErrorKind::invalid_argument, msg);
}

[[noreturn]] inline void fail_config(const std::string& msg) {
  throw Error(ErrorKind::config, msg);
}

[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(ErrorKind::io, msg);
}

[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::numeric, msg);
}

}  // namespace fpm
