#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

namespace gbias {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data or violated precondition (CLI exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or stream failure (CLI exit code 2).
class IoError : public Error {
 public:
  using Error::Error;
};

using WarningSink = std::function<void(const std::string&)>;

/// Process-wide destination for non-fatal diagnostics. Defaults to stderr.
inline WarningSink& warning_sink() {
  static WarningSink sink = [](const std::string& msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

inline void warn(const std::string& msg) {
  if (warning_sink()) warning_sink()(msg);
}

}  // namespace gbias
