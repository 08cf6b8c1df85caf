#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace puremkt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

/// A market, allocation or configuration violates its invariants.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Agent values a good that is priced at zero.
class UnboundedMBB : public Error {
 public:
  UnboundedMBB(std::size_t agent, std::size_t good)
      : Error("unbounded bang-per-buck: agent " + std::to_string(agent) +
              " values zero-priced good " + std::to_string(good)),
        agent(agent),
        good(good) {}
  std::size_t agent;
  std::size_t good;
};

class DegeneratePrices : public Error {
 public:
  using Error::Error;
};

class ZeroBundleValue : public Error {
 public:
  explicit ZeroBundleValue(std::size_t agent)
      : Error("agent " + std::to_string(agent) + " has zero bundle value"), agent(agent) {}
  std::size_t agent;
};

class InvalidCycle : public Error {
 public:
  using Error::Error;
};

class NotAForest : public Error {
 public:
  using Error::Error;
};

class NotAnEquilibrium : public Error {
 public:
  using Error::Error;
};

/// Enumeration space exceeds the configured guard.
class TooLarge : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what, std::size_t line = 0)
      : Error(format(field, what, line)), field(std::move(field)), line(line) {}
  std::string field;
  std::size_t line;

 private:
  static std::string format(const std::string& field, const std::string& what,
                            std::size_t line) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in '" + field + "'";
    return out + ": " + what;
  }
};

}  // namespace puremkt
