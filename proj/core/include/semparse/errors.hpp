#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace semparse {

// Base class for all recoverable errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// FunQL surface-syntax error with byte position and the token kinds that
// would have been accepted there.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::vector<std::string> expected,
              const std::string& found);
  std::size_t position() const { return position_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

// Operator applied to the wrong number of arguments.
class ArityError : public Error {
 public:
  ArityError(const std::string& op, int expected, int found);
};

// Well-formedness violation found by the type checker. `path` is the
// pre-order child-index path from the root, e.g. "0.1".
class TypeError : public Error {
 public:
  TypeError(std::string path, std::string expected, std::string found);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Line-addressed failure while reading a data file.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Referential-integrity failure in a knowledge-base file.
class IntegrityError : public Error {
 public:
  IntegrityError(const std::string& file, std::size_t line,
                 const std::string& msg);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A logical form mentions an entity or relation the KB does not define.
class UnknownSymbolError : public Error {
 public:
  explicit UnknownSymbolError(const std::string& symbol);
};

// Transition-system misuse.
class IllegalTransitionError : public Error {
 public:
  explicit IllegalTransitionError(const std::string& msg) : Error(msg) {}
};
class ArityUnderflowError : public Error {
 public:
  explicit ArityUnderflowError(const std::string& msg) : Error(msg) {}
};
class IncompleteDerivationError : public Error {
 public:
  explicit IncompleteDerivationError(const std::string& msg) : Error(msg) {}
};

// Numeric-core misuse.
class ShapeMismatchError : public Error {
 public:
  explicit ShapeMismatchError(const std::string& msg) : Error(msg) {}
};
class EmptyMaskError : public Error {
 public:
  explicit EmptyMaskError(const std::string& msg) : Error(msg) {}
};
class EmptyUtteranceError : public Error {
 public:
  explicit EmptyUtteranceError(const std::string& msg) : Error(msg) {}
};
class StackUnderflowError : public Error {
 public:
  explicit StackUnderflowError(const std::string& msg) : Error(msg) {}
};
class EmptyCandidatesError : public Error {
 public:
  explicit EmptyCandidatesError(const std::string& msg) : Error(msg) {}
};

}  // namespace semparse
