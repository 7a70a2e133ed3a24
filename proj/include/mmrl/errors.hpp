#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmrl/types.hpp"

namespace mmrl {

// Base for every domain error. `name()` is the stable identifier printed by
// the CLI ("EmptySide", "CorruptCheckpoint", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& message);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

#define MMRL_DEFINE_ERROR(Type)                                          \
  class Type : public Error {                                            \
   public:                                                               \
    explicit Type(const std::string& message) : Error(#Type, message) {} \
  };

// ingest
MMRL_DEFINE_ERROR(NonPositivePrice)
MMRL_DEFINE_ERROR(NonTradeEvent)
MMRL_DEFINE_ERROR(BoundaryOutOfRange)
// orderbook
MMRL_DEFINE_ERROR(EmptySide)
MMRL_DEFINE_ERROR(EmptyFills)
// indicators
MMRL_DEFINE_ERROR(WindowTooShort)
MMRL_DEFINE_ERROR(IndexOutOfRange)
MMRL_DEFINE_ERROR(InsufficientHistory)
MMRL_DEFINE_ERROR(EmptySeries)
MMRL_DEFINE_ERROR(DivisionByZero)
// neural
MMRL_DEFINE_ERROR(InvalidSpec)
MMRL_DEFINE_ERROR(DimensionMismatch)
MMRL_DEFINE_ERROR(NonFiniteInput)
MMRL_DEFINE_ERROR(ShapeMismatch)
MMRL_DEFINE_ERROR(CorruptCheckpoint)
// agent / environments
MMRL_DEFINE_ERROR(EmptyMemory)
MMRL_DEFINE_ERROR(EpisodeDone)
MMRL_DEFINE_ERROR(OutOfRange)
// bench / synth / config
MMRL_DEFINE_ERROR(SeriesTooShort)
MMRL_DEFINE_ERROR(InvalidConfig)
MMRL_DEFINE_ERROR(IoError)

#undef MMRL_DEFINE_ERROR

class MalformedRecord : public Error {
 public:
  MalformedRecord(std::size_t line_no, const std::string& reason);
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

// Raised by a market order that exhausts the opposing side. Carries the
// fills obtained before the book ran dry.
class InsufficientDepth : public Error {
 public:
  InsufficientDepth(std::vector<Fill> filled_so_far, double unfilled);
  const std::vector<Fill>& filled_so_far() const noexcept { return filled_; }
  double unfilled() const noexcept { return unfilled_; }

 private:
  std::vector<Fill> filled_;
  double unfilled_;
};

}  // namespace mmrl
