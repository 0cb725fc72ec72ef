// Copyright (C) 2026 The slosim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace slosim {

// Invalid or incomplete configuration (trace recipe, profile, policy).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. line() is 1-based, 0 when not line-oriented.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed record that breaks a domain invariant. field() names it.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::string field)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Operation on an entity in the wrong state (unknown id, double preempt).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Block pool cannot satisfy an allocation.
class AllocationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A policy emitted a plan the engine cannot execute. Never repaired.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace slosim
