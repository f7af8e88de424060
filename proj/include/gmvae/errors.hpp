// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace gmvae {

/// Shape/dimension mismatch between operands. Message names both shapes.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Violation of an operation contract (e.g. backward() on a non-scalar node).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// IDX file parse failure. `kind` distinguishes the failure classes so
/// callers (and tests) do not have to match on message text.
class IdxError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, count_mismatch, io };

  IdxError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace gmvae
