#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace cbm {

/// Problems found while reading one of the interchange files.
class FormatError : public std::runtime_error
{
public:
  enum class Kind { Malformed, DimensionMismatch, NonFinite, Missing };

  FormatError(Kind kind, const std::string& message,
              std::optional<std::size_t> row = std::nullopt,
              std::optional<std::size_t> column = std::nullopt);

  Kind kind() const noexcept { return mKind; }
  /// 1-based line/data row, when the problem can be located.
  std::optional<std::size_t> row() const noexcept { return mRow; }
  /// 1-based column, when the problem can be located.
  std::optional<std::size_t> column() const noexcept { return mColumn; }

private:
  Kind                       mKind;
  std::optional<std::size_t> mRow;
  std::optional<std::size_t> mColumn;
};

/// Input is well formed but carries no usable information
/// (e.g. every bar identical after centering).
class DegenerateInput : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

} // namespace cbm
