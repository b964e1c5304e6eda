#pragma once

#include <stdexcept>
#include <variant>

namespace facet {

/// One typed dataset value: missing, a number (continuous/integer scales) or
/// a level index into the factor's declared level list (ordinal/nominal).
class Cell {
 public:
  constexpr Cell() = default;

  static constexpr Cell missing() { return Cell{}; }
  static constexpr Cell number(double v) { return Cell{v}; }
  static constexpr Cell level(int index) { return Cell{index}; }

  constexpr bool is_missing() const { return std::holds_alternative<std::monostate>(v_); }
  constexpr bool is_number() const { return std::holds_alternative<double>(v_); }
  constexpr bool is_level() const { return std::holds_alternative<int>(v_); }

  constexpr double number() const {
    if (!is_number()) throw std::logic_error("cell does not hold a number");
    return std::get<double>(v_);
  }

  constexpr int level() const {
    if (!is_level()) throw std::logic_error("cell does not hold a level index");
    return std::get<int>(v_);
  }

  friend constexpr bool operator==(const Cell&, const Cell&) = default;

 private:
  constexpr explicit Cell(double v) : v_(v) {}
  constexpr explicit Cell(int index) : v_(index) {}

  std::variant<std::monostate, double, int> v_;
};

}  // namespace facet
