#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace dropout {

/// Calendar quarters in within-year order.
enum class Quarter : std::uint8_t { Winter = 0, Spring = 1, Summer = 2, Autumn = 3 };

std::string_view to_string(Quarter q);
Quarter parse_quarter(std::string_view text);

/// A calendar quarter. Terms are totally ordered and map onto consecutive
/// integers, so "n quarters later" is plain index arithmetic.
struct Term {
  int year = 1900;
  Quarter quarter = Quarter::Winter;

  constexpr Term() = default;
  Term(int year, Quarter quarter);

  [[nodiscard]] constexpr int index() const noexcept {
    return 4 * year + static_cast<int>(quarter);
  }

  static Term from_index(int index);

  friend constexpr auto operator<=>(const Term& a, const Term& b) noexcept {
    return a.index() <=> b.index();
  }
  friend constexpr bool operator==(const Term& a, const Term& b) noexcept {
    return a.index() == b.index();
  }
};

[[nodiscard]] constexpr int term_index(const Term& t) noexcept { return t.index(); }

/// Signed number of quarters from `from` to `to`.
[[nodiscard]] constexpr int quarters_between(const Term& from, const Term& to) noexcept {
  return to.index() - from.index();
}

std::string to_string(const Term& t);

}  // namespace dropout
