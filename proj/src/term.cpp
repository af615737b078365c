#include "dropout/term.hpp"

#include <stdexcept>

namespace dropout {

namespace {
constexpr int kMinYear = 1900;
}

std::string_view to_string(Quarter q) {
  switch (q) {
    case Quarter::Winter: return "winter";
    case Quarter::Spring: return "spring";
    case Quarter::Summer: return "summer";
    case Quarter::Autumn: return "autumn";
  }
  throw std::invalid_argument("invalid quarter");
}

Quarter parse_quarter(std::string_view text) {
  if (text == "winter") return Quarter::Winter;
  if (text == "spring") return Quarter::Spring;
  if (text == "summer") return Quarter::Summer;
  if (text == "autumn") return Quarter::Autumn;
  throw std::invalid_argument("unknown quarter '" + std::string(text) + "'");
}

Term::Term(int year_, Quarter quarter_) : year(year_), quarter(quarter_) {
  if (year < kMinYear) {
    throw std::invalid_argument("term year " + std::to_string(year) + " is before 1900");
  }
  if (static_cast<int>(quarter) > 3) throw std::invalid_argument("invalid quarter");
}

Term Term::from_index(int index) {
  if (index < 4 * kMinYear) {
    throw std::invalid_argument("term index " + std::to_string(index) + " is out of range");
  }
  return Term(index / 4, static_cast<Quarter>(index % 4));
}

std::string to_string(const Term& t) {
  return std::string(to_string(t.quarter)) + " " + std::to_string(t.year);
}

}  // namespace dropout
