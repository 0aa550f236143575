#pragma once

#include <string>

#include "lumpcorr/error.hpp"

namespace lumpcorr {

/// Which mass treatment a semi-discrete scheme uses: lumped, lumped with n
/// Neumann corrections, or the consistent mass matrix.
class Scheme {
public:
  enum class Kind { Lumped, Corrected, Consistent };

  static Scheme lumped() noexcept { return Scheme(Kind::Lumped, 0); }
  static Scheme consistent() noexcept { return Scheme(Kind::Consistent, 0); }

  /// Corrected(0) is the lumped scheme.
  static Scheme corrected(int n) {
    if (n < 0)
      throw DomainError("number of corrections must be non-negative");
    return n == 0 ? lumped() : Scheme(Kind::Corrected, n);
  }

  /// Parses the labels used throughout the tables: "L", "G" or a count.
  static Scheme parse(const std::string& label) {
    if (label == "L" || label == "l" || label == "0")
      return lumped();
    if (label == "G" || label == "g")
      return consistent();
    std::size_t pos = 0;
    int n = -1;
    try {
      n = std::stoi(label, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != label.size() || n < 0)
      throw DomainError("unknown scheme label '" + label + "'");
    return corrected(n);
  }

  Kind kind() const noexcept { return kind_; }

  /// Number of corrections; 0 for lumped and consistent.
  int corrections() const noexcept { return n_; }

  std::string label() const {
    switch (kind_) {
    case Kind::Lumped:
      return "L";
    case Kind::Consistent:
      return "G";
    case Kind::Corrected:
      break;
    }
    return std::to_string(n_);
  }

  friend bool operator==(const Scheme&, const Scheme&) = default;

private:
  Scheme(Kind k, int n) : kind_(k), n_(n) {}

  Kind kind_;
  int n_;
};

} // namespace lumpcorr
