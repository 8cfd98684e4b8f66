#ifndef ENDOQ_COMMON_HPP
#define ENDOQ_COMMON_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace endoq {

// Domain error: a precondition of a documented operation was violated.
struct error : std::runtime_error {
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Value in N ∪ {∞}. Used for kernel configuration entries and degrees.
struct ExtNat {
  bool finite = true;
  uint32_t v = 0;

  static ExtNat fin(uint32_t n) { return ExtNat{true, n}; }
  static ExtNat inf() { return ExtNat{false, 0}; }

  bool is_inf() const { return !finite; }
  bool operator==(const ExtNat& o) const {
    return finite == o.finite && (!finite || v == o.v);
  }
  bool operator!=(const ExtNat& o) const { return !(*this == o); }
  bool operator<(const ExtNat& o) const {
    if (!finite) return false;
    if (!o.finite) return true;
    return v < o.v;
  }
  bool operator<=(const ExtNat& o) const { return *this < o || *this == o; }

  std::string str() const { return finite ? std::to_string(v) : "inf"; }
};

inline ExtNat min(ExtNat a, ExtNat b) { return a < b ? a : b; }

}  // namespace endoq

#endif
