#pragma once

// Truncated power series in w = z^2 with a fixed number of terms. Used to
// evaluate the even gap functions near z = 0, where the closed forms cancel.

#include <array>
#include <cstddef>

namespace lumpcorr::detail {

template <class T, std::size_t K>
struct Series {
  std::array<T, K> c{}; // coefficient of w^k

  static Series constant(T v) {
    Series s;
    s.c[0] = v;
    return s;
  }

  Series& operator+=(const Series& o) {
    for (std::size_t k = 0; k < K; ++k)
      c[k] += o.c[k];
    return *this;
  }
  Series& operator-=(const Series& o) {
    for (std::size_t k = 0; k < K; ++k)
      c[k] -= o.c[k];
    return *this;
  }
  Series& operator*=(T a) {
    for (auto& v : c)
      v *= a;
    return *this;
  }

  friend Series operator+(Series a, const Series& b) { return a += b; }
  friend Series operator-(Series a, const Series& b) { return a -= b; }
  friend Series operator*(Series a, T s) { return a *= s; }
  friend Series operator*(T s, Series a) { return a *= s; }

  friend Series operator*(const Series& a, const Series& b) {
    Series out;
    for (std::size_t i = 0; i < K; ++i) {
      if (a.c[i] == T(0))
        continue;
      for (std::size_t j = 0; i + j < K; ++j)
        out.c[i + j] += a.c[i] * b.c[j];
    }
    return out;
  }

  /// Divide by w; requires c[0] == 0. The top coefficient becomes zero.
  Series divided_by_w() const {
    Series out;
    for (std::size_t k = 1; k < K; ++k)
      out.c[k - 1] = c[k];
    return out;
  }

  T operator()(T w) const {
    T acc = 0;
    for (std::size_t k = K; k-- > 0;)
      acc = acc * w + c[k];
    return acc;
  }
};

/// sin^2(z/2) = (1 - cos z)/2 as a series in w = z^2.
template <class T, std::size_t K>
Series<T, K> sin_half_squared_series() {
  Series<T, K> s;
  T fact = 1; // (2k)!
  T sign = 1;
  for (std::size_t k = 1; k < K; ++k) {
    fact *= static_cast<T>((2 * k - 1) * (2 * k));
    s.c[k] = sign / (2 * fact);
    sign = -sign;
  }
  return s;
}

/// sin(a z)/(a z) as a series in w = z^2.
template <class T, std::size_t K>
Series<T, K> sinc_series(T a = 1) {
  Series<T, K> s;
  T fact = 1; // (2k+1)!
  T sign = 1;
  T a2k = 1;
  s.c[0] = 1;
  for (std::size_t k = 1; k < K; ++k) {
    fact *= static_cast<T>((2 * k) * (2 * k + 1));
    sign = -sign;
    a2k *= a * a;
    s.c[k] = sign * a2k / fact;
  }
  return s;
}

/// 1 / (1 - x) for a series x with x.c[0] == 0.
template <class T, std::size_t K>
Series<T, K> geometric_inverse(const Series<T, K>& x) {
  auto out = Series<T, K>::constant(1);
  auto xm = Series<T, K>::constant(1);
  for (std::size_t m = 1; m < K; ++m) {
    xm = xm * x;
    out += xm;
  }
  return out;
}

} // namespace lumpcorr::detail
