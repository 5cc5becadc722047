#pragma once

#include "fillab/common.hpp"
#include "fillab/dd.hpp"
#include "fillab/poly.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace fillab::jets {

/// Exponent tables for the (t, x, y) simplex of total degree <= cap.
/// One shared registry per cap keeps Series arithmetic index-based.
struct Space {
  int cap;
  std::vector<std::array<int, 3>> expo;  // graded order
  std::vector<int> index_of;             // dense (cap+1)^3 lookup

  static const Space& of(int cap);
  int index(int a, int b, int c) const {
    if (a < 0 || b < 0 || c < 0 || a + b + c > cap) return -1;
    return index_of[(a * (cap + 1) + b) * (cap + 1) + c];
  }
  int size() const { return static_cast<int>(expo.size()); }
};

/// Multivariate polynomial in (t, x, y) truncated by total degree.
/// Arithmetic closes under the cap: overflowing terms are dropped.
template <typename T>
class Series {
 public:
  explicit Series(int cap = 4) : cap_(cap), c_(Space::of(cap).size(), T(0)) {}

  static Series constant(T v, int cap) {
    Series s(cap);
    s.c_[0] = v;
    return s;
  }
  static Series variable(int var, int cap) {
    Series s(cap);
    std::array<int, 3> e{0, 0, 0};
    e[var] = 1;
    s.c_[Space::of(cap).index(e[0], e[1], e[2])] = T(1);
    return s;
  }

  int cap() const { return cap_; }
  const Space& space() const { return Space::of(cap_); }

  T get(int a, int b, int c) const {
    const int i = space().index(a, b, c);
    return i < 0 ? T(0) : c_[i];
  }
  void set(int a, int b, int c, T v) {
    const int i = space().index(a, b, c);
    if (i >= 0) c_[i] = v;
  }
  void add_term(int a, int b, int c, T v) {
    const int i = space().index(a, b, c);
    if (i >= 0) c_[i] += v;
  }

  Series operator+(const Series& o) const {
    Series r = *this;
    for (int i = 0; i < o.size(); ++i) r.c_[i] += o.c_[i];
    return r;
  }
  Series operator-(const Series& o) const {
    Series r = *this;
    for (int i = 0; i < o.size(); ++i) r.c_[i] -= o.c_[i];
    return r;
  }
  Series operator*(const Series& o) const {
    const Space& sp = space();
    Series r(cap_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      const auto& ea = sp.expo[i];
      for (int j = 0; j < o.size(); ++j) {
        if (o.c_[j] == T(0)) continue;
        const auto& eb = sp.expo[j];
        const int k = sp.index(ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]);
        if (k >= 0) r.c_[k] += c_[i] * o.c_[j];
      }
    }
    return r;
  }
  Series operator*(T s) const {
    Series r = *this;
    for (auto& v : r.c_) v *= s;
    return r;
  }

  /// Antiderivative in `var`; terms pushed above the cap are dropped.
  Series integrate(int var) const {
    const Space& sp = space();
    Series r(cap_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      auto e = sp.expo[i];
      e[var] += 1;
      const int k = sp.index(e[0], e[1], e[2]);
      if (k >= 0) r.c_[k] += c_[i] / T(e[var]);
    }
    return r;
  }

  Series derivative(int var) const {
    const Space& sp = space();
    Series r(cap_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      auto e = sp.expo[i];
      if (e[var] == 0) continue;
      const T f = T(e[var]);
      e[var] -= 1;
      r.c_[sp.index(e[0], e[1], e[2])] += c_[i] * f;
    }
    return r;
  }

  /// Substitutes `var` by series s (same space).
  Series substitute(int var, const Series& s) const {
    const Space& sp = space();
    // Powers of s up to the cap.
    std::vector<Series> pw;
    pw.push_back(Series::constant(T(1), cap_));
    for (int m = 1; m <= cap_; ++m) pw.push_back(pw.back() * s);
    Series r(cap_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      auto e = sp.expo[i];
      const int m = e[var];
      e[var] = 0;
      Series mono(cap_);
      mono.c_[sp.index(e[0], e[1], e[2])] = c_[i];
      r = r + mono * pw[m];
    }
    return r;
  }

  /// Divides by the variable `var` (every nonzero term must contain it).
  Series shift_down(int var) const {
    const Space& sp = space();
    Series r(cap_);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      auto e = sp.expo[i];
      if (e[var] == 0)
        throw OutOfRange("Series::shift_down: term without the variable");
      e[var] -= 1;
      r.c_[sp.index(e[0], e[1], e[2])] = c_[i];
    }
    return r;
  }

  /// Copy with a smaller cap, dropping higher-degree terms.
  Series truncated(int new_cap) const {
    Series r(new_cap);
    const Space& sp = space();
    for (int i = 0; i < size(); ++i) {
      const auto& e = sp.expo[i];
      if (e[0] + e[1] + e[2] <= new_cap) r.add_term(e[0], e[1], e[2], c_[i]);
    }
    return r;
  }

  T eval(T t, T x, T y) const {
    const Space& sp = space();
    T s(0);
    for (int i = 0; i < size(); ++i) {
      if (c_[i] == T(0)) continue;
      const auto& e = sp.expo[i];
      T term = c_[i];
      for (int m = 0; m < e[0]; ++m) term *= t;
      for (int m = 0; m < e[1]; ++m) term *= x;
      for (int m = 0; m < e[2]; ++m) term *= y;
      s += term;
    }
    return s;
  }

  int size() const { return static_cast<int>(c_.size()); }
  const std::vector<T>& raw() const { return c_; }

 private:
  int cap_;
  std::vector<T> c_;
};

enum Var { VarT = 0, VarX = 1, VarY = 2 };

/// Coefficient tables of the below-side field (alpha, beta, gamma).
struct BelowCoeffs {
  struct Term {
    int i, j, k;
    double c;
  };
  std::vector<Term> alpha, beta, gamma;

  double get(const std::vector<Term>& v, int i, int j, int k) const;
  double alpha000() const { return get(alpha, 0, 0, 0); }
  double beta000() const { return get(beta, 0, 0, 0); }
  double gamma100() const { return get(gamma, 1, 0, 0); }
  double gamma010() const { return get(gamma, 0, 1, 0); }
  BelowCoeffs with_beta000(double b) const;
};

template <typename T>
struct FlowSeries {
  Series<T> x, y, z;  // components of the flow, series in (t, x, y)
};

/// Taylor flow of the below field with phi(0, x, y) = (x, y, 0), determined
/// order by order from d/dt phi = Y(phi).
template <typename T>
FlowSeries<T> series_flow(const BelowCoeffs& field, int degree);

/// Return-time series tau(x, y) solving [z-component / t] = 0 by
/// undetermined coefficients. Throws NonInvisibleFold when the pivot
/// (gamma100*alpha000 + gamma010*beta000)/2 vanishes.
template <typename T>
Series<T> return_time_series(const FlowSeries<T>& flow);

struct ReturnMapSeries {
  std::map<std::pair<int, int>, double> a, b;  // 0 <= i+j <= 3
  Mat2 linear() const;
};

/// Half-return map coefficients a_ij, b_ij of the below field.
ReturnMapSeries pi_y_series(const BelowCoeffs& field);

template <typename T>
struct PiYSeriesT {
  Series<T> p1, p2;  // series in (x, y), t-slot unused
};

template <typename T>
PiYSeriesT<T> pi_y_series_t(const BelowCoeffs& field);

template <typename T>
struct GEval {
  T g1, g2, g3;  // x, x^2, x^3 coefficients of G2 restricted to G1 = 0
  T y1, y2, y3;  // coefficients of the implicit curve y(x)
};

/// Displacement coefficients at numeric (c, beta000). beta000 overrides the
/// field's constant beta term, since it is one of the unfolding parameters.
template <typename T>
GEval<T> g_coefficients(const BelowCoeffs& field, T c, T beta000);

/// Index L = g3 at the organizing center (c, beta000) = (0, 0).
double index_L(const BelowCoeffs& field);

/// Legacy closed form for the index. It reproduces the series-derived value
/// on the semi-linear family but omits cross terms in general; kept for
/// comparison only.
double legacy_L0(const BelowCoeffs& field);

std::string series_to_json(const Series<double>& s,
                           const std::vector<std::string>& var_names);

}  // namespace fillab::jets
