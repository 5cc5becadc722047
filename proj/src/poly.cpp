#include "fillab/poly.hpp"

#include <algorithm>
#include <cmath>

namespace fillab {

namespace {
bool term_less(const Poly3::Term& a, const Poly3::Term& b) {
  if (a.i != b.i) return a.i < b.i;
  if (a.j != b.j) return a.j < b.j;
  return a.k < b.k;
}
}  // namespace

Poly3 Poly3::constant(double c) {
  Poly3 p;
  p.add(0, 0, 0, c);
  return p;
}

Poly3 Poly3::variable(int axis) {
  Poly3 p;
  p.add(axis == 0 ? 1 : 0, axis == 1 ? 1 : 0, axis == 2 ? 1 : 0, 1.0);
  return p;
}

void Poly3::add(int i, int j, int k, double c) {
  if (c == 0.0) return;
  Term t{i, j, k, c};
  auto it = std::lower_bound(terms_.begin(), terms_.end(), t, term_less);
  if (it != terms_.end() && it->i == i && it->j == j && it->k == k) {
    it->c += c;
    if (it->c == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, t);
  }
}

int Poly3::max_degree() const {
  int d = 0;
  for (const auto& t : terms_) d = std::max(d, t.i + t.j + t.k);
  return d;
}

double Poly3::eval(const Vec3& p) const {
  const int d = max_degree();
  // Power tables keep per-term work to three lookups and two multiplies.
  thread_local std::vector<double> px, py, pz;
  px.assign(d + 1, 1.0);
  py.assign(d + 1, 1.0);
  pz.assign(d + 1, 1.0);
  for (int n = 1; n <= d; ++n) {
    px[n] = px[n - 1] * p.x();
    py[n] = py[n - 1] * p.y();
    pz[n] = pz[n - 1] * p.z();
  }
  double s = 0.0;
  for (const auto& t : terms_) s += t.c * px[t.i] * py[t.j] * pz[t.k];
  return s;
}

Poly3 Poly3::derivative(int axis) const {
  Poly3 r;
  for (const auto& t : terms_) {
    switch (axis) {
      case 0:
        if (t.i > 0) r.add(t.i - 1, t.j, t.k, t.c * t.i);
        break;
      case 1:
        if (t.j > 0) r.add(t.i, t.j - 1, t.k, t.c * t.j);
        break;
      default:
        if (t.k > 0) r.add(t.i, t.j, t.k - 1, t.c * t.k);
        break;
    }
  }
  return r;
}

Poly3 Poly3::operator+(const Poly3& o) const {
  Poly3 r = *this;
  for (const auto& t : o.terms_) r.add(t.i, t.j, t.k, t.c);
  return r;
}

Poly3 Poly3::operator-(const Poly3& o) const {
  Poly3 r = *this;
  for (const auto& t : o.terms_) r.add(t.i, t.j, t.k, -t.c);
  return r;
}

Poly3 Poly3::operator*(const Poly3& o) const {
  Poly3 r;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) r.add(a.i + b.i, a.j + b.j, a.k + b.k, a.c * b.c);
  return r;
}

Poly3 Poly3::operator*(double s) const {
  Poly3 r;
  if (s == 0.0) return r;
  r.terms_ = terms_;
  for (auto& t : r.terms_) t.c *= s;
  return r;
}

void Poly3::normalize() {
  std::sort(terms_.begin(), terms_.end(), term_less);
}

Vec3 PolyField3::eval(const Vec3& p) const {
  return {x.eval(p), y.eval(p), z.eval(p)};
}

const Poly3& PolyField3::component(int axis) const {
  return axis == 0 ? x : (axis == 1 ? y : z);
}

Poly3 PolyField3::lie(const Poly3& g) const {
  return x * g.derivative(0) + y * g.derivative(1) + z * g.derivative(2);
}

}  // namespace fillab
