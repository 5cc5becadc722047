#include "fillab/jets.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <mutex>

namespace fillab::jets {

const Space& Space::of(int cap) {
  static std::mutex mu;
  static std::map<int, Space> registry;
  std::lock_guard<std::mutex> lock(mu);
  auto it = registry.find(cap);
  if (it != registry.end()) return it->second;
  Space sp;
  sp.cap = cap;
  for (int d = 0; d <= cap; ++d)
    for (int a = d; a >= 0; --a)
      for (int b = d - a; b >= 0; --b) sp.expo.push_back({a, b, d - a - b});
  sp.index_of.assign((cap + 1) * (cap + 1) * (cap + 1), -1);
  for (int i = 0; i < static_cast<int>(sp.expo.size()); ++i) {
    const auto& e = sp.expo[i];
    sp.index_of[(e[0] * (cap + 1) + e[1]) * (cap + 1) + e[2]] = i;
  }
  return registry.emplace(cap, std::move(sp)).first->second;
}

double BelowCoeffs::get(const std::vector<Term>& v, int i, int j, int k) const {
  for (const auto& t : v)
    if (t.i == i && t.j == j && t.k == k) return t.c;
  return 0.0;
}

BelowCoeffs BelowCoeffs::with_beta000(double b) const {
  BelowCoeffs r = *this;
  for (auto& t : r.beta)
    if (t.i == 0 && t.j == 0 && t.k == 0) {
      t.c = b;
      return r;
    }
  r.beta.push_back({0, 0, 0, b});
  return r;
}

namespace {

double abs_value(double v) { return std::abs(v); }
DD abs_value(DD v) { return abs(v); }

template <typename T>
Series<T> compose_component(const std::vector<BelowCoeffs::Term>& comp,
                            const FlowSeries<T>& phi, int cap) {
  // Substitute (x,y,z) -> (phi.x, phi.y, phi.z) into the field polynomial.
  std::vector<Series<T>> px{Series<T>::constant(T(1), cap)};
  std::vector<Series<T>> py{Series<T>::constant(T(1), cap)};
  std::vector<Series<T>> pz{Series<T>::constant(T(1), cap)};
  int mi = 0, mj = 0, mk = 0;
  for (const auto& t : comp) {
    mi = std::max(mi, t.i);
    mj = std::max(mj, t.j);
    mk = std::max(mk, t.k);
  }
  for (int m = 1; m <= mi; ++m) px.push_back(px.back() * phi.x);
  for (int m = 1; m <= mj; ++m) py.push_back(py.back() * phi.y);
  for (int m = 1; m <= mk; ++m) pz.push_back(pz.back() * phi.z);
  Series<T> r(cap);
  for (const auto& t : comp) {
    if (t.c == 0.0) continue;
    r = r + px[t.i] * py[t.j] * pz[t.k] * T(t.c);
  }
  return r;
}

// The beta000 entry is an unfolding parameter; letting it enter as a full-T
// constant keeps the DD instantiation exact while the table stays double.
template <typename T>
FlowSeries<T> series_flow_impl(const BelowCoeffs& field, int degree,
                               T beta000_extra) {
  if (degree > 6) throw DegreeUnsupported("series_flow: degree > 6");
  const int cap = degree;
  FlowSeries<T> phi{Series<T>::variable(VarX, cap),
                    Series<T>::variable(VarY, cap), Series<T>(cap)};
  const Series<T> extra = Series<T>::constant(beta000_extra, cap);
  // Each pass pins one more t-order of d/dt phi = Y(phi).
  for (int pass = 0; pass < cap; ++pass) {
    FlowSeries<T> next;
    next.x = Series<T>::variable(VarX, cap) +
             compose_component<T>(field.alpha, phi, cap).integrate(VarT);
    next.y = Series<T>::variable(VarY, cap) +
             (compose_component<T>(field.beta, phi, cap) + extra).integrate(VarT);
    next.z = compose_component<T>(field.gamma, phi, cap).integrate(VarT);
    phi = next;
  }
  return phi;
}

}  // namespace

template <typename T>
FlowSeries<T> series_flow(const BelowCoeffs& field, int degree) {
  return series_flow_impl<T>(field, degree, T(0));
}

template <typename T>
Series<T> return_time_series(const FlowSeries<T>& flow) {
  const int cap = flow.z.cap();
  const Series<T> R = flow.z.shift_down(VarT);
  const T pivot = R.get(1, 0, 0);  // = (gamma100 alpha000 + gamma010 beta000)/2
  if (!(to_double(abs_value(pivot)) > 1e-14))
    throw NonInvisibleFold("return_time_series: invisibility coefficient vanishes");
  const int tau_cap = cap - 1;
  Series<T> tau(cap);  // depends on (x, y) only
  for (int m = 1; m <= tau_cap; ++m) {
    const Series<T> E = R.substitute(VarT, tau);
    for (int j = m; j >= 0; --j) {
      const int k = m - j;
      const T e = E.get(0, j, k);
      tau.add_term(0, j, k, T(0) - e / pivot);
    }
  }
  return tau;
}

template <typename T>
PiYSeriesT<T> pi_y_series_t(const BelowCoeffs& field) {
  FlowSeries<T> flow = series_flow<T>(field, 4);
  Series<T> tau = return_time_series<T>(flow);
  PiYSeriesT<T> out{flow.x.substitute(VarT, tau).truncated(3),
                    flow.y.substitute(VarT, tau).truncated(3)};
  return out;
}

ReturnMapSeries pi_y_series(const BelowCoeffs& field) {
  PiYSeriesT<double> s = pi_y_series_t<double>(field);
  ReturnMapSeries rm;
  for (int i = 0; i <= 3; ++i)
    for (int j = 0; i + j <= 3; ++j) {
      rm.a[{i, j}] = s.p1.get(0, i, j);
      rm.b[{i, j}] = s.p2.get(0, i, j);
    }
  return rm;
}

Mat2 ReturnMapSeries::linear() const {
  Mat2 m;
  m << a.at({1, 0}), a.at({0, 1}), b.at({1, 0}), b.at({0, 1});
  return m;
}

template <typename T>
GEval<T> g_coefficients(const BelowCoeffs& field, T c, T beta000) {
  // beta000 may carry more precision than a double (the DD instantiation),
  // so it rides along as an exact additive constant.
  const BelowCoeffs f = field.with_beta000(0.0);
  FlowSeries<T> flow = series_flow_impl<T>(f, 4, beta000);
  Series<T> tau = return_time_series<T>(flow);
  Series<T> P1 = flow.x.substitute(VarT, tau).truncated(4);
  Series<T> P2 = flow.y.substitute(VarT, tau).truncated(4);

  const int cap = 4;
  Series<T> X = Series<T>::variable(VarX, cap);
  Series<T> Y = Series<T>::variable(VarY, cap);
  Series<T> c3 = Series<T>::constant(T(3) * c, cap);
  Series<T> G1 = Y * T(6) + (P1 - X) * (P1 + c3 + X * T(2));
  Series<T> G2 = P2 * T(6) - (P1 - X) * (P1 * T(2) + c3 + X);

  // Implicit curve y(x) from G1 = 0.
  const T pivot = G1.derivative(VarY).get(0, 0, 0);
  Series<T> ycurve(cap);
  for (int m = 1; m <= 3; ++m) {
    const Series<T> E = G1.substitute(VarY, ycurve);
    ycurve.add_term(0, m, 0, T(0) - E.get(0, m, 0) / pivot);
  }
  const Series<T> G2t = G2.substitute(VarY, ycurve);

  // The raw Taylor coefficients of G2 on the curve are three times the
  // paper's g_i: the /3 normalization is what makes the branch asymptotics
  // x_pm = +-2 sqrt((beta000 - alpha000 c)/(L alpha000)), the expansions
  // g1 = 4c - 4 beta000/alpha000 + ..., and the toy-model index -4b/3 all
  // hold simultaneously.
  GEval<T> out;
  out.g1 = G2t.get(0, 1, 0) / T(3);
  out.g2 = G2t.get(0, 2, 0) / T(3);
  out.g3 = G2t.get(0, 3, 0) / T(3);
  out.y1 = ycurve.get(0, 1, 0);
  out.y2 = ycurve.get(0, 2, 0);
  out.y3 = ycurve.get(0, 3, 0);
  return out;
}

double index_L(const BelowCoeffs& field) {
  return g_coefficients<double>(field, 0.0, 0.0).g3;
}

double legacy_L0(const BelowCoeffs& field) {
  const auto g = [&](const std::vector<BelowCoeffs::Term>& v, int i, int j,
                     int k) { return field.get(v, i, j, k); };
  const double a000 = g(field.alpha, 0, 0, 0), a100 = g(field.alpha, 1, 0, 0);
  const double b010 = g(field.beta, 0, 1, 0), b200 = g(field.beta, 2, 0, 0);
  const double b100 = g(field.beta, 1, 0, 0), b001 = g(field.beta, 0, 0, 1);
  const double c001 = g(field.gamma, 0, 0, 1), c010 = g(field.gamma, 0, 1, 0);
  const double c100 = g(field.gamma, 1, 0, 0), c200 = g(field.gamma, 2, 0, 0);
  const double bracket = -a000 * c100 * (a100 - b010 - b200 + c001) +
                         b100 * (2 * c010 + c200) + a000 * a000 * (c010 + c200) -
                         b001 * c100 * c100 + b100 * b100 * c010 +
                         b100 * c100 * (c001 - b010);
  return -4.0 / (3.0 * a000 * a000 * c100) * bracket;
}

std::string series_to_json(const Series<double>& s,
                           const std::vector<std::string>& var_names) {
  nlohmann::json j;
  j["vars"] = var_names;
  j["cap"] = s.cap();
  nlohmann::json terms = nlohmann::json::array();
  const Space& sp = s.space();
  for (int i = 0; i < s.size(); ++i) {
    const auto& e = sp.expo[i];
    const double c = s.raw()[i];
    if (c != 0.0) terms.push_back({{"e", {e[0], e[1], e[2]}}, {"c", c}});
  }
  j["terms"] = terms;
  return j.dump(2);
}

// Explicit instantiations.
template FlowSeries<double> series_flow<double>(const BelowCoeffs&, int);
template FlowSeries<DD> series_flow<DD>(const BelowCoeffs&, int);
template Series<double> return_time_series<double>(const FlowSeries<double>&);
template Series<DD> return_time_series<DD>(const FlowSeries<DD>&);
template PiYSeriesT<double> pi_y_series_t<double>(const BelowCoeffs&);
template PiYSeriesT<DD> pi_y_series_t<DD>(const BelowCoeffs&);
template GEval<double> g_coefficients<double>(const BelowCoeffs&, double, double);
template GEval<DD> g_coefficients<DD>(const BelowCoeffs&, DD, DD);

}  // namespace fillab::jets
