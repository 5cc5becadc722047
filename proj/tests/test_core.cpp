#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fillab/core.hpp"
#include "fillab/toy_model.hpp"

#include <cmath>
#include <random>

using namespace fillab;

namespace {

SmoothField field_xyz_example() {
  // X = (-1, -x, y): the c = 0 cusp template.
  PolyField3 f;
  f.x.add(0, 0, 0, -1.0);
  f.y.add(1, 0, 0, -1.0);
  f.z.add(0, 1, 0, 1.0);
  return SmoothField::polynomial(f);
}

PolyField3 random_poly_field(std::mt19937_64& rng, int degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PolyField3 f;
  for (int i = 0; i + 0 <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j)
      for (int k = 0; i + j + k <= degree; ++k) {
        f.x.add(i, j, k, 0.5 * u(rng));
        f.y.add(i, j, k, 0.5 * u(rng));
        f.z.add(i, j, k, 0.5 * u(rng));
      }
  return f;
}

}  // namespace

TEST_CASE("lie derivative: cusp template recursion") {
  const SmoothField X = field_xyz_example();
  const Vec3 origin = Vec3::Zero();
  CHECK(lie_derivative(X, origin, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lie_derivative(X, origin, 2) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(lie_derivative(X, origin, 3) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("lie derivative: toy model Y^2 f on S_Y equals 1 + b*beta") {
  for (double b : {-1.0 / 3.0, 0.25}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const toy::ToyParams p{0.3, beta, b};
      const FilippovSystem sys = toy::make_system(p);
      // S_Y = {x + b y = 0}; take y = 1, x = -b.
      const Vec3 q(-b, 1.0, 0.0);
      CHECK(lie_derivative(sys.below, q, 1) ==
            doctest::Approx(0.0).epsilon(1e-14));
      CHECK(lie_derivative(sys.below, q, 2) ==
            doctest::Approx(1.0 + b * beta).epsilon(1e-12));
    }
  }
}

TEST_CASE("lie derivative: polynomial route matches finite differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int trial = 0; trial < 40; ++trial) {
    const PolyField3 table = random_poly_field(rng, 4);
    const SmoothField poly = SmoothField::polynomial(table);
    // Same field via opaque evaluators: forces the nested numeric route.
    const SmoothField analytic(
        [table](const Vec3& p) { return table.eval(p); },
        [poly](const Vec3& p) { return poly.jacobian(p); });
    const Vec3 p(u(rng), u(rng), 0.0);
    for (int order = 1; order <= 3; ++order) {
      const double exact = lie_derivative(poly, p, order);
      const double numeric = lie_derivative(analytic, p, order);
      CHECK(std::abs(exact - numeric) <=
            1e-6 * (1.0 + std::abs(exact)));
    }
  }
}

TEST_CASE("lie derivative: order above 3 requires a polynomial table") {
  const SmoothField opaque([](const Vec3&) { return Vec3(1, 0, 0); },
                           [](const Vec3&) { return Mat3::Zero(); });
  CHECK_THROWS_AS(lie_derivative(opaque, Vec3::Zero(), 4), OrderUnsupported);
  // The exact recursion terminates for the cusp template: X^3 f is constant.
  const SmoothField X = field_xyz_example();
  CHECK(lie_derivative(X, Vec3(0.3, -0.2, 0), 4) == 0.0);
  CHECK(lie_derivative(X, Vec3(0.3, -0.2, 0), 5) == 0.0);
}

TEST_CASE("classify_region: frozen examples") {
  SUBCASE("template with Y = (1, 0, x) at (1, 1, 0)") {
    PolyField3 Y;
    Y.x.add(0, 0, 0, 1.0);
    Y.z.add(1, 0, 0, 1.0);
    const FilippovSystem sys{field_xyz_example(), SmoothField::polynomial(Y)};
    CHECK(classify_region(sys, Vec3(1, 1, 0)) == Region::Crossing);
  }
  const toy::ToyParams p{0.0, 1.0, -1.0 / 3.0};
  const FilippovSystem sys = toy::make_system(p);
  SUBCASE("toy (1,-1,0) escapes") {
    CHECK(classify_region(sys, Vec3(1, -1, 0)) == Region::Escaping);
  }
  SUBCASE("toy (-1,1,0) slides") {
    CHECK(classify_region(sys, Vec3(-1, 1, 0)) == Region::Sliding);
  }
  SUBCASE("off-Sigma point rejected") {
    CHECK_THROWS_AS(classify_region(sys, Vec3(0, 0, 0.5)), NotOnSigma);
  }
}

TEST_CASE("classify_region: invariant under positive rescaling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> scale(0.1, 9.0);
  for (int trial = 0; trial < 50; ++trial) {
    const PolyField3 X = random_poly_field(rng, 2);
    const PolyField3 Y = random_poly_field(rng, 2);
    const FilippovSystem sys{SmoothField::polynomial(X),
                             SmoothField::polynomial(Y)};
    const double lx = scale(rng), ly = scale(rng);
    PolyField3 Xs, Ys;
    Xs.x = X.x * lx;
    Xs.y = X.y * lx;
    Xs.z = X.z * lx;
    Ys.x = Y.x * ly;
    Ys.y = Y.y * ly;
    Ys.z = Y.z * ly;
    const FilippovSystem scaled{SmoothField::polynomial(Xs),
                                SmoothField::polynomial(Ys)};
    const Vec3 p(u(rng), u(rng), 0.0);
    const Region r0 = classify_region(sys, p);
    if (r0 == Region::TangencyX || r0 == Region::TangencyY ||
        r0 == Region::DoubleTangency)
      continue;  // tolerance bands scale slightly differently there
    CHECK(classify_region(scaled, p) == r0);
  }
}

TEST_CASE("sliding_field: frozen toy example and tangency property") {
  const toy::ToyParams p{0.0, 1.0, -1.0 / 3.0};
  const FilippovSystem sys = toy::make_system(p);
  const Vec3 q(-1, 1, 0);
  const SlidingVector fn = sliding_field(sys, q, true);
  CHECK(fn.value.x() == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(fn.value.y() == doctest::Approx(-7.0 / 3).epsilon(1e-12));
  CHECK(fn.value.z() == doctest::Approx(0.0).epsilon(1e-12));
  const SlidingVector f = sliding_field(sys, q, false);
  CHECK(f.value.x() == doctest::Approx(1.0 / 7).epsilon(1e-12));
  CHECK(f.value.y() == doctest::Approx(-1.0).epsilon(1e-12));

  SUBCASE("normalized field at an X-fold reduces to Yf * X") {
    const Vec3 fold(0.7, 0.0, 0.0);  // S_X is y = 0
    const double yf = lie_derivative(sys.below, fold, 1);
    const SlidingVector v = sliding_field(sys, fold, true);
    CHECK((v.value - yf * sys.above(fold)).norm() < 1e-12);
  }
  SUBCASE("crossing region rejected when not normalized") {
    CHECK_THROWS_AS(sliding_field(sys, Vec3(1, 1, 0), false),
                    NotSlidingRegion);
  }
}

TEST_CASE("sliding_field: tangent to Sigma on random systems") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 4000 && checked < 1000; ++trial) {
    const FilippovSystem sys{
        SmoothField::polynomial(random_poly_field(rng, 3)),
        SmoothField::polynomial(random_poly_field(rng, 3))};
    const Vec3 p(u(rng), u(rng), 0.0);
    Region r;
    try {
      r = classify_region(sys, p);
    } catch (const Error&) {
      continue;
    }
    if (r != Region::Sliding && r != Region::Escaping) continue;
    const SlidingVector f = sliding_field(sys, p, false);
    CHECK(std::abs(f.value.z()) < 1e-10 * (1.0 + f.value.norm()));
    // F_Z^N = (Yf - Xf) F_Z on the sliding component.
    const SlidingVector fn = sliding_field(sys, p, true);
    const double den = lie_derivative(sys.below, p, 1) -
                       lie_derivative(sys.above, p, 1);
    CHECK((fn.value - den * f.value).norm() < 1e-9 * (1 + fn.value.norm()));
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("classify_tangency: cusp, cusp-fold, T-singularity") {
  SUBCASE("toy cusp at q = (-alpha, 0, 0)") {
    const toy::ToyParams p{0.8, 1.0, -1.0 / 3.0};
    const FilippovSystem sys = toy::make_system(p);
    const TangencyInfo info = classify_tangency(sys, Vec3(-p.alpha, 0, 0));
    CHECK(info.tag == Tangency::Cusp);
    CHECK(info.side == FieldSide::Above);
  }
  SUBCASE("toy origin: T-singularity for alpha > 0") {
    const toy::ToyParams p{0.8, 1.0, -1.0 / 3.0};
    const FilippovSystem sys = toy::make_system(p);
    const TangencyInfo info = classify_tangency(sys, Vec3::Zero());
    CHECK(info.tag == Tangency::TSingularity);
    CHECK(info.transversal);
  }
  SUBCASE("toy origin: cusp-fold at alpha = 0") {
    const toy::ToyParams p{0.0, 1.0, -1.0 / 3.0};
    const FilippovSystem sys = toy::make_system(p);
    const TangencyInfo info = classify_tangency(sys, Vec3::Zero());
    CHECK(info.tag == Tangency::CuspFold);
    CHECK(info.transversal);
  }
  SUBCASE("normal-form template at the origin, c = 0") {
    PolyField3 Y;  // alpha000 = 1, gamma100 = 1: invisible fold of Y
    Y.x.add(0, 0, 0, 1.0);
    Y.z.add(1, 0, 0, 1.0);
    const FilippovSystem sys{field_xyz_example(), SmoothField::polynomial(Y)};
    const TangencyInfo info = classify_tangency(sys, Vec3::Zero());
    CHECK(info.tag == Tangency::CuspFold);
    CHECK(info.transversal);
  }
}

TEST_CASE("classify_tangency: involution (X,Y,f) -> (Y,X,-f)") {
  const toy::ToyParams p{0.0, 1.0, -1.0 / 3.0};
  const FilippovSystem sys = toy::make_system(p);
  const FilippovSystem swapped = swap_sides(sys);
  SUBCASE("cusp-fold swaps to fold-cusp") {
    CHECK(classify_tangency(sys, Vec3::Zero()).tag == Tangency::CuspFold);
    CHECK(classify_tangency(swapped, Vec3::Zero()).tag == Tangency::FoldCusp);
  }
  SUBCASE("single tangencies keep their visibility, flip sides") {
    const Vec3 fold(0.5, 0.0, 0.0);  // invisible X-fold for x > -alpha
    const TangencyInfo a = classify_tangency(sys, fold);
    const TangencyInfo b = classify_tangency(swapped, fold);
    CHECK(a.tag == Tangency::FoldInvisible);
    CHECK(b.tag == Tangency::FoldInvisible);
    CHECK(a.side == FieldSide::Above);
    CHECK(b.side == FieldSide::Below);
  }
}

TEST_CASE("cuspfold_degree: toy examples") {
  SUBCASE("alpha = beta = 0, b != 0: degree 2 with L0 = -4b/3") {
    for (double b : {-1.0 / 3.0, 0.4}) {
      const toy::ToyParams p{0.0, 0.0, b};
      const FilippovSystem sys = toy::make_system(p);
      const NormalFormSystem nf = toy::to_normal_form(p);
      const CuspFoldDegree d = cuspfold_degree(sys, Vec3::Zero(), &nf);
      CHECK(d.kind == CuspFoldDegreeKind::Degree2);
      CHECK(d.L0 == doctest::Approx(-4.0 * b / 3.0).epsilon(1e-9));
    }
  }
  SUBCASE("alpha = 0, beta != 0: degree 1") {
    const toy::ToyParams p{0.0, 0.6, -1.0 / 3.0};
    const FilippovSystem sys = toy::make_system(p);
    const CuspFoldDegree d = cuspfold_degree(sys, Vec3::Zero(), nullptr);
    CHECK(d.kind == CuspFoldDegreeKind::Degree1);
    CHECK(std::abs(d.yxf) == doctest::Approx(0.6).epsilon(1e-12));
  }
  SUBCASE("degree-2 without a table raises RequiresNormalForm") {
    const toy::ToyParams p{0.0, 0.0, -1.0 / 3.0};
    const FilippovSystem sys = toy::make_system(p);
    CHECK_THROWS_AS(cuspfold_degree(sys, Vec3::Zero(), nullptr),
                    RequiresNormalForm);
  }
  SUBCASE("template with beta000 = 0.1: degree 1, YXf = beta000") {
    jets::BelowCoeffs bc;
    bc.alpha = {{0, 0, 0, 1.0}};
    bc.beta = {{0, 0, 0, 0.1}};
    bc.gamma = {{1, 0, 0, 1.0}};
    const NormalFormSystem nf(0.0, bc);
    const CuspFoldDegree d =
        cuspfold_degree(nf.to_filippov(), Vec3::Zero(), &nf);
    CHECK(d.kind == CuspFoldDegreeKind::Degree1);
    CHECK(d.yxf == doctest::Approx(0.1).epsilon(1e-12));
  }
}
