#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mdrk/tableau.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace mdrk;

namespace {

std::vector<std::string> concrete_names() {
  std::vector<std::string> out;
  for (auto n : builtin_tableau_names()) {
    if (auto pos = n.find("<r>"); pos != std::string::npos) {
      for (int r = 1; r <= 4; ++r) out.push_back(n.substr(0, pos) + std::to_string(r));
    } else {
      out.push_back(n);
    }
  }
  return out;
}

// Power-series coefficients of the linear stability function R(z) for
// y' = lambda y, z = lambda dt: Y_n = [n == 0] 1 + sum_k A_k Y_{n-k}.
std::vector<double> stability_series(const Tableau& t, int degree) {
  std::vector<Vector> y;
  std::vector<double> rn;
  for (int n = 0; n <= degree; ++n) {
    Vector yn = n == 0 ? Vector::Ones(t.s()) : Vector::Zero(t.s());
    double r = n == 0 ? 1.0 : 0.0;
    for (int k = 1; k <= t.r() && k <= n; ++k) {
      yn += t.a(k) * y[static_cast<std::size_t>(n - k)];
      r += t.b(k).dot(y[static_cast<std::size_t>(n - k)]);
    }
    y.push_back(yn);
    rn.push_back(r);
  }
  return rn;
}

}  // namespace

TEST_CASE("implicit Taylor 3 coefficients") {
  const auto t = builtin_tableau("ImplTaylor-3");
  CHECK(t.s() == 1);
  CHECK(t.r() == 3);
  CHECK(t.c()(0) == 1.0);
  CHECK(t.a(1)(0, 0) == doctest::Approx(1.0));
  CHECK(t.a(2)(0, 0) == doctest::Approx(-0.5));
  CHECK(t.a(3)(0, 0) == doctest::Approx(1.0 / 6.0));
  CHECK(t.structure() == TableauStructure::SingleStage);
}

TEST_CASE("HB-I2DRK4-2s coefficients") {
  const auto t = builtin_tableau("HB-I2DRK4-2s");
  CHECK(t.c()(0) == 0.0);
  CHECK(t.c()(1) == 1.0);
  CHECK(t.a(1)(1, 0) == 0.5);
  CHECK(t.a(1)(1, 1) == 0.5);
  CHECK(t.a(2)(1, 0) == doctest::Approx(1.0 / 12.0));
  CHECK(t.a(2)(1, 1) == doctest::Approx(-1.0 / 12.0));
  CHECK(t.stage_is_trivial(0));
  CHECK_FALSE(t.stage_is_explicit(1));
}

TEST_CASE("explicit Taylor 1 is forward Euler") {
  const auto t = builtin_tableau("ExplTaylor-1");
  CHECK(t.c()(0) == 0.0);
  CHECK(t.a(1)(0, 0) == 0.0);
  CHECK(t.b(1)(0) == 1.0);
}

TEST_CASE("every builtin validates and carries the expected structure tag") {
  for (const auto& name : concrete_names()) {
    CAPTURE(name);
    const auto t = builtin_tableau(name);
    CHECK(validate(t).empty());
    for (int l = 0; l < t.s(); ++l) CHECK(std::abs(t.a(1).row(l).sum() - t.c()(l)) < 1e-12);
    CHECK(std::abs(t.b(1).sum() - 1.0) < 1e-12);
    if (name.rfind("SSP", 0) == 0) CHECK(t.structure() == TableauStructure::DiagonallyImplicit);
    if (name.rfind("HB", 0) == 0 && t.s() == 2) CHECK(t.structure() == TableauStructure::ExplicitFirstStageFullyImplicit);
    if (name.find("Taylor") != std::string::npos) CHECK(t.structure() == TableauStructure::SingleStage);
  }
}

TEST_CASE("stability function matches exp(z) through degree q") {
  for (const auto& name : concrete_names()) {
    CAPTURE(name);
    const auto t = builtin_tableau(name);
    const auto rn = stability_series(t, t.q());
    double fact = 1.0;
    for (int n = 0; n <= t.q(); ++n) {
      if (n > 0) fact *= n;
      CAPTURE(n);
      CHECK(rn[static_cast<std::size_t>(n)] * fact == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("implicit Taylor update inverts the truncated exponential") {
  for (int r = 1; r <= 6; ++r) {
    const auto t = builtin_tableau("ImplTaylor-" + std::to_string(r));
    for (double z : {-3.0, -0.7, 0.4}) {
      double lhs = 1.0;  // 1 - sum_k a^(k) z^k
      for (int k = 1; k <= r; ++k) lhs -= t.a(k)(0, 0) * std::pow(z, k);
      double series = 0.0, term = 1.0;
      for (int k = 0; k <= r; ++k) {
        series += term;
        term *= -z / (k + 1);
      }
      CHECK(lhs == doctest::Approx(series).epsilon(1e-13));
    }
  }
}

TEST_CASE("validate reports a broken weight sum") {
  Matrix a = Matrix::Zero(2, 2);
  a(1, 0) = 0.5;
  a(1, 1) = 0.5;
  Vector b(2);
  b << 0.5, 0.4;
  Vector c(2);
  c << 0.0, 1.0;
  const Tableau t("broken", 2, TableauStructure::ExplicitFirstStageFullyImplicit, {a}, {b}, c);
  const auto issues = validate(t);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("0.9") != std::string::npos);
}

TEST_CASE("plain-text round trip") {
  for (const auto& name : concrete_names()) {
    CAPTURE(name);
    const auto t = builtin_tableau(name);
    const auto back = parse_tableau(format_tableau(t));
    CHECK(back.name() == t.name());
    CHECK(back.q() == t.q());
    CHECK(back.structure() == t.structure());
    for (int k = 1; k <= t.r(); ++k) {
      CHECK((back.a(k) - t.a(k)).cwiseAbs().maxCoeff() < 1e-15);
      CHECK((back.b(k) - t.b(k)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("coefficient parsing") {
  CHECK(parse_coefficient("-1/12") == doctest::Approx(-1.0 / 12.0));
  CHECK(parse_coefficient("1e-3") == 1e-3);
  CHECK_THROWS_AS(parse_coefficient("1/0"), InvalidArgument);
  CHECK_THROWS_AS(parse_coefficient("abc"), InvalidArgument);
  CHECK_THROWS_AS(builtin_tableau("NoSuchScheme"), InvalidArgument);
}
