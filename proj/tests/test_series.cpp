#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "gphot/series.hpp"

using gphot::cdouble;
using gphot::Context;
using gphot::make_context;
using gphot::MultiIndex;
using gphot::Series;

namespace {

Series random_series(const Context& ctx, std::mt19937& rng, double const_floor = 0.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Series s(ctx);
  const std::size_t n = ctx->box_size();
  for (std::size_t f = 0; f < n; ++f) {
    MultiIndex k = ctx->unflat(f);
    s.set(k, cdouble(u(rng), u(rng)));
  }
  if (const_floor > 0.0) {
    cdouble c0 = s.constant_term();
    if (std::abs(c0) < const_floor)
      s.set(MultiIndex(static_cast<std::size_t>(ctx->var_count()), 0),
            c0 + cdouble(const_floor * 2.0, const_floor));
  }
  return s;
}

double max_rel_diff(const Series& a, const Series& b) {
  double worst = 0.0;
  const auto& ctx = a.context();
  for (std::size_t f = 0; f < ctx->box_size(); ++f) {
    MultiIndex k = ctx->unflat(f);
    cdouble ca = a.coefficient(k), cb = b.coefficient(k);
    double scale = std::max({std::abs(ca), std::abs(cb), 1.0});
    worst = std::max(worst, std::abs(ca - cb) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("variable construction", "[series]") {
  auto ctx = make_context({3});
  Series y = variable(ctx, 0, 0.0);
  CHECK(y.coefficient({0}) == cdouble(0.0));
  CHECK(y.coefficient({1}) == cdouble(1.0));
  CHECK(y.coefficient({2}) == cdouble(0.0));

  auto ctx2 = make_context({2, 2});
  Series x1 = variable(ctx2, 1, 0.5);
  CHECK(x1.coefficient({0, 0}) == cdouble(0.5));
  CHECK(x1.coefficient({0, 1}) == cdouble(1.0));
  CHECK(x1.coefficient({1, 0}) == cdouble(0.0));

  // order-0 box truncates the linear term away
  auto ctx0 = make_context({0});
  Series t = variable(ctx0, 0, 2.0);
  CHECK(t.coefficient({0}) == cdouble(2.0));

  CHECK_THROWS_AS(variable(ctx, 1, 0.0), gphot::domain_error);
}

TEST_CASE("ring arithmetic", "[series]") {
  auto ctx = make_context({2});
  Series y = variable(ctx, 0);
  Series p = (y + cdouble(1.0)) * (-y + cdouble(1.0));
  CHECK(p.coefficient({0}) == cdouble(1.0));
  CHECK(p.coefficient({1}) == cdouble(0.0));
  CHECK(p.coefficient({2}) == cdouble(-1.0));

  Series s = (y + cdouble(1.0)) + (-y + cdouble(2.0));
  CHECK(s.coefficient({0}) == cdouble(3.0));
  CHECK(s.coefficient({1}) == cdouble(0.0));

  auto ctx1 = make_context({1});
  Series y1 = variable(ctx1, 0);
  Series sq = y1 * y1;  // truncated to zero
  CHECK(sq.coefficient({0}) == cdouble(0.0));
  CHECK(sq.coefficient({1}) == cdouble(0.0));

  CHECK_THROWS_AS(y + y1, gphot::context_error);
}

TEST_CASE("reciprocal", "[series]") {
  auto ctx = make_context({3});
  Series y = variable(ctx, 0);
  Series r = reciprocal(-y + cdouble(1.0));  // geometric series
  for (int k = 0; k <= 3; ++k)
    CHECK(std::abs(r.coefficient({k}) - cdouble(1.0)) < 1e-15);

  Series c = reciprocal(Series(ctx, 2.0));
  CHECK(std::abs(c.coefficient({0}) - cdouble(0.5)) < 1e-15);

  auto ctx2 = make_context({2});
  Series y2 = variable(ctx2, 0);
  Series a = Series(ctx2, 1.0) + y2 + y2 * y2 * cdouble(0.5);
  Series back = a * reciprocal(a);
  CHECK(std::abs(back.coefficient({0}) - cdouble(1.0)) < 1e-14);
  CHECK(std::abs(back.coefficient({1})) < 1e-14);
  CHECK(std::abs(back.coefficient({2})) < 1e-14);

  CHECK_THROWS_AS(reciprocal(y), gphot::singular_error);
}

TEST_CASE("exp", "[series]") {
  auto ctx = make_context({3});
  Series y = variable(ctx, 0);
  Series e = gphot::exp(y);
  CHECK(std::abs(e.coefficient({0}) - cdouble(1.0)) < 1e-15);
  CHECK(std::abs(e.coefficient({1}) - cdouble(1.0)) < 1e-15);
  CHECK(std::abs(e.coefficient({2}) - cdouble(0.5)) < 1e-15);
  CHECK(std::abs(e.coefficient({3}) - cdouble(1.0 / 6.0)) < 1e-15);

  Series one = gphot::exp(Series(ctx));
  CHECK(std::abs(one.coefficient({0}) - cdouble(1.0)) < 1e-15);
  CHECK(std::abs(one.coefficient({1})) < 1e-15);

  // exp(-nu (1 - y)) against e^{-nu} nu^k / k! termwise
  auto ctx4 = make_context({4});
  const double nu = 0.3;
  Series arg = (variable(ctx4, 0) - cdouble(1.0)) * cdouble(nu);
  Series pois = gphot::exp(arg);
  for (int k = 0; k <= 4; ++k) {
    double expected = std::exp(-nu) * std::pow(nu, k) / gphot::factorial(k);
    CHECK(std::abs(pois.coefficient({k}) - cdouble(expected)) < 1e-15);
  }
}

TEST_CASE("pow_real", "[series]") {
  auto ctx = make_context({2});
  Series y = variable(ctx, 0);
  Series r = pow_real(y * cdouble(2.0) + cdouble(1.0), -0.5);
  CHECK(std::abs(r.coefficient({0}) - cdouble(1.0)) < 1e-14);
  CHECK(std::abs(r.coefficient({1}) - cdouble(-1.0)) < 1e-14);
  CHECK(std::abs(r.coefficient({2}) - cdouble(1.5)) < 1e-14);

  Series c = pow_real(Series(ctx, 4.0), -0.5);
  CHECK(std::abs(c.coefficient({0}) - cdouble(0.5)) < 1e-15);

  Series sq = pow_real(y + cdouble(1.0), 2.0);
  CHECK(sq.coefficient({0}) == cdouble(1.0));
  CHECK(sq.coefficient({1}) == cdouble(2.0));
  CHECK(sq.coefficient({2}) == cdouble(1.0));

  CHECK_THROWS_AS(pow_real(y - cdouble(1.0), -0.5), gphot::singular_error);
}

TEST_CASE("coefficient extraction", "[series]") {
  auto ctx = make_context({3});
  CHECK(std::abs(gphot::exp(variable(ctx, 0)).coefficient({3}) - cdouble(1.0 / 6.0)) < 1e-15);
  CHECK(Series(ctx, 5.0).coefficient({0}) == cdouble(5.0));
  auto ctx7 = make_context({7});
  Series geom = reciprocal(-variable(ctx7, 0) + cdouble(1.0));
  CHECK(std::abs(geom.coefficient({7}) - cdouble(1.0)) < 1e-15);
  CHECK_THROWS_AS(geom.coefficient({8}), gphot::domain_error);
}

TEST_CASE("ring axioms on random series", "[series][property]") {
  std::mt19937 rng(42);
  for (auto orders : {std::vector<int>{4}, std::vector<int>{2, 3}, std::vector<int>{1, 1, 1, 1, 1}}) {
    auto ctx = make_context(orders);
    for (int rep = 0; rep < 5; ++rep) {
      Series a = random_series(ctx, rng);
      Series b = random_series(ctx, rng);
      Series c = random_series(ctx, rng);
      CHECK(max_rel_diff((a * b) * c, a * (b * c)) < 1e-13);
      CHECK(max_rel_diff(a * (b + c), a * b + a * c) < 1e-13);
      CHECK(max_rel_diff(a * b, b * a) < 1e-13);
    }
  }
}

TEST_CASE("reciprocal and pow invariants on random series", "[series][property]") {
  std::mt19937 rng(7);
  auto ctx = make_context({3, 2});
  for (int rep = 0; rep < 10; ++rep) {
    Series a = random_series(ctx, rng, 0.1);
    Series prod = a * reciprocal(a);
    CHECK(std::abs(prod.coefficient({0, 0}) - cdouble(1.0)) < 1e-12);
    CHECK(max_rel_diff(prod, Series(ctx, 1.0)) < 1e-12);

    // force the constant term off the branch cut for pow
    Series shifted = a + cdouble(3.0);
    Series half = pow_real(shifted, -0.5);
    CHECK(max_rel_diff(half * half * shifted, Series(ctx, 1.0)) < 1e-12);
  }
}

TEST_CASE("exp homomorphism", "[series][property]") {
  std::mt19937 rng(11);
  auto ctx = make_context({3, 3});
  for (int rep = 0; rep < 8; ++rep) {
    Series a = random_series(ctx, rng);
    Series b = random_series(ctx, rng);
    CHECK(max_rel_diff(gphot::exp(a + b), gphot::exp(a) * gphot::exp(b)) < 1e-12);
  }
}

TEST_CASE("log inverts exp", "[series][property]") {
  std::mt19937 rng(13);
  auto ctx = make_context({4});
  for (int rep = 0; rep < 8; ++rep) {
    Series a = random_series(ctx, rng, 0.2) + cdouble(2.0);
    CHECK(max_rel_diff(gphot::exp(gphot::log(a)), a) < 1e-12);
  }
}

TEST_CASE("first-order coefficient matches finite differences", "[series][property]") {
  // scalar pipeline f(x) = exp(x) / (2 + x) * (1 + x)^(-1/2)
  auto eval_scalar = [](double x) {
    return std::exp(x) / (2.0 + x) * std::pow(1.0 + x, -0.5);
  };
  auto ctx = make_context({1});
  Series x = variable(ctx, 0, 0.4);
  Series f = gphot::exp(x) * reciprocal(x + cdouble(2.0)) * pow_real(x + cdouble(1.0), -0.5);
  const double h = 1e-6;
  double fd = (eval_scalar(0.4 + h) - eval_scalar(0.4 - h)) / (2.0 * h);
  double ad = f.coefficient({1}).real();
  CHECK(std::abs(ad - fd) / std::abs(fd) < 1e-5);
}
