#include <cmath>
#include <random>

#include "catalog_samples.hpp"
#include "doctest.h"
#include "pwfield/spectral.hpp"

using namespace pwf;

TEST_CASE("eigen data is consistent with trace and determinant") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int i = 0; i < 2000; ++i) {
    Mat2 a{u(rng), u(rng), u(rng), u(rng)};
    EigenData e = eigen_data(a);
    double scale = 1 + std::fabs(a.trace()) + std::fabs(a.det());
    CHECK(std::fabs(e.re1 + e.re2 - a.trace()) <= 1e-12 * scale);
    double prod = e.re1 * e.re2 - e.im1 * e.im2;
    CHECK(std::fabs(prod - a.det()) <= 1e-12 * scale * scale);
    CHECK((e.im1 != 0) == (e.discriminant < 0));
  }
}

TEST_CASE("omega0 test") {
  for (PortraitLabel l : all_portrait_labels()) CHECK(omega0_test(make_normal_form(l)).pass);
  PiecewiseField moved = make_inline("1", "x", "-y", "x");
  CHECK(omega0_test(moved).reason == Omega0Failure::NotEquilibrium);
  PiecewiseField tangent = make_inline("x - y", "y", "x + y", "-y");
  CHECK(omega0_test(tangent).reason == Omega0Failure::TangencyCondition);
  CHECK(omega0_test(make_z0(-1, -1)).pass);
}

TEST_CASE("lyapunov constant") {
  Mat2 up{1, -1, 1, 1}, down{-3, -1, 1, -3};
  CHECK(lyapunov_ell(up, down) == doctest::Approx(-2));
  Mat2 ff{-1, -1, 1, -1};
  CHECK(lyapunov_ell(ff, ff) == -2);
  CHECK(lyapunov_ell(up, Mat2{2, 1, 1, 2}) == 1);
  for (PortraitLabel l : {PortraitLabel::FF1, PortraitLabel::FF2}) {
    OmegaClass c = classify_local(make_normal_form(l));
    CHECK(c.ell == 2.0 * *c.alpha);
  }
}

TEST_CASE("normal forms classify back to their labels") {
  for (PortraitLabel l : all_portrait_labels()) {
    OmegaClass c = classify_local(make_normal_form(l));
    REQUIRE(c.label);
    CHECK(*c.label == l);
    CHECK(c.stratum == Stratum::Omega1);
    CHECK(c.structurally_stable());
  }
}

TEST_CASE("z0 strata and the equal-eigenvalue stratum") {
  for (double a : {-1.0, 1.0}) {
    for (double b : {-1.0, 1.0}) {
      OmegaClass c = classify_local(make_z0(a, b));
      CHECK(c.in_omega0);
      if (a < 0 && b < 0) {
        CHECK(c.stratum == Stratum::Omega2);
        CHECK(c.ell == 0);
        CHECK(!c.label);
      } else {
        CHECK(c.stratum == Stratum::Omega1);
      }
    }
  }
  OmegaClass zl = classify_local(make_counterexample_zstar(true));
  CHECK(zl.omega3);
  CHECK(zl.stratum == Stratum::Omega3);
  CHECK(!zl.label);
  CHECK_THROWS_AS(normal_form_of(zl), NotOmega1);
}

TEST_CASE("normal_form_of") {
  PiecewiseField z = make_linear({0.2, -1, 1, 0.2}, {-0.5, -1, 1, -0.5});
  OmegaClass c = classify_local(z);
  CHECK(c.subset == Subset::FF);
  CHECK(c.ell == doctest::Approx(-0.3));
  CHECK(c.label == PortraitLabel::FF1);
  PiecewiseField nf = normal_form_of(c);
  CHECK(nf.catalog.name == "FF-1");

  // node traces +2 and -2
  OmegaClass nn = classify_local(make_linear({1, 0.5, 1, 1}, {-1, 0.5, 1, -1}));
  CHECK(nn.subset == Subset::NN);
  CHECK(nn.label == PortraitLabel::NN2);
  CHECK(!nn.orientation.rotate_pi);
  OmegaClass nn_rot = classify_local(make_linear({-1, 0.5, 1, -1}, {1, 0.5, 1, 1}));
  CHECK(nn_rot.label == PortraitLabel::NN2);
  CHECK(nn_rot.orientation.rotate_pi);

  // focus on the lower side, node above: roles swap
  OmegaClass fn = classify_local(make_linear({-2, 1, 1, -2}, {0, -1, 1, 0.1}));
  CHECK(fn.label == PortraitLabel::FN2);
  CHECK(fn.orientation.swap_sides);
}

TEST_CASE("labels are invariant under reflections") {
  for (const auto& [name, z] : testing_support::catalog_samples()) {
    OmegaClass base = classify_local(z);
    for (const PiecewiseField& t : {reflect_x(z), reflect_y(z), reflect_x(reflect_y(z))}) {
      OmegaClass c = classify_local(t);
      INFO(name);
      CHECK(c.in_omega0 == base.in_omega0);
      CHECK(c.stratum == base.stratum);
      CHECK(c.label == base.label);
      CHECK(c.subset == base.subset);
      CHECK(c.ell == doctest::Approx(base.ell).epsilon(1e-12));
      CHECK(c.alpha == base.alpha);
      CHECK(c.beta == base.beta);
      CHECK(c.gamma == base.gamma);
      CHECK(c.eta == base.eta);
      CHECK(c.xi == base.xi);
    }
  }
}
