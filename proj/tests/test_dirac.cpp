#include "doctest.h"

#include <cmath>
#include <numbers>

#include "flashsim/dirac.hpp"
#include "flashsim/quadrature.hpp"
#include "test_util.hpp"

using namespace flashsim;

namespace {

RelModel small_model(double sigma = 1.0, double tau = 1.0, int modes = 128, double half_width = 0) {
  RelParams p;
  p.dirac = {1.0, 4.0, modes};
  p.sigma = sigma;
  p.tau = tau;
  p.half_width = half_width;
  return RelModel(p);
}

// Flux density per unit x on a surface, evaluated pointwise (no grid).
double flux_at(const DiracSpace& sp, const Vec& c, const Surface& s, double x) {
  const Eigen::Vector2cd v = sp.evaluate(c, s.time_at(x), x);
  return v.squaredNorm() - 2.0 * s.slope(x) * std::real(std::conj(v(0)) * v(1));
}

double integrate(const std::function<double(double)>& f, double a, double b, int panels = 400, int order = 8) {
  const QuadratureRule r = composite_gauss_legendre(a, b, panels, order);
  double acc = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * f(r.nodes[i]);
  return acc;
}

}  // namespace

TEST_CASE("spacetime geometry") {
  const SpacetimePoint a{0.3, -0.2}, b{2.1, 0.9};
  CHECK(minkowski_interval(a, b) == doctest::Approx(1.8 * 1.8 - 1.1 * 1.1));
  CHECK(in_future_cone(a, b));
  CHECK_FALSE(in_future_cone(b, a));
  CHECK_FALSE(in_future_cone(a, {0.5, 3.0}));
  CHECK_THROWS_AS(proper_time(a, {0.5, 3.0}), InvariantError);
  for (double eta : {-0.7, 0.3, 1.2}) {
    CHECK(std::abs(proper_time(boost(a, eta), boost(b, eta)) - proper_time(a, b)) <= 1e-12);
    const SpacetimePoint back = boost(boost(b, eta), -eta);
    CHECK(std::abs(back.t - b.t) + std::abs(back.x - b.x) < 1e-13);
  }
  const SpacetimePoint same = boost(b, 0.0);
  CHECK((same.t == b.t && same.x == b.x));
  // a particle at rest is seen moving in +x after a positive boost
  CHECK(boost({1.0, 0.0}, 0.5).x > 0);
}

TEST_CASE("plane-wave spinors and evaluation") {
  const DiracSpace sp({1.3, 4.0, 64});
  for (double k : {-2.0, 0.0, 0.7, 3.5}) {
    const double e = std::hypot(k, 1.3);
    Eigen::Matrix2cd h;
    h << 1.3, k, k, -1.3;
    const auto up = sp.spinor_plus(k), um = sp.spinor_minus(k);
    CHECK((h * up - e * up).norm() < 1e-13);
    CHECK((h * um + e * um).norm() < 1e-13);
    CHECK(std::abs(up.squaredNorm() - 1.0) < 1e-14);
    CHECK(std::abs(up.dot(um)) < 1e-14);
  }
  const int j = 40;
  Vec c = Vec::Zero(sp.dim());
  c(j) = 1.0;
  const double t = 0.7, x = -1.9, k = sp.momentum(j), e = sp.energy(j);
  const Eigen::Vector2cd expect = sp.spinor_plus(k) * std::polar(1.0 / std::sqrt(sp.box_length()), -e * t + k * x);
  CHECK((sp.evaluate(c, t, x) - expect).norm() < 1e-14);
  c.setZero();
  c(sp.modes() + j) = 1.0;
  const Eigen::Vector2cd expect_m = sp.spinor_minus(k) * std::polar(1.0 / std::sqrt(sp.box_length()), e * t + k * x);
  CHECK((sp.evaluate(c, t, x) - expect_m).norm() < 1e-14);
}

TEST_CASE("analysis inverts synthesis on the initial slice") {
  const DiracSpace sp({1.0, 4.0, 96});
  const Vec c = testutil::random_vector(sp.dim(), 12);
  const Vec back = sp.analyze([&](double x) { return sp.evaluate(c, 0.0, x); });
  CHECK((back - c).norm() <= 1e-10);
}

TEST_CASE("packets keep unit norm on boosted flat slices") {
  const RelModel m = small_model(1.0, 1.0, 256);
  const Vec c = dirac_packet(m.space(), 0.5, 2.0, 0.6);
  CHECK(c.norm() == doctest::Approx(1.0));
  CHECK(mean_velocity(m.space(), c) == doctest::Approx(0.6 / std::hypot(0.6, 1.0)).epsilon(0.02));
  for (double eta : {-0.7, 0.0, 0.4, 1.0}) {
    const SurfaceBasis b = m.basis(Surface::flat({1.5, 0.3}, eta));
    CHECK(std::abs(b.surface_norm2(b.restrict(c)) - 1.0) <= 1e-6);
    const SurfaceState st = restrict_to_surface(m.space(), c, b.grid);
    CHECK(std::abs(st.norm2() - 1.0) <= 1e-6);
    // independent quadrature of the flux
    const Surface s = Surface::flat({1.5, 0.3}, eta);
    CHECK(std::abs(integrate([&](double x) { return flux_at(m.space(), c, s, x); }, -40, 40) - 1.0) <= 1e-6);
  }
}

TEST_CASE("hyperboloid geometry and surface distance") {
  const SpacetimePoint base{0.4, -0.3};
  const Surface h = Surface::hyperboloid(base, 2.0);
  const auto at_chi = [&](double chi) { return SpacetimePoint{base.t + 2.0 * std::cosh(chi), base.x + 2.0 * std::sinh(chi)}; };
  const SpacetimePoint y1 = at_chi(0.0), y2 = at_chi(0.5);
  CHECK(h.contains(y1));
  CHECK(h.contains(y2));
  CHECK(std::abs(proper_time(base, y2) - 2.0) < 1e-12);
  CHECK(surface_distance(h, y1, y1) == 0.0);
  CHECK(surface_distance(h, y1, y2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(surface_distance(h, y2, y1) == surface_distance(h, y1, y2));
  // arc length from the induced metric sqrt(1 - (dt/dx)^2) dx
  const double oracle = integrate([&](double x) { return std::sqrt(1.0 - h.slope(x) * h.slope(x)); }, y1.x, y2.x, 50);
  CHECK(surface_distance(h, y1, y2) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(surface_distance(h, y1, {0.0, 0.0}), InvariantError);

  for (double x : {-3.0, 0.2, 5.0}) {
    const auto [n0, n1] = h.normal(x);
    CHECK(n0 * n0 - n1 * n1 == doctest::Approx(1.0));
    CHECK(h.line_element(x) == doctest::Approx(std::sqrt(1.0 - h.slope(x) * h.slope(x))));
    CHECK(h.x_at_arc(h.arc(x)) == doctest::Approx(x));
  }
  // boosting a hyperboloid keeps its radius and moves its base
  const Surface hb = h.boosted(0.6);
  CHECK(hb.contains(boost(y2, 0.6)));
  const Surface f = Surface::flat({1.0, 2.0}, 0.3).boosted(0.4);
  CHECK(f.rapidity == doctest::Approx(0.7));
}

TEST_CASE("surface Gaussian") {
  const RelModel m = small_model(0.8, 2.0);
  const Surface h = Surface::hyperboloid({0.0, 0.0}, 30.0);
  const SurfaceGrid g = m.grid(h);
  const Index mid = g.size() / 2;
  const RVec w = surface_gaussian(m, g, g.arc[mid]);
  const double peak = 1.0 / (std::sqrt(2 * std::numbers::pi) * 0.8 * 2.0);
  CHECK(w(mid) == doctest::Approx(peak).epsilon(1e-14));
  // weight at arc distance sigma
  const double x_sigma = h.x_at_arc(g.arc[mid] + 0.8);
  const double lx = h.arc(x_sigma);
  CHECK(surface_gaussian(m, g, lx)(mid) / peak == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  // integral over flash locations at a fixed sample point
  const double total = integrate([&](double l) { return surface_gaussian(m, g, l)(mid); }, g.arc[mid] - 10, g.arc[mid] + 10, 40);
  CHECK(std::abs(total - 1.0 / 2.0) <= 1e-6);
  // window edge
  CHECK_THROWS_AS(surface_gaussian(m, g, g.arc.back()), NumericalError);
  CHECK(surface_gaussian_tail(m, g, g.arc.back()) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("collapse operator") {
  const RelModel m = small_model(1.0, 1.5);
  const SpacetimePoint base{-8.0, 0.0};
  const Vec c = dirac_packet(m.space(), 0.0, 1.5, 0.0);

  CHECK(collapse(m, base, {-8.5, 0.0}, c).norm() == 0.0);
  CHECK(collapse(m, base, {-7.0, 2.0}, c).norm() == 0.0);

  // flash straight above the base point where the packet sits
  const SpacetimePoint flash{0.5, 0.0};
  CollapseInfo info;
  const Vec k = collapse(m, base, flash, c, &info);
  const double s = 8.5;
  CHECK(info.proper_time == doctest::Approx(s));
  CHECK(info.residual < 1e-3);
  CHECK(info.captured == doctest::Approx(1.0).epsilon(1e-6));
  const Surface h = Surface::hyperboloid(base, s);
  const double l0 = h.arc(flash.x);
  const double oracle =
      std::exp(-s / 1.5) * integrate(
                               [&](double x) {
                                 const double d = h.arc(x) - l0;
                                 return flux_at(m.space(), c, h, x) * std::exp(-d * d / 2.0) /
                                        (std::sqrt(2 * std::numbers::pi) * 1.5);
                               },
                               -30, 30);
  CHECK(k.squaredNorm() == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(collapse_density(m, base, flash, c) == doctest::Approx(oracle).epsilon(1e-8));

  // block form acts column by column
  Mat block(c.size(), 2);
  block.col(0) = c;
  block.col(1) = dirac_packet(m.space(), 1.0, 1.0, 0.3);
  const Mat kb = collapse(m, base, flash, block);
  CHECK((kb.col(0) - k).norm() < 1e-13);
  CHECK((kb.col(1) - collapse(m, base, flash, Vec(block.col(1)))).norm() < 1e-13);
}

TEST_CASE("POVM completeness for an interior packet") {
  const double tau = 1.0;
  // analytic factor
  const QuadratureRule r = composite_gauss_legendre(0.0, 12 * tau, 12, 8);
  double acc = 0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * std::exp(-r.nodes[i] / tau) / tau;
  CHECK(acc == doctest::Approx(1.0 - std::exp(-12.0)).epsilon(1e-12));

  const RelModel m = small_model(1.0, tau);
  const Vec c = dirac_packet(m.space(), 0.0, 1.5, 0.0);
  const SpacetimePoint base{-7.5, 0.0};  // 5 packet widths
  const PovmResult coarse = povm_integral(m, base, c);
  CHECK(coarse.total >= 0.999);
  CHECK(coarse.total <= 1.001);
  const PovmResult fine = povm_integral(m, base, c, PovmSpec{}.refined());
  CHECK(1.0 - fine.total <= 1.0 - coarse.total);
  CHECK(1.0 - fine.total >= 0.0);
}

TEST_CASE("POVM deficiency equals the flux not yet inside the cone") {
  // a narrow window makes the cone crossing incomplete at its edge
  const double tau = 1.0, half = 6.0;
  const RelModel m = small_model(1.0, tau, 128, half);
  const Vec c = dirac_packet(m.space(), 1.0, 1.5, 0.8);
  const SpacetimePoint base{-0.5, 0.0};
  PovmSpec spec;
  const PovmResult res = povm_integral(m, base, c, spec);
  // flux through the truncated hyperboloid equals the probability on the flat
  // chord closing it, |x - x'| < X at t = t' + sqrt(s^2 + X^2); each grid
  // point carries a cell of width h, so the edge sits half a cell out
  const double x_edge = (std::floor(half / m.spacing()) + 0.5) * m.spacing();
  const double u_max = -std::expm1(-spec.s_max_factor);
  const QuadratureRule ru = composite_gauss_legendre(0.0, u_max, spec.s_panels, spec.s_order);
  double expect = 0;
  for (std::size_t k = 0; k < ru.nodes.size(); ++k) {
    const double s = -tau * std::log1p(-ru.nodes[k]);
    const Surface chord = Surface::time_slice(base.t + std::hypot(s, x_edge));
    const double p = integrate([&](double x) { return flux_at(m.space(), c, chord, x); }, base.x - x_edge,
                               base.x + x_edge, 120);
    expect += ru.weights[k] * p;
  }
  const double deficiency = 1.0 - res.total, leak = 1.0 - expect;
  CHECK(deficiency > 1e-3);
  CHECK(std::abs(deficiency - leak) <= 2e-4);
}

TEST_CASE("survival operator") {
  const RelModel m = small_model(1.0, 1.0);
  const Vec c = dirac_packet(m.space(), 0.0, 1.5, 0.0);
  const SpacetimePoint base{-8.0, 0.0};
  auto surv = [&](const Surface& s) { return (c.adjoint() * survival_operator(m, base, s) * c)(0, 0).real(); };

  CHECK(surv(Surface::time_slice(-9.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(surv(Surface::hyperboloid(base, 1.2)) == doctest::Approx(std::exp(-1.2)).epsilon(1e-2));

  double prev = 1.0;
  for (double t : {-7.8, -7.0, -5.5, -3.0}) {
    const double v = surv(Surface::time_slice(t));
    CHECK(v < prev);
    prev = v;
  }

  // cross-check on a tilted slice: 1 - survival is the integral of the flash
  // density over the cone region below the slice
  const Surface slice = Surface::flat({-6.0, 0.5}, 0.3);
  const Mat w = survival_root(m, base, slice);
  const double via_root = (w * c).squaredNorm();
  const double s_top = proper_time_to_slice(base, slice);
  // the Gaussian over flash locations inside the slice's past integrates to
  // an erf weight at each point of H_s
  double below = 0;
  const QuadratureRule rs = composite_gauss_legendre(0.0, s_top, 24, 8);
  for (std::size_t k = 0; k < rs.nodes.size(); ++k) {
    const double s = rs.nodes[k];
    const Surface h = Surface::hyperboloid(base, s);
    const double a = std::acosh(s_top / s);
    const double lo = s * (0.3 - a), hi = s * (0.3 + a);
    const double r2 = std::sqrt(2.0);
    const double x_lo = h.x_at_arc(std::max(lo - 10, -s * 40)), x_hi = h.x_at_arc(std::min(hi + 10, s * 40));
    const double inner = integrate(
        [&](double x) {
          const double l = h.arc(x);
          const double weight = 0.5 * (std::erf((hi - l) / r2) - std::erf((lo - l) / r2));
          return flux_at(m.space(), c, h, x) * weight;
        },
        std::max(x_lo, -40.0), std::min(x_hi, 40.0), 200);
    below += rs.weights[k] * std::exp(-s) * inner;
  }
  CHECK(via_root == doctest::Approx(1.0 - below).epsilon(1e-4));
}

TEST_CASE("boosted states") {
  // a wide box keeps the boosted slice clear of periodic images
  const DiracSpace sp({1.0, 4.0, 256});
  // narrow in momentum so the boosted spectrum stays inside the cutoff
  const Vec c = dirac_packet(sp, 0.0, 3.0, 0.2);
  CHECK((boost_state(sp, c, 0.0) - c).norm() < 1e-10);
  for (double eta : {0.3, -0.7}) {
    const Vec b = boost_state(sp, c, eta);
    CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK((boost_state(sp, b, -eta) - c).norm() <= 1e-10);
    // boosted field at a boosted point is the spinor transform of the original
    const SpacetimePoint y{0.4, 0.7}, yb = boost(y, eta);
    CHECK((sp.evaluate(b, yb.t, yb.x) - boost_spinor(eta) * sp.evaluate(c, y.t, y.x)).norm() < 1e-10);
  }
}
