#include "app/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>

#include "flashsim/fock.hpp"
#include "flashsim/grw.hpp"
#include "flashsim/multitime.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/quadrature.hpp"
#include "flashsim/rel_experiments.hpp"
#include "flashsim/rel_flash.hpp"
#include "flashsim/stats.hpp"

namespace flashsim::app {

namespace {

using Clock = std::chrono::steady_clock;

class Recorder {
 public:
  Recorder(std::string suite, const VerifyOptions& opt) : suite_(std::move(suite)), opt_(opt) {}
  const VerifyOptions& options() const { return opt_; }
  void start() { t0_ = Clock::now(); }
  // value <= tolerance (scaled)
  void at_most(int criterion, std::string name, double value, double tol, std::string detail = {}) {
    tol *= opt_.tolerance_scale;
    push(criterion, std::move(name), value, tol, "<=", value <= tol, std::move(detail));
  }
  // value > threshold (not scaled: it is a signal size, not an error)
  void above(int criterion, std::string name, double value, double threshold, std::string detail = {}) {
    push(criterion, std::move(name), value, threshold, ">", value > threshold, std::move(detail));
  }
  void within(int criterion, std::string name, double value, double lo, double hi, std::string detail = {}) {
    const double c = 0.5 * (lo + hi), half = 0.5 * (hi - lo) * opt_.tolerance_scale;
    push(criterion, std::move(name), value, half, "in", std::abs(value - c) <= half, std::move(detail));
  }
  void fail(int criterion, std::string name, const std::string& why) {
    push(criterion, std::move(name), NAN, NAN, "error", false, why);
  }
  std::vector<Check> take() { return std::move(checks_); }

 private:
  void push(int criterion, std::string name, double value, double tol, std::string rel, bool ok, std::string detail) {
    Check c;
    c.suite = suite_;
    c.name = std::move(name);
    c.criterion = criterion;
    c.value = value;
    c.tolerance = tol;
    c.relation = std::move(rel);
    c.passed = ok && std::isfinite(value);
    c.seconds = std::chrono::duration<double>(Clock::now() - t0_).count();
    c.detail = std::move(detail);
    checks_.push_back(std::move(c));
    t0_ = Clock::now();
  }
  std::string suite_;
  VerifyOptions opt_;
  Clock::time_point t0_ = Clock::now();
  std::vector<Check> checks_;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

Vec random_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = {rng.normal(), rng.normal()};
  return v / v.norm();
}

Mat random_matrix(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Mat m(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) m(i, j) = {rng.normal(), rng.normal()};
  return m;
}

Mat random_unitary(Index n, std::uint64_t seed) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(n, seed));
  return qr.householderQ();
}

RelModel rel_model(double cutoff, int modes, double sigma = 1.0, double tau = 1.0, double mass = 1.0) {
  RelParams p;
  p.dirac = {mass, cutoff, modes};
  p.sigma = sigma;
  p.tau = tau;
  return RelModel(p);
}

Mat entangled_pair(const RelModel& m, double left, double right) {
  const Vec a = dirac_packet(m.space(), left, 1.5, 0.0), b = dirac_packet(m.space(), right, 1.5, 0.0);
  const Mat c = product_state(a, b) + product_state(b, a);
  return c / c.norm();
}

// ---------------------------------------------------------------------------
// nonrelativistic

void exponential_survival(Recorder& r) {
  const double tau = 1.0;
  const GridSpec grid = GridSpec::centered(1, 8, 0.5);
  const GrwModel m = GrwModel::original(grid, 2, 0.75, tau, grid_hamiltonian(grid, 2, 1.0));
  const StateVector psi(random_vector(m.dim(), 3));
  double worst = 0;
  for (double t : {0.1 * tau, tau, 5 * tau})
    worst = std::max(worst, std::abs(survival_probability(m, psi, t) - std::exp(-2 * t / tau)));
  r.at_most(1, "survival equals exp(-N t / tau), N = 2", worst, 1e-10, "t in {0.1, 1, 5} tau");
}

void waiting_times(Recorder& r) {
  const double tau = 1.0, horizon = 14 * tau;
  const GridSpec grid = GridSpec::centered(1, 8, 0.5);
  const GrwModel m = GrwModel::original(grid, 2, 0.75, tau, grid_hamiltonian(grid, 2, 1.0));
  const StateVector psi(kron(gaussian_packet(grid, {-0.5}, 0.6, 0.5), gaussian_packet(grid, {0.8}, 0.8)));
  const std::size_t n = 10000;
  std::vector<FlashHistory> hist(n);
  parallel_for(n, r.options().threads, [&](std::size_t i) {
    Rng rng = Rng::stream(2024, i);
    hist[i] = sample_history(m, psi, horizon, rng);
  });
  double worst_z = 0, worst_p = 1;
  for (int type = 0; type < 2; ++type) {
    std::vector<double> w;
    for (const auto& h : hist)
      if (!h.per_type[type].empty()) w.push_back(h.per_type[type].front().t);
    const auto est = stats::mean_with_error(w);
    worst_z = std::max(worst_z, std::abs(est.mean - tau) / est.standard_error);
    const auto ks = stats::ks_test(w, [&](double t) { return -std::expm1(-t / tau) / -std::expm1(-horizon / tau); });
    worst_p = std::min(worst_p, ks.p_value);
  }
  r.at_most(2, "mean first waiting time per type, |mean - tau| / SE", worst_z, 3.0, "10^4 trajectories, 2 types");
  r.above(2, "KS p-value against Exp(tau), worst type", worst_p, 0.01);
}

// Rates only on the particle grid, so the location sum is not a multiple of
// the identity and survival is not a plain exponential.
GrwModel unpadded_model(int points, double spacing) {
  const GridSpec grid = GridSpec::centered(1, points, spacing);
  const FlashSites sites{grid, 0};
  std::vector<std::vector<RateOperator>> rates{gaussian_flash_rates(grid, 1, 0, 1.0, 1.0, sites)};
  return GrwModel(grid_hamiltonian(grid, 1, 1.0), FlashRateField(sites, rates), 1.0, 1.0, grid, 1);
}

void grw_family(Recorder& r) {
  const GrwModel m = unpadded_model(32, 0.4);
  const StateVector psi(gaussian_packet(m.grid(), {0.3}, 0.8, 1.0));
  const double horizon = 3.0, dr = m.rates().cell_volume();
  const Index sites = m.rates().site_count();
  const auto flash = [&](const FlashHistory& base, double t, Index s) {
    FlashHistory h = base;
    h.per_type[0].push_back(m.event(t, 0, s));
    return h;
  };
  double worst = 0;
  FlashHistory h(1, 0.0);
  for (double t_next : {0.7, 1.6}) {
    // density of h versus its extension by one more flash plus survival
    const double t_last = h.per_type[0].empty() ? 0.0 : h.per_type[0].back().t;
    const Vec k = apply_history(m, h, psi.amplitudes());
    const double rho = h.per_type[0].empty() ? 1.0 : joint_flash_density(m, psi, h);
    double sum = m.evolve(horizon - t_last, k).squaredNorm();
    const QuadratureRule q = composite_gauss_legendre(t_last, horizon, 24, 10);
    for (std::size_t j = 0; j < q.nodes.size(); ++j)
      for (Index s = 0; s < sites; ++s) sum += q.weights[j] * dr * joint_flash_density(m, psi, flash(h, q.nodes[j], s));
    worst = std::max(worst, rel_diff(sum, rho));
    h = flash(h, t_next, 13);
  }
  r.at_most(3, "next flash integrated out plus survival, n = 0, 1", worst, 1e-6, "32-point grid, non-scalar rates");
}

void fock_equivalence(Recorder& r) {
  double worst = 0;
  for (Statistics st : {Statistics::fermion, Statistics::boson}) {
    const GridSpec g = GridSpec::centered(1, 6, 0.5);
    const FlashSites sites = FlashSites::around(g, 0.8);
    const FockSpace f(6, st, 3);
    const auto sum = fock_flash_rate(f, single_particle_rates(g, 0.8, 2.0, sites));
    const auto dens = smeared_number_density(f, g, 0.8, 2.0, sites);
    for (std::size_t k = 0; k < sum.size(); ++k)
      worst = std::max(worst, (sum[k] - Mat(dens[k].cast<cplx>().asDiagonal())).operatorNorm());
  }
  r.at_most(4, "direct sum of sector rates vs smeared number density", worst, 1e-10,
            "L = 6, N_max = 3, fermions and bosons, operator norm");
}

MultiSystem multitime_pair(double m1, double m2) {
  const GridSpec grid = GridSpec::centered(1, 8, 0.5);
  const auto model = [&](double mass) { return GrwModel::original(grid, 1, 0.75, 1.0, grid_hamiltonian(grid, 1, mass)); };
  return MultiSystem({model(m1), model(m2)});
}

void covariance(Recorder& r) {
  const MultiSystem sys = multitime_pair(1.0, 2.0);
  const StateVector psi(random_vector(sys.dim(), 17));
  const auto tests = covariance_test_set(sys, 0.7, 2.5, 24, 6);
  const auto rep = covariance_check(sys, psi, 0.7, tests);
  double biggest = 0;
  for (double v : rep.lhs) biggest = std::max(biggest, v);
  r.at_most(5, "relative time shift: Bayes quotient vs shifted state", rep.max_abs_diff, 1e-8,
            fmt("%.0f entangled configurations, delta = 0.7 tau, largest density %.3g", rep.lhs.size(), biggest));
}

void nonrel_no_signalling(Recorder& r) {
  // type-1 marginal: other purification (unitary on system 2) and another
  // system-2 Hamiltonian
  const MultiSystem a = multitime_pair(1.0, 2.0), b = multitime_pair(1.0, 5.0);
  const Vec psi = random_vector(a.dim(), 31);
  const Vec rotated = a.apply_on(1, psi, random_unitary(8, 4));
  Rng rng(8);
  double worst = 0;
  for (int j = 0; j < 20; ++j) {
    FlashHistory h(1, 0.0);
    double t = 0;
    for (int k = 0; k < 1 + j % 3; ++k) {
      t += 0.2 + rng.uniform();
      h.per_type[0].push_back(a.model(0).event(t, 0, static_cast<Index>(rng.uniform() * a.model(0).rates().site_count())));
    }
    const double ref = marginal_density(a, StateVector(psi), 0, h);
    worst = std::max(worst, rel_diff(ref, marginal_density(b, StateVector(psi), 0, h)));
    worst = std::max(worst, rel_diff(ref, marginal_density(a, StateVector(rotated), 0, h)));
  }
  r.at_most(9, "GRW type-1 marginal: other purification, other H_2", worst, 1e-8, "20 flash histories");
}

// ---------------------------------------------------------------------------
// relativistic

void povm(Recorder& r) {
  const RelModel m = rel_model(4.0, 128);
  const Vec c = dirac_packet(m.space(), 0.0, 1.5, 0.0);
  const SpacetimePoint base{-7.5, 0.0};  // 5 packet widths below the packet
  const PovmResult coarse = povm_integral(m, base, c);
  r.within(6, "POVM integral over the future cone", coarse.total, 0.999, 1.001,
           fmt("packet width 1.5 at t = 0, base 7.5 below; s cut leaves %.1e", coarse.truncation));
  const PovmResult fine = povm_integral(m, base, c, PovmSpec{}.refined());
  const double d0 = 1 - coarse.total, d1 = 1 - fine.total;
  r.at_most(6, "deficiency after one refinement minus before", d1 - d0, 0.0,
            fmt("deficiency %.3e -> %.3e", d0, d1));
}

void rel_family(Recorder& r) {
  const RelModel m = rel_model(4.0, 64, 1.0, 1.0, 5.0);
  const Vec c = dirac_packet(m.space(), 0.0, 1.5, 0.0);
  const SpacetimePoint seed{-7.5, 0.0};
  const std::vector<SpacetimePoint> f = {{-4.0, 0.3}, {-1.0, -0.2}};
  double worst = 0;
  for (std::size_t n = 0; n <= f.size(); ++n) {
    const std::vector<SpacetimePoint> head(f.begin(), f.begin() + static_cast<long>(n));
    const Vec k = apply_rel_history(m, seed, head, Mat(c));
    const double d = k.squaredNorm();
    const PovmResult next = povm_integral(m, head.empty() ? seed : head.back(), k / std::sqrt(d));
    worst = std::max(worst, std::abs(next.total + next.truncation - 1.0));
  }
  r.at_most(0, "relativistic next flash integrated out, n = 0, 1, 2", worst, 1e-4);
}

void lorentz(Recorder& r) {
  const RelModel m = rel_model(16.0, 512);
  const Mat c = dirac_packet(m.space(), 0.0, 3.0, 0.2);
  RelFlashHistory h({{-8.0, 0.0}});
  h.flashes[0] = {{0.5, 0.4}, {7.0, 1.0}};
  const double d = rel_joint_density(m, c, h);
  double worst = 0;
  for (double eta : {0.3, -0.3, 0.7, -0.7})
    worst = std::max(worst, rel_diff(d, rel_joint_density(m, boost_rel_state(m, c, eta), boost_history(h, eta))));
  r.at_most(7, "joint density under boosts eta = +-0.3, +-0.7 (relative)", worst, 1e-6, fmt("density %.4g", d));
}

void rel_no_signalling(Recorder& r) {
  const RelModel m = rel_model(4.0, 64);
  const Mat psi = entangled_pair(m, -2.0, 2.0);
  const Index n = m.dim();
  const Mat other = psi * random_unitary(n, 11).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (random_matrix(n, 12) + random_matrix(n, 12).adjoint()));
  const Mat u2 = es.eigenvectors() * (cplx(0.0, -0.9) * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
                 es.eigenvectors().adjoint();
  const Mat evolved = psi * u2.transpose();
  const Mat rho = reduced_density(m, psi, 0);
  Rng rng(5);
  int checked = 0;
  double worst = 0;
  while (checked < 20) {
    const SpacetimePoint seed{-1.0 - rng.uniform(), 4.0 * rng.uniform() - 2.0};
    std::vector<SpacetimePoint> f;
    SpacetimePoint prev = seed;
    const int count = 1 + static_cast<int>(2 * rng.uniform());
    for (int k = 0; k < count; ++k) {
      const double s = 0.5 + 1.5 * rng.uniform(), chi = 0.6 * rng.normal();
      prev = {prev.t + s * std::cosh(chi), prev.x + s * std::sinh(chi)};
      f.push_back(prev);
    }
    const double ref = type_marginal(m, rho, seed, f);
    if (!(ref > 1e-12)) continue;
    for (const Mat* s : {&psi, &other, &evolved})
      worst = std::max(worst, rel_diff(ref, type_marginal_from_state(m, *s, 0, seed, f)));
    ++checked;
  }
  r.at_most(9, "relativistic type-1 marginal: other purification, other particle-2 dynamics", worst, 1e-8,
            "20 flash configurations");
}

void nonlocality(Recorder& r) {
  const RelModel m = rel_model(4.0, 64);
  RelFlashHistory h({{-3.0, -6.0}, {-3.0, 6.0}});
  h.flashes[0] = {{0.5, -6.0}};
  h.flashes[1] = {{0.5, 6.0}};
  const double eval_tol = 1e-10;
  const Vec a = dirac_packet(m.space(), -6.0, 1.5, 0.0), b = dirac_packet(m.space(), 6.0, 1.5, 0.0);
  const CorrelationReport prod = correlation_check(m, product_state(a, b), h, eval_tol);
  r.at_most(10, "product state: |joint / product of marginals - 1|", std::abs(prod.ratio - 1.0), eval_tol);
  const CorrelationReport ent = correlation_check(m, entangled_pair(m, -6.0, 6.0), h, eval_tol);
  r.above(10, "entangled state: |joint / product of marginals - 1|", std::abs(ent.ratio - 1.0), 10 * eval_tol,
          fmt("spacelike flashes at x = -6, 6; ratio %.4f", ent.ratio));
}

void conditional_coherence(Recorder& r) {
  const RelModel m = rel_model(4.0, 64);
  const Mat psi = entangled_pair(m, -3.0, 3.0);
  const Surface sigma1 = Surface::time_slice(0.6), sigma2 = Surface::time_slice(1.4);
  RelFlashHistory past({{-0.5, -3.0}, {-0.5, 3.0}});
  past.flashes[0] = {{0.2, -2.8}};
  RelFlashHistory future({past.last(0), past.last(1)});
  future.flashes[0] = {{1.3, -3.1}};
  future.flashes[1] = {{1.0, 2.9}};
  RelFlashHistory all = past;
  for (int i = 0; i < 2; ++i) all.flashes[i].insert(all.flashes[i].end(), future.flashes[i].begin(), future.flashes[i].end());

  const double direct = rel_joint_density(m, psi, all) / rel_survival(m, psi, past, sigma1);
  const std::vector<Mat> roots = survival_roots(m, past, sigma1);
  const Mat psi_s = psi_on_surface(m, psi, past, sigma1);
  const Mat phi_s = phi_on_surface(m, psi, past, sigma1);
  double worst = std::max(rel_diff(direct, future_density_from_psi(m, psi_s, roots, future)),
                          rel_diff(direct, future_density_from_phi(m, phi_s, future)));
  // evolved to a later slice and used again
  const Mat evolved = evolve_psi(m, psi_s, roots, future, sigma2);
  RelFlashHistory later({all.last(0), all.last(1)});
  later.flashes[0] = {{2.2, -3.0}};
  RelFlashHistory whole = all;
  whole.flashes[0].push_back(later.flashes[0][0]);
  const double direct2 = rel_joint_density(m, psi, whole) / rel_survival(m, psi, all, sigma2);
  worst = std::max(worst, rel_diff(direct2, future_density_from_psi(m, evolved, survival_roots(m, all, sigma2), later)));
  r.at_most(12, "future density: Bayes quotient vs psi_Sigma vs phi_Sigma routes", worst, 1e-8,
            "entangled pair, flat slices t = 0.6 and 1.4");
  r.above(12, "| ||phi_Sigma|| - 1 |", std::abs(phi_s.norm() - 1.0), 1e-3, fmt("||phi_Sigma|| = %.4f", phi_s.norm()));
}

void dilation(Recorder& r) {
  const DilationResult d = time_dilation_experiment(DilationSetup{}, r.options().threads);
  r.within(8, "flash rate per coordinate time, times tau (v = 0.6)", d.rate_tau, d.expected - 0.02, d.expected + 0.02,
           fmt("%.0f flashes, standard error %.4f, expected %.4f", d.flashes, d.rate_se_tau, d.expected));
  r.above(8, "flash count", static_cast<double>(d.flashes), 9999.5);
}

void nonrel_limit(Recorder& r) {
  const NonrelResult n = nonrelativistic_limit(NonrelSetup{});
  r.at_most(11, "total variation, relativistic vs GRW first flash", n.total_variation, 0.05,
            "m = 20, tau = 50 sigma, packet at rest, binned in (t, x)");
}

void non_autonomy(Recorder& r) {
  const NonAutonomyWitness w = non_autonomy_search(NonAutonomySetup{});
  if (!w.found) {
    double best = -1;
    for (const auto& c : w.scanned) best = std::max(best, c.second_lower);
    r.fail(13, "witness pair", fmt("no candidate separates; best lower bound %.3g", best));
    return;
  }
  const std::string where = fmt("seeds x = %.1f and %.1f, later slice t = %.2f tau", w.seed.x, w.seed_prime.x, w.best.later_time);
  r.at_most(13, "||rho_1 - rho'_1|| upper bound", w.best.first_upper, 1e-8, where);
  r.above(13, "||rho_2 - rho'_2|| lower bound", w.best.second_lower, 1e-3, where);
}

using Step = std::function<void(Recorder&)>;

const std::map<std::string, std::vector<std::pair<std::string, Step>>>& registry() {
  static const std::map<std::string, std::vector<std::pair<std::string, Step>>> suites = {
      {"povm", {{"POVM completeness", povm}}},
      {"consistency",
       {{"exponential survival", exponential_survival},
        {"waiting times", waiting_times},
        {"GRW probability family", grw_family},
        {"relativistic probability family", rel_family},
        {"conditional wave functions", conditional_coherence}}},
      {"covariance", {{"multi-time covariance", covariance}, {"Lorentz invariance", lorentz}}},
      {"nosignal",
       {{"GRW no-signalling", nonrel_no_signalling},
        {"relativistic no-signalling", rel_no_signalling},
        {"nonlocal correlations", nonlocality}}},
      {"dilation", {{"time dilation", dilation}}},
      {"nonrel-limit", {{"nonrelativistic limit", nonrel_limit}}},
      {"fock-equiv", {{"Fock equivalence", fock_equivalence}}},
      {"non-autonomy", {{"non-autonomy", non_autonomy}}},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"povm",     "consistency",  "covariance", "nosignal",
                                                 "dilation", "nonrel-limit", "fock-equiv", "non-autonomy"};
  return names;
}

std::vector<Check> run_suite(const std::string& suite, const VerifyOptions& opt) {
  auto it = registry().find(suite);
  if (it == registry().end()) throw std::invalid_argument("unknown suite '" + suite + "'");
  Recorder rec(suite, opt);
  for (const auto& [label, step] : it->second) {
    rec.start();
    step(rec);
  }
  return rec.take();
}

void print_checks(std::ostream& out, const std::vector<Check>& checks) {
  char line[512];
  std::snprintf(line, sizeof line, "%-6s %-13s %-4s %-62s %13s %-5s %11s %8s\n", "result", "suite", "crit", "check",
                "value", "rel", "tolerance", "seconds");
  out << line;
  for (const Check& c : checks) {
    const std::string crit = c.criterion ? std::to_string(c.criterion) : "-";
    std::snprintf(line, sizeof line, "%-6s %-13s %-4s %-62s %13.6g %-5s %11.4g %8.2f\n", c.passed ? "PASS" : "FAIL",
                  c.suite.c_str(), crit.c_str(), c.name.c_str(), c.value, c.relation.c_str(), c.tolerance, c.seconds);
    out << line;
    if (!c.detail.empty()) out << "       " << c.detail << '\n';
  }
}

}  // namespace flashsim::app
