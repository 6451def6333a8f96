#include "flashsim/rel_experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flashsim/grw.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/quadrature.hpp"

namespace flashsim {

// ---------------------------------------------------------------------------
// time dilation

RelModel dilation_model(const DilationSetup& s) {
  if (!(std::abs(s.velocity) < 1)) throw InvariantError("packet velocity must be below the speed of light");
  const double p = s.mass * s.velocity / std::sqrt(1.0 - s.velocity * s.velocity);
  RelParams rp;
  rp.dirac = {s.mass, s.cutoff, s.modes, p, true};
  rp.sigma = s.sigma;
  rp.tau = s.tau;
  rp.half_width = s.half_width;
  return RelModel(rp);
}

DilationResult time_dilation_experiment(const DilationSetup& s, unsigned threads, bool keep_histories) {
  const RelModel model = dilation_model(s);
  const Vec packet = dirac_packet(model.space(), 0.0, s.packet_width, model.space().momentum_center());
  const double horizon = s.horizon_taus * s.tau;
  std::vector<RelFlashHistory> hist(s.trajectories);
  std::vector<RelSampleDiagnostics> diag(s.trajectories);
  parallel_for(s.trajectories, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(s.seed, i);
    hist[i] = sample_rel_history(model, packet, {{0.0, 0.0}}, horizon, rng, s.sampler, &diag[i]);
  });

  DilationResult r;
  r.trajectories = s.trajectories;
  r.horizon = horizon;
  r.expected = std::sqrt(1.0 - s.velocity * s.velocity);
  r.measured_velocity = mean_velocity(model.space(), packet);
  for (std::size_t i = 0; i < s.trajectories; ++i) {
    r.flashes += hist[i].size();
    r.escaped += diag[i].escaped;
    r.max_leakage = std::max(r.max_leakage, diag[i].max_leakage);
  }
  const double exposure = static_cast<double>(s.trajectories) * horizon;
  r.rate_tau = static_cast<double>(r.flashes) / exposure * s.tau;
  r.rate_se_tau = std::sqrt(static_cast<double>(r.flashes)) / exposure * s.tau;
  if (keep_histories) r.histories = std::move(hist);
  return r;
}

// ---------------------------------------------------------------------------
// nonrelativistic limit

namespace {

std::size_t bin_of(const std::vector<double>& edges, double v) {
  return static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

NonrelResult nonrelativistic_limit(const NonrelSetup& s) {
  const std::size_t nt = s.t_edges.size() + 1, nx = s.x_edges.size() + 1;
  const auto bin = [&](double t, double x) { return bin_of(s.t_edges, t / s.tau) * nx + bin_of(s.x_edges, x / s.sigma); };
  const double s_cut = 12.0 * s.tau;
  NonrelResult res;
  res.relativistic.assign(nt * nx, 0.0);
  res.nonrelativistic.assign(nt * nx, 0.0);

  // relativistic: flashes on hyperboloids about the seed; the arc Gaussian is
  // integrated exactly over the arc intervals that fall in each (t, x) bin
  RelParams rp;
  rp.dirac = {s.mass, s.cutoff, s.modes, 0.0, true};
  rp.sigma = s.sigma;
  rp.tau = s.tau;
  const RelModel model(rp);
  const Vec packet = dirac_packet(model.space(), 0.0, s.packet_width, 0.0);
  const SpacetimePoint seed{0.0, 0.0};
  const QuadratureRule ru = composite_gauss_legendre(0.0, -std::expm1(-s_cut / s.tau), s.s_panels, 8);
  for (std::size_t k = 0; k < ru.nodes.size(); ++k) {
    const double radius = -s.tau * std::log1p(-ru.nodes[k]);
    const Surface h = Surface::hyperboloid(seed, radius);
    const SurfaceBasis b = model.basis_at(h, seed.x);
    const RVec rho = b.flux_density(b.restrict(packet));
    std::vector<double> cuts;
    for (double e : s.x_edges) cuts.push_back(h.arc(seed.x + e * s.sigma));
    for (double e : s.t_edges) {
      const double dt = e * s.tau - seed.t;
      if (dt > radius) {
        const double u = std::sqrt(dt * dt - radius * radius);
        cuts.push_back(h.arc(seed.x - u));
        cuts.push_back(h.arc(seed.x + u));
      }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::size_t> target(cuts.size() + 1);
    for (std::size_t j = 0; j <= cuts.size(); ++j) {
      const double mid = j == 0 ? cuts.front() - 1.0 : j == cuts.size() ? cuts.back() + 1.0 : 0.5 * (cuts[j - 1] + cuts[j]);
      const double x = h.x_at_arc(mid);
      target[j] = bin(h.time_at(x), x);
    }
    for (Index q = 0; q < rho.size(); ++q) {
      const double w = ru.weights[k] * b.grid.spacing * rho(q), l = h.arc(b.grid.x[q]);
      double lo = 0.0;
      for (std::size_t j = 0; j < cuts.size(); ++j) {
        const double up = normal_cdf((cuts[j] - l) / s.sigma);
        res.relativistic[target[j]] += w * (up - lo);
        lo = up;
      }
      res.relativistic[target.back()] += w * (1.0 - lo);
    }
  }

  // nonrelativistic: GRW with a free Hamiltonian on a grid, exact survival
  const GridSpec grid = GridSpec::centered(1, s.grid_points, s.grid_spacing);
  const GrwModel grw = GrwModel::original(grid, 1, s.sigma, s.tau, grid_hamiltonian(grid, 1, s.mass));
  const Vec psi = gaussian_packet(grid, {0.0}, s.packet_width, 0.0);
  const double dr = grw.rates().cell_volume();
  std::vector<double> t_bounds = {0.0};
  for (double e : s.t_edges) t_bounds.push_back(e * s.tau);
  t_bounds.push_back(s_cut);
  for (std::size_t j = 0; j + 1 < t_bounds.size(); ++j) {
    const QuadratureRule rt = composite_gauss_legendre(t_bounds[j], t_bounds[j + 1], s.t_panels, 8);
    for (std::size_t k = 0; k < rt.nodes.size(); ++k) {
      const Vec pt = grw.evolve(rt.nodes[k], psi);
      for (Index site = 0; site < grw.rates().site_count(); ++site) {
        const double x = grw.rates().sites().location(site)[0];
        res.nonrelativistic[bin(rt.nodes[k], x)] += rt.weights[k] * dr * grw.rates().rate(0, site).expectation(pt);
      }
    }
  }

  for (double p : res.relativistic) res.relativistic_mass += p;
  for (double p : res.nonrelativistic) res.nonrelativistic_mass += p;
  for (double& p : res.relativistic) p /= res.relativistic_mass;
  for (double& p : res.nonrelativistic) p /= res.nonrelativistic_mass;
  double tv = 0;
  for (std::size_t i = 0; i < res.relativistic.size(); ++i) tv += std::abs(res.relativistic[i] - res.nonrelativistic[i]);
  res.total_variation = 0.5 * tv;
  return res;
}

// ---------------------------------------------------------------------------
// surface density matrices

namespace {

struct NoFlashPart {
  Vec root_psi;  // W psi
  double eps = 0;  // 1 - ||W psi||^2, trace of the flash part
};

NoFlashPart no_flash_part(const RelModel& m, const SpacetimePoint& seed, const Surface& sigma, const Vec& psi) {
  NoFlashPart p;
  p.root_psi = survival_root(m, seed, sigma) * psi;
  p.eps = std::max(0.0, 1.0 - p.root_psi.squaredNorm());
  return p;
}

// Extreme eigenvalues of a a^dag - b b^dag.
std::pair<double, double> rank_two_spectrum(const Vec& a, const Vec& b) {
  const double aa = a.squaredNorm(), bb = b.squaredNorm(), ab2 = std::norm(a.dot(b));
  const double mid = 0.5 * (aa - bb), rad = std::sqrt(std::max(0.0, 0.25 * (aa + bb) * (aa + bb) - ab2));
  return {mid - rad, mid + rad};
}

}  // namespace

NonAutonomyWitness non_autonomy_search(const NonAutonomySetup& s) {
  RelParams rp;
  rp.dirac = {s.mass, s.cutoff, s.modes};
  rp.sigma = s.sigma;
  rp.tau = s.tau;
  const RelModel m(rp);
  Vec psi = Vec::Zero(m.space().dim());
  for (double c : s.packet_centers) psi += dirac_packet(m.space(), c, s.packet_width, 0.0);
  psi.normalize();
  const SpacetimePoint seed{0.0, s.seed_x};
  const Surface first = Surface::time_slice(seed.t);

  NonAutonomyWitness w;
  w.seed = seed;
  const NoFlashPart base1 = no_flash_part(m, seed, first, psi);
  std::vector<NoFlashPart> base2;
  for (double t : s.later_times) base2.push_back(no_flash_part(m, seed, Surface::time_slice(seed.t + t * s.tau), psi));

  for (double x : s.other_seeds) {
    const SpacetimePoint other{seed.t, x};
    const NoFlashPart o1 = no_flash_part(m, other, first, psi);
    const auto [lo1, hi1] = rank_two_spectrum(base1.root_psi, o1.root_psi);
    const double first_upper = std::max(std::abs(lo1), std::abs(hi1)) + base1.eps + o1.eps;
    for (std::size_t j = 0; j < s.later_times.size(); ++j) {
      const NoFlashPart o2 = no_flash_part(m, other, Surface::time_slice(seed.t + s.later_times[j] * s.tau), psi);
      const auto [lo2, hi2] = rank_two_spectrum(base2[j].root_psi, o2.root_psi);
      NonAutonomyCandidate c;
      c.other_seed = x;
      c.later_time = s.later_times[j];
      c.first_upper = first_upper;
      c.second_lower = std::max(hi2 - o2.eps, -lo2 - base2[j].eps);
      w.scanned.push_back(c);
      if (c.first_upper <= 1e-8 && c.second_lower > 1e-3 && (!w.found || c.second_lower > w.best.second_lower)) {
        w.found = true;
        w.best = c;
        w.seed_prime = other;
      }
    }
  }
  return w;
}

}  // namespace flashsim
