#include "app/experiments.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "flashsim/fock.hpp"
#include "flashsim/grw.hpp"
#include "flashsim/multitime.hpp"
#include "flashsim/parallel.hpp"
#include "flashsim/rel_experiments.hpp"
#include "flashsim/rel_flash.hpp"
#include "flashsim/stats.hpp"

namespace flashsim::app {

namespace {

using nlohmann::json;

const std::vector<ExperimentInfo> kExperiments = {
    {"grw_basic", "grw", "original GRW on a grid: sampled histories, waiting times against Exp(tau)"},
    {"fock_basic", "fock", "lattice Fock space with hopping: flashes from the smeared number density"},
    {"multitime_covariance", "multitime",
     "noninteracting systems: covariance under relative time shifts, plus sampled histories"},
    {"rel_basic", "relativistic", "relativistic flashes of one or two Dirac particles from seed flashes"},
    {"time_dilation", "relativistic", "flash rate per coordinate time of a moving packet"},
    {"nonrel_limit", "relativistic", "first-flash law of a heavy slow packet against GRW, total variation"},
    {"non_autonomy", "relativistic", "surface density matrices that agree on one slice and differ later"},
};

// ---------------------------------------------------------------------------
// shared pieces

json mean_json(const stats::MeanEstimate& e) {
  return {{"mean", e.mean}, {"standard_error", e.standard_error}, {"count", e.count}};
}

void add_grw_history(std::vector<FlashRecord>& out, std::size_t trajectory, const FlashHistory& h) {
  for (std::size_t type = 0; type < h.per_type.size(); ++type)
    for (std::size_t k = 0; k < h.per_type[type].size(); ++k) {
      const FlashEvent& e = h.per_type[type][k];
      out.push_back({trajectory, static_cast<int>(type) + 1, k + 1, e.t, e.r});
    }
}

void add_rel_history(std::vector<FlashRecord>& out, std::size_t trajectory, const RelFlashHistory& h) {
  for (std::size_t type = 0; type < h.flashes.size(); ++type)
    for (std::size_t k = 0; k < h.flashes[type].size(); ++k) {
      const SpacetimePoint& p = h.flashes[type][k];
      out.push_back({trajectory, static_cast<int>(type) + 1, k + 1, p.t, {p.x}});
    }
}

// Samples `config.trajectories` GRW-type histories in parallel and collects
// per-type statistics of the first waiting time.
RunResult sample_grw_ensemble(const Config& c, const GrwModel& model, const StateVector& psi, unsigned threads) {
  std::vector<FlashHistory> hist(c.trajectories);
  const double horizon = model.t0() + c.horizon;
  parallel_for(c.trajectories, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(c.seed, i);
    hist[i] = sample_history(model, psi, horizon, rng);
  });
  RunResult r;
  r.space_dim = model.grid().dim;
  json per_type = json::array();
  std::size_t total = 0;
  for (int type = 0; type < model.types(); ++type) {
    std::vector<double> first;
    std::size_t count = 0;
    for (const FlashHistory& h : hist) {
      count += h.per_type[type].size();
      if (!h.per_type[type].empty()) first.push_back(h.per_type[type].front().t - model.t0());
    }
    total += count;
    json t = {{"type", type + 1}, {"flashes", count},
              {"rate", c.trajectories ? count / (c.trajectories * c.horizon) : 0.0},
              {"trajectories_with_a_flash", first.size()}};
    if (first.size() >= 2) t["first_waiting_time"] = mean_json(stats::mean_with_error(first));
    r.summary["per_type"].push_back(t);
  }
  r.summary["flashes"] = total;
  for (std::size_t i = 0; i < hist.size(); ++i) add_grw_history(r.flashes, i, hist[i]);
  sort_records(r.flashes);
  return r;
}

Vec product_of(const std::vector<Vec>& factors) {
  Vec out = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, factors[i]);
  return out;
}

Vec random_state(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = {rng.normal(), rng.normal()};
  return v / v.norm();
}

// Product of Gaussian packets (one per particle) or a random state.
Vec grid_state(const Config& c, int particles) {
  const Params p(c.initial_state.params);
  const std::string kind = c.initial_state.kind.empty() ? "gaussian" : c.initial_state.kind;
  Index n = 1;
  for (int i = 0; i < particles; ++i) n *= c.grid.size();
  if (kind == "random") return random_state(n, static_cast<std::uint64_t>(p.number("seed", 1)));
  if (kind != "gaussian") throw ConfigError("initial_state.kind", "expected \"gaussian\" or \"random\", got '" + kind + "'");
  const auto centers = p.numbers("centers", std::vector<double>(static_cast<std::size_t>(particles * c.grid.dim), 0.0));
  if (centers.size() != static_cast<std::size_t>(particles * c.grid.dim))
    throw ConfigError("initial_state.params.centers", "expected particles * d coordinates");
  const double width = p.number("width", 1.0), momentum = p.number("momentum", 0.0);
  if (!(width > 0)) throw ConfigError("initial_state.params.width", "must be positive");
  std::vector<Vec> factors;
  for (int i = 0; i < particles; ++i)
    factors.push_back(gaussian_packet(c.grid, Point(centers.begin() + i * c.grid.dim, centers.begin() + (i + 1) * c.grid.dim),
                                      width, momentum));
  return product_of(factors);
}

// ---------------------------------------------------------------------------
// nonrelativistic experiments

RunResult run_grw_basic(const Config& c, unsigned threads) {
  const GrwModel model = GrwModel::original(c.grid, c.particles, c.sigma, c.tau, grid_hamiltonian(c.grid, c.particles, c.mass));
  const StateVector psi(grid_state(c, c.particles));
  RunResult r = sample_grw_ensemble(c, model, psi, threads);
  // each type flashes at rate 1/tau whatever the state; the first waiting
  // time is Exp(tau) when the horizon is long enough to rarely censor it
  for (json& t : r.summary["per_type"]) {
    std::vector<double> first;
    for (const FlashRecord& f : r.flashes)
      if (f.type == t["type"].get<int>() && f.k == 1) first.push_back(f.t);
    if (first.size() < 2) continue;
    const double tau = c.tau, h = c.horizon;
    const auto ks = stats::ks_test(first, [&](double x) { return -std::expm1(-x / tau) / -std::expm1(-h / tau); });
    t["ks_first_waiting_time"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}};
  }
  r.summary["expected_rate_per_type"] = 1.0 / c.tau;
  r.title = "GRW flashes";
  return r;
}

RunResult run_fock_basic(const Config& c, unsigned threads) {
  if (c.grid.dim != 1) throw ConfigError("grid.d", "Fock lattices are one-dimensional");
  const FockSpace space(c.grid.points, c.statistics, c.n_max);
  const Params p(c.initial_state.params);
  const Mat h = hopping_hamiltonian(space, p.number("hopping", 1.0));
  const GrwModel model = fock_model(space, c.grid, h, c.sigma, c.tau);

  const std::string kind = c.initial_state.kind.empty() ? "occupation" : c.initial_state.kind;
  const auto basis_state = [&](const std::string& key) {
    std::vector<int> occ = p.integers(key, {});
    if (occ.size() != static_cast<std::size_t>(c.grid.points))
      throw ConfigError("initial_state.params." + key, "expected one occupation per lattice site");
    const Index idx = space.index_of(occ);
    if (idx < 0) throw ConfigError("initial_state.params." + key, "occupation outside the truncated Fock space");
    Vec v = Vec::Zero(space.dim());
    v(idx) = 1.0;
    return v;
  };
  Vec psi;
  if (kind == "occupation") {
    psi = basis_state("occupation");
  } else if (kind == "superposition") {
    psi = (basis_state("occupation") + basis_state("other")).normalized();
  } else {
    throw ConfigError("initial_state.kind", "expected \"occupation\" or \"superposition\", got '" + kind + "'");
  }
  RunResult r = sample_grw_ensemble(c, model, StateVector(psi), threads);
  const auto weights = space.sector_weights(psi);
  double mean_n = 0;
  for (std::size_t n = 0; n < weights.size(); ++n) mean_n += n * weights[n];
  r.summary["sector_weights"] = weights;
  r.summary["mean_particle_number"] = mean_n;
  r.summary["expected_flashes_per_trajectory"] = mean_n * c.horizon / c.tau;
  r.summary["flashes_per_trajectory"] = c.trajectories ? r.summary["flashes"].get<double>() / c.trajectories : 0.0;
  r.title = "Fock-space flashes";
  return r;
}

RunResult run_multitime(const Config& c, unsigned threads) {
  const Params p(c.initial_state.params);
  std::vector<double> masses = p.numbers("masses", {});
  if (masses.empty())
    for (int i = 0; i < c.particles; ++i) masses.push_back(c.mass * (i + 1));
  if (masses.size() != static_cast<std::size_t>(c.particles))
    throw ConfigError("initial_state.params.masses", "expected one mass per system");
  std::vector<GrwModel> models;
  for (double m : masses) models.push_back(GrwModel::original(c.grid, 1, c.sigma, c.tau, grid_hamiltonian(c.grid, 1, m)));
  const MultiSystem sys(models);
  const StateVector psi(grid_state(c, c.particles));

  const double delta = p.number("delta", 0.7) * c.tau;
  const int tests = static_cast<int>(p.number("tests", 24));
  const auto set = covariance_test_set(sys, delta, c.horizon, tests, c.seed + 1);
  const CovarianceReport rep = covariance_check(sys, psi, delta, set);

  // the joint process of noninteracting systems at one common time
  std::vector<std::vector<RateOperator>> rates;
  const FlashSites sites = FlashSites::around(c.grid, c.sigma);
  for (int i = 0; i < c.particles; ++i) rates.push_back(gaussian_flash_rates(c.grid, c.particles, i, c.sigma, c.tau, sites));
  const GrwModel joint(OperatorMatrix(sys.total_hamiltonian(), OperatorKind::hermitian), FlashRateField(sites, rates),
                       c.sigma, c.tau, c.grid, c.particles);
  RunResult r = sample_grw_ensemble(c, joint, psi, threads);
  const double tol = c.tolerance("covariance", 1e-8);
  r.summary["covariance"] = {{"delta", delta},        {"tests", rep.lhs.size()},
                             {"max_abs_diff", rep.max_abs_diff}, {"max_rel_diff", rep.max_rel_diff},
                             {"tolerance", tol},      {"pass", rep.max_abs_diff <= tol}};
  r.title = "flashes of noninteracting systems";
  return r;
}

// ---------------------------------------------------------------------------
// relativistic experiments

RelModel rel_model(const Config& c) {
  RelParams rp;
  rp.dirac = {c.mass, c.momentum_cutoff, c.modes, c.momentum_center, c.positive_energy_only};
  rp.sigma = c.sigma;
  rp.tau = c.tau;
  return RelModel(rp);
}

Mat rel_state(const Config& c, const RelModel& m) {
  const Params p(c.initial_state.params);
  const std::string kind = c.initial_state.kind.empty() ? "packet" : c.initial_state.kind;
  const double width = p.number("width", 1.5), momentum = p.number("momentum", 0.0);
  if (!(width > 0)) throw ConfigError("initial_state.params.width", "must be positive");
  const auto packet = [&](double x, double k) { return dirac_packet(m.space(), x, width, k); };
  if (kind == "packet") {
    if (c.particles != 1) throw ConfigError("initial_state.kind", "\"packet\" describes one particle");
    return packet(p.number("center", 0.0), momentum);
  }
  if (c.particles != 2) throw ConfigError("initial_state.kind", "'" + kind + "' describes two particles");
  const auto centers = p.numbers("centers", {-3.0, 3.0});
  if (centers.size() != 2) throw ConfigError("initial_state.params.centers", "expected two centres");
  Mat state;
  if (kind == "product") {
    state = product_state(packet(centers[0], momentum), packet(centers[1], momentum));
  } else if (kind == "entangled") {
    const Vec a = packet(centers[0], momentum), b = packet(centers[1], momentum);
    state = product_state(a, b) + product_state(b, a);
  } else if (kind == "momentum_entangled") {
    const double k = p.number("momentum_split", 0.3);
    state = product_state(packet(centers[0], k), packet(centers[1], k)) +
            product_state(packet(centers[0], -k), packet(centers[1], -k));
  } else {
    throw ConfigError("initial_state.kind",
                      "expected \"packet\", \"product\", \"entangled\" or \"momentum_entangled\", got '" + kind + "'");
  }
  return state / state.norm();
}

RunResult run_rel_basic(const Config& c, unsigned threads) {
  const RelModel m = rel_model(c);
  const Mat state = rel_state(c, m);
  std::vector<SpacetimePoint> seeds = c.seeds;
  if (seeds.empty()) seeds.assign(c.particles, {0.0, 0.0});
  std::vector<RelFlashHistory> hist(c.trajectories);
  std::vector<RelSampleDiagnostics> diag(c.trajectories);
  RelSamplerOptions opt;
  opt.leakage_bound = c.tolerance("leakage", opt.leakage_bound);
  parallel_for(c.trajectories, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(c.seed, i);
    hist[i] = sample_rel_history(m, state, seeds, c.horizon, rng, opt, &diag[i]);
  });
  RunResult r;
  std::vector<double> proper;
  std::size_t escaped = 0;
  double leak = 0, resid = 0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    add_rel_history(r.flashes, i, hist[i]);
    proper.insert(proper.end(), diag[i].proper_times.begin(), diag[i].proper_times.end());
    escaped += diag[i].escaped;
    leak = std::max(leak, diag[i].max_leakage);
    resid = std::max(resid, diag[i].max_residual);
  }
  sort_records(r.flashes);
  r.summary["flashes"] = r.flashes.size();
  std::vector<std::size_t> per_type(c.particles, 0);
  for (const FlashRecord& f : r.flashes) ++per_type[f.type - 1];
  r.summary["flashes_per_type"] = per_type;
  if (proper.size() >= 2) r.summary["proper_time_between_flashes_before_horizon"] = mean_json(stats::mean_with_error(proper));
  r.summary["escaped"] = escaped;
  r.summary["max_leakage"] = leak;
  r.summary["max_residual"] = resid;
  r.title = "relativistic flashes";
  return r;
}

RunResult run_time_dilation(const Config& c, unsigned threads) {
  const Params p(c.initial_state.params);
  DilationSetup s;
  s.mass = c.mass;
  s.sigma = c.sigma;
  s.tau = c.tau;
  s.velocity = p.number("velocity", s.velocity);
  if (!(std::abs(s.velocity) < 1)) throw ConfigError("initial_state.params.velocity", "must lie in (-1, 1)");
  s.packet_width = p.number("width", s.packet_width);
  s.cutoff = c.momentum_cutoff;
  s.modes = c.modes;
  s.half_width = p.number("half_width", s.half_width);
  s.horizon_taus = c.horizon / c.tau;
  s.trajectories = c.trajectories;
  s.seed = c.seed;
  const DilationResult d = time_dilation_experiment(s, threads, true);
  RunResult r;
  for (std::size_t i = 0; i < d.histories.size(); ++i) add_rel_history(r.flashes, i, d.histories[i]);
  sort_records(r.flashes);
  const double tol = c.tolerance("rate", 0.02);
  r.summary = {{"flashes", d.flashes},
               {"trajectories", d.trajectories},
               {"horizon", d.horizon},
               {"rate_times_tau", d.rate_tau},
               {"rate_standard_error", d.rate_se_tau},
               {"expected", d.expected},
               {"packet_velocity", d.measured_velocity},
               {"escaped", d.escaped},
               {"max_leakage", d.max_leakage},
               {"tolerance", tol},
               {"pass", std::abs(d.rate_tau - d.expected) <= tol}};
  r.title = "flashes of a moving packet";
  return r;
}

RunResult run_nonrel_limit(const Config& c, unsigned) {
  const Params p(c.initial_state.params);
  NonrelSetup s;
  s.mass = c.mass;
  s.sigma = c.sigma;
  s.tau = c.tau;
  s.packet_width = p.number("width", s.packet_width);
  s.cutoff = c.momentum_cutoff;
  s.modes = c.modes;
  s.grid_points = c.grid.points;
  s.grid_spacing = c.grid.spacing;
  s.t_edges = p.numbers("t_edges", s.t_edges);
  s.x_edges = p.numbers("x_edges", s.x_edges);
  const NonrelResult n = nonrelativistic_limit(s);
  RunResult r;
  const double tol = c.tolerance("total_variation", 0.05);
  r.summary = {{"total_variation", n.total_variation},
               {"tolerance", tol},
               {"pass", n.total_variation <= tol},
               {"t_edges_tau", s.t_edges},
               {"x_edges_sigma", s.x_edges},
               {"relativistic", n.relativistic},
               {"nonrelativistic", n.nonrelativistic},
               {"relativistic_mass", n.relativistic_mass},
               {"nonrelativistic_mass", n.nonrelativistic_mass}};
  r.title = "first flashes (none sampled)";
  return r;
}

RunResult run_non_autonomy(const Config& c, unsigned) {
  const Params p(c.initial_state.params);
  NonAutonomySetup s;
  s.mass = c.mass;
  s.sigma = c.sigma;
  s.tau = c.tau;
  s.cutoff = c.momentum_cutoff;
  s.modes = c.modes;
  s.packet_width = p.number("width", s.packet_width);
  s.packet_centers = p.numbers("centers", s.packet_centers);
  s.seed_x = p.number("seed_x", s.seed_x);
  s.other_seeds = p.numbers("other_seeds", s.other_seeds);
  s.later_times = p.numbers("later_times", s.later_times);
  const NonAutonomyWitness w = non_autonomy_search(s);
  RunResult r;
  json scanned = json::array();
  for (const auto& k : w.scanned)
    scanned.push_back({{"other_seed", k.other_seed}, {"later_time_tau", k.later_time},
                       {"first_upper", k.first_upper}, {"second_lower", k.second_lower}});
  r.summary = {{"found", w.found}, {"scanned", scanned}};
  if (w.found)
    r.summary["witness"] = {{"seed", {w.seed.t, w.seed.x}},
                            {"seed_prime", {w.seed_prime.t, w.seed_prime.x}},
                            {"later_time_tau", w.best.later_time},
                            {"first_upper", w.best.first_upper},
                            {"second_lower", w.best.second_lower}};
  r.title = "no flashes (density-matrix search)";
  return r;
}

using Runner = std::function<RunResult(const Config&, unsigned)>;

const std::map<std::string, std::set<std::string>> kParams = {
    {"grw_basic", {"centers", "width", "momentum", "seed"}},
    {"fock_basic", {"occupation", "other", "hopping"}},
    {"multitime_covariance", {"centers", "width", "momentum", "seed", "masses", "delta", "tests"}},
    {"rel_basic", {"center", "centers", "width", "momentum", "momentum_split"}},
    {"time_dilation", {"velocity", "width", "half_width"}},
    {"nonrel_limit", {"width", "t_edges", "x_edges"}},
    {"non_autonomy", {"width", "centers", "seed_x", "other_seeds", "later_times"}},
};

const std::map<std::string, Runner> kRunners = {
    {"grw_basic", run_grw_basic},         {"fock_basic", run_fock_basic},
    {"multitime_covariance", run_multitime}, {"rel_basic", run_rel_basic},
    {"time_dilation", run_time_dilation}, {"nonrel_limit", run_nonrel_limit},
    {"non_autonomy", run_non_autonomy},
};

}  // namespace

const std::vector<ExperimentInfo>& experiments() { return kExperiments; }

RunResult run_experiment(const Config& config, unsigned threads) {
  const ExperimentInfo* info = nullptr;
  for (const auto& e : kExperiments)
    if (e.name == config.experiment) info = &e;
  if (!info) throw ConfigError("experiment", "unknown experiment '" + config.experiment + "'");
  if (info->model != config.model)
    throw ConfigError("model", "experiment '" + info->name + "' runs under model '" + info->model + "'");
  const auto& allowed = kParams.at(info->name);
  for (auto it = config.initial_state.params.begin(); it != config.initial_state.params.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("initial_state.params." + it.key(), "not a parameter of experiment '" + info->name + "'");
  RunResult r = kRunners.at(info->name)(config, threads);
  json head = {{"experiment", config.experiment}, {"model", config.model}, {"seed", config.seed},
               {"trajectories", config.trajectories}, {"horizon", config.horizon},
               {"sigma", config.sigma}, {"tau", config.tau}, {"mass", config.mass}};
  head.update(r.summary);
  r.summary = head;
  return r;
}

}  // namespace flashsim::app
