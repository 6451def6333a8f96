#include "flashsim/grw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace flashsim {

// ---------------------------------------------------------------------------
// RateOperator

RateOperator::RateOperator(RVec diagonal) : data_(std::move(diagonal)) {
  const RVec& d = std::get<RVec>(data_);
  if (!d.allFinite() || (d.size() > 0 && d.minCoeff() < 0))
    throw InvariantError("diagonal flash rate must be finite and nonnegative");
}

RateOperator::RateOperator(Mat dense, double tol) {
  OperatorMatrix checked(std::move(dense), OperatorKind::positive, tol);
  sqrt_ = positive_sqrt(checked.matrix());
  data_ = checked.matrix();
}

Index RateOperator::dim() const {
  return is_diagonal() ? diagonal().size() : std::get<Mat>(data_).rows();
}

Mat RateOperator::matrix() const {
  if (is_diagonal()) return diagonal().cast<cplx>().asDiagonal();
  return std::get<Mat>(data_);
}

Mat RateOperator::sqrt_matrix() const {
  if (is_diagonal()) return diagonal().cwiseSqrt().cast<cplx>().asDiagonal();
  return sqrt_;
}

double RateOperator::expectation(const Vec& psi) const {
  if (is_diagonal()) return (diagonal().array() * psi.array().abs2()).sum();
  return std::real(psi.dot(std::get<Mat>(data_) * psi));
}

Vec RateOperator::apply(const Vec& psi) const {
  if (is_diagonal()) return (diagonal().cast<cplx>().array() * psi.array()).matrix();
  return std::get<Mat>(data_) * psi;
}

Vec RateOperator::apply_sqrt(const Vec& psi) const {
  if (is_diagonal()) return (diagonal().cwiseSqrt().cast<cplx>().array() * psi.array()).matrix();
  return sqrt_ * psi;
}

Mat RateOperator::apply_sqrt(const Mat& block) const {
  if (is_diagonal()) return diagonal().cwiseSqrt().cast<cplx>().asDiagonal() * block;
  return sqrt_ * block;
}

// ---------------------------------------------------------------------------
// FlashRateField

FlashRateField::FlashRateField(FlashSites sites, std::vector<std::vector<RateOperator>> rates)
    : sites_(std::move(sites)), rates_(std::move(rates)) {
  if (rates_.empty()) throw InvariantError("a rate field needs at least one flash type");
  const Index d = rates_.front().empty() ? 0 : rates_.front().front().dim();
  for (const auto& per_type : rates_) {
    if (static_cast<Index>(per_type.size()) != sites_.size())
      throw DimensionError("rate field: one operator per flash site is required");
    for (const auto& op : per_type)
      if (op.dim() != d) throw DimensionError("rate field: operators differ in dimension");
  }
}

Index FlashRateField::dim() const { return rates_.front().front().dim(); }

Mat FlashRateField::integrated(int type) const {
  const Index n = dim();
  const auto& ops = rates_.at(type);
  if (std::all_of(ops.begin(), ops.end(), [](const RateOperator& o) { return o.is_diagonal(); })) {
    RVec acc = RVec::Zero(n);
    for (const auto& o : ops) acc += o.diagonal();
    return (acc * cell_volume()).cast<cplx>().asDiagonal();
  }
  Mat acc = Mat::Zero(n, n);
  for (const auto& o : ops) acc += o.matrix();
  return acc * cell_volume();
}

Mat FlashRateField::integrated() const {
  Mat acc = integrated(0);
  for (int i = 1; i < types(); ++i) acc += integrated(i);
  return acc;
}

Index FlashRateField::site_of(const Point& r) const {
  const GridSpec& g = sites_.grid;
  if (static_cast<int>(r.size()) != g.dim) throw DimensionError("flash location has wrong dimension");
  Index idx = 0;
  for (int a = 0; a < g.dim; ++a) {
    const double k = (r[a] - g.origin) / g.spacing;
    const double kr = std::round(k);
    if (std::abs(k - kr) > 1e-6 || kr < 0 || kr >= g.points)
      throw InvariantError("flash location is not a flash site of the model grid");
    idx = idx * g.points + static_cast<Index>(kr);
  }
  return idx;
}

// ---------------------------------------------------------------------------
// FlashHistory

std::size_t FlashHistory::total() const {
  std::size_t n = 0;
  for (const auto& v : per_type) n += v.size();
  return n;
}

void FlashHistory::validate() const {
  for (std::size_t i = 0; i < per_type.size(); ++i) {
    double prev = t0;
    bool first = true;
    for (const auto& e : per_type[i]) {
      if (static_cast<std::size_t>(e.type) != i) throw InvariantError("flash stored under the wrong type");
      if (e.t < t0) throw InvariantError("flash time precedes the initial time");
      if (!first && !(e.t > prev)) throw InvariantError("flash times of one type must increase strictly");
      prev = e.t;
      first = false;
    }
  }
}

std::vector<FlashEvent> FlashHistory::merged() const {
  validate();
  std::vector<FlashEvent> all;
  for (const auto& v : per_type) all.insert(all.end(), v.begin(), v.end());
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  for (std::size_t k = 1; k < all.size(); ++k)
    if (!(all[k].t > all[k - 1].t)) throw InvariantError("flash times must increase strictly");
  return all;
}

// ---------------------------------------------------------------------------
// GrwModel

GrwModel::GrwModel(OperatorMatrix hamiltonian, FlashRateField rates, double sigma, double tau,
                   GridSpec grid, int particles, double t0)
    : hamiltonian_(std::move(hamiltonian)),
      rates_(std::move(rates)),
      sigma_(sigma),
      tau_(tau),
      grid_(grid),
      particles_(particles),
      t0_(t0) {
  if (!(sigma_ > 0) || !(tau_ > 0)) throw InvariantError("sigma and tau must be positive");
  if (!is_hermitian(hamiltonian_.matrix(), 1e-10)) throw InvariantError("Hamiltonian must be hermitian");
  if (rates_.dim() != hamiltonian_.dim()) throw DimensionError("rate field and Hamiltonian differ in dimension");
  const Mat total = rates_.integrated();
  const Index n = total.rows();
  const double lambda = std::real(total.trace()) / std::max<Index>(n, 1);
  if (n > 0 && (total - lambda * Mat::Identity(n, n)).norm() <= 1e-10 * std::max(1.0, lambda) * std::sqrt(double(n)))
    scalar_rate_ = lambda;
  const Mat generator = cplx(0, -1) * hamiltonian_.matrix() - 0.5 * total;
  propagator_ = Semigroup(generator);
}

GrwModel GrwModel::original(const GridSpec& grid, int particles, double sigma, double tau,
                            OperatorMatrix hamiltonian, double t0) {
  const FlashSites sites = FlashSites::around(grid, sigma);
  std::vector<std::vector<RateOperator>> rates;
  for (int i = 0; i < particles; ++i) rates.push_back(gaussian_flash_rates(grid, particles, i, sigma, tau, sites));
  return GrwModel(std::move(hamiltonian), FlashRateField(sites, std::move(rates)), sigma, tau, grid, particles, t0);
}

FlashEvent GrwModel::event(double t, int type, Index site) const {
  return FlashEvent{t, rates_.sites().location(site), type, site};
}

std::vector<RateOperator> gaussian_flash_rates(const GridSpec& grid, int particles, int type,
                                               double sigma, double tau, const FlashSites& sites) {
  grid.validate();
  if (!(sigma > 0) || !(tau > 0)) throw InvariantError("sigma and tau must be positive");
  if (type < 0 || type >= particles) throw DimensionError("flash type out of range");
  const Index single = grid.size();
  Index config = 1;
  for (int i = 0; i < particles; ++i) config *= single;
  Index stride = 1;  // particle `type` index stride in the configuration index
  for (int i = particles - 1; i > type; --i) stride *= single;

  std::vector<Point> points(single);
  for (Index p = 0; p < single; ++p) points[p] = grid_point(grid, p);

  std::vector<RateOperator> out;
  out.reserve(sites.size());
  RVec profile(single);
  RVec diag(config);
  for (Index s = 0; s < sites.size(); ++s) {
    const Point r = sites.location(s);
    for (Index p = 0; p < single; ++p)
      profile(p) = gaussian_density(squared_distance(r, points[p]), sigma, grid.dim) / tau;
    for (Index c = 0; c < config; ++c) diag(c) = profile((c / stride) % single);
    out.emplace_back(diag);
  }
  return out;
}

std::vector<RateOperator> gaussian_flash_rate(const GrwModel& model, int type) {
  return gaussian_flash_rates(model.grid(), model.particles(), type, model.sigma(), model.tau(),
                              model.rates().sites());
}

OperatorMatrix grid_hamiltonian(const GridSpec& grid, int particles, double mass,
                                const std::function<double(const std::vector<Point>&)>& potential) {
  grid.validate();
  if (!(mass > 0)) throw InvariantError("mass must be positive");
  const Index single = grid.size();
  Index config = 1;
  for (int i = 0; i < particles; ++i) config *= single;
  Mat h = Mat::Zero(config, config);
  const double hop = 1.0 / (2.0 * mass * grid.spacing * grid.spacing);

  std::vector<Index> pstride(particles, 1);
  for (int i = particles - 2; i >= 0; --i) pstride[i] = pstride[i + 1] * single;
  std::vector<Index> astride(grid.dim, 1);
  for (int a = grid.dim - 2; a >= 0; --a) astride[a] = astride[a + 1] * grid.points;

  for (Index c = 0; c < config; ++c) {
    std::vector<Point> pos;
    for (int i = 0; i < particles; ++i) {
      const Index p = (c / pstride[i]) % single;
      const auto k = unravel(p, grid.dim, grid.points);
      for (int a = 0; a < grid.dim; ++a) {
        h(c, c) += 2.0 * hop;
        if (k[a] > 0) h(c, c - astride[a] * pstride[i]) -= hop;
        if (k[a] + 1 < grid.points) h(c, c + astride[a] * pstride[i]) -= hop;
      }
      if (potential) pos.push_back(grid_point(grid, p));
    }
    if (potential) h(c, c) += potential(pos);
  }
  return OperatorMatrix(h, OperatorKind::hermitian);
}

// ---------------------------------------------------------------------------
// history operators and densities

OperatorMatrix history_operator(const GrwModel& model, const FlashHistory& flashes) {
  const Index n = model.dim();
  return OperatorMatrix(apply_history(model, flashes, Mat(Mat::Identity(n, n))));
}

Mat apply_history(const GrwModel& model, const FlashHistory& flashes, const Mat& block) {
  if (static_cast<int>(flashes.per_type.size()) != model.types())
    throw DimensionError("history has a different number of flash types than the model");
  if (flashes.t0 != model.t0()) throw InvariantError("history and model disagree on the initial time");
  Mat out = block;
  double t_prev = flashes.t0;
  for (const FlashEvent& e : flashes.merged()) {
    const Index site = e.site >= 0 ? e.site : model.rates().site_of(e.r);
    out = model.rates().rate(e.type, site).apply_sqrt(model.propagator().apply(e.t - t_prev, out));
    t_prev = e.t;
  }
  return out;
}

Vec apply_history(const GrwModel& model, const FlashHistory& flashes, const Vec& psi) {
  if (static_cast<int>(flashes.per_type.size()) != model.types())
    throw DimensionError("history has a different number of flash types than the model");
  if (flashes.t0 != model.t0()) throw InvariantError("history and model disagree on the initial time");
  Vec out = psi;
  double t_prev = flashes.t0;
  for (const FlashEvent& e : flashes.merged()) {
    const Index site = e.site >= 0 ? e.site : model.rates().site_of(e.r);
    out = model.rates().rate(e.type, site).apply_sqrt(model.evolve(e.t - t_prev, out));
    t_prev = e.t;
  }
  return out;
}

namespace {

void require_normalized(const StateVector& psi, Index dim) {
  if (psi.dim() != dim) throw DimensionError("state dimension differs from the model");
  if (!psi.is_normalized()) throw InvariantError("state must be normalized");
}

double last_time(const FlashHistory& h) {
  double t = h.t0;
  for (const auto& v : h.per_type)
    if (!v.empty()) t = std::max(t, v.back().t);
  return t;
}

}  // namespace

double joint_flash_density(const GrwModel& model, const StateVector& psi, const FlashHistory& flashes) {
  require_normalized(psi, model.dim());
  return apply_history(model, flashes, psi.amplitudes()).squaredNorm();
}

double survival_probability(const GrwModel& model, const StateVector& psi, double t) {
  require_normalized(psi, model.dim());
  if (t < model.t0()) throw InvariantError("survival time precedes the initial time");
  return std::clamp(model.evolve(t - model.t0(), psi.amplitudes()).squaredNorm(), 0.0, 1.0);
}

StateVector conditional_state(const GrwModel& model, const StateVector& psi,
                              const FlashHistory& flashes, double t) {
  require_normalized(psi, model.dim());
  const double tn = last_time(flashes);
  if (t < tn) throw InvariantError("conditional state requested before the last flash");
  Vec v = model.evolve(t - tn, apply_history(model, flashes, psi.amplitudes()));
  const double n = v.norm();
  if (!(n > 1e-150)) throw ImpossibleHistoryError("flash history has zero density; no conditional state");
  return StateVector(v / n, psi.factors(), psi.norm_tol());
}

FlashHistory sample_history(const GrwModel& model, const StateVector& psi, double horizon, Rng& rng,
                            const SamplerOptions& options) {
  require_normalized(psi, model.dim());
  if (horizon < model.t0()) throw InvariantError("horizon precedes the initial time");
  FlashHistory out(model.types(), model.t0());
  Vec cur = psi.amplitudes();
  double t_prev = model.t0();
  const double tol = options.time_tol_rel * model.tau();
  std::vector<double> weights(static_cast<std::size_t>(model.types() * model.rates().site_count()));

  while (t_prev < horizon) {
    const double u = rng.uniform_open0();
    double t_next;
    if (auto lambda = model.scalar_total_rate(); lambda && *lambda > 0) {
      t_next = t_prev - std::log(u) / *lambda;
      if (t_next > horizon) break;
    } else {
      auto survival = [&](double t) { return model.evolve(t - t_prev, cur).squaredNorm(); };
      if (survival(horizon) >= u) break;
      double lo = t_prev, hi = std::min(horizon, t_prev + model.tau());
      int it = 0;
      while (survival(hi) > u) {
        lo = hi;
        hi = std::min(horizon, t_prev + 2.0 * (hi - t_prev));
        if (++it > options.max_iterations) throw NumericalError("flash-time bracket did not close");
      }
      it = 0;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (survival(mid) > u ? lo : hi) = mid;
        if (++it > options.max_iterations) throw NumericalError("flash-time bisection did not converge");
      }
      t_next = 0.5 * (lo + hi);
    }

    Vec phi = model.evolve(t_next - t_prev, cur);
    phi.normalize();
    const Index sites = model.rates().site_count();
    for (int i = 0; i < model.types(); ++i)
      for (Index s = 0; s < sites; ++s)
        weights[i * sites + s] = model.rates().rate(i, s).expectation(phi);
    const std::size_t pick = rng.discrete(weights);
    const int type = static_cast<int>(pick / sites);
    const Index site = static_cast<Index>(pick % sites);
    cur = model.rates().rate(type, site).apply_sqrt(phi);
    const double n = cur.norm();
    if (!(n > 0)) throw NumericalError("collapse produced a zero state");
    cur /= n;
    out.per_type[type].push_back(model.event(t_next, type, site));
    t_prev = t_next;
  }
  return out;
}

RVec matter_density(const StateVector& psi, const GrwModel& model) {
  require_normalized(psi, model.dim());
  const Index single = model.grid().size();
  const int n = model.particles();
  RVec m = RVec::Zero(single);
  Index stride = 1;
  for (int i = n - 1; i >= 0; --i) {
    for (Index c = 0; c < psi.dim(); ++c) m((c / stride) % single) += std::norm(psi.amplitudes()(c));
    stride *= single;
  }
  return m / model.grid().cell_volume();
}

Vec gaussian_packet(const GridSpec& grid, const Point& center, double width, double momentum) {
  Vec v(grid.size());
  for (Index p = 0; p < grid.size(); ++p) {
    const Point x = grid_point(grid, p);
    const double r2 = squared_distance(x, center);
    v(p) = std::exp(-r2 / (4.0 * width * width)) * std::polar(1.0, momentum * (x[0] - center[0]));
  }
  return v / v.norm();
}

}  // namespace flashsim
