#include "flashsim/multitime.hpp"

#include <algorithm>
#include <cmath>

namespace flashsim {

MultiSystem::MultiSystem(std::vector<GrwModel> models) : models_(std::move(models)) {
  if (models_.empty()) throw InvariantError("need at least one system");
  for (const GrwModel& m : models_) {
    if (m.types() != 1) throw InvariantError("each system must carry exactly one flash type");
    if (m.t0() != models_.front().t0()) throw InvariantError("systems disagree on the initial time");
  }
}

MultiSystem::MultiSystem(std::vector<GrwModel> models, const Mat& total_hamiltonian, double tol)
    : MultiSystem(std::move(models)) {
  if (total_hamiltonian.rows() != dim() || total_hamiltonian.cols() != dim())
    throw DimensionError("total Hamiltonian has the wrong dimension");
  const Mat sum = this->total_hamiltonian();
  if ((total_hamiltonian - sum).norm() > tol * std::max(1.0, sum.norm()))
    throw InvariantError("Hamiltonian couples the systems; covariance requires H = sum of H_i");
}

std::vector<Index> MultiSystem::dims() const {
  std::vector<Index> d;
  for (const GrwModel& m : models_) d.push_back(m.dim());
  return d;
}

Index MultiSystem::dim() const {
  Index n = 1;
  for (const GrwModel& m : models_) n *= m.dim();
  return n;
}

Mat MultiSystem::total_hamiltonian() const {
  Mat h = Mat::Zero(dim(), dim());
  for (int i = 0; i < systems(); ++i) {
    Index before = 1, after = 1;
    for (int j = 0; j < i; ++j) before *= models_[j].dim();
    for (int j = i + 1; j < systems(); ++j) after *= models_[j].dim();
    h += kron(kron(Mat(Mat::Identity(before, before)), models_[i].hamiltonian().matrix()),
              Mat(Mat::Identity(after, after)));
  }
  return h;
}

FlashHistory MultiSystem::system_history(const FlashHistory& flashes, int system) const {
  if (static_cast<int>(flashes.per_type.size()) != systems())
    throw DimensionError("history has a different number of flash types than systems");
  FlashHistory h(1, flashes.t0);
  h.per_type[0] = flashes.per_type.at(system);
  for (FlashEvent& e : h.per_type[0]) e.type = 0;
  return h;
}

template <class F>
Vec MultiSystem::map_factor(int system, const Vec& psi, F&& f) const {
  if (psi.size() != dim()) throw DimensionError("state dimension differs from the product space");
  const Index d = models_.at(system).dim();
  Index before = 1, after = 1;
  for (int j = 0; j < system; ++j) before *= models_[j].dim();
  for (int j = system + 1; j < systems(); ++j) after *= models_[j].dim();
  Mat block(d, before * after);
  for (Index b = 0; b < before; ++b)
    for (Index k = 0; k < d; ++k)
      for (Index a = 0; a < after; ++a) block(k, b * after + a) = psi((b * d + k) * after + a);
  const Mat out = f(block);
  Vec res(psi.size());
  for (Index b = 0; b < before; ++b)
    for (Index k = 0; k < d; ++k)
      for (Index a = 0; a < after; ++a) res((b * d + k) * after + a) = out(k, b * after + a);
  return res;
}

Vec MultiSystem::apply_on(int system, const Vec& psi, const Mat& op) const {
  return map_factor(system, psi, [&](const Mat& b) { return Mat(op * b); });
}

Vec MultiSystem::apply_history_on(int system, const FlashHistory& single, const Vec& psi) const {
  return map_factor(system, psi, [&](const Mat& b) { return apply_history(models_[system], single, b); });
}

Vec MultiSystem::evolve_on(int system, double t, const Vec& psi) const {
  return map_factor(system, psi, [&](const Mat& b) { return models_[system].propagator().apply(t, b); });
}

namespace {

void require_state(const MultiSystem& sys, const StateVector& psi) {
  if (psi.dim() != sys.dim()) throw DimensionError("state dimension differs from the product space");
  if (!psi.is_normalized()) throw InvariantError("state must be normalized");
}

}  // namespace

double multitype_joint_density(const MultiSystem& sys, const StateVector& psi, const FlashHistory& flashes) {
  require_state(sys, psi);
  Vec v = psi.amplitudes();
  for (int i = 0; i < sys.systems(); ++i) v = sys.apply_history_on(i, sys.system_history(flashes, i), v);
  return v.squaredNorm();
}

double marginal_density(const MultiSystem& sys, const StateVector& psi, int system, const FlashHistory& single) {
  require_state(sys, psi);
  return sys.apply_history_on(system, single, psi.amplitudes()).squaredNorm();
}

StateVector shift_and_condition(const MultiSystem& sys, const StateVector& psi, double delta,
                                const FlashHistory& past) {
  require_state(sys, psi);
  if (!(delta >= 0)) throw InvariantError("time shift must be non-negative");
  double last = sys.t0();
  for (const FlashEvent& e : past.per_type.at(0)) {
    if (e.t >= sys.t0() + delta) throw InvariantError("past flash lies beyond t0 + Delta");
    last = std::max(last, e.t);
  }
  Vec v = sys.evolve_on(0, sys.t0() + delta - last, sys.apply_history_on(0, past, psi.amplitudes()));
  const double n = v.norm();
  if (!(n > 1e-150)) throw ImpossibleHistoryError("conditioning history has zero density");
  return StateVector(v / n, psi.factors(), psi.norm_tol());
}

CovarianceReport covariance_check(const MultiSystem& sys, const StateVector& psi, double delta,
                                  const std::vector<FlashHistory>& tests) {
  require_state(sys, psi);
  const double cut = sys.t0() + delta;
  CovarianceReport rep;
  for (const FlashHistory& h : tests) {
    FlashHistory past(1, sys.t0()), shifted = h;
    shifted.per_type[0].clear();
    for (const FlashEvent& e : h.per_type.at(0)) {
      if (e.t < cut) {
        past.per_type[0].push_back(e);
      } else {
        FlashEvent s = e;
        s.t -= delta;
        shifted.per_type[0].push_back(s);
      }
    }
    // original law: joint density over the no-flash-until-cut marginal
    const Vec k_past = sys.apply_history_on(0, past, psi.amplitudes());
    const double last = past.per_type[0].empty() ? sys.t0() : past.per_type[0].back().t;
    const double norm2 = sys.evolve_on(0, cut - last, k_past).squaredNorm();
    const double lhs = multitype_joint_density(sys, psi, h) / norm2;
    const StateVector psi_delta = shift_and_condition(sys, psi, delta, past);
    const double rhs = multitype_joint_density(sys, psi_delta, shifted);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(rhs);
    rep.max_abs_diff = std::max(rep.max_abs_diff, std::abs(lhs - rhs));
    rep.max_rel_diff = std::max(rep.max_rel_diff, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  return rep;
}

std::vector<FlashHistory> covariance_test_set(const MultiSystem& sys, double delta, double horizon, int count,
                                              std::uint64_t seed) {
  if (!(horizon > delta)) throw InvariantError("test horizon must exceed the shift");
  std::vector<FlashHistory> out;
  const double t0 = sys.t0();
  for (int c = 0; c < count; ++c) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    FlashHistory h(sys.systems(), t0);
    for (int i = 0; i < sys.systems(); ++i) {
      std::vector<double> times;
      if (i == 0) {
        const int past = delta > 0 ? c % 3 : 0, future = 1 + c % 2;
        for (int k = 0; k < past; ++k) times.push_back(t0 + delta * rng.uniform());
        for (int k = 0; k < future; ++k) times.push_back(t0 + delta + (horizon - delta) * rng.uniform());
      } else {
        const int n = (c + i) % 3;
        for (int k = 0; k < n; ++k) times.push_back(t0 + horizon * rng.uniform());
      }
      std::sort(times.begin(), times.end());
      const Index sites = sys.model(i).rates().site_count();
      for (double t : times) {
        // keep flashes near the particle grid so densities are not negligible
        const Index pad = sys.model(i).rates().sites().padding;
        const Index inner = std::max<Index>(1, sites - 2 * pad);
        const Index site = pad + static_cast<Index>(rng.uniform() * inner) % inner;
        h.per_type[i].push_back(sys.model(i).event(t, 0, site));
        h.per_type[i].back().type = i;
      }
    }
    out.push_back(std::move(h));
  }
  return out;
}

}  // namespace flashsim
