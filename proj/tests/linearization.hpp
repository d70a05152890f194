#pragma once

#include <random>

#include "grove/grove_model.hpp"

namespace grove::test {

struct LinearizationStats {
  int sound_samples = 0;
  int sound_counterexamples = 0;
  int complete_samples = 0;
  int complete_counterexamples = 0;
};

/// Samples split counts and arbitrary 0/1 arc selections of one interval.
///
/// Soundness: z is drawn above its lower limits; points that satisfy the linearized
/// rows are checked against the product form sum_r l*g_r <= capacity.
/// Completeness: points satisfying the product form get z = l*g, which must satisfy
/// the linearized rows and z's bounds.
inline LinearizationStats sample_linearization(const Scenario& s, int samples, std::uint64_t seed) {
  const GroveModel gm = build_model(s);
  const MilpModel& model = gm.milp;
  const GroveIndex& ix = gm.index;
  const int R = s.du_count(), E = s.topology.arc_count(), I = s.user_count(), F = s.urf_count;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto rows19 = model.rows_with_tag("eq19");
  const auto rows20 = model.rows_with_tag("eq20");
  const BigMValues bigm = big_m_values(s);

  auto rows_hold = [&](const Eigen::VectorXd& x) {
    const Eigen::VectorXd act = model.row_activity(x);
    for (const auto* rows : {&rows19, &rows20})
      for (int k : *rows)
        if (act(k) > model.row(k).rhs + 1e-9) return false;
    return true;
  };

  auto draw = [&](int& t, Eigen::VectorXd& x, Eigen::VectorXd& g, Eigen::MatrixXi& l) {
    t = std::uniform_int_distribution<int>(0, s.intervals - 1)(rng);
    x = Eigen::VectorXd::Zero(model.variable_count());
    g = Eigen::VectorXd::Zero(R);
    // sparse CU usage keeps a useful share of samples within the link capacities
    const double p_cu = unit(rng);
    for (int i = 0; i < I; ++i) {
      const int c = unit(rng) < p_cu ? std::uniform_int_distribution<int>(1, F)(rng) : 0;
      x(ix.m(t, i, 0)) = c;
      g(s.users.du_of_user(i)) += s.users.traffic(i, t) * c;
    }
    for (int r = 0; r < R; ++r) x(ix.g(t, r)) = g(r);
    l = Eigen::MatrixXi::Zero(R, E);
    const double p_l = unit(rng);
    for (int r = 0; r < R; ++r)
      for (int e = 0; e < E; ++e) {
        l(r, e) = unit(rng) < p_l ? 1 : 0;
        x(ix.l(t, r, e)) = l(r, e);
      }
  };
  auto product_holds = [&](const Eigen::VectorXd& g, const Eigen::MatrixXi& l) {
    for (int e = 0; e < E; ++e) {
      double used = 0.0;
      for (int r = 0; r < R; ++r) used += l(r, e) * g(r);
      if (used > s.topology.arcs()[static_cast<std::size_t>(e)].capacity + 1e-9) return false;
    }
    return true;
  };

  LinearizationStats out;
  int t = 0;
  Eigen::VectorXd x, g;
  Eigen::MatrixXi l;
  for (long tries = 0; out.sound_samples < samples && tries < 1000L * samples; ++tries) {
    draw(t, x, g, l);
    for (int r = 0; r < R; ++r)
      for (int e = 0; e < E; ++e) {
        const double lower = std::max(0.0, g(r) - bigm.bandwidth(r, t) * (1 - l(r, e)));
        x(ix.z(t, r, e)) = lower + (unit(rng) < 0.5 ? 0.0 : 0.1 * unit(rng));
      }
    bool bounds = true;
    for (int r = 0; r < R && bounds; ++r)
      for (int e = 0; e < E && bounds; ++e) bounds = x(ix.z(t, r, e)) <= model.variable(ix.z(t, r, e)).upper;
    if (!bounds || !rows_hold(x)) continue;
    ++out.sound_samples;
    if (!product_holds(g, l)) ++out.sound_counterexamples;
  }
  for (long tries = 0; out.complete_samples < samples && tries < 1000L * samples; ++tries) {
    draw(t, x, g, l);
    if (!product_holds(g, l)) continue;
    ++out.complete_samples;
    bool ok = true;
    for (int r = 0; r < R; ++r)
      for (int e = 0; e < E; ++e) {
        const int j = ix.z(t, r, e);
        x(j) = l(r, e) * g(r);
        ok = ok && x(j) >= model.variable(j).lower && x(j) <= model.variable(j).upper + 1e-12;
      }
    if (!ok || !rows_hold(x)) ++out.complete_counterexamples;
  }
  return out;
}

}  // namespace grove::test
