#pragma once

#include <unordered_map>

#include "fgsfrql/sfr.hpp"

// Bellman residual and update rules. The full-gradient rules differentiate
// the squared residual through BOTH the prediction and the bootstrapped
// target term; the semi-gradient rules treat the target as a constant. The
// GPI-selected next action is held fixed during differentiation throughout.

namespace fgsfrql {

using ResidualVec = Vec;  // width d_phi

struct UpdateReport {
  NetGradient grad;
  double residual_norm = 0.0;
  double batch_msbe = 0.0;
};

namespace detail {

// xi(s, a, .) without materializing the full matrix
inline Vec xi_row(const XiNet& net, const Observation& s, int a) {
  const Vec out = net_forward(net.params, s);
  return Vec(out.begin() + static_cast<long>(a) * net.feature_dim,
             out.begin() + static_cast<long>(a + 1) * net.feature_dim);
}

// cotangent that is `row` in action slot a and zero elsewhere
inline Vec row_cotangent(const XiNet& net, int a, const Vec& row, double scale) {
  Vec cot(static_cast<size_t>(net.num_actions) * net.feature_dim, 0.0);
  for (int k = 0; k < net.feature_dim; ++k)
    cot[static_cast<size_t>(a) * net.feature_dim + k] = scale * row[static_cast<size_t>(k)];
  return cot;
}

inline void add_into(Vec& dst, const Vec& src) {
  for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace detail

// delta = phi_t + gamma_t * xi(s', a_hat, .) - xi(s, a, .)
inline ResidualVec bellman_residual(const XiNet& net, const Transition& t, int a_hat,
                                    double gamma_t) {
  if (static_cast<int>(t.features.size()) != net.feature_dim)
    throw ShapeError("bellman_residual: feature width mismatch");
  ResidualVec delta = t.features;
  if (gamma_t != 0.0) {
    const Vec next = detail::xi_row(net, t.s_next, a_hat);
    for (int k = 0; k < net.feature_dim; ++k) delta[static_cast<size_t>(k)] += gamma_t * next[static_cast<size_t>(k)];
  }
  const Vec cur = detail::xi_row(net, t.s, t.a);
  for (int k = 0; k < net.feature_dim; ++k) delta[static_cast<size_t>(k)] -= cur[static_cast<size_t>(k)];
  return delta;
}

// Exact gradient of sum_k delta_k^2 with respect to the net parameters,
// bootstrapped term included:
//   grad = sum_k 2 delta_k (gamma_t grad xi(s',a_hat,k) - grad xi(s,a,k))
inline UpdateReport full_gradient(const XiNet& net, const Transition& t, int a_hat,
                                  double gamma_t) {
  const ResidualVec delta = bellman_residual(net, t, a_hat, gamma_t);
  NetGradient grad = net_backward(net.params, t.s, detail::row_cotangent(net, t.a, delta, -2.0));
  if (gamma_t != 0.0) {
    const NetGradient next =
        net_backward(net.params, t.s_next, detail::row_cotangent(net, a_hat, delta, 2.0 * gamma_t));
    detail::add_into(grad.values, next.values);
  }
  UpdateReport rep{std::move(grad), l2_norm(delta), 0.0};
  rep.batch_msbe = rep.residual_norm * rep.residual_norm;
  return rep;
}

// Gradient with the bootstrap term's dependence on the parameters ignored:
//   grad = sum_k 2 delta_k (-grad xi(s,a,k))
inline UpdateReport semi_gradient(const XiNet& net, const Transition& t, int a_hat,
                                  double gamma_t) {
  const ResidualVec delta = bellman_residual(net, t, a_hat, gamma_t);
  NetGradient grad = net_backward(net.params, t.s, detail::row_cotangent(net, t.a, delta, -2.0));
  UpdateReport rep{std::move(grad), l2_norm(delta), 0.0};
  rep.batch_msbe = rep.residual_norm * rep.residual_norm;
  return rep;
}

// Averaged residual over N transitions sharing the pivot (s, a):
//   delta_bar = (1/N) sum_p [phi_p + gamma xi(s'_p, a_hat, .)] - xi(s, a, .)
//   grad = sum_k 2 delta_bar_k ((1/N) sum_p gamma grad xi(s'_p,a_hat,k) - grad xi(s,a,k))
inline UpdateReport averaged_full_gradient(const XiNet& net, const Observation& pivot_s,
                                           int pivot_a, const std::vector<Transition>& batch,
                                           int a_hat, double gamma) {
  if (batch.empty()) throw UsageError("averaged_full_gradient: empty batch");
  for (const Transition& t : batch)
    if (t.pivot_key != batch.front().pivot_key)
      throw UsageError("averaged_full_gradient: mixed pivot keys in batch");

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ResidualVec delta(static_cast<size_t>(net.feature_dim), 0.0);
  for (const Transition& t : batch) {
    if (static_cast<int>(t.features.size()) != net.feature_dim)
      throw ShapeError("averaged_full_gradient: feature width mismatch");
    for (int k = 0; k < net.feature_dim; ++k)
      delta[static_cast<size_t>(k)] += inv_n * t.features[static_cast<size_t>(k)];
    if (gamma != 0.0) {
      const Vec next = detail::xi_row(net, t.s_next, a_hat);
      for (int k = 0; k < net.feature_dim; ++k)
        delta[static_cast<size_t>(k)] += inv_n * gamma * next[static_cast<size_t>(k)];
    }
  }
  const Vec cur = detail::xi_row(net, pivot_s, pivot_a);
  for (int k = 0; k < net.feature_dim; ++k) delta[static_cast<size_t>(k)] -= cur[static_cast<size_t>(k)];

  NetGradient grad =
      net_backward(net.params, pivot_s, detail::row_cotangent(net, pivot_a, delta, -2.0));
  if (gamma != 0.0) {
    for (const Transition& t : batch) {
      const NetGradient next = net_backward(
          net.params, t.s_next, detail::row_cotangent(net, a_hat, delta, 2.0 * gamma * inv_n));
      detail::add_into(grad.values, next.values);
    }
  }
  UpdateReport rep{std::move(grad), l2_norm(delta), 0.0};
  rep.batch_msbe = rep.residual_norm * rep.residual_norm;
  return rep;
}

// --- scalar-Q baselines ---

struct QNet {
  ParamVector params;
  int num_actions = 0;
};

inline QNet make_q_net(const NetLayout& layout, int num_actions, uint64_t seed) {
  if (layout.output_width() != num_actions)
    throw ShapeError("q net output width must equal num_actions");
  return QNet{net_init(layout, seed), num_actions};
}

inline int greedy_q_action(const QNet& net, const Observation& s) {
  const Vec q = net_forward(net.params, s);
  int best = 0;
  for (int a = 1; a < net.num_actions; ++a)
    if (q[static_cast<size_t>(a)] > q[static_cast<size_t>(best)]) best = a;
  return best;
}

namespace detail {

inline Vec q_cotangent(int num_actions, int a, double scale) {
  Vec cot(static_cast<size_t>(num_actions), 0.0);
  cot[static_cast<size_t>(a)] = scale;
  return cot;
}

inline double scalar_residual(const QNet& net, const Transition& t, double gamma_t,
                              int* a_star_out) {
  double target = t.r;
  int a_star = 0;
  if (gamma_t != 0.0) {
    const Vec next = net_forward(net.params, t.s_next);
    for (int a = 1; a < net.num_actions; ++a)
      if (next[static_cast<size_t>(a)] > next[static_cast<size_t>(a_star)]) a_star = a;
    target += gamma_t * next[static_cast<size_t>(a_star)];
  }
  if (a_star_out) *a_star_out = a_star;
  const Vec cur = net_forward(net.params, t.s);
  return target - cur[static_cast<size_t>(t.a)];
}

}  // namespace detail

// Semi-gradient of delta^2 with delta = r + gamma_t max_a' Q(s',a') - Q(s,a):
// grad = -2 delta grad Q(s,a).
inline UpdateReport dqn_gradient(const QNet& net, const Transition& t, double gamma_t) {
  const double delta = detail::scalar_residual(net, t, gamma_t, nullptr);
  NetGradient grad =
      net_backward(net.params, t.s, detail::q_cotangent(net.num_actions, t.a, -2.0 * delta));
  return UpdateReport{std::move(grad), std::abs(delta), delta * delta};
}

// Full gradient of delta^2 with the greedy next action a* held fixed:
// grad = 2 delta (gamma_t grad Q(s',a*) - grad Q(s,a)).
inline UpdateReport fgdqn_gradient(const QNet& net, const Transition& t, double gamma_t) {
  int a_star = 0;
  const double delta = detail::scalar_residual(net, t, gamma_t, &a_star);
  NetGradient grad =
      net_backward(net.params, t.s, detail::q_cotangent(net.num_actions, t.a, -2.0 * delta));
  if (gamma_t != 0.0) {
    const NetGradient next = net_backward(
        net.params, t.s_next, detail::q_cotangent(net.num_actions, a_star, 2.0 * gamma_t * delta));
    detail::add_into(grad.values, next.values);
  }
  return UpdateReport{std::move(grad), std::abs(delta), delta * delta};
}

inline void add_scaled(NetGradient& acc, const NetGradient& g, double scale) {
  detail::require_congruent(acc.layout, g.layout, "add_scaled");
  for (size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += scale * g.values[i];
}

// Applies the block update: block i always, block c only when c != i, every
// other block untouched.
inline PolicyLibrary joint_update(PolicyLibrary lib, int i, int c,
                                  const std::unordered_map<int, NetGradient>& grads,
                                  double alpha) {
  if (i < 0 || i >= lib.active_count() || c < 0 || c >= lib.active_count())
    throw UsageError("joint_update: block index out of range");
  auto it = grads.find(i);
  if (it == grads.end()) throw UsageError("joint_update: missing gradient for block i");
  // compute both steps before committing either
  ParamVector stepped_i = sgd_step(lib.nets[static_cast<size_t>(i)].params, it->second, alpha);
  if (c != i) {
    auto jt = grads.find(c);
    if (jt == grads.end()) throw UsageError("joint_update: missing gradient for block c");
    lib.nets[static_cast<size_t>(c)].params =
        sgd_step(lib.nets[static_cast<size_t>(c)].params, jt->second, alpha);
  }
  lib.nets[static_cast<size_t>(i)].params = std::move(stepped_i);
  return lib;
}

}  // namespace fgsfrql
