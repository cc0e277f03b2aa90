#pragma once

#include "fgsfrql/updates.hpp"

namespace fgsfrql {

// Finite-difference verification of every analytic gradient family. Each
// trial draws a random small net, transition, and fixed next action, then
// compares the analytic gradient of the squared residual against central
// differences of the corresponding loss.

struct GradcheckReport {
  double full = 0.0;      // full gradient, gamma in {0, 0.95}
  double averaged1 = 0.0; // averaged full gradient, N = 1
  double averaged5 = 0.0; // averaged full gradient, N = 5
  double semi0 = 0.0;     // semi-gradient at gamma_t = 0
  double fgdqn = 0.0;     // scalar-Q full gradient
  int trials = 0;

  double max_error() const {
    return std::max({full, averaged1, averaged5, semi0, fgdqn});
  }
  bool pass(double tol = 1e-6) const { return max_error() <= tol; }
};

namespace detail {

inline double rel_error(const NetGradient& a, const NetGradient& b) {
  const double na = l2_norm(a.values);
  const double nb = l2_norm(b.values);
  if (na < 1e-12 && nb < 1e-12) return 0.0;
  double d = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    const double e = a.values[i] - b.values[i];
    d += e * e;
  }
  return std::sqrt(d) / std::max(na, nb);
}

inline Vec random_vec(Rng& rng, int n, double lo, double hi) {
  Vec v(static_cast<size_t>(n));
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// init then jitter every coordinate so biases are active and tanh units are
// out of their linear region
inline ParamVector random_params(const NetLayout& layout, Rng& rng) {
  ParamVector p = net_init(layout, rng.next_u64());
  for (double& v : p.values) v += rng.uniform(-0.6, 0.6);
  return p;
}

}  // namespace detail

inline GradcheckReport run_gradcheck(int trials = 100, uint64_t seed = 8811, double eps = 1e-5) {
  GradcheckReport rep;
  rep.trials = trials;
  Rng rng(seed);

  for (int t = 0; t < trials; ++t) {
    const int num_actions = 2 + rng.uniform_int(4);
    const int feature_dim = 2 + rng.uniform_int(3);
    const int obs_dim = 2 + rng.uniform_int(5);
    std::vector<int> widths{obs_dim, 4 + rng.uniform_int(7)};
    if (rng.uniform() < 0.5) widths.push_back(4 + rng.uniform_int(7));
    widths.push_back(num_actions * feature_dim);
    const NetLayout layout{widths};

    XiNet net{detail::random_params(layout, rng), num_actions, feature_dim};
    Transition tr;
    tr.s = detail::random_vec(rng, obs_dim, -1.0, 1.0);
    tr.s_next = detail::random_vec(rng, obs_dim, -1.0, 1.0);
    tr.a = rng.uniform_int(num_actions);
    tr.features = detail::random_vec(rng, feature_dim, 0.0, 1.0);
    tr.pivot_key = "k";
    const int a_hat = rng.uniform_int(num_actions);
    const double gamma = (t % 2 == 0) ? 0.95 : 0.0;

    // full gradient vs d/dtheta of ||delta||^2 with a_hat fixed
    {
      const UpdateReport an = full_gradient(net, tr, a_hat, gamma);
      const NetGradient fd = finite_diff_grad(
          [&](const ParamVector& p) {
            XiNet probe{p, num_actions, feature_dim};
            const Vec d = bellman_residual(probe, tr, a_hat, gamma);
            double s = 0.0;
            for (double v : d) s += v * v;
            return s;
          },
          net.params, eps);
      rep.full = std::max(rep.full, detail::rel_error(an.grad, fd));
    }

    // semi-gradient at gamma_t = 0 (the target does not depend on theta)
    {
      const UpdateReport an = semi_gradient(net, tr, a_hat, 0.0);
      const NetGradient fd = finite_diff_grad(
          [&](const ParamVector& p) {
            XiNet probe{p, num_actions, feature_dim};
            const Vec d = bellman_residual(probe, tr, a_hat, 0.0);
            double s = 0.0;
            for (double v : d) s += v * v;
            return s;
          },
          net.params, eps);
      rep.semi0 = std::max(rep.semi0, detail::rel_error(an.grad, fd));
    }

    // averaged full gradient, N in {1, 5}
    for (int n : {1, 5}) {
      std::vector<Transition> batch;
      for (int p = 0; p < n; ++p) {
        Transition b = tr;
        b.s_next = detail::random_vec(rng, obs_dim, -1.0, 1.0);
        b.features = detail::random_vec(rng, feature_dim, 0.0, 1.0);
        batch.push_back(std::move(b));
      }
      const UpdateReport an = averaged_full_gradient(net, tr.s, tr.a, batch, a_hat, gamma);
      const NetGradient fd = finite_diff_grad(
          [&](const ParamVector& p) {
            XiNet probe{p, num_actions, feature_dim};
            Vec delta(static_cast<size_t>(feature_dim), 0.0);
            for (const Transition& b : batch) {
              const Vec out = net_forward(probe.params, b.s_next);
              for (int k = 0; k < feature_dim; ++k)
                delta[static_cast<size_t>(k)] +=
                    (b.features[static_cast<size_t>(k)] +
                     gamma * out[static_cast<size_t>(a_hat * feature_dim + k)]) /
                    static_cast<double>(batch.size());
            }
            const Vec cur = net_forward(probe.params, tr.s);
            double s = 0.0;
            for (int k = 0; k < feature_dim; ++k) {
              const double d =
                  delta[static_cast<size_t>(k)] - cur[static_cast<size_t>(tr.a * feature_dim + k)];
              s += d * d;
            }
            return s;
          },
          net.params, eps);
      const double err = detail::rel_error(an.grad, fd);
      if (n == 1)
        rep.averaged1 = std::max(rep.averaged1, err);
      else
        rep.averaged5 = std::max(rep.averaged5, err);
    }

    // scalar-Q full gradient with the greedy next action held fixed
    {
      std::vector<int> qwidths{obs_dim, 4 + rng.uniform_int(7), num_actions};
      const NetLayout qlayout{qwidths};
      QNet qnet{detail::random_params(qlayout, rng), num_actions};
      Transition qt = tr;
      qt.r = rng.uniform(-1.0, 1.0);
      const UpdateReport an = fgdqn_gradient(qnet, qt, gamma);
      int a_star = 0;
      if (gamma != 0.0) {
        const Vec next = net_forward(qnet.params, qt.s_next);
        for (int a = 1; a < num_actions; ++a)
          if (next[static_cast<size_t>(a)] > next[static_cast<size_t>(a_star)]) a_star = a;
      }
      const NetGradient fd = finite_diff_grad(
          [&](const ParamVector& p) {
            const Vec cur = net_forward(p, qt.s);
            double target = qt.r;
            if (gamma != 0.0) {
              const Vec next = net_forward(p, qt.s_next);
              target += gamma * next[static_cast<size_t>(a_star)];
            }
            const double d = target - cur[static_cast<size_t>(qt.a)];
            return d * d;
          },
          qnet.params, eps);
      rep.fgdqn = std::max(rep.fgdqn, detail::rel_error(an.grad, fd));
    }
  }
  return rep;
}

}  // namespace fgsfrql
