#pragma once

// Tabular dynamic-programming oracles, independent of the library's learning
// path. Everything here works from an explicit MDP description (transition
// probabilities and feature function) and plain fixed-point iteration.

#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace dp {

struct Outcome {
  double prob;
  int s_next;
};

struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int feature_dim = 0;
  double gamma = 0.95;
  // transitions[s][a] -> weighted next states
  std::vector<std::vector<std::vector<Outcome>>> transitions;
  // phi(s, a, s')
  std::function<std::vector<double>(int, int, int)> phi;
};

// The five-state chain used across the tests: actions 0/1 step left/right
// (clamped), the commanded direction flips with probability `slip`, and the
// two binary features fire on arrival at the end states.
inline TabularMdp make_chain(double slip, double gamma = 0.95) {
  TabularMdp m;
  m.num_states = 5;
  m.num_actions = 2;
  m.feature_dim = 2;
  m.gamma = gamma;
  m.transitions.assign(5, std::vector<std::vector<Outcome>>(2));
  auto clamp = [](int s) { return std::min(4, std::max(0, s)); };
  for (int s = 0; s < 5; ++s) {
    for (int a = 0; a < 2; ++a) {
      const int dir = a == 0 ? -1 : 1;
      const int fwd = clamp(s + dir);
      const int back = clamp(s - dir);
      if (slip == 0.0) {
        m.transitions[s][a] = {{1.0, fwd}};
      } else if (fwd == back) {
        m.transitions[s][a] = {{1.0, fwd}};
      } else {
        m.transitions[s][a] = {{1.0 - slip, fwd}, {slip, back}};
      }
    }
  }
  m.phi = [](int, int, int s_next) {
    return std::vector<double>{s_next == 0 ? 1.0 : 0.0, s_next == 4 ? 1.0 : 0.0};
  };
  return m;
}

using Policy = std::vector<int>;  // state -> action

// xi^pi(s, a, k) = E[phi_k(s,a,s') + gamma xi^pi(s', pi(s'), k)]
inline std::vector<std::vector<std::vector<double>>> solve_xi(const TabularMdp& m,
                                                              const Policy& pi,
                                                              double tol = 1e-14,
                                                              int max_iters = 200000) {
  std::vector<std::vector<std::vector<double>>> xi(
      m.num_states,
      std::vector<std::vector<double>>(m.num_actions, std::vector<double>(m.feature_dim, 0.0)));
  for (int it = 0; it < max_iters; ++it) {
    double change = 0.0;
    auto next = xi;
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        std::vector<double> acc(m.feature_dim, 0.0);
        for (const Outcome& o : m.transitions[s][a]) {
          const auto f = m.phi(s, a, o.s_next);
          for (int k = 0; k < m.feature_dim; ++k)
            acc[k] += o.prob * (f[k] + m.gamma * xi[o.s_next][pi[o.s_next]][k]);
        }
        for (int k = 0; k < m.feature_dim; ++k)
          change = std::max(change, std::abs(acc[k] - xi[s][a][k]));
        next[s][a] = std::move(acc);
      }
    }
    xi = std::move(next);
    if (change < tol) break;
  }
  return xi;
}

// Q^pi(s, a) under rewards r = w . phi
inline std::vector<std::vector<double>> solve_q(const TabularMdp& m, const Policy& pi,
                                                const std::vector<double>& w, double tol = 1e-14,
                                                int max_iters = 200000) {
  std::vector<std::vector<double>> q(m.num_states, std::vector<double>(m.num_actions, 0.0));
  for (int it = 0; it < max_iters; ++it) {
    double change = 0.0;
    auto next = q;
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        double acc = 0.0;
        for (const Outcome& o : m.transitions[s][a]) {
          const auto f = m.phi(s, a, o.s_next);
          double r = 0.0;
          for (int k = 0; k < m.feature_dim; ++k) r += w[k] * f[k];
          acc += o.prob * (r + m.gamma * q[o.s_next][pi[o.s_next]]);
        }
        change = std::max(change, std::abs(acc - q[s][a]));
        next[s][a] = acc;
      }
    }
    q = std::move(next);
    if (change < tol) break;
  }
  return q;
}

inline std::vector<double> state_values(const std::vector<std::vector<double>>& q,
                                        const Policy& pi) {
  std::vector<double> v(q.size());
  for (size_t s = 0; s < q.size(); ++s) v[s] = q[s][static_cast<size_t>(pi[s])];
  return v;
}

}  // namespace dp
