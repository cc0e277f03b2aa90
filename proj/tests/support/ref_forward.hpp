#pragma once

// Independently coded forward pass used as an oracle for net_forward: walks
// the flat parameter array with its own indexing arithmetic.

#include <cmath>
#include <vector>

namespace ref {

inline std::vector<double> forward(const std::vector<int>& widths,
                                   const std::vector<double>& params,
                                   const std::vector<double>& input) {
  std::vector<double> h = input;
  size_t pos = 0;
  for (size_t layer = 1; layer < widths.size(); ++layer) {
    const int in_w = widths[layer - 1];
    const int out_w = widths[layer];
    std::vector<double> z(static_cast<size_t>(out_w), 0.0);
    for (int o = 0; o < out_w; ++o)
      for (int i = 0; i < in_w; ++i)
        z[static_cast<size_t>(o)] += params[pos + static_cast<size_t>(o * in_w + i)] * h[static_cast<size_t>(i)];
    pos += static_cast<size_t>(in_w) * static_cast<size_t>(out_w);
    for (int o = 0; o < out_w; ++o) z[static_cast<size_t>(o)] += params[pos + static_cast<size_t>(o)];
    pos += static_cast<size_t>(out_w);
    if (layer + 1 < widths.size())
      for (double& v : z) v = std::tanh(v);
    h = std::move(z);
  }
  return h;
}

}  // namespace ref
