#pragma once

#include <vector>

namespace toeplitz::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

// `panels` equal subintervals of [a, b], each carrying a `per_panel` point
// Gauss-Legendre rule.
Rule composite_gauss_legendre(int panels, int per_panel, double a, double b);

// Trapezoid rule for a function periodic on [a, b): nodes a + i h, equal weights.
Rule periodic_trapezoid(int n, double a, double b);

// Closed trapezoid rule on [a, b] with n >= 2 nodes, endpoints included.
Rule trapezoid(int n, double a, double b);

}  // namespace toeplitz::quad
