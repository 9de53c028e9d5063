#pragma once

#include <functional>
#include <vector>

namespace pvprof {

struct BoundedMinimizeOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;  // on the loss improvement of one iteration
  double fd_step = 1e-6;              // central-difference step in x units
  int history = 10;                   // curvature pairs kept (L-BFGS memory)
};

struct BoundedMinimizeResult {
  std::vector<double> x;  // best iterate seen
  double f = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Central finite-difference gradient; steps shrink to stay inside [lo, hi].
std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                const std::vector<double>& x, const std::vector<double>& lo,
                                const std::vector<double>& hi, double step, int* evaluations = nullptr);

// Bound-constrained limited-memory quasi-Newton minimization. Variables at a
// bound with an outward gradient are held fixed; the two-loop recursion acts
// on the free subspace and steps are projected back into the box with an
// Armijo backtracking search. Gradients come from fd_gradient.
BoundedMinimizeResult minimize_bounded(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, const std::vector<double>& lo,
                                       const std::vector<double>& hi, const BoundedMinimizeOptions& opts);

}  // namespace pvprof
