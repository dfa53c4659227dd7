#pragma once
#include <functional>
#include <vector>

namespace traffic {

// Adaptive Simpson on [a,b]; tol is an absolute error target.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int max_depth = 60);

// Integral over [a,b] split at interior breakpoints (kinks, atoms).
double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breakpoints, double tol = 1e-12);

// Integral over [a, inf) by doubling windows until a window contributes
// less than tol.
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        double tol = 1e-12);

// Root of an increasing function on [lo, hi] by bisection; f(lo) <= 0 <= f(hi).
double solve_increasing(const std::function<double(double)>& f, double lo, double hi,
                        double xtol = 1e-14);

// Argmax of a unimodal function on [lo, hi] by golden-section search.
double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol = 1e-10);

}  // namespace traffic
