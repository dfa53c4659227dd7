#include "trafficlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace traffic {

namespace {
double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b,
                   double fb, double m, double fm, double whole, double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(a, fa, m, fm, flm);
  double right = simpson(m, fm, b, fb, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
  if (!(b > a)) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson(a, fa, b, fb, fm);
  return simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breakpoints, double tol) {
  std::vector<double> pts{a, b};
  for (double p : breakpoints)
    if (p > a && p < b) pts.push_back(p);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += adaptive_simpson(f, pts[i], pts[i + 1], tol / static_cast<double>(pts.size()));
  return total;
}

double integrate_to_inf(const std::function<double(double)>& f, double a, double tol) {
  double total = 0.0;
  double lo = a, width = 1.0;
  for (int i = 0; i < 80; ++i) {
    double hi = lo + width;
    double piece = adaptive_simpson(f, lo, hi, tol * 0.25);
    total += piece;
    if (i > 2 && std::abs(piece) < tol) break;
    lo = hi;
    width *= 2.0;
  }
  return total;
}

double solve_increasing(const std::function<double(double)>& f, double lo, double hi,
                        double xtol) {
  double flo = f(lo), fhi = f(hi);
  if (flo > 0.0 || fhi < 0.0) throw std::domain_error("solve_increasing: root not bracketed");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > xtol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    (fm < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double golden_max(const std::function<double(double)>& f, double lo, double hi,
                  double xtol) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace traffic
