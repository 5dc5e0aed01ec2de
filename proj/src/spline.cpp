#include "kants/spline.hpp"

#include <cmath>
#include <string>

#include "kants/error.hpp"

namespace kants {

namespace {

constexpr int kMaxDegree = 15;

void check_degree(const KnotGrid& grid, int k) {
  if (k != grid.degree()) {
    throw ValidationError("spline degree " + std::to_string(k) +
                          " does not match grid degree " +
                          std::to_string(grid.degree()));
  }
}

void check_finite(double x) {
  if (!std::isfinite(x)) {
    throw ValidationError("spline input is not finite");
  }
}

}  // namespace

void SplineSpec::validate() const {
  if (degree < 0 || degree > kMaxDegree) {
    throw ValidationError("spline degree must be in [0, " +
                          std::to_string(kMaxDegree) + "], got " +
                          std::to_string(degree));
  }
  if (intervals < 1) {
    throw ValidationError("spline interval count must be >= 1, got " +
                          std::to_string(intervals));
  }
  if (!std::isfinite(range_lo) || !std::isfinite(range_hi) ||
      !(range_lo < range_hi)) {
    throw ValidationError("spline range must satisfy lo < hi");
  }
}

KnotGrid::KnotGrid(const SplineSpec& spec) : spec_(spec) {
  spec_.validate();
  const int k = spec_.degree;
  const int g = spec_.intervals;
  step_ = (spec_.range_hi - spec_.range_lo) / g;
  knots_.resize(static_cast<std::size_t>(g + 2 * k + 1));
  for (int j = 0; j <= g; ++j) {
    knots_[k + j] = spec_.range_lo + j * step_;
  }
  knots_[k + g] = spec_.range_hi;
  for (int m = 1; m <= k; ++m) {
    knots_[k - m] = spec_.range_lo - m * step_;
    knots_[k + g + m] = spec_.range_hi + m * step_;
  }
}

double KnotGrid::knot(long j) const {
  const long n = static_cast<long>(knots_.size());
  if (j >= 0 && j < n) return knots_[static_cast<std::size_t>(j)];
  // Virtual knots past either end only feed basis indices that callers drop.
  if (j < 0) return knots_.front() + static_cast<double>(j) * step_;
  return knots_.back() + static_cast<double>(j - n + 1) * step_;
}

long KnotGrid::eval_local(double x, std::span<double> values,
                          std::span<double> derivs) const {
  const int k = spec_.degree;
  const long last = static_cast<long>(knots_.size()) - 1;
  if (x < knots_.front() || x > knots_.back()) return kNoSupport;
  // Degree 0 has no extended knots, so its last indicator is closed at hi.
  if (x == knots_.back() && k > 0) return kNoSupport;

  // Span index mu with t_mu <= x < t_{mu+1}.
  long mu = static_cast<long>(std::floor((x - knots_.front()) / step_));
  if (mu < 0) mu = 0;
  if (mu > last - 1) mu = last - 1;
  while (mu > 0 && x < knots_[static_cast<std::size_t>(mu)]) --mu;
  while (mu < last - 1 && x >= knots_[static_cast<std::size_t>(mu + 1)]) ++mu;

  // Triangular Cox-de Boor: after pass p, n[0..p] = B_{mu-p..mu, p}(x).
  double n[kMaxDegree + 2];
  double lower[kMaxDegree + 2];
  double left[kMaxDegree + 2];
  double right[kMaxDegree + 2];
  n[0] = 1.0;
  for (int p = 1; p <= k; ++p) {
    if (p == k) {
      for (int r = 0; r < k; ++r) lower[r] = n[r];
    }
    left[p] = x - knot(mu + 1 - p);
    right[p] = knot(mu + p) - x;
    double saved = 0.0;
    for (int r = 0; r < p; ++r) {
      const double denom = right[r + 1] + left[p - r];
      const double temp = denom != 0.0 ? n[r] / denom : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[p - r] * temp;
    }
    n[p] = saved;
  }
  for (int r = 0; r <= k; ++r) values[r] = n[r];

  if (!derivs.empty()) {
    if (k == 0) {
      derivs[0] = 0.0;
    } else {
      // lower[r] = B_{mu-k+1+r, k-1}; B_{mu-k,k-1} and B_{mu+1,k-1} are zero.
      const long first = mu - k;
      for (int r = 0; r <= k; ++r) {
        const long i = first + r;
        double d = 0.0;
        if (r >= 1) {
          const double denom = knot(i + k) - knot(i);
          if (denom != 0.0) d += lower[r - 1] / denom;
        }
        if (r < k) {
          const double denom = knot(i + k + 1) - knot(i + 1);
          if (denom != 0.0) d -= lower[r] / denom;
        }
        derivs[r] = k * d;
      }
    }
  }
  return mu - k;
}

KnotGrid build_knot_grid(const SplineSpec& spec) { return KnotGrid(spec); }

std::vector<double> eval_basis(const KnotGrid& grid, int k, double x) {
  check_degree(grid, k);
  check_finite(x);
  std::vector<double> out(grid.basis_count(), 0.0);
  double local[kMaxDegree + 1];
  const long first = grid.eval_local(x, local);
  if (first == KnotGrid::kNoSupport) return out;
  const long count = static_cast<long>(out.size());
  for (int r = 0; r <= k; ++r) {
    const long i = first + r;
    if (i >= 0 && i < count) out[static_cast<std::size_t>(i)] = local[r];
  }
  return out;
}

std::vector<double> eval_basis_derivative(const KnotGrid& grid, int k, double x) {
  check_degree(grid, k);
  if (k == 0) {
    throw UnsupportedDegreeError("basis derivative requires degree >= 1");
  }
  check_finite(x);
  std::vector<double> out(grid.basis_count(), 0.0);
  double local[kMaxDegree + 1];
  double dlocal[kMaxDegree + 1];
  const long first = grid.eval_local(x, local, dlocal);
  if (first == KnotGrid::kNoSupport) return out;
  const long count = static_cast<long>(out.size());
  for (int r = 0; r <= k; ++r) {
    const long i = first + r;
    if (i >= 0 && i < count) out[static_cast<std::size_t>(i)] = dlocal[r];
  }
  return out;
}

double eval_spline(const KnotGrid& grid, int k, std::span<const double> coeffs,
                   double x) {
  check_degree(grid, k);
  if (coeffs.size() != grid.basis_count()) {
    throw ValidationError("spline expects " +
                          std::to_string(grid.basis_count()) +
                          " coefficients, got " +
                          std::to_string(coeffs.size()));
  }
  check_finite(x);
  double local[kMaxDegree + 1];
  const long first = grid.eval_local(x, local);
  if (first == KnotGrid::kNoSupport) return 0.0;
  const long count = static_cast<long>(coeffs.size());
  double sum = 0.0;
  for (int r = 0; r <= k; ++r) {
    const long i = first + r;
    if (i >= 0 && i < count) sum += coeffs[static_cast<std::size_t>(i)] * local[r];
  }
  return sum;
}

}  // namespace kants
