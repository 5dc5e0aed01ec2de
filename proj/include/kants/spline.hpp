#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kants {

/// Polynomial degree, interval count and range of a uniform B-spline basis.
struct SplineSpec {
  int degree = 3;
  int intervals = 5;
  double range_lo = -1.0;
  double range_hi = 1.0;

  /// Throws ValidationError when degree < 0, intervals < 1 or lo >= hi.
  void validate() const;
  std::size_t basis_count() const {
    return static_cast<std::size_t>(intervals + degree);
  }
  friend bool operator==(const SplineSpec&, const SplineSpec&) = default;
};

/// Uniform knot vector of length G + 2k + 1.
///
/// The G + 1 grid points cover [range_lo, range_hi] and sit at indices
/// k..k+G; k extra knots with the same spacing extend each end.
class KnotGrid {
 public:
  explicit KnotGrid(const SplineSpec& spec);

  const SplineSpec& spec() const { return spec_; }
  int degree() const { return spec_.degree; }
  std::size_t basis_count() const { return spec_.basis_count(); }
  std::span<const double> knots() const { return knots_; }
  double step() const { return step_; }

  /// Evaluates the k + 1 basis functions that can be non-zero at x.
  ///
  /// Writes B_{first..first+k,k}(x) into `values` (and their x-derivatives
  /// into `derivs` when non-empty) and returns `first`, which may be
  /// negative or run past basis_count() near the ends of the knot vector;
  /// callers drop those entries. Returns kNoSupport when x lies outside
  /// [t_0, t_last) (closed at t_last for degree 0), where every basis function vanishes.
  /// x must be finite. Both spans need at least degree() + 1 entries.
  long eval_local(double x, std::span<double> values,
                  std::span<double> derivs = {}) const;

  static constexpr long kNoSupport = -(1L << 40);

 private:
  double knot(long j) const;

  SplineSpec spec_;
  std::vector<double> knots_;
  double step_;
};

KnotGrid build_knot_grid(const SplineSpec& spec);

/// All basis_count() values B_{i,k}(x). `k` must match the grid's degree.
std::vector<double> eval_basis(const KnotGrid& grid, int k, double x);

/// dB_{i,k}/dx for every i. Throws UnsupportedDegreeError for k = 0.
std::vector<double> eval_basis_derivative(const KnotGrid& grid, int k, double x);

/// sum_i coeffs[i] * B_{i,k}(x).
double eval_spline(const KnotGrid& grid, int k, std::span<const double> coeffs,
                   double x);

}  // namespace kants
