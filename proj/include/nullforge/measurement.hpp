#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nullforge/jet.hpp"
#include "nullforge/multiindex.hpp"
#include "nullforge/network.hpp"

namespace nullforge {

struct Box {
  Point lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
};

enum class ProbeKind { Value, Partial, TraceValue };

// One linear probe of the trial function: an interior point value, an interior
// partial derivative, or a boundary trace value.
struct Probe {
  Point point;
  ProbeKind kind = ProbeKind::Value;
  MultiIndex beta;  // only for Partial, 1 <= |beta|
};

// Ordered probe list defining the linear measurement map M. The layout is
// fixed: interior points sorted lexicographically, value probe before
// derivative probes, derivative probes in graded-lex multi-index order,
// boundary probes last.
class MeasurementSpec {
 public:
  MeasurementSpec(int dim, std::vector<Probe> probes);

  // interior values + gradients, boundary trace values
  static MeasurementSpec deep_ritz(const std::vector<Point>& interior,
                                   const std::vector<Point>& boundary);
  // interior values + all partials of order 1..m
  static MeasurementSpec derivative_probes(const std::vector<Point>& interior, int m);
  // values only (finite-difference losses)
  static MeasurementSpec values_only(const std::vector<Point>& points);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(probes_.size()); }
  const std::vector<Probe>& probes() const { return probes_; }

  int max_order() const;
  std::vector<Point> distinct_points() const;     // every probed point, deduplicated
  std::vector<Point> interior_points() const;     // value/partial points
  std::vector<Point> boundary_points() const;     // trace points
  bool contains_point(const Point& p, double tol = 1e-12) const;

 private:
  int dim_;
  std::vector<Probe> probes_;
};

// M(u): entry i is the probed quantity at probes[i]. Linear in u.
std::vector<double> measure(const MlpNetwork& net, const MeasurementSpec& spec,
                            double kink_tol = 1e-9);

// A finite-measurement loss J = G(M(u)); G is any total function of the
// measurement vector.
struct FiniteMeasurementLoss {
  MeasurementSpec spec;
  std::function<double(std::span<const double>)> aggregate;
  double kink_tol = 1e-9;

  double eval(const MlpNetwork& net) const;
};

struct NullCheck {
  double null_residual = 0.0;   // max |M(phi)| over probes
  double witness_value = 0.0;   // |phi(z0)|
  bool null_ok = false;         // null_residual <= tol
  bool witness_ok = false;      // |phi(z0)| >= 0.1 (nontriviality floor)
  bool passed = false;
};

// z0 must not be a probe point. Returns a failed fragment rather than
// throwing when the candidate is not a null direction.
NullCheck verify_null(const MlpNetwork& phi, const MeasurementSpec& spec, const Point& z0,
                      double tol, double kink_tol = 1e-9);

// Composite midpoint approximation of ||u - v||_{L^p(box)}; resolution cells
// per axis. Used for monotone growth certification, not tight norms.
double lp_distance(const MlpNetwork& u, const MlpNetwork& v, double p, const Box& box,
                   int resolution);
double lp_norm(const MlpNetwork& u, double p, const Box& box, int resolution);

}  // namespace nullforge
