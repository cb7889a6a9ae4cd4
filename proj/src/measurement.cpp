#include "nullforge/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nullforge {

namespace {

bool lex_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool same_point(const Point& a, const Point& b, double tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) return false;
  return true;
}

std::vector<Point> sorted_unique(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

MeasurementSpec::MeasurementSpec(int dim, std::vector<Probe> probes)
    : dim_(dim), probes_(std::move(probes)) {
  for (const auto& p : probes_) {
    if (static_cast<int>(p.point.size()) != dim_)
      throw std::invalid_argument("probe dimension mismatch");
    if (p.kind == ProbeKind::Partial) {
      if (static_cast<int>(p.beta.size()) != dim_ || mi_order(p.beta) < 1)
        throw std::invalid_argument("partial probe needs a multi-index with |beta| >= 1");
    }
  }
}

MeasurementSpec MeasurementSpec::deep_ritz(const std::vector<Point>& interior,
                                           const std::vector<Point>& boundary) {
  if (interior.empty() && boundary.empty())
    throw std::invalid_argument("deep_ritz spec: empty probe sets");
  const int d = static_cast<int>(!interior.empty() ? interior[0].size() : boundary[0].size());
  std::vector<Probe> probes;
  for (const auto& z : sorted_unique(interior)) {
    probes.push_back({z, ProbeKind::Value, {}});
    for (int i = 0; i < d; ++i) {
      MultiIndex beta(d, 0);
      beta[i] = 1;
      probes.push_back({z, ProbeKind::Partial, beta});
    }
  }
  for (const auto& z : sorted_unique(boundary)) probes.push_back({z, ProbeKind::TraceValue, {}});
  return MeasurementSpec(d, std::move(probes));
}

MeasurementSpec MeasurementSpec::derivative_probes(const std::vector<Point>& interior, int m) {
  if (interior.empty()) throw std::invalid_argument("derivative spec: empty point set");
  const int d = static_cast<int>(interior[0].size());
  auto table = MultiIndexTable::get(d, m);
  std::vector<Probe> probes;
  for (const auto& z : sorted_unique(interior)) {
    probes.push_back({z, ProbeKind::Value, {}});
    for (int i = 0; i < table->size(); ++i) {
      const auto& beta = table->at(i);
      if (mi_order(beta) >= 1) probes.push_back({z, ProbeKind::Partial, beta});
    }
  }
  return MeasurementSpec(d, std::move(probes));
}

MeasurementSpec MeasurementSpec::values_only(const std::vector<Point>& points) {
  if (points.empty()) throw std::invalid_argument("values_only spec: empty point set");
  const int d = static_cast<int>(points[0].size());
  std::vector<Probe> probes;
  for (const auto& z : sorted_unique(points)) probes.push_back({z, ProbeKind::Value, {}});
  return MeasurementSpec(d, std::move(probes));
}

int MeasurementSpec::max_order() const {
  int m = 0;
  for (const auto& p : probes_)
    if (p.kind == ProbeKind::Partial) m = std::max(m, mi_order(p.beta));
  return m;
}

std::vector<Point> MeasurementSpec::distinct_points() const {
  std::vector<Point> pts;
  for (const auto& p : probes_) pts.push_back(p.point);
  return sorted_unique(std::move(pts));
}

std::vector<Point> MeasurementSpec::interior_points() const {
  std::vector<Point> pts;
  for (const auto& p : probes_)
    if (p.kind != ProbeKind::TraceValue) pts.push_back(p.point);
  return sorted_unique(std::move(pts));
}

std::vector<Point> MeasurementSpec::boundary_points() const {
  std::vector<Point> pts;
  for (const auto& p : probes_)
    if (p.kind == ProbeKind::TraceValue) pts.push_back(p.point);
  return sorted_unique(std::move(pts));
}

bool MeasurementSpec::contains_point(const Point& p, double tol) const {
  for (const auto& probe : probes_)
    if (same_point(probe.point, p, tol)) return true;
  return false;
}

std::vector<double> measure(const MlpNetwork& net, const MeasurementSpec& spec, double kink_tol) {
  std::vector<double> out(spec.size(), 0.0);
  // jets are computed once per distinct interior point at its maximal order
  std::optional<DerivativeBundle> cached;
  for (int i = 0; i < spec.size(); ++i) {
    const auto& probe = spec.probes()[i];
    if (probe.kind == ProbeKind::TraceValue) {
      out[i] = net.forward(probe.point);
      continue;
    }
    if (!cached || cached->point != probe.point) {
      // maximal order needed at this point
      int m = 0;
      for (const auto& q : spec.probes())
        if (q.point == probe.point && q.kind == ProbeKind::Partial)
          m = std::max(m, mi_order(q.beta));
      cached = jet_forward(net, probe.point, m, kink_tol);
    }
    out[i] = (probe.kind == ProbeKind::Value) ? cached->value() : cached->partial(probe.beta);
  }
  return out;
}

double FiniteMeasurementLoss::eval(const MlpNetwork& net) const {
  const auto m = measure(net, spec, kink_tol);
  return aggregate(m);
}

NullCheck verify_null(const MlpNetwork& phi, const MeasurementSpec& spec, const Point& z0,
                      double tol, double kink_tol) {
  if (spec.contains_point(z0))
    throw std::invalid_argument("verify_null: witness point coincides with a probe point");
  NullCheck chk;
  const auto m = measure(phi, spec, kink_tol);
  for (double v : m) chk.null_residual = std::max(chk.null_residual, std::abs(v));
  chk.witness_value = std::abs(phi.forward(z0));
  chk.null_ok = chk.null_residual <= tol;
  chk.witness_ok = chk.witness_value >= 0.1;
  chk.passed = chk.null_ok && chk.witness_ok;
  return chk;
}

namespace {

double lp_accumulate(const std::function<double(const Point&)>& f, double p, const Box& box,
                     int resolution) {
  const int d = box.dim();
  if (resolution < 2) throw std::invalid_argument("lp_distance: resolution must be >= 2");
  std::vector<double> h(d);
  for (int i = 0; i < d; ++i) h[i] = (box.hi[i] - box.lo[i]) / resolution;
  double cell = 1.0;
  for (int i = 0; i < d; ++i) cell *= h[i];

  std::vector<int> idx(d, 0);
  Point x(d);
  double acc = 0.0;
  while (true) {
    for (int i = 0; i < d; ++i) x[i] = box.lo[i] + (idx[i] + 0.5) * h[i];
    acc += std::pow(std::abs(f(x)), p) * cell;
    int axis = d - 1;
    while (axis >= 0 && ++idx[axis] == resolution) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return std::pow(acc, 1.0 / p);
}

}  // namespace

double lp_distance(const MlpNetwork& u, const MlpNetwork& v, double p, const Box& box,
                   int resolution) {
  if (p < 1.0) throw std::invalid_argument("lp_distance: p must be >= 1");
  return lp_accumulate(
      [&](const Point& x) { return u.forward(x) - v.forward(x); }, p, box, resolution);
}

double lp_norm(const MlpNetwork& u, double p, const Box& box, int resolution) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  return lp_accumulate([&](const Point& x) { return u.forward(x); }, p, box, resolution);
}

}  // namespace nullforge
