#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullforge/measurement.hpp"

namespace nullforge {

// Machine-checkable evidence of loss degeneracy: a base function, a verified
// null direction, the lambda sweep of loss values, and optional L^p escape
// distances against a reference.
struct DegeneracyCertificate {
  MlpNetwork base;
  MlpNetwork null_dir;
  Point witness_point;

  std::vector<double> lambda_samples;
  std::vector<double> loss_values;
  double base_loss = 0.0;
  double max_spread = 0.0;
  double invariance_tol = 0.0;
  double worst_lambda = 0.0;  // lambda of maximal deviation from base_loss

  double null_residual = 0.0;
  double null_tol = 0.0;
  double witness_value = 0.0;

  bool passed_invariance = false;
  bool passed_null = false;
  bool passed_witness = false;
  bool passed = false;

  // (lambda, ||base + lambda*Phi - reference||_{L^p}) when a reference is given
  std::vector<std::pair<double, double>> lp_distances;
  std::optional<double> lambda_star;  // onset of certified monotone growth

  // per-lambda boundary constraint residuals (hard enforcement runs)
  std::vector<double> constraint_residuals;
};

// Evaluates J(base + lambda * Phi) over the sweep; passes iff the spread stays
// within 1e-9 * (1 + |J(base)|), the null residual is within null_tol and the
// witness is nontrivial.
DegeneracyCertificate loss_invariance_sweep(const FiniteMeasurementLoss& loss,
                                            const MlpNetwork& base, const MlpNetwork& phi,
                                            const Point& z0,
                                            const std::vector<double>& lambdas,
                                            double null_tol);

// Adds lp_distances and lambda_star for a reference solution.
void attach_distance_escape(DegeneracyCertificate& cert, const MlpNetwork& reference, double p,
                            const Box& box, int resolution);

nlohmann::json certificate_to_json(const DegeneracyCertificate& cert);

// (lambda, loss, distance) rows, 17 significant digits
std::string certificate_sweep_csv(const DegeneracyCertificate& cert);

std::string format_double(double v);  // %.17g

}  // namespace nullforge
