#include "nullforge/certificate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nullforge/network_json.hpp"

namespace nullforge {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DegeneracyCertificate loss_invariance_sweep(const FiniteMeasurementLoss& loss,
                                            const MlpNetwork& base, const MlpNetwork& phi,
                                            const Point& z0, const std::vector<double>& lambdas,
                                            double null_tol) {
  DegeneracyCertificate cert{base, phi, z0};
  cert.lambda_samples = lambdas;
  cert.null_tol = null_tol;

  const NullCheck chk = verify_null(phi, loss.spec, z0, null_tol, loss.kink_tol);
  cert.null_residual = chk.null_residual;
  cert.witness_value = chk.witness_value;
  cert.passed_null = chk.null_ok;
  cert.passed_witness = chk.witness_ok;

  cert.base_loss = loss.eval(base);
  cert.invariance_tol = 1e-9 * (1.0 + std::abs(cert.base_loss));

  double max_dev = -1.0;
  for (double lam : lambdas) {
    const MlpNetwork shifted = linear_combine({base, phi}, {1.0, lam});
    const double v = loss.eval(shifted);
    cert.loss_values.push_back(v);
    const double dev = std::abs(v - cert.base_loss);
    if (dev > max_dev) {
      max_dev = dev;
      cert.worst_lambda = lam;
    }
  }
  double lo = cert.base_loss, hi = cert.base_loss;
  for (double v : cert.loss_values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  cert.max_spread = hi - lo;
  cert.passed_invariance = cert.max_spread <= cert.invariance_tol;
  cert.passed = cert.passed_invariance && cert.passed_null && cert.passed_witness;
  return cert;
}

void attach_distance_escape(DegeneracyCertificate& cert, const MlpNetwork& reference, double p,
                            const Box& box, int resolution) {
  cert.lp_distances.clear();
  for (double lam : cert.lambda_samples) {
    const MlpNetwork shifted = linear_combine({cert.base, cert.null_dir}, {1.0, lam});
    cert.lp_distances.emplace_back(lam, lp_distance(shifted, reference, p, box, resolution));
  }
  // smallest |lambda| from which the distance is nondecreasing in |lambda|
  auto sorted = cert.lp_distances;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return std::abs(a.first) < std::abs(b.first);
  });
  cert.lambda_star.reset();
  for (std::size_t start = 0; start < sorted.size(); ++start) {
    bool monotone = true;
    for (std::size_t i = start; i + 1 < sorted.size(); ++i)
      if (sorted[i + 1].second < sorted[i].second - 1e-12 * (1.0 + sorted[i].second)) {
        monotone = false;
        break;
      }
    if (monotone) {
      cert.lambda_star = std::abs(sorted[start].first);
      break;
    }
  }
}

nlohmann::json certificate_to_json(const DegeneracyCertificate& cert) {
  nlohmann::json j;
  j["base"] = network_to_json(cert.base);
  j["null_direction"] = network_to_json(cert.null_dir);
  j["witness_point"] = cert.witness_point;
  j["lambda_samples"] = cert.lambda_samples;
  j["loss_values"] = cert.loss_values;
  j["base_loss"] = cert.base_loss;
  j["max_spread"] = cert.max_spread;
  j["invariance_tolerance"] = cert.invariance_tol;
  j["worst_lambda"] = cert.worst_lambda;
  j["null_residual"] = cert.null_residual;
  j["null_tolerance"] = cert.null_tol;
  j["witness_value"] = cert.witness_value;
  j["passed_invariance"] = cert.passed_invariance;
  j["passed_null"] = cert.passed_null;
  j["passed_witness"] = cert.passed_witness;
  j["passed"] = cert.passed;
  if (!cert.lp_distances.empty()) {
    nlohmann::json d = nlohmann::json::array();
    for (const auto& [lam, dist] : cert.lp_distances) d.push_back({lam, dist});
    j["lp_distances"] = std::move(d);
    if (cert.lambda_star) j["lambda_star"] = *cert.lambda_star;
  }
  if (!cert.constraint_residuals.empty()) j["constraint_residuals"] = cert.constraint_residuals;
  return j;
}

std::string certificate_sweep_csv(const DegeneracyCertificate& cert) {
  std::string csv = "lambda,loss,distance\n";
  for (std::size_t i = 0; i < cert.lambda_samples.size(); ++i) {
    csv += format_double(cert.lambda_samples[i]);
    csv += ',';
    csv += format_double(cert.loss_values[i]);
    csv += ',';
    if (i < cert.lp_distances.size())
      csv += format_double(cert.lp_distances[i].second);
    else
      csv += "nan";
    csv += '\n';
  }
  return csv;
}

}  // namespace nullforge
