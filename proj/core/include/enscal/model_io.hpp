#pragma once

#include <string>
#include <vector>

#include "enscal/bma.hpp"
#include "enscal/emos.hpp"

namespace enscal {

/// Versioned on-disk form of a fitted model: one JSON document per
/// (model, issue date, lead time), carrying everything needed to rebuild the
/// predictive distribution, including the Box-Cox coefficient and both bound
/// representations.
struct ModelDocument {
  int schema_version = 1;
  std::string model_type; // "bma" | "emos"
  std::string variant;    // pure_ml | simplified | naive; empty for emos
  long issue_day = 0;
  int lead_time_h = 0;
  double lambda = 1.0;
  double lower_cm = 0.0;
  double upper_cm = 0.0;
  double lower_t = 0.0;
  double upper_t = 0.0;
  GroupSpec group_spec;

  // BMA parameters (per group; weights are per member).
  std::vector<double> weights;
  std::vector<double> alpha;
  std::vector<double> beta;
  double sigma = 0.0;

  // EMOS parameters.
  std::vector<double> a;
  double b0 = 0.0;
  double b1 = 0.0;

  int iterations = 0;
  double objective = 0.0; // final log-likelihood (BMA) or mean CRPS (EMOS)
  bool converged = false;
};

ModelDocument make_document(const BmaModel& model, long issue_day,
                            int lead_time_h, double lambda, double lower_cm,
                            double upper_cm);
ModelDocument make_document(const EmosModel& model, long issue_day,
                            int lead_time_h, double lambda, double lower_cm,
                            double upper_cm);

/// The canonical model name used in score tables and output paths:
/// bma_pure_ml, bma_simplified, bma_naive, emos.
std::string model_name(const ModelDocument& doc);

std::string to_json(const ModelDocument& doc);
ModelDocument document_from_json(const std::string& json_text);

void write_document(const std::string& path, const ModelDocument& doc);
ModelDocument read_document(const std::string& path);

/// Rebuild the transformed-space BMA/EMOS model from a document.
BmaModel bma_from_document(const ModelDocument& doc);
EmosModel emos_from_document(const ModelDocument& doc);

} // namespace enscal
