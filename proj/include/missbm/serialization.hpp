#pragma once

#include <iosfwd>
#include <memory>

#include <json.hpp>

#include "missbm/collection.hpp"
#include "missbm/sampling.hpp"
#include "missbm/sbm.hpp"
#include "missbm/vem.hpp"

namespace missbm {

nlohmann::json sbm_to_json(const SbmParams& params);
/// Accepts {Q, directed, variant, alpha, pi | gamma + beta}. Q, directed and
/// variant are inferred when absent.
SbmParams sbm_from_json(const nlohmann::json& j);

nlohmann::json design_to_json(const SamplingDesign& design);
SamplingDesign design_from_json(const nlohmann::json& j);

/// Fit summary. Besides the schema fields the imputed values of missing dyads
/// are stored as 1-based [i, j, nu] triplets so that a fit can be reloaded.
nlohmann::json fit_to_json(const FitResult& fit);
/// Rebuilds a fit against the network it was estimated on.
FitResult fit_from_json(const nlohmann::json& j, std::shared_ptr<const ObservedNetwork> net);

nlohmann::json collection_to_json(const FitCollection& collection);
FitCollection collection_from_json(const nlohmann::json& j, std::shared_ptr<const ObservedNetwork> net);

/// Columns iter,Q,elbo,delta; one row per monitoring entry of every model.
void write_monitoring_csv(std::ostream& out, const FitCollection& collection);

/// Matrix given as JSON ([[...], ...] or {"psi": ...}) or as comma separated
/// rows separated by ';'.
Eigen::MatrixXd parse_matrix_text(const std::string& text);
/// Flat numbers from "a,b,c" or a JSON array (nested arrays are flattened
/// row-major) or an object with a "psi" member.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace missbm
