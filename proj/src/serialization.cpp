#include "missbm/serialization.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "missbm/errors.hpp"
#include "missbm/io.hpp"

namespace missbm {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

double number(const json& j) {
  if (j.is_null()) return std::nan("");
  if (!j.is_number()) throw InputError("expected a number in JSON, got " + j.dump());
  return j.get<double>();
}

Eigen::MatrixXd matrix_from(const json& j) {
  if (!j.is_array() || j.empty()) throw InputError("expected a non-empty matrix in JSON");
  const bool nested = j.front().is_array();
  if (!nested) {
    Eigen::MatrixXd m(1, static_cast<Eigen::Index>(j.size()));
    for (std::size_t c = 0; c < j.size(); ++c) m(0, static_cast<Eigen::Index>(c)) = number(j[c]);
    return m;
  }
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw InputError("ragged matrix in JSON");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c]);
  }
  return m;
}

Eigen::VectorXd vector_from(const json& j) {
  if (!j.is_array()) throw InputError("expected an array in JSON");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = number(j[k]);
  return v;
}

void flatten(const json& j, std::vector<double>& out) {
  if (j.is_array()) {
    for (const auto& e : j) flatten(e, out);
    return;
  }
  out.push_back(number(j));
}

json parse_json_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

json sbm_to_json(const SbmParams& p) {
  json j;
  j["Q"] = p.Q;
  j["directed"] = p.directed;
  j["variant"] = p.variant == SbmVariant::Plain ? "plain" : "covariate";
  j["alpha"] = vector_json(p.alpha);
  if (p.variant == SbmVariant::Plain) {
    j["pi"] = matrix_json(p.pi);
  } else {
    j["gamma"] = matrix_json(p.gamma);
    j["beta"] = vector_json(p.beta);
  }
  return j;
}

SbmParams sbm_from_json(const json& j) {
  if (!j.is_object()) throw InputError("SBM parameters must be a JSON object");
  SbmParams p;
  try {
    p.variant = j.contains("gamma") ? SbmVariant::Covariate : SbmVariant::Plain;
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      if (v == "plain") p.variant = SbmVariant::Plain;
      else if (v == "covariate") p.variant = SbmVariant::Covariate;
      else throw InputError("unknown SBM variant '" + v + "'");
    }
    if (p.variant == SbmVariant::Plain) {
      p.pi = matrix_from(j.at("pi"));
      p.Q = static_cast<int>(p.pi.rows());
    } else {
      p.gamma = matrix_from(j.at("gamma"));
      p.beta = vector_from(j.at("beta"));
      p.Q = static_cast<int>(p.gamma.rows());
    }
    p.alpha = j.contains("alpha") ? vector_from(j.at("alpha")) : Eigen::VectorXd::Constant(p.Q, 1.0 / p.Q);
    if (j.contains("Q") && j.at("Q").get<int>() != p.Q) throw InputError("Q disagrees with the connectivity matrix");
    p.directed = j.value("directed", false);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad SBM parameters: ") + e.what());
  }
  p.validate();
  return p;
}

json design_to_json(const SamplingDesign& design) {
  json j;
  j["tag"] = std::string(to_string(tag_of(design)));
  j["psi"] = flat_parameters(design);
  if (const auto* s = std::get_if<SnowballSampling>(&design)) j["waves"] = s->waves;
  return j;
}

SamplingDesign design_from_json(const json& j) {
  try {
    const SamplingTag tag = parse_sampling_tag(j.at("tag").get<std::string>());
    std::vector<double> psi = j.at("psi").get<std::vector<double>>();
    if (tag == SamplingTag::CovarDyad || tag == SamplingTag::CovarNode) {
      if (psi.size() < 2) throw InputError("covariate design needs an intercept and slopes");
      const double intercept = psi.front();
      psi.erase(psi.begin());
      return make_design(tag, psi, intercept);
    }
    if (tag == SamplingTag::Snowball) psi.push_back(j.value("waves", 2));
    return make_design(tag, psi);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad sampling design: ") + e.what());
  }
}

json fit_to_json(const FitResult& fit) {
  json j;
  j["Q"] = fit.Q;
  j["design"] = design_to_json(fit.design);
  j["sbm"] = sbm_to_json(fit.sbm);
  std::vector<int> z = fit.memberships();
  for (int& v : z) ++v;
  j["memberships"] = z;
  j["tau"] = matrix_json(fit.state.tau);
  j["icl"] = fit.icl;
  j["penalty"] = fit.penalty;
  j["vexpec"] = fit.vexpec;
  j["elbo_trace"] = fit.elbo_trace;
  json mon = json::array();
  for (const auto& row : fit.monitoring) {
    json r{{"iter", row.iter}, {"elbo", row.elbo}};
    r["delta"] = std::isnan(row.delta) ? json(nullptr) : json(row.delta);
    mon.push_back(std::move(r));
  }
  j["monitoring"] = std::move(mon);
  j["converged"] = fit.converged;
  json nu = json::array();
  const auto& missing = fit.network->missing;
  for (std::size_t k = 0; k < fit.state.nu.size(); ++k)
    nu.push_back(json::array({missing[k].i + 1, missing[k].j + 1, fit.state.nu[k]}));
  j["nu"] = std::move(nu);
  return j;
}

FitResult fit_from_json(const json& j, std::shared_ptr<const ObservedNetwork> net) {
  FitResult fit;
  try {
    fit.network = net;
    fit.Q = j.at("Q").get<int>();
    fit.design = design_from_json(j.at("design"));
    fit.sbm = sbm_from_json(j.at("sbm"));
    fit.state.tau = matrix_from(j.at("tau"));
    if (fit.state.tau.rows() != net->size() || fit.state.tau.cols() != fit.Q || fit.sbm.Q != fit.Q)
      throw InputError("fit does not match the network (" + std::to_string(net->size()) + " nodes)");
    if (fit.sbm.directed != net->directed()) throw InputError("fit and network disagree on direction");
    const auto& nu = j.at("nu");
    if (!nu.empty()) {
      if (nu.size() != net->missing.size()) throw InputError("fit has nu for a different set of missing dyads");
      for (std::size_t k = 0; k < nu.size(); ++k) {
        const auto& t = nu[k];
        if (t.at(0).get<int>() != net->missing[k].i + 1 || t.at(1).get<int>() != net->missing[k].j + 1)
          throw InputError("fit has nu for a different set of missing dyads");
        fit.state.nu.push_back(number(t.at(2)));
      }
    }
    if (inference_mode(fit.tag()) == InferenceMode::Imputed && fit.state.nu.size() != net->missing.size())
      throw InputError("fit lacks imputed values for the missing dyads");
    fit.icl = number(j.at("icl"));
    fit.penalty = number(j.at("penalty"));
    fit.vexpec = number(j.at("vexpec"));
    fit.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
    for (const auto& r : j.at("monitoring"))
      fit.monitoring.push_back({r.at("iter").get<int>(), number(r.at("elbo")), number(r.at("delta"))});
    fit.converged = j.value("converged", false);
  } catch (const json::exception& e) {
    throw InputError(std::string("bad fit JSON: ") + e.what());
  }
  return fit;
}

json collection_to_json(const FitCollection& c) {
  json j;
  j["blocks"] = c.blocks;
  j["icl"] = vector_json(c.icl());
  j["best"] = c.best().Q;
  json models = json::array();
  for (const auto& m : c.models) models.push_back(fit_to_json(m));
  j["models"] = std::move(models);
  return j;
}

FitCollection collection_from_json(const json& j, std::shared_ptr<const ObservedNetwork> net) {
  FitCollection c;
  try {
    if (j.contains("models")) {
      for (const auto& m : j.at("models")) {
        c.models.push_back(fit_from_json(m, net));
        c.blocks.push_back(c.models.back().Q);
      }
    } else {
      c.models.push_back(fit_from_json(j, net));
      c.blocks.push_back(c.models.back().Q);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("bad collection JSON: ") + e.what());
  }
  if (c.models.empty()) throw InputError("collection has no models");
  return c;
}

void write_monitoring_csv(std::ostream& out, const FitCollection& c) {
  out << "iter,Q,elbo,delta\n";
  for (const auto& m : c.models)
    for (const auto& row : m.monitoring)
      out << row.iter << ',' << m.Q << ',' << format_real(row.elbo) << ',' << format_real(row.delta) << '\n';
}

Eigen::MatrixXd parse_matrix_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    json j = parse_json_text(text);
    if (j.is_object()) {
      if (!j.contains("psi")) throw InputError("matrix object needs a \"psi\" member");
      j = j.at("psi");
    }
    return matrix_from(j);
  }
  std::vector<std::vector<double>> rows;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find(';', start);
    const std::string part = text.substr(start, end == std::string::npos ? std::string::npos : end - start);
    std::vector<double> row;
    for (const auto& f : split_fields(part)) {
      std::vector<double> one = parse_number_list(f);
      row.insert(row.end(), one.begin(), one.end());
    }
    if (!row.empty()) rows.push_back(std::move(row));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (rows.empty()) throw InputError("empty matrix");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw InputError("ragged matrix '" + text + "'");
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

std::vector<double> parse_number_list(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first == std::string::npos) throw InputError("empty number list");
  std::vector<double> out;
  if (text[first] == '[' || text[first] == '{') {
    json j = parse_json_text(text);
    if (j.is_object()) {
      if (!j.contains("psi")) throw InputError("parameter object needs a \"psi\" member");
      j = j.at("psi");
    }
    flatten(j, out);
    return out;
  }
  for (const auto& f : split_fields(text)) {
    if (f.find(';') != std::string::npos) {
      const Eigen::MatrixXd m = parse_matrix_text(f);
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
      continue;
    }
    double v = 0.0;
    const char* end = f.data() + f.size();
    auto [ptr, ec] = std::from_chars(f.data(), end, v);
    if (ec != std::errc() || ptr != end) throw InputError("cannot parse '" + f + "' as a number");
    out.push_back(v);
  }
  return out;
}

}  // namespace missbm
