#include "missbm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "missbm/collection.hpp"
#include "missbm/errors.hpp"
#include "missbm/evaluation.hpp"
#include "missbm/io.hpp"
#include "missbm/serialization.hpp"

namespace missbm {

namespace {

struct InputFlags {
  std::string path;
  std::string format = "dense-csv";
  bool directed = false;
  bool default_missing = false;
  int nodes = 0;
  std::string label_attr;
  bool drop_isolated = false;

  void attach(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--input,-i", path, "Adjacency file (dense CSV, triplets or .graphml)");
    if (required) opt->required();
    add_format(app);
    app->add_flag("--directed", directed, "Treat the network as directed");
    app->add_flag("--default-missing", default_missing, "Unlisted triplet dyads are missing");
    app->add_option("--nodes", nodes, "Node count for triplet input (default: largest index)");
    app->add_option("--label-attr", label_attr, "GraphML node attribute holding reference labels");
    app->add_flag("--drop-isolated", drop_isolated, "Drop GraphML nodes without edges");
  }
  void add_format(CLI::App* app) {
    app->add_option("--format", format, "dense-csv, triplet or graphml")->capture_default_str();
  }
  LoadOptions options() const {
    LoadOptions o;
    o.format = parse_format(format);
    o.directed = directed;
    o.default_missing = default_missing;
    o.nodes = nodes;
    o.label_attr = label_attr;
    o.drop_isolated = drop_isolated;
    return o;
  }
  PartialAdjacency load(std::optional<Partition>* labels = nullptr) const {
    return load_adjacency(path, options(), labels);
  }
};

struct ControlFlags {
  double threshold = 1e-2;
  int max_iter = 50;
  int fixpoint_iter = 3;
  std::string exploration = "both";
  int iterates = 1;
  bool use_cov = false;
  bool trace = false;

  void attach(CLI::App* app) {
    app->add_option("--threshold", threshold, "Convergence threshold")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Maximal number of VEM iterations")->capture_default_str();
    app->add_option("--fixpoint-iter", fixpoint_iter, "Fixed-point rounds per VE step")->capture_default_str();
    app->add_option("--exploration", exploration, "forward, backward, both or none")->capture_default_str();
    app->add_option("--iterates", iterates, "Forward/backward rounds")->capture_default_str();
    app->add_flag("--use-cov", use_cov, "Let covariates enter the SBM");
    app->add_flag("--trace", trace, "Print iterations to stderr");
  }
  ControlOptions options(std::uint64_t seed, int threads) const {
    ControlOptions c;
    c.threshold = threshold;
    c.max_iter = max_iter;
    c.fixpoint_iter = fixpoint_iter;
    if (exploration == "both") c.exploration = Exploration::Both;
    else if (exploration == "forward") c.exploration = Exploration::Forward;
    else if (exploration == "backward") c.exploration = Exploration::Backward;
    else if (exploration == "none") c.exploration = Exploration::None;
    else throw InputError("unknown exploration '" + exploration + "'");
    c.iterates = iterates;
    c.use_cov = use_cov;
    c.trace = trace;
    c.seed = seed;
    c.threads = threads;
    c.validate();
    return c;
  }
};

struct GeneratorFlags {
  std::string params_path;
  int q = 0;
  std::string alpha;
  std::string pi;
  double pi_in = std::nan("");
  double pi_out = std::nan("");
  bool directed = false;

  void attach(CLI::App* app) {
    app->add_option("--params", params_path, "SBM parameters as JSON file");
    app->add_option("--q", q, "Number of blocks");
    app->add_option("--alpha", alpha, "Block proportions, comma separated");
    app->add_option("--pi", pi, "Connectivity matrix (JSON or rows separated by ';')");
    app->add_option("--pi-in", pi_in, "Within-block probability (planted partition)");
    app->add_option("--pi-out", pi_out, "Between-block probability (planted partition)");
    app->add_flag("--directed", directed, "Directed network");
  }

  SbmParams build() const {
    SbmParams p;
    if (!params_path.empty()) {
      auto in = open_input(params_path);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("invalid JSON in '") + params_path + "': " + e.what());
      }
      p = sbm_from_json(j);
      if (directed) p.directed = true;
      p.validate();
      return p;
    }
    p.directed = directed;
    if (!pi.empty()) {
      p.pi = parse_matrix_text(pi);
      p.Q = static_cast<int>(p.pi.rows());
    } else {
      if (q < 1 || std::isnan(pi_in) || std::isnan(pi_out))
        throw InputError("give --params, --pi, or --q with --pi-in and --pi-out");
      p.Q = q;
      p.pi = Eigen::MatrixXd::Constant(q, q, pi_out);
      p.pi.diagonal().setConstant(pi_in);
    }
    if (q > 0 && q != p.Q) throw InputError("--q disagrees with --pi");
    if (!alpha.empty()) {
      const auto a = parse_number_list(alpha);
      p.alpha = Eigen::Map<const Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
    } else {
      p.alpha = Eigen::VectorXd::Constant(p.Q, 1.0 / p.Q);
    }
    p.validate();
    return p;
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string read_text(const std::string& spec) {
  std::error_code ec;
  if (!spec.empty() && spec.front() != '[' && spec.front() != '{' && std::filesystem::is_regular_file(spec, ec)) {
    auto in = open_input(spec);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return spec;
}

CovariateSet load_covariates(const std::string& list) {
  if (list.empty()) return {};
  return read_covariates(split_list(list));
}

std::vector<int> labels_from(const std::string& path) {
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    auto in = open_input(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
      const nlohmann::json& fit =
          j.contains("models") ? j.at("models").at(static_cast<std::size_t>(std::find(j.at("blocks").begin(),
                                                                                       j.at("blocks").end(),
                                                                                       j.at("best")) -
                                                                             j.at("blocks").begin()))
                               : j;
      std::vector<int> z = fit.at("memberships").get<std::vector<int>>();
      for (int& v : z) --v;
      return z;
    } catch (const nlohmann::json::exception& e) {
      throw InputError("cannot read memberships from '" + path + "': " + e.what());
    }
  }
  auto in = open_input(path);
  return read_labels(in);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (n < 2) return std::nan("");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

}  // namespace

std::vector<int> parse_blocks(const std::string& text) {
  auto integer = [&](const std::string& t) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw InputError("bad block list '" + text + "'");
    return v;
  };
  std::vector<int> out;
  for (const auto& part : split_list(text)) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) {
      out.push_back(integer(part));
      continue;
    }
    const int lo = integer(part.substr(0, colon));
    const int hi = integer(part.substr(colon + 1));
    if (lo > hi) throw InputError("bad block range '" + part + "'");
    for (int q = lo; q <= hi; ++q) out.push_back(q);
  }
  return normalize_blocks(out);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic block models for partially observed networks", "sbm-miss"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads")->capture_default_str();
  std::function<void()> action;

  // generate
  auto* gen = app.add_subcommand("generate", "Draw a network from an SBM");
  GeneratorFlags gen_model;
  int gen_nodes = 0;
  std::string gen_out, gen_labels, gen_cov, gen_format = "dense-csv";
  gen_model.attach(gen);
  gen->add_option("--n", gen_nodes, "Number of nodes")->required();
  gen->add_option("--out,-o", gen_out, "Adjacency output")->required();
  gen->add_option("--labels-out", gen_labels, "Block labels output");
  gen->add_option("--covariates", gen_cov, "Covariate files for a covariate SBM");
  gen->add_option("--format", gen_format, "dense-csv or triplet")->capture_default_str();
  gen->callback([&] {
    action = [&] {
      const SbmParams params = gen_model.build();
      const CovariateSet cov = load_covariates(gen_cov);
      auto [adj, z] = sample_network(params, gen_nodes, cov.empty() ? nullptr : &cov, seed);
      save_adjacency(gen_out, adj, parse_format(gen_format));
      if (!gen_labels.empty()) {
        auto f = open_output(gen_labels);
        write_labels(f, z.labels);
      }
      out << "nodes " << adj.size() << ", edges " << adj.edge_count() << '\n';
    };
  });

  // observe
  auto* obs = app.add_subcommand("observe", "Sample a partial observation of a network");
  InputFlags obs_in;
  std::string obs_sampling, obs_params, obs_clusters, obs_cov, obs_out;
  double obs_intercept = 0.0;
  obs_in.attach(obs);
  obs->add_option("--sampling", obs_sampling, "Sampling design")->required();
  obs->add_option("--parameters", obs_params, "Design parameters (numbers, JSON or a file)")->required();
  obs->add_option("--intercept", obs_intercept, "Intercept of covar designs")->capture_default_str();
  obs->add_option("--clusters", obs_clusters, "Block labels for block designs");
  obs->add_option("--covariates", obs_cov, "Covariate files for covar designs");
  obs->add_option("--out,-o", obs_out, "Observed adjacency output")->required();
  obs->callback([&] {
    action = [&] {
      const PartialAdjacency adj = obs_in.load();
      const SamplingTag tag = parse_sampling_tag(obs_sampling);
      const auto psi = parse_number_list(read_text(obs_params));
      const SamplingDesign design = make_design(tag, psi, obs_intercept);
      std::optional<Partition> clusters;
      if (!obs_clusters.empty()) {
        auto in = open_input(obs_clusters);
        std::vector<int> z = read_labels(in);
        const int Q = *std::max_element(z.begin(), z.end()) + 1;
        clusters = Partition(std::move(z), Q);
      }
      const CovariateSet cov = load_covariates(obs_cov);
      const PartialAdjacency seen =
          observe_network(adj, design, clusters ? &*clusters : nullptr, cov.empty() ? nullptr : &cov, seed);
      save_adjacency(obs_out, seen, parse_format(obs_in.format));
      out << "observed " << seen.dyad_count() - seen.missing_count() << " of " << seen.dyad_count() << " dyads\n";
    };
  });

  // fit
  auto* fit = app.add_subcommand("fit", "Estimate SBMs over a range of block counts");
  InputFlags fit_in;
  ControlFlags fit_ctl;
  std::string fit_blocks = "1:10", fit_sampling, fit_cov, fit_out, fit_mon, fit_labels, fit_ref;
  fit_in.attach(fit);
  fit_ctl.attach(fit);
  fit->add_option("--blocks", fit_blocks, "Block counts, e.g. 1:18")->capture_default_str();
  fit->add_option("--sampling", fit_sampling, "Sampling design")->required();
  fit->add_option("--covariates", fit_cov, "Covariate files");
  fit->add_option("--out,-o", fit_out, "Fitted collection (JSON)");
  fit->add_option("--monitoring", fit_mon, "Monitoring CSV");
  fit->add_option("--labels-out", fit_labels, "Memberships of the best model");
  fit->add_option("--reference-out", fit_ref, "Reference labels read from GraphML");
  fit->callback([&] {
    action = [&] {
      std::optional<Partition> reference;
      PartialAdjacency adj = fit_in.load(&reference);
      auto net = ObservedNetwork::make(std::move(adj), load_covariates(fit_cov));
      const FitCollection c = estimate_miss_sbm(net, parse_blocks(fit_blocks), parse_sampling_tag(fit_sampling),
                                                fit_ctl.options(seed, threads));
      if (!fit_out.empty()) {
        auto f = open_output(fit_out);
        f << collection_to_json(c).dump(1) << '\n';
      }
      if (!fit_mon.empty()) {
        auto f = open_output(fit_mon);
        write_monitoring_csv(f, c);
      }
      if (!fit_labels.empty()) {
        auto f = open_output(fit_labels);
        write_labels(f, c.best().memberships());
      }
      if (!fit_ref.empty()) {
        if (!reference) throw InputError("--reference-out needs GraphML input with --label-attr");
        auto f = open_output(fit_ref);
        write_labels(f, reference->labels);
      }
      out << "Q,icl\n";
      for (std::size_t k = 0; k < c.models.size(); ++k) out << c.blocks[k] << ',' << format_real(c.models[k].icl) << '\n';
      out << "best Q " << c.best().Q << '\n';
    };
  });

  // impute
  auto* imp = app.add_subcommand("impute", "Impute the missing dyads from a fit");
  InputFlags imp_in;
  std::string imp_fit, imp_cov, imp_out;
  int imp_q = 0;
  imp_in.attach(imp);
  imp->add_option("--fit", imp_fit, "Collection written by fit")->required();
  imp->add_option("--q", imp_q, "Model to use (default: best ICL)");
  imp->add_option("--covariates", imp_cov, "Covariate files used by the fit");
  imp->add_option("--out,-o", imp_out, "Imputed matrix (CSV)")->required();
  imp->callback([&] {
    action = [&] {
      auto net = ObservedNetwork::make(imp_in.load(), load_covariates(imp_cov));
      auto in = open_input(imp_fit);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("invalid fit JSON: ") + e.what());
      }
      const FitCollection c = collection_from_json(j, net);
      const FitResult& chosen = imp_q > 0 ? c.at_q(imp_q) : c.best();
      auto f = open_output(imp_out);
      write_real_matrix(f, impute(chosen));
      out << "imputed " << net->missing.size() << " dyads with Q = " << chosen.Q << '\n';
    };
  });

  // eval-ari
  auto* ari_cmd = app.add_subcommand("eval-ari", "Adjusted Rand index of two labelings");
  std::string ari_a, ari_b;
  ari_cmd->add_option("--a", ari_a, "Labels file or fit JSON")->required();
  ari_cmd->add_option("--b", ari_b, "Labels file or fit JSON")->required();
  ari_cmd->callback([&] {
    action = [&] {
      const auto a = labels_from(ari_a);
      const auto b = labels_from(ari_b);
      out << format_real(ari(a, b)) << '\n';
    };
  });

  // eval-auc
  auto* auc_cmd = app.add_subcommand("eval-auc", "AUC of imputed values on the missing dyads");
  InputFlags auc_truth;
  std::string auc_observed, auc_imputed;
  auc_cmd->add_option("--truth", auc_truth.path, "Fully observed adjacency")->required();
  auc_truth.add_format(auc_cmd);
  auc_cmd->add_flag("--directed", auc_truth.directed, "Directed network");
  auc_cmd->add_option("--observed", auc_observed, "Partially observed adjacency")->required();
  auc_cmd->add_option("--imputed", auc_imputed, "Imputed matrix from impute")->required();
  auc_cmd->callback([&] {
    action = [&] {
      const PartialAdjacency truth = auc_truth.load();
      const PartialAdjacency seen = load_adjacency(auc_observed, auc_truth.options());
      auto in = open_input(auc_imputed);
      const Eigen::MatrixXd scores = read_real_matrix(in);
      if (truth.size() != seen.size() || scores.rows() != truth.size() || scores.cols() != truth.size())
        throw InputError("truth, observed and imputed networks differ in size");
      std::vector<int> labels;
      std::vector<double> s;
      for (const auto [i, j] : seen.missing_dyads()) {
        if (truth.at(i, j) == DyadValue::Missing) throw InputError("truth has missing dyads");
        labels.push_back(truth.at(i, j) == DyadValue::Present ? 1 : 0);
        s.push_back(scores(i, j));
      }
      if (labels.empty()) throw InputError("the observed network has no missing dyads");
      out << format_real(auc(labels, s)) << '\n';
    };
  });

  // sweep-auc
  auto* sweep = app.add_subcommand("sweep-auc", "Imputation AUC against the sampling rate");
  GeneratorFlags sweep_model;
  ControlFlags sweep_ctl;
  ExperimentSpec spec;
  std::string sweep_sampling = "block-node", sweep_out;
  sweep_model.attach(sweep);
  sweep_ctl.attach(sweep);
  sweep->add_option("--n", spec.n, "Number of nodes")->required();
  sweep->add_option("--sampling", sweep_sampling, "block-node, node or dyad")->capture_default_str();
  sweep->add_option("--psi-min", spec.psi_low, "Lower bound of the drawn sampling parameters")->capture_default_str();
  sweep->add_option("--psi-max", spec.psi_high, "Upper bound of the drawn sampling parameters")->capture_default_str();
  sweep->add_option("--replicates", spec.replicates, "Number of replicates")->capture_default_str();
  sweep->add_option("--fit-q", spec.fit_q, "Blocks of the fitted model (default: generator)");
  sweep->add_option("--out,-o", sweep_out, "Result CSV")->required();
  sweep->callback([&] {
    action = [&] {
      spec.generator = sweep_model.build();
      spec.tag = parse_sampling_tag(sweep_sampling);
      spec.control = sweep_ctl.options(seed, threads);
      spec.seed = seed;
      const auto rows = run_auc_sweep(spec);
      auto f = open_output(sweep_out);
      f << "replicate,rate,missing,auc,status\n";
      std::vector<double> x, y;
      double high_sum = 0.0;
      int high_count = 0;
      for (const auto& r : rows) {
        f << r.replicate << ',' << format_real(r.rate) << ',' << r.missing << ',' << format_real(r.auc) << ','
          << r.status << '\n';
        if (r.status != "ok") continue;
        x.push_back(r.rate);
        y.push_back(r.auc);
        if (r.rate >= 0.6) {
          high_sum += r.auc;
          ++high_count;
        }
      }
      out << "replicates " << rows.size() << ", usable " << x.size() << '\n';
      out << "slope " << format_real(least_squares_slope(x, y)) << '\n';
      out << "mean auc (rate >= 0.6) " << format_real(high_count ? high_sum / high_count : std::nan("")) << '\n';
    };
  });

  // compare-designs
  auto* cmp = app.add_subcommand("compare-designs", "ICL of several sampling designs on one network");
  InputFlags cmp_in;
  ControlFlags cmp_ctl;
  std::string cmp_designs = "dyad,node,double-standard,block-node,block-dyad,degree,snowball";
  std::string cmp_blocks = "1:10", cmp_cov, cmp_out;
  cmp_in.attach(cmp);
  cmp_ctl.attach(cmp);
  cmp->add_option("--designs", cmp_designs, "Comma separated designs")->capture_default_str();
  cmp->add_option("--blocks", cmp_blocks, "Block counts")->capture_default_str();
  cmp->add_option("--covariates", cmp_cov, "Covariate files");
  cmp->add_option("--out,-o", cmp_out, "Long-format ICL table (CSV)");
  cmp->callback([&] {
    action = [&] {
      auto net = ObservedNetwork::make(cmp_in.load(), load_covariates(cmp_cov));
      std::vector<SamplingTag> tags;
      for (const auto& t : split_list(cmp_designs)) tags.push_back(parse_sampling_tag(t));
      if (tags.empty()) throw InputError("no designs given");
      const auto result = compare_designs(net, tags, parse_blocks(cmp_blocks), cmp_ctl.options(seed, threads));
      std::ostringstream table;
      table << "design,Q,icl\n";
      for (const auto& r : result.rows) table << to_string(r.tag) << ',' << r.Q << ',' << format_real(r.icl) << '\n';
      if (!cmp_out.empty()) {
        auto f = open_output(cmp_out);
        f << table.str();
      } else {
        out << table.str();
      }
      for (const auto& [tag, message] : result.failures) err << to_string(tag) << " failed: " << message << '\n';
      if (const auto best = result.best()) out << "best design " << to_string(*best) << '\n';
      else throw InputError("every design failed");
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  try {
    if (threads < 1) throw InputError("--threads must be at least 1");
    if (action) action();
    return 0;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace missbm
