#pragma once

#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "missbm/network.hpp"

namespace missbm {

enum class AdjacencyFormat { DenseCsv, Triplet, GraphML };

AdjacencyFormat parse_format(const std::string& token);

/// Shortest round-trip text for a double with 17 significant digits; NaN is
/// written as NA.
std::string format_real(double x);

/// Comma or whitespace separated tokens of one line.
std::vector<std::string> split_fields(const std::string& line);

/// n x n grid of 0, 1 and NA. The diagonal must be NA or 0.
PartialAdjacency read_dense_csv(std::istream& in, bool directed);
void write_dense_csv(std::ostream& out, const PartialAdjacency& adj);

/// Lines `i j v`, 1-based, v in {0, 1, NA}. Unlisted dyads are absent, or
/// missing with `default_missing`. `nodes` = 0 infers n from the largest index.
PartialAdjacency read_triplets(std::istream& in, bool directed, bool default_missing, int nodes = 0);
/// Every dyad once, in canonical order.
void write_triplets(std::ostream& out, const PartialAdjacency& adj);

struct GraphMLData {
  PartialAdjacency adjacency;
  std::vector<std::string> node_ids;
  /// Reference labels (0-based) from the requested node attribute, numbered in
  /// order of first appearance, and the attribute values in that order.
  std::optional<Partition> labels;
  std::vector<std::string> label_values;
};

GraphMLData read_graphml(std::istream& in, const std::string& label_attr, bool drop_isolated);

/// Real matrix with NA for NaN. Reading accepts NA as NaN.
Eigen::MatrixXd read_real_matrix(std::istream& in);
void write_real_matrix(std::ostream& out, const Eigen::MatrixXd& m);

/// One 1-based label per line.
std::vector<int> read_labels(std::istream& in);
void write_labels(std::ostream& out, const std::vector<int>& labels);

/// Loads one covariate per file: n x 1 is nodal, n x n dyadic. All files must
/// be of the same kind.
CovariateSet read_covariates(const std::vector<std::string>& paths);

struct LoadOptions {
  AdjacencyFormat format = AdjacencyFormat::DenseCsv;
  bool directed = false;
  bool default_missing = false;
  int nodes = 0;
  std::string label_attr;
  bool drop_isolated = false;
};

/// Adjacency from a file; `.graphml` files are read as GraphML whatever the
/// requested format. Reference labels are returned when a GraphML label
/// attribute is requested.
PartialAdjacency load_adjacency(const std::string& path, const LoadOptions& options,
                                std::optional<Partition>* labels = nullptr);
void save_adjacency(const std::string& path, const PartialAdjacency& adj, AdjacencyFormat format);

std::ifstream open_input(const std::string& path);
std::ofstream open_output(const std::string& path);

}  // namespace missbm
