#include "missbm/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "missbm/errors.hpp"

namespace missbm {

namespace {

bool is_na(const std::string& t) { return t == "NA" || t == "na" || t == "NaN" || t == "nan"; }

double parse_real(const std::string& t, const std::string& where) {
  if (is_na(t)) return std::nan("");
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("cannot parse '" + t + "' as a number" + where);
  return v;
}

long parse_integer(const std::string& t, const std::string& where) {
  long v = 0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (ec != std::errc() || ptr != end) throw InputError("cannot parse '" + t + "' as an integer" + where);
  return v;
}

std::string at_line(std::size_t line) { return " (line " + std::to_string(line) + ")"; }

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::vector<std::string>> read_rows(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (blank(line) || line[0] == '#') continue;
    rows.push_back(split_fields(line));
  }
  return rows;
}

}  // namespace

AdjacencyFormat parse_format(const std::string& token) {
  if (token == "dense-csv") return AdjacencyFormat::DenseCsv;
  if (token == "triplet") return AdjacencyFormat::Triplet;
  if (token == "graphml") return AdjacencyFormat::GraphML;
  throw InputError("unknown format '" + token + "' (dense-csv, triplet, graphml)");
}

std::string format_real(double x) {
  if (std::isnan(x)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  if (ec != std::errc()) throw InputError("cannot format number");
  return std::string(buf, ptr);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  auto trimmed = [](std::string f) {
    std::erase(f, '"');
    const auto first = f.find_first_not_of(" \t\r");
    if (first == std::string::npos) return std::string();
    return f.substr(first, f.find_last_not_of(" \t\r") - first + 1);
  };
  if (line.find(',') != std::string::npos) {
    std::stringstream s(line);
    std::string field;
    while (std::getline(s, field, ',')) {
      field = trimmed(field);
      if (field.empty()) throw InputError("empty field in '" + line + "'");
      out.push_back(field);
    }
    if (line.back() == ',') throw InputError("empty field in '" + line + "'");
    return out;
  }
  std::stringstream s(line);
  std::string field;
  while (s >> field) {
    field = trimmed(field);
    if (!field.empty()) out.push_back(field);
  }
  return out;
}

PartialAdjacency read_dense_csv(std::istream& in, bool directed) {
  const auto rows = read_rows(in);
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw InputError("adjacency file is empty");
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != n)
      throw InputError("row " + std::to_string(i + 1) + " has " + std::to_string(row.size()) + " entries, expected " +
                       std::to_string(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string& t = row[static_cast<std::size_t>(j)];
      if (i == j) {
        if (!is_na(t) && parse_real(t, "") != 0.0)
          throw InputError("diagonal entry " + std::to_string(i + 1) + " must be NA or 0");
        m(i, j) = 0.0;
        continue;
      }
      m(i, j) = parse_real(t, " at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  }
  return PartialAdjacency::from_dense(m, directed);
}

void write_dense_csv(std::ostream& out, const PartialAdjacency& adj) {
  const int n = adj.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ',';
      if (i == j) {
        out << "NA";
        continue;
      }
      switch (adj.at(i, j)) {
        case DyadValue::Absent: out << '0'; break;
        case DyadValue::Present: out << '1'; break;
        case DyadValue::Missing: out << "NA"; break;
      }
    }
    out << '\n';
  }
}

PartialAdjacency read_triplets(std::istream& in, bool directed, bool default_missing, int nodes) {
  struct Entry {
    int i, j;
    DyadValue v;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::string text;
  std::size_t lineno = 0;
  int largest = 0;
  while (std::getline(in, text)) {
    ++lineno;
    if (blank(text) || text[0] == '#') continue;
    const auto f = split_fields(text);
    if (f.size() != 3) throw InputError("triplet lines need 3 fields" + at_line(lineno));
    const long i = parse_integer(f[0], at_line(lineno));
    const long j = parse_integer(f[1], at_line(lineno));
    if (i < 1 || j < 1) throw InputError("node indices are 1-based" + at_line(lineno));
    if (i == j) throw InputError("self-dyads are not allowed" + at_line(lineno));
    DyadValue v;
    if (is_na(f[2])) v = DyadValue::Missing;
    else if (f[2] == "0") v = DyadValue::Absent;
    else if (f[2] == "1") v = DyadValue::Present;
    else throw InputError("triplet value must be 0, 1 or NA" + at_line(lineno));
    entries.push_back({static_cast<int>(i - 1), static_cast<int>(j - 1), v, lineno});
    largest = std::max<int>(largest, static_cast<int>(std::max(i, j)));
  }
  const int n = nodes > 0 ? nodes : largest;
  if (largest > n) throw InputError("node index " + std::to_string(largest) + " exceeds --nodes " + std::to_string(n));
  if (n == 0) throw InputError("triplet file lists no dyads");
  PartialAdjacency adj(n, directed, default_missing ? DyadValue::Missing : DyadValue::Absent);
  PartialAdjacency marker(n, directed, DyadValue::Absent);
  for (const auto& e : entries) {
    if (marker.at(e.i, e.j) == DyadValue::Present) {
      if (adj.at(e.i, e.j) != e.v) throw InputError("conflicting values for a dyad" + at_line(e.line));
      continue;
    }
    marker.set(e.i, e.j, DyadValue::Present);
    adj.set(e.i, e.j, e.v);
  }
  return adj;
}

void write_triplets(std::ostream& out, const PartialAdjacency& adj) {
  for (const auto [i, j] : adj.dyads()) {
    out << i + 1 << ' ' << j + 1 << ' ';
    switch (adj.at(i, j)) {
      case DyadValue::Absent: out << "0\n"; break;
      case DyadValue::Present: out << "1\n"; break;
      case DyadValue::Missing: out << "NA\n"; break;
    }
  }
}

GraphMLData read_graphml(std::istream& in, const std::string& label_attr, bool drop_isolated) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw InputError(std::string("malformed GraphML: ") + e.what());
  }
  const auto root = tree.get_child_optional("graphml");
  if (!root) throw InputError("GraphML root element missing");

  std::string label_key;
  for (const auto& [name, child] : *root) {
    if (name != "key") continue;
    if (child.get<std::string>(pt::ptree::path_type("<xmlattr>/attr.name", '/'), "") == label_attr &&
        child.get<std::string>("<xmlattr>.for", "node") != "edge")
      label_key = child.get<std::string>("<xmlattr>.id", "");
  }
  if (!label_attr.empty() && label_key.empty()) throw InputError("GraphML has no node attribute '" + label_attr + "'");

  const auto graph = root->get_child_optional("graph");
  if (!graph) throw InputError("GraphML has no graph element");
  const bool directed = graph->get<std::string>("<xmlattr>.edgedefault", "undirected") == "directed";

  GraphMLData data;
  std::map<std::string, int> index;
  std::vector<std::string> values;
  for (const auto& [name, child] : *graph) {
    if (name != "node") continue;
    const std::string id = child.get<std::string>("<xmlattr>.id", "");
    if (id.empty() || index.count(id)) throw InputError("GraphML node ids must be unique and non-empty");
    index[id] = static_cast<int>(data.node_ids.size());
    data.node_ids.push_back(id);
    std::string value;
    for (const auto& [dname, d] : child)
      if (dname == "data" && d.get<std::string>("<xmlattr>.key", "") == label_key) value = d.data();
    if (!label_attr.empty() && value.empty()) throw InputError("node '" + id + "' lacks attribute '" + label_attr + "'");
    values.push_back(value);
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& [name, child] : *graph) {
    if (name != "edge") continue;
    const auto s = index.find(child.get<std::string>("<xmlattr>.source", ""));
    const auto t = index.find(child.get<std::string>("<xmlattr>.target", ""));
    if (s == index.end() || t == index.end()) throw InputError("GraphML edge refers to an unknown node");
    if (s->second != t->second) edges.emplace_back(s->second, t->second);
  }

  std::vector<int> keep_index(data.node_ids.size());
  std::vector<char> touched(data.node_ids.size(), 0);
  for (const auto& [a, b] : edges) touched[static_cast<std::size_t>(a)] = touched[static_cast<std::size_t>(b)] = 1;
  int n = 0;
  std::vector<std::string> ids;
  std::vector<std::string> kept_values;
  for (std::size_t k = 0; k < data.node_ids.size(); ++k) {
    if (drop_isolated && !touched[k]) {
      keep_index[k] = -1;
      continue;
    }
    keep_index[k] = n++;
    ids.push_back(data.node_ids[k]);
    kept_values.push_back(values[k]);
  }
  data.node_ids = std::move(ids);
  data.adjacency = PartialAdjacency(n, directed);
  for (const auto& [a, b] : edges)
    data.adjacency.set(keep_index[static_cast<std::size_t>(a)], keep_index[static_cast<std::size_t>(b)], DyadValue::Present);
  if (!label_attr.empty()) {
    std::map<std::string, int> codes;
    std::vector<int> labels;
    for (const auto& v : kept_values) {
      auto [it, fresh] = codes.emplace(v, static_cast<int>(data.label_values.size()));
      if (fresh) data.label_values.push_back(v);
      labels.push_back(it->second);
    }
    data.labels = Partition(std::move(labels), std::max<int>(1, static_cast<int>(data.label_values.size())));
  }
  return data;
}

Eigen::MatrixXd read_real_matrix(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw InputError("matrix file is empty");
  const std::size_t cols = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw InputError("ragged matrix at row " + std::to_string(i + 1));
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_real(rows[i][j], " at (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  }
  return m;
}

void write_real_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

std::vector<int> read_labels(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line) || line[0] == '#') continue;
    for (const auto& f : split_fields(line)) {
      const long v = parse_integer(f, at_line(lineno));
      if (v < 1) throw InputError("labels are 1-based" + at_line(lineno));
      labels.push_back(static_cast<int>(v - 1));
    }
  }
  if (labels.empty()) throw InputError("label file is empty");
  return labels;
}

void write_labels(std::ostream& out, const std::vector<int>& labels) {
  for (int z : labels) out << z + 1 << '\n';
}

CovariateSet read_covariates(const std::vector<std::string>& paths) {
  CovariateSet cov;
  bool nodal = false, dyadic = false;
  for (const auto& p : paths) {
    auto in = open_input(p);
    const Eigen::MatrixXd m = read_real_matrix(in);
    if (!m.allFinite()) throw InputError("covariate file '" + p + "' has missing values");
    if (m.cols() == 1) {
      nodal = true;
      cov.nodal.push_back(m.col(0));
    } else if (m.rows() == m.cols()) {
      dyadic = true;
      cov.dyadic.push_back(m);
    } else {
      throw InputError("covariate file '" + p + "' must be n x 1 or n x n");
    }
  }
  if (nodal && dyadic) throw InputError("covariates must be all nodal or all dyadic");
  cov.kind = nodal ? CovariateKind::Nodal : CovariateKind::Dyadic;
  return cov;
}

PartialAdjacency load_adjacency(const std::string& path, const LoadOptions& options, std::optional<Partition>* labels) {
  auto in = open_input(path);
  const bool graphml = options.format == AdjacencyFormat::GraphML ||
                       (path.size() >= 8 && path.compare(path.size() - 8, 8, ".graphml") == 0);
  if (graphml) {
    GraphMLData data = read_graphml(in, options.label_attr, options.drop_isolated);
    if (labels) *labels = data.labels;
    return std::move(data.adjacency);
  }
  if (options.format == AdjacencyFormat::Triplet)
    return read_triplets(in, options.directed, options.default_missing, options.nodes);
  return read_dense_csv(in, options.directed);
}

void save_adjacency(const std::string& path, const PartialAdjacency& adj, AdjacencyFormat format) {
  auto out = open_output(path);
  if (format == AdjacencyFormat::Triplet) write_triplets(out, adj);
  else if (format == AdjacencyFormat::DenseCsv) write_dense_csv(out, adj);
  else throw InputError("GraphML output is not supported");
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  return out;
}

}  // namespace missbm
