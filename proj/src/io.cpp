#include "unravel/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace unravel {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw IoError(path + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw IoError(path + ": expected an integer");
  return j.get<int>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& path, Eigen::Index expect = -1) {
  if (!j.is_array()) throw IoError(path + ": expected an array");
  if (expect >= 0 && static_cast<Eigen::Index>(j.size()) != expect)
    throw IoError(path + ": expected " + std::to_string(expect) + " entries, got " +
                  std::to_string(j.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = get_number(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
  return v;
}

Eigen::MatrixXd get_matrix(const json& j, const std::string& path, Eigen::Index rows,
                           Eigen::Index cols) {
  if (!j.is_array()) throw IoError(path + ": expected an array of rows");
  if (rows >= 0 && static_cast<Eigen::Index>(j.size()) != rows)
    throw IoError(path + ": expected " + std::to_string(rows) + " rows, got " +
                  std::to_string(j.size()));
  const Eigen::Index r = static_cast<Eigen::Index>(j.size());
  if (r == 0) throw IoError(path + ": empty matrix");
  Eigen::Index c = cols;
  if (c < 0) {
    if (!j[0].is_array()) throw IoError(path + "[0]: expected an array");
    c = static_cast<Eigen::Index>(j[0].size());
  }
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    m.row(i) = get_vector(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]", c)
                   .transpose();
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

const json& require_field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw IoError(path + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw IoError(path + ": missing field '" + key + "'");
  return *it;
}

}  // namespace

GaussianMixture read_mixture(const std::string& path) {
  const json doc = read_json_file(path);
  GaussianMixture mix;
  mix.k = get_int(require_field(doc, "k", path), "k");
  mix.n = get_int(require_field(doc, "n", path), "n");
  if (mix.k < 1) throw IoError("k: must be >= 1");
  if (mix.n < 1) throw IoError("n: must be >= 1");

  const json& jw = require_field(doc, "weights", path);
  const Eigen::VectorXd w = get_vector(jw, "weights", mix.k);
  mix.weights.assign(w.data(), w.data() + w.size());

  const json& jm = require_field(doc, "means", path);
  if (!jm.is_array() || static_cast<int>(jm.size()) != mix.k)
    throw IoError("means: expected " + std::to_string(mix.k) + " entries");
  const json& jc = require_field(doc, "covariances", path);
  if (!jc.is_array() || static_cast<int>(jc.size()) != mix.k)
    throw IoError("covariances: expected " + std::to_string(mix.k) + " entries");
  for (int i = 0; i < mix.k; ++i) {
    mix.means.push_back(get_vector(jm[static_cast<std::size_t>(i)],
                                   "means[" + std::to_string(i) + "]", mix.n));
    mix.covariances.push_back(get_matrix(jc[static_cast<std::size_t>(i)],
                                         "covariances[" + std::to_string(i) + "]", mix.n, mix.n));
  }
  try {
    mix.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(e.what());
  }
  return mix;
}

void write_mixture(const std::string& path, const GaussianMixture& mix) {
  json doc;
  doc["k"] = mix.k;
  doc["n"] = mix.n;
  doc["weights"] = mix.weights;
  json means = json::array(), covs = json::array();
  for (int i = 0; i < mix.k; ++i) {
    means.push_back(vector_json(mix.means[static_cast<std::size_t>(i)]));
    covs.push_back(matrix_json(mix.covariances[static_cast<std::size_t>(i)]));
  }
  doc["means"] = means;
  doc["covariances"] = covs;
  write_text_file(path, doc.dump(2) + "\n");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

PointsFile read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty()) throw IoError(path + ": empty header");

  bool has_labels = header.back() == "label";
  const std::size_t n = header.size() - (has_labels ? 1 : 0);
  if (n == 0) throw IoError(path + ": no coordinate columns");
  for (std::size_t j = 0; j < n; ++j) {
    const std::string expected = "x" + std::to_string(j);
    if (header[j] != expected)
      throw IoError(path + ": header: expected column '" + expected + "', got '" + header[j] +
                    "'");
  }

  std::vector<double> coords;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw IoError(path + ": row " + std::to_string(rows + 1) + ": expected " +
                    std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    for (std::size_t j = 0; j < n; ++j) {
      const char* text = cells[j].c_str();
      char* end = nullptr;
      const double v = std::strtod(text, &end);
      if (end == text || *end != '\0')
        throw IoError(path + ": row " + std::to_string(rows + 1) + ", column " +
                      std::to_string(j) + ": not a number: '" + cells[j] + "'");
      coords.push_back(v);
    }
    if (has_labels) {
      const char* text = cells[n].c_str();
      char* end = nullptr;
      const long v = std::strtol(text, &end, 10);
      if (end == text || *end != '\0')
        throw IoError(path + ": row " + std::to_string(rows + 1) + ": label not an integer: '" +
                      cells[n] + "'");
      labels.push_back(static_cast<int>(v));
    }
    ++rows;
  }
  if (rows == 0) throw IoError(path + ": no data rows");

  PointsFile file;
  file.points.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j)
      file.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          coords[i * n + j];
  if (has_labels) file.labels = std::move(labels);
  return file;
}

void write_points_csv(const std::string& path, const Eigen::MatrixXd& points,
                      const std::vector<int>* labels) {
  if (labels && static_cast<Eigen::Index>(labels->size()) != points.rows())
    throw std::invalid_argument("write_points_csv: labels/points length mismatch");
  std::ostringstream out;
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (j) out << ',';
    out << 'x' << j;
  }
  if (labels) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      if (j) out << ',';
      out << format_double(points(i, j));
    }
    if (labels) out << ',' << (*labels)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

json node_json(const PartitionNode& node) {
  json j;
  if (node.is_leaf()) {
    j["leaf"] = node.leaf_id;
    if (node.witness.size() > 0) j["witness"] = vector_json(node.witness);
    return j;
  }
  j["whiten"] = {{"linear", matrix_json(node.whiten.linear)},
                 {"offset", vector_json(node.whiten.offset)}};
  j["h"] = vector_json(node.h);
  j["t"] = node.t;
  j["method"] = node.choice.method == SeparatorMethod::MeanShift ? "mean_shift" : "spectral";
  j["mean_shift_norm"] = node.choice.mean_shift_norm;
  j["threshold"] = node.choice.threshold;
  j["left"] = node_json(*node.left);
  j["right"] = node_json(*node.right);
  return j;
}

std::unique_ptr<PartitionNode> parse_node(const json& j, const std::string& path,
                                          std::vector<int>& leaf_ids) {
  if (!j.is_object()) throw IoError(path + ": expected an object");
  auto node = std::make_unique<PartitionNode>();
  if (j.contains("leaf")) {
    node->leaf_id = get_int(j["leaf"], path + ".leaf");
    if (node->leaf_id < 0) throw IoError(path + ".leaf: negative id");
    if (j.contains("witness")) node->witness = get_vector(j["witness"], path + ".witness");
    leaf_ids.push_back(node->leaf_id);
    return node;
  }
  const json& w = require_field(j, "whiten", path);
  node->whiten.linear = get_matrix(require_field(w, "linear", path + ".whiten"),
                                   path + ".whiten.linear", -1, -1);
  if (node->whiten.linear.rows() != node->whiten.linear.cols())
    throw IoError(path + ".whiten.linear: not square");
  node->whiten.offset = get_vector(require_field(w, "offset", path + ".whiten"),
                                   path + ".whiten.offset", node->whiten.linear.rows());
  node->h = get_vector(require_field(j, "h", path), path + ".h", node->whiten.linear.rows());
  node->t = get_number(require_field(j, "t", path), path + ".t");
  node->choice.h = node->h;
  node->choice.method = SeparatorMethod::Spectral;
  if (j.contains("method")) {
    const std::string method = j["method"].get<std::string>();
    if (method == "mean_shift")
      node->choice.method = SeparatorMethod::MeanShift;
    else if (method == "spectral")
      node->choice.method = SeparatorMethod::Spectral;
    else
      throw IoError(path + ".method: unknown method '" + method + "'");
  }
  if (j.contains("mean_shift_norm"))
    node->choice.mean_shift_norm = get_number(j["mean_shift_norm"], path + ".mean_shift_norm");
  if (j.contains("threshold"))
    node->choice.threshold = get_number(j["threshold"], path + ".threshold");
  node->left = parse_node(require_field(j, "left", path), path + ".left", leaf_ids);
  node->right = parse_node(require_field(j, "right", path), path + ".right", leaf_ids);
  return node;
}

int infer_dimension(const PartitionNode& node) {
  if (!node.is_leaf()) return static_cast<int>(node.h.size());
  return static_cast<int>(node.witness.size());
}

}  // namespace

PolyhedralPartition read_partition(const std::string& path) {
  const json doc = read_json_file(path);
  PolyhedralPartition partition;
  std::vector<int> leaf_ids;
  partition.root = parse_node(doc, "tree", leaf_ids);
  partition.leaves = static_cast<int>(leaf_ids.size());

  std::vector<char> seen(leaf_ids.size(), 0);
  for (const int id : leaf_ids) {
    if (id >= partition.leaves || seen[static_cast<std::size_t>(id)])
      throw IoError("leaf ids not dense in [0, " + std::to_string(partition.leaves) + ")");
    seen[static_cast<std::size_t>(id)] = 1;
  }

  partition.n = infer_dimension(*partition.root);
  if (partition.n < 1)
    throw IoError("cannot infer dimension: single leaf without a witness point");
  return partition;
}

void write_partition(const std::string& path, const PolyhedralPartition& partition) {
  if (!partition.root) throw std::invalid_argument("write_partition: empty partition");
  write_text_file(path, node_json(*partition.root).dump(2) + "\n");
}

void write_overlap_report(const std::string& path, const OverlapReport& report) {
  json doc;
  doc["phi"] = report.phi;
  doc["fisher_basis"] = matrix_json(report.fisher_basis.columns);
  doc["sigma_bar_eigenvalues"] = vector_json(report.sigma_bar_eigenvalues);
  write_text_file(path, doc.dump(2) + "\n");
}

void write_error_report(const std::string& path, const ErrorReport& report) {
  json doc;
  doc["error"] = report.error;
  doc["leaves"] = report.leaves;
  doc["matching"] = report.matching;
  doc["confusion"] = matrix_json(report.confusion);
  write_text_file(path, doc.dump(2) + "\n");
}

void write_trial_csv(const std::string& path, const std::vector<TrialRow>& rows) {
  std::ostringstream out;
  out << "trial,arm,error,leaves,mean_shift_nodes,spectral_nodes\n";
  for (const TrialRow& row : rows) {
    out << row.trial << ',' << row.arm << ',' << format_double(row.error) << ',' << row.leaves
        << ',' << row.mean_shift_nodes << ',' << row.spectral_nodes << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace unravel
