#include "gscatter/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gscatter/errors.hpp"

namespace gscatter::io {

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw IoError("line " + std::to_string(line) + ": cannot parse '" + t + "' as a number");
  }
  return value;
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

Matrix parse_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<double> row;
    std::stringstream fields(t);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(parse_number(field, lineno));
    if (t.back() == ',') throw IoError("line " + std::to_string(lineno) + ": trailing comma");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                    " fields, found " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

Matrix read_matrix_csv(const fs::path& path) {
  try {
    return parse_matrix_csv(slurp(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty()) {
    throw IoError("matrix must be a non-empty array of arrays");
  }
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw IoError("matrix rows have different lengths");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw IoError("matrix entries must be numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

ScatterMatrix read_scatter(const fs::path& path) {
  const Matrix m = path.extension() == ".json" ? matrix_from_json(read_json(path)) : read_matrix_csv(path);
  if (m.rows() != m.cols()) throw IoError(path.string() + ": scatter matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw IoError(path.string() + ": scatter matrix is not symmetric");
  }
  try {
    return ScatterMatrix::normalized(m);
  } catch (const DomainError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

SubspacePoint read_subspace(const fs::path& path) {
  const Matrix b = read_matrix_csv(path);
  try {
    return SubspacePoint::from_basis(b);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

EmpiricalMeasure dataset_from_json(const nlohmann::json& j, const fs::path& base_dir) {
  try {
    if (!j.is_object()) throw IoError("dataset manifest must be a JSON object");
    const auto m = j.at("m").get<Eigen::Index>();
    const auto r = j.at("r").get<Eigen::Index>();
    if (m < 2 || r < 1 || r >= m) throw IoError("manifest needs m >= 2 and 0 < r < m");
    const auto& pts = j.at("points");
    if (!pts.is_array() || pts.empty()) throw IoError("manifest 'points' must be a non-empty array");
    std::vector<SubspacePoint> points;
    for (const auto& p : pts) {
      Matrix b;
      if (p.is_string()) {
        b = read_matrix_csv(base_dir / p.get<std::string>());
      } else {
        b = matrix_from_json(p);
      }
      if (b.rows() != m || b.cols() != r) {
        throw IoError("point has shape " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                      ", expected " + std::to_string(m) + "x" + std::to_string(r));
      }
      try {
        points.push_back(SubspacePoint::from_basis(b));
      } catch (const DomainError& e) {
        throw IoError(std::string("point ") + std::to_string(points.size()) + ": " + e.what());
      }
    }
    if (j.contains("weights")) {
      return EmpiricalMeasure::weighted(std::move(points), j.at("weights").get<std::vector<double>>());
    }
    return EmpiricalMeasure::uniform(std::move(points));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  } catch (const UsageError& e) {
    throw IoError(std::string("invalid dataset: ") + e.what());
  }
}

EmpiricalMeasure read_dataset(const fs::path& manifest) {
  try {
    return dataset_from_json(read_json(manifest), manifest.parent_path());
  } catch (const IoError& e) {
    throw IoError(manifest.string() + ": " + e.what());
  }
}

nlohmann::json dataset_to_json(const EmpiricalMeasure& meas) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : meas.points()) pts.push_back(matrix_to_json(p.basis()));
  nlohmann::json j{{"m", meas.ambient()}, {"r", meas.dim()}, {"points", std::move(pts)}};
  if (!meas.is_uniform()) j["weights"] = meas.weights();
  return j;
}

nlohmann::json to_json(const VelocityFlag& flag) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : flag.steps) {
    steps.push_back({{"alpha", s.alpha}, {"dim", s.subspace.dim()}, {"basis", matrix_to_json(s.subspace.orthonormal())}});
  }
  return steps;
}

nlohmann::json to_json(const ExistenceReport& report) {
  auto candidate = [](const SubspaceCandidate& c) {
    return nlohmann::json{{"dim", c.subspace.dim()},
                          {"provenance", to_string(c.provenance)},
                          {"basis", matrix_to_json(c.subspace.orthonormal())}};
  };
  nlohmann::json j{{"verdict", to_string(report.verdict)},
                   {"scanned", report.scanned},
                   {"min_i", report.min_i},
                   {"truncated", report.truncated},
                   {"complement_ok", report.complement_ok}};
  if (report.witness) {
    j["witness"] = candidate(*report.witness);
    j["witness"]["i_value"] = report.witness_value;
  }
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto& z : report.zeros) zeros.push_back(candidate(z));
  j["zeros"] = std::move(zeros);
  return j;
}

nlohmann::json to_json(const GEResult& result) {
  return nlohmann::json{{"status", to_string(result.status)},
                        {"residual", result.residual},
                        {"iterations", result.iterations},
                        {"estimate", matrix_to_json(result.estimate.matrix())},
                        {"flag", to_json(result.flag)}};
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out = open_out(path);
  out << "iteration,residual,distance,loglik\n";
  for (const auto& row : trace) {
    out << row.iteration << ',' << row.residual << ',' << row.distance << ',';
    if (!std::isnan(row.loglik)) out << row.loglik;
    out << '\n';
  }
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out = open_out(path);
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace gscatter::io
