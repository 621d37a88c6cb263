#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "gscatter/diagnostics.hpp"
#include "gscatter/estimator.hpp"
#include "gscatter/grassmann.hpp"

namespace gscatter::io {

/// Row-major CSV, one matrix row per line. Blank lines and lines starting
/// with '#' are skipped. Throws IoError on unreadable or ragged input.
Matrix read_matrix_csv(const std::filesystem::path& path);
Matrix parse_matrix_csv(const std::string& text);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Arrays of arrays, row by row.
nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Reads a scatter matrix (.csv or .json) and validates symmetry and positive
/// definiteness; the determinant is rescaled to 1.
ScatterMatrix read_scatter(const std::filesystem::path& path);

/// Reads an m×r basis matrix from CSV.
SubspacePoint read_subspace(const std::filesystem::path& path);

/// Dataset manifest: {"m": m, "r": r, "points": [path | matrix, ...],
/// "weights": [...]?}. Relative paths are resolved against the manifest.
EmpiricalMeasure read_dataset(const std::filesystem::path& manifest);
EmpiricalMeasure dataset_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json dataset_to_json(const EmpiricalMeasure& meas);

nlohmann::json to_json(const ExistenceReport& report);
nlohmann::json to_json(const VelocityFlag& flag);

/// Summary of a solver run (the trace goes to CSV separately).
nlohmann::json to_json(const GEResult& result);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gscatter::io
