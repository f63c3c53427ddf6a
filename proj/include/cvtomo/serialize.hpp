#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cvtomo/assemble.hpp"
#include "cvtomo/povm.hpp"
#include "cvtomo/solver.hpp"

namespace cvtomo {

// Complex matrices are stored as base64 of little-endian doubles,
// row-major, re/im interleaved. Building the operators dominates runtime,
// so PovmSet/DesignMatrix caching pays for itself quickly.

std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json settings_to_json(const PovmSettings& settings);
PovmSettings settings_from_json(const nlohmann::json& j, Scheme scheme);

nlohmann::json povm_to_json(const PovmSet& povms);
PovmSet povm_from_json(const nlohmann::json& j);

nlohmann::json design_matrix_to_json(const DesignMatrix& a);
DesignMatrix design_matrix_from_json(const nlohmann::json& j);

/// Result JSON: dim, row-major re/im entry arrays, objective, residual,
/// iterations, converged, timing fields.
nlohmann::json result_to_json(const ReconstructionResult& r);
ReconstructionResult result_from_json(const nlohmann::json& j);

void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

/// One value per line, outcome order.
void write_values_csv(const std::string& path, const RealVector& values);
RealVector read_values_csv(const std::string& path);

/// Row-major 2-D grid CSV: one line per grid row (x index), comma-separated
/// columns (p index), matching the PhaseSpaceGrid outcome order.
void write_grid_csv(const std::string& path, const RealVector& values,
                    int rows, int cols);
RealVector read_grid_csv(const std::string& path, int* rows_out = nullptr,
                         int* cols_out = nullptr);

void write_counts_csv(const std::string& path, const std::vector<long>& counts);
std::vector<long> read_counts_csv(const std::string& path);

}  // namespace cvtomo
