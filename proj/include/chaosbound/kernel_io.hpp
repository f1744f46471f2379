#pragma once

// JSON form of vector kernels:
// {"order", "truncation", "terms": [{"coeffs": [[i_1, ..., i_p, value], ...],
//                                    "path": {"T", "d", "values"}}]}
// Indices are 1-based; path values are row-major over grid nodes.

#include <filesystem>

#include <json.hpp>

#include "chaosbound/kernels.hpp"

namespace chaosbound {

nlohmann::json path_to_json(const PathVector& path);
PathVector path_from_json(const nlohmann::json& j);

nlohmann::json kernel_to_json(const VectorKernel& f);
VectorKernel kernel_from_json(const nlohmann::json& j);

void write_kernel(const VectorKernel& f, const std::filesystem::path& file);
VectorKernel read_kernel(const std::filesystem::path& file);

// Restores the compact symmetric storage when a general kernel happens to be
// exactly symmetric; otherwise returns it unchanged.
ScalarKernel canonical_form(const ScalarKernel& f);

}  // namespace chaosbound
