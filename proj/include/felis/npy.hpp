#pragma once

#include <filesystem>
#include <string>

#include "felis/feature_matrix.hpp"

namespace felis::npy {

enum class DType { Float32, Float64 };

/// Reads a 2-D little-endian float32/float64 C-order NPY v1.0 array,
/// widening to double. Throws FormatError (with byte offset) for any
/// deviation: bad magic, other versions, big-endian or non-float dtype,
/// Fortran order, non-2-D shape, truncated data or non-finite values.
Matrix read(const std::filesystem::path& path);

/// Parses an in-memory NPY image; `source` is used in error messages.
Matrix parse(const std::string& bytes, const std::string& source = "<memory>");

/// Serializes `m` as NPY v1.0 with a 64-byte aligned header.
std::string serialize(const Matrix& m, DType dtype = DType::Float64);

void write(const std::filesystem::path& path, const Matrix& m, DType dtype = DType::Float64);

}  // namespace felis::npy
