#pragma once

#include <filesystem>
#include <string>

#include "gpemu/gpmodel.hpp"
#include "gpemu/svdgp.hpp"

namespace gpemu {

inline constexpr int kModelSchemaVersion = 1;

/// JSON document holding every stored field of the model. Doubles are
/// written with round-trip precision; non-finite values as "inf", "-inf" or
/// "nan". The factor and weights are rebuilt on load.
std::string model_to_json(const GpModel& model);
/// Throws CorruptFile on unparsable or incomplete documents and
/// SchemaVersionMismatch when schema_version differs.
GpModel model_from_json(const std::string& text);

void save_model(const GpModel& model, const std::filesystem::path& path);
GpModel load_model(const std::filesystem::path& path);

/// The gp schema extended with basis, spectrum and coefficient-model blocks.
std::string svdgp_to_json(const SvdGpModel& model);
SvdGpModel svdgp_from_json(const std::string& text);

void save_svdgp(const SvdGpModel& model, const std::filesystem::path& path);
SvdGpModel load_svdgp(const std::filesystem::path& path);

}  // namespace gpemu
