#pragma once

#include "tpflow/field.hpp"

#include <filesystem>
#include <string>
#include <variant>

namespace tpflow {

/// Write `contents` to `path` via a sibling temporary file and rename, so a
/// reader never observes a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// TPF1 binary grid format; see docs/tpf1_format.md.
std::string encode_tpf(const RealField& f);
std::string encode_tpf(const SpectralField& s);
std::variant<RealField, SpectralField> decode_tpf(const std::string& bytes);

void write_tpf(const std::filesystem::path& path, const RealField& f);
void write_tpf(const std::filesystem::path& path, const SpectralField& s);
std::variant<RealField, SpectralField> read_tpf(const std::filesystem::path& path);

}  // namespace tpflow
