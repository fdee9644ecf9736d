#pragma once

// CSV and file plumbing for the command-line tools.
//
// index.csv: header `x1,...,xK,t,y`; target.csv: header `x1,...,xK`. UTF-8,
// comma-delimited, decimal point, no thousands separators. Numbers are
// written in the shortest form that reads back to the identical double.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mimstd/data.hpp"

namespace mimstd::io {

std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

std::string index_csv(const IndexStudyData& data);
std::string target_csv(const TargetCovariates& target);

/// Throws SchemaError naming the source, line and column on malformed input.
IndexStudyData parse_index_csv(std::string_view text, std::string_view source = "index.csv");

/// Accepts `x1..xK` optionally followed by `t,y`; the trailing columns are
/// ignored, so an index file can serve as its own target.
TargetCovariates parse_target_csv(std::string_view text, std::string_view source = "target.csv");

IndexStudyData read_index_csv(const std::filesystem::path& path);
TargetCovariates read_target_csv(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for config hashes in run manifests.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace mimstd::io
