#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "twinbeam/types.hpp"

namespace twinbeam {

/// On-disk dataset format:
///   # twinbeam-dataset v1; kind=<k>; seed=<s>; n=<n>
///   <one-line JSON metadata>
///   pulse_id,s1,s2
///   <n CSV rows, s-values with 17 significant digits>
///   # sha256=<hex of all preceding bytes>
inline constexpr const char* kDatasetMagic = "# twinbeam-dataset";
inline constexpr int kDatasetVersion = 1;

std::string serialize_dataset(const Dataset& ds);
Dataset parse_dataset(std::string_view text);

/// Atomic save (write-temp-then-rename) / checked load.
void save_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);

/// Writes content to a temp file in the target directory, then renames.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

/// Formats a double with 17 significant digits (exact round trip).
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

}  // namespace twinbeam
