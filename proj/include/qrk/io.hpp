// Copyright 2026 The qrkernel Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrk::io {

/// Shortest round-trip representation ("%.17g"; "nan", "inf", "-inf").
std::string fmt(double v);

/// Rectangular numeric table with named columns.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const;
};

/// Same layout with the cells kept as text.
struct TextTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    std::size_t column(const std::string& name) const;
};

/// Writes "# <note>" (if non-empty), a header row and the rows.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows, const std::string& note = "");
/// Reads a numeric CSV, skipping '#' lines. Throws DataError on malformed input.
Table read_csv(const std::filesystem::path& path);
/// Reads any CSV written by write_csv, skipping '#' lines.
TextTable read_csv_text(const std::filesystem::path& path);

/// Cache key and payload of a feature matrix.
struct FeatureCache {
    std::uint64_t key = 0;
    Eigen::MatrixXd features;
};

void write_feature_cache(const std::filesystem::path& path, const FeatureCache& cache);

enum class CacheStatus { Missing, Stale, Hit };

/// Missing when absent, Stale when the stored key differs from `key`, Hit
/// otherwise (features filled). Throws DataError when the payload checksum
/// does not match or the file is truncated.
CacheStatus read_feature_cache(const std::filesystem::path& path, std::uint64_t key, Eigen::MatrixXd& features);

/// Writes via a temporary file and rename.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace qrk::io
