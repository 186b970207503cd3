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

#include "qrk/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qrk/errors.hpp"
#include "qrk/hash.hpp"

namespace qrk::io {
namespace {

constexpr char kMagic[8] = {'Q', 'R', 'K', 'F', 'E', 'A', 'T', '1'};

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_cell(const std::string& s, const std::filesystem::path& path) {
    if (s == "nan") return std::nan("");
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "true") return 1.0;
    if (s == "false") return 0.0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size()) throw DataError("non-numeric cell '" + s + "' in " + path.string());
    return v;
}

}  // namespace

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::size_t find_column(const std::vector<std::string>& columns, const std::string& name) {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw DataError("missing column '" + name + "'");
}

}  // namespace

std::size_t Table::column(const std::string& name) const { return find_column(columns, name); }

std::size_t TextTable::column(const std::string& name) const { return find_column(columns, name); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw DataError("cannot write " + path.string());
        os << text;
        if (!os) throw DataError("write failed for " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows, const std::string& note) {
    std::string out;
    if (!note.empty()) out += "# " + note + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::invalid_argument("CSV row width does not match the header");
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += '\n';
    }
    write_text(path, out);
}

TextTable read_csv_text(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot read " + path.string());
    TextTable t;
    std::string line;
    bool header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto cells = split_line(line);
        if (!header) {
            t.columns = std::move(cells);
            header = true;
            continue;
        }
        if (cells.size() != t.columns.size()) throw DataError("ragged row in " + path.string());
        t.rows.push_back(std::move(cells));
    }
    if (!header) throw DataError("empty CSV " + path.string());
    return t;
}

Table read_csv(const std::filesystem::path& path) {
    TextTable text = read_csv_text(path);
    Table t;
    t.columns = std::move(text.columns);
    for (const auto& cells : text.rows) {
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_cell(c, path));
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_feature_cache(const std::filesystem::path& path, const FeatureCache& cache) {
    const std::int64_t rows = cache.features.rows(), cols = cache.features.cols();
    const std::uint64_t checksum =
        Fnv1a().doubles({cache.features.data(), static_cast<std::size_t>(cache.features.size())}).digest();
    std::string buf(kMagic, sizeof kMagic);
    auto put = [&buf](const auto& v) { buf.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(cache.key);
    put(rows);
    put(cols);
    put(checksum);
    buf.append(reinterpret_cast<const char*>(cache.features.data()),
               static_cast<std::size_t>(cache.features.size()) * sizeof(double));
    write_text(path, buf);
}

CacheStatus read_feature_cache(const std::filesystem::path& path, std::uint64_t key, Eigen::MatrixXd& features) {
    if (!std::filesystem::exists(path)) return CacheStatus::Missing;
    const std::string buf = read_text(path);
    const std::size_t head = sizeof kMagic + 4 * sizeof(std::uint64_t);
    if (buf.size() < head || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
        throw DataError("feature cache " + path.string() + " is corrupt (bad header)");
    std::uint64_t stored_key = 0, checksum = 0;
    std::int64_t rows = 0, cols = 0;
    std::size_t off = sizeof kMagic;
    auto get = [&](auto& v) {
        std::memcpy(&v, buf.data() + off, sizeof v);
        off += sizeof v;
    };
    get(stored_key);
    get(rows);
    get(cols);
    get(checksum);
    if (rows < 0 || cols < 0 || buf.size() != head + static_cast<std::size_t>(rows * cols) * sizeof(double))
        throw DataError("feature cache " + path.string() + " is corrupt (size mismatch)");
    if (stored_key != key) return CacheStatus::Stale;
    Eigen::MatrixXd m(rows, cols);
    std::memcpy(m.data(), buf.data() + off, static_cast<std::size_t>(rows * cols) * sizeof(double));
    if (Fnv1a().doubles({m.data(), static_cast<std::size_t>(m.size())}).digest() != checksum)
        throw DataError("feature cache " + path.string() + " is corrupt (checksum mismatch)");
    features = std::move(m);
    return CacheStatus::Hit;
}

}  // namespace qrk::io
