#pragma once

// Deterministic CSV/text output and the artifact manifest.

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "mcqed/errors.hpp"

namespace mcqed::cli {

/// Shortest round-trip representation, '.' decimal regardless of locale.
inline std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(const std::vector<double>& values) {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values) cells.push_back(format_double(v));
        add_cells(std::move(cells));
    }

    void add_cells(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) {
            throw ValidationError("csv: row width does not match the header");
        }
        rows_.push_back(std::move(cells));
    }

    std::size_t rows() const { return rows_.size(); }

    std::string str() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header_);
        for (const auto& r : rows_) line(r);
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw NumericalError("sha256 digest failed");
    }
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

struct ManifestEntry {
    std::string file;
    std::size_t bytes = 0;
    std::string sha256;
};

/// Writes files under one directory and remembers each digest.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw ValidationError("cannot create output directory " + dir_.string());
    }

    const std::filesystem::path& directory() const { return dir_; }

    void write(const std::string& name, const std::string& content) {
        const auto path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << content;
        if (!out) throw ValidationError("write failed for " + path.string());
        entries_.push_back({name, content.size(), sha256_hex(content)});
    }

    void write(const std::string& name, const CsvTable& table) { write(name, table.str()); }

    const std::vector<ManifestEntry>& entries() const { return entries_; }

    /// "sha256  bytes  name" per file, then written as manifest.txt.
    std::string finish() {
        std::string m;
        for (const auto& e : entries_) {
            m += e.sha256 + "  " + std::to_string(e.bytes) + "  " + e.file + "\n";
        }
        const auto path = dir_ / "manifest.txt";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << m;
        return m;
    }

private:
    std::filesystem::path dir_;
    std::vector<ManifestEntry> entries_;
};

} // namespace mcqed::cli
