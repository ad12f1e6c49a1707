#include "weightguard/report.hpp"

#include "weightguard/common.hpp"
#include "weightguard/rng.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace wg {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    check(ec == std::errc(), "fmt_double: conversion failed");
    return std::string(buf, ptr);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    check(!in.bad(), "error reading file: " + path);
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        check(out.good(), "cannot open file for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        check(out.good(), "error writing file: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    check(!ec, "cannot rename " + tmp + " to " + path + ": " + ec.message());
}

CsvReport::CsvReport(std::vector<std::string> columns, uint64_t cfg_hash)
        : columns_(std::move(columns)), config_hash_(cfg_hash) {}

void CsvReport::add_row(std::vector<std::string> cells) {
    check(cells.size() == columns_.size(),
          "CsvReport: row width does not match columns");
    rows_.push_back(std::move(cells));
}

std::string CsvReport::render() const {
    std::ostringstream out;
    out << "# weightguard " << WEIGHTGUARD_VERSION
        << " config_hash=" << hash_hex(config_hash_) << "\n";
    for (size_t i = 0; i < columns_.size(); ++i) {
        out << (i ? "," : "") << columns_[i];
    }
    out << "\n";
    for (const auto& row : rows_) {
        for (size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << row[i];
        }
        out << "\n";
    }
    return out.str();
}

void CsvReport::write(const std::string& path) const {
    write_file_atomic(path, render());
}

uint64_t config_hash(const std::string& canonical) {
    return fnv1a64(canonical);
}

std::string hash_hex(uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace wg
