#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wg {

// Shortest round-trip decimal form via std::to_chars; locale-independent,
// byte-stable across runs.
std::string fmt_double(double v);

std::string read_file_bytes(const std::string& path);

// Writes to a sibling temp file then renames into place.
void write_file_atomic(const std::string& path, const std::string& bytes);

// CSV report with a leading comment line carrying tool version and config
// hash. Rows are rendered with fmt_double for numeric cells.
class CsvReport {
  public:
    CsvReport(std::vector<std::string> columns, uint64_t config_hash);

    void add_row(std::vector<std::string> cells);
    std::string render() const;
    void write(const std::string& path) const;

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
    uint64_t config_hash_;
};

// FNV-1a over a canonical parameter string; printed as 16 hex digits in
// report headers so reruns with the same config are byte-identical.
uint64_t config_hash(const std::string& canonical);
std::string hash_hex(uint64_t h);

} // namespace wg
