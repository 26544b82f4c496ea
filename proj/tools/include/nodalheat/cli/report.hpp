#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nodalheat::cli {

/// Round-trip decimal text of x (17 significant digits); "nan"/"inf" as is.
std::string num(double x);

/// Comma-separated table with a fixed header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<std::string>& cells);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_;
  std::filesystem::path path_;
};

/// Pretty-printed JSON file; parent directories are created.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

/// JSON with NaN replaced by null (JSON has no NaN).
nlohmann::json number_or_null(double x);

}  // namespace nodalheat::cli
