#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace pchaz {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest round-trippable decimal form; "NA" for NaN.
std::string format_number(double x);

/// Comma-separated table preceded by `# key: value` metadata lines.
struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(const std::vector<double>& values);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace pchaz
