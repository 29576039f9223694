#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace robustreg {

/// One `[name]` section of a key-value text file: ordered `key = value`
/// entries; duplicate keys allowed (used for repeated `estimator =` lines).
struct KvSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  bool has(std::string_view key) const;
  std::optional<std::string> get(std::string_view key) const;
  std::string require(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  std::vector<std::string> get_all(std::string_view key) const;
  void set(std::string key, std::string value);
};

/// A parsed config: `[section]` headers, `key = value` lines, `#` comments.
struct KvFile {
  std::vector<KvSection> sections;

  static KvFile parse(std::string_view text);
  static KvFile parse_file(const std::string& path);

  const KvSection* find(std::string_view name) const;
  const KvSection& require(std::string_view name) const;
  KvSection& emplace(std::string name);
  std::string render() const;
};

// --- scalar/vector value codecs (exact double round-trip) ---
double kv_to_double(const std::string& s);
long long kv_to_int(const std::string& s);
Eigen::VectorXd kv_to_vector(const std::string& s);  // comma-separated
Eigen::MatrixXd kv_to_matrix(const std::string& s);  // ';' rows, ',' entries

std::string kv_from_double(double v);
std::string kv_from_int(long long v);
std::string kv_from_vector(const Eigen::VectorXd& v);
std::string kv_from_matrix(const Eigen::MatrixXd& m);

std::string kv_trim(std::string_view s);

}  // namespace robustreg
