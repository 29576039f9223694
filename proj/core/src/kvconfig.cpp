#include "robustreg/kvconfig.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace robustreg {

std::string kv_trim(std::string_view s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool KvSection::has(std::string_view key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return true;
  return false;
}

std::optional<std::string> KvSection::get(std::string_view key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string KvSection::require(std::string_view key) const {
  if (auto v = get(key)) return *v;
  throw std::invalid_argument("config: missing key '" + std::string(key) + "' in section [" + name + "]");
}

std::string KvSection::get_or(std::string_view key, std::string fallback) const {
  if (auto v = get(key)) return *v;
  return fallback;
}

std::vector<std::string> KvSection::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries)
    if (k == key) out.push_back(v);
  return out;
}

void KvSection::set(std::string key, std::string value) {
  entries.emplace_back(std::move(key), std::move(value));
}

KvFile KvFile::parse(std::string_view text) {
  KvFile file;
  KvSection* cur = nullptr;
  size_t pos = 0, lineno = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string line = kv_trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++lineno;
    if (line.empty() || line[0] == '#') {
      if (pos > text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config: malformed section header at line " + std::to_string(lineno));
      cur = &file.emplace(kv_trim(std::string_view(line).substr(1, line.size() - 2)));
    } else {
      const size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("config: expected 'key = value' at line " + std::to_string(lineno));
      if (cur == nullptr) cur = &file.emplace("");
      cur->set(kv_trim(std::string_view(line).substr(0, eq)),
               kv_trim(std::string_view(line).substr(eq + 1)));
    }
    if (pos > text.size()) break;
  }
  return file;
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const KvSection* KvFile::find(std::string_view name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const KvSection& KvFile::require(std::string_view name) const {
  if (const KvSection* s = find(name)) return *s;
  throw std::invalid_argument("config: missing section [" + std::string(name) + "]");
}

KvSection& KvFile::emplace(std::string name) {
  sections.push_back(KvSection{std::move(name), {}});
  return sections.back();
}

std::string KvFile::render() const {
  std::string out;
  for (const auto& s : sections) {
    if (!s.name.empty()) out += "[" + s.name + "]\n";
    for (const auto& [k, v] : s.entries) out += k + " = " + v + "\n";
    out += "\n";
  }
  return out;
}

double kv_to_double(const std::string& s) {
  const std::string t = kv_trim(s);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || t.empty())
    throw std::invalid_argument("config: expected a real number, got '" + s + "'");
  return v;
}

long long kv_to_int(const std::string& s) {
  const std::string t = kv_trim(s);
  long long v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || p != t.data() + t.size())
    throw std::invalid_argument("config: expected an integer, got '" + s + "'");
  return v;
}

Eigen::VectorXd kv_to_vector(const std::string& s) {
  std::vector<double> vals;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) vals.push_back(kv_to_double(item));
  if (vals.empty()) throw std::invalid_argument("config: expected a comma-separated vector");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::MatrixXd kv_to_matrix(const std::string& s) {
  std::vector<Eigen::VectorXd> rows;
  std::string row;
  std::istringstream in(s);
  while (std::getline(in, row, ';')) rows.push_back(kv_to_vector(row));
  if (rows.empty()) throw std::invalid_argument("config: expected ';'-separated matrix rows");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw std::invalid_argument("config: ragged matrix rows");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

std::string kv_from_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);  // shortest exact form
  if (ec != std::errc{}) throw std::runtime_error("kv_from_double: format failure");
  return std::string(buf, p);
}

std::string kv_from_int(long long v) { return std::to_string(v); }

std::string kv_from_vector(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += kv_from_double(v[i]);
  }
  return out;
}

std::string kv_from_matrix(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) out += ";";
    out += kv_from_vector(m.row(i).transpose());
  }
  return out;
}

}  // namespace robustreg
