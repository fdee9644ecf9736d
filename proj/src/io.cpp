#include "mimstd/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "mimstd/errors.hpp"

namespace mimstd {

void IndexStudyData::validate() const {
  const Eigen::Index n = covariates.rows();
  if (treatment.size() != n || outcome.size() != n) {
    throw ShapeError("index study columns differ in length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (treatment[i] != 0.0 && treatment[i] != 1.0) throw DomainError("treatment must be 0/1");
    if (outcome[i] != 0.0 && outcome[i] != 1.0) throw DomainError("outcome must be 0/1");
  }
}

}  // namespace mimstd

namespace mimstd::io {

namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

[[noreturn]] void schema_error(std::string_view source, std::size_t line, std::size_t column,
                               const std::string& msg) {
  std::ostringstream os;
  os << source << ":" << line;
  if (column > 0) os << ":" << column;
  os << ": " << msg;
  throw SchemaError(os.str());
}

Table parse_table(std::string_view text, std::string_view source) {
  Table t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    const auto fields = split_line(line);
    if (t.header.empty()) {
      for (auto f : fields) t.header.push_back(trim(f));
      continue;
    }
    if (fields.size() != t.header.size()) {
      schema_error(source, line_no, 0,
                   "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string f = trim(fields[c]);
      double v = 0.0;
      const char* first = f.data();
      const char* last = f.data() + f.size();
      if (!f.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, v);
      if (f.empty() || ec != std::errc{} || ptr != last) {
        schema_error(source, line_no, c + 1, "column '" + t.header[c] + "' holds non-numeric value '" + f + "'");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) schema_error(source, 1, 0, "missing header");
  return t;
}

// Number of leading x1..xK columns; throws when they are misnamed.
std::size_t covariate_columns(const Table& t, std::size_t expected_trailing, std::string_view source) {
  if (t.header.size() < expected_trailing) schema_error(source, 1, 0, "too few columns");
  const std::size_t k = t.header.size() - expected_trailing;
  for (std::size_t j = 0; j < k; ++j) {
    if (t.header[j] != "x" + std::to_string(j + 1)) {
      schema_error(source, 1, j + 1, "expected column 'x" + std::to_string(j + 1) + "', found '" + t.header[j] + "'");
    }
  }
  return k;
}

void check_binary_column(const Table& t, std::size_t col, std::string_view source) {
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double v = t.rows[i][col];
    if (v != 0.0 && v != 1.0) {
      schema_error(source, i + 2, col + 1, "column '" + t.header[col] + "' must be 0 or 1");
    }
  }
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw IoError("failed to format a number");
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string index_csv(const IndexStudyData& data) {
  data.validate();
  std::string out;
  const Eigen::Index k = data.covariates.cols();
  for (Eigen::Index j = 0; j < k; ++j) out += "x" + std::to_string(j + 1) + ",";
  out += "t,y\n";
  for (Eigen::Index i = 0; i < data.covariates.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) out += format_double(data.covariates(i, j)) + ",";
    out += data.treatment[i] == 1.0 ? "1," : "0,";
    out += data.outcome[i] == 1.0 ? "1\n" : "0\n";
  }
  return out;
}

std::string target_csv(const TargetCovariates& target) {
  std::string out;
  const Eigen::Index k = target.covariates.cols();
  for (Eigen::Index j = 0; j < k; ++j) out += (j ? ",x" : "x") + std::to_string(j + 1);
  out += "\n";
  for (Eigen::Index i = 0; i < target.covariates.rows(); ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j) out += ",";
      out += format_double(target.covariates(i, j));
    }
    out += "\n";
  }
  return out;
}

IndexStudyData parse_index_csv(std::string_view text, std::string_view source) {
  const Table t = parse_table(text, source);
  const std::size_t k = covariate_columns(t, 2, source);
  if (t.header[k] != "t" || t.header[k + 1] != "y") {
    schema_error(source, 1, k + 1, "the last two columns must be 't,y'");
  }
  check_binary_column(t, k, source);
  check_binary_column(t, k + 1, source);
  IndexStudyData data;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  data.covariates.resize(n, static_cast<Eigen::Index>(k));
  data.treatment.resize(n);
  data.outcome.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < k; ++j) data.covariates(i, static_cast<Eigen::Index>(j)) = row[j];
    data.treatment[i] = row[k];
    data.outcome[i] = row[k + 1];
  }
  return data;
}

TargetCovariates parse_target_csv(std::string_view text, std::string_view source) {
  const Table t = parse_table(text, source);
  const bool has_arms = t.header.size() >= 2 && t.header[t.header.size() - 2] == "t" && t.header.back() == "y";
  const std::size_t k = covariate_columns(t, has_arms ? 2 : 0, source);
  TargetCovariates target;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  target.covariates.resize(n, static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      target.covariates(i, static_cast<Eigen::Index>(j)) = t.rows[static_cast<std::size_t>(i)][j];
    }
  }
  return target;
}

IndexStudyData read_index_csv(const std::filesystem::path& path) {
  return parse_index_csv(read_file(path), path.string());
}

TargetCovariates read_target_csv(const std::filesystem::path& path) {
  return parse_target_csv(read_file(path), path.string());
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace mimstd::io
