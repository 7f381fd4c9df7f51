#include "phi4/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "phi4/errors.hpp"

namespace phi4 {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(table.header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(lineno);
  }
  if (!have_header) throw InputError(path.string() + ": empty file");
  return table;
}

std::string format_double(double x) {
  if (std::isnan(x)) return "NA";
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", x);
  return buf.data();
}

double parse_double(const std::string& field, const std::string& context) {
  if (field == "NA" || field == "nan" || field == "NaN") return std::nan("");
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(field, &used);
  } catch (const std::exception&) {
    throw InputError(context + ": not a number: '" + field + "'");
  }
  if (used != field.size()) throw InputError(context + ": not a number: '" + field + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string inputs_checksum(const std::vector<std::filesystem::path>& inputs) {
  std::string joined;
  for (const auto& p : inputs) joined += sha256_hex(read_file(p));
  return sha256_hex(joined);
}

std::string Provenance::header_line() const {
  std::ostringstream os;
  os << "# phi4 " << kToolVersion << " | command=" << command << " | seed=" << seed
     << " | inputs_sha256=" << (inputs_sha256.empty() ? "none" : inputs_sha256);
  return os.str();
}

void write_panel_csv(std::ostream& os, const ReturnPanel& panel, const Provenance& meta) {
  os << meta.header_line() << '\n' << "date";
  for (const auto& t : panel.tickers) os << ',' << t;
  os << '\n';
  for (Eigen::Index r = 0; r < panel.days(); ++r) {
    os << panel.dates[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < panel.size(); ++c) os << ',' << format_double(panel.returns(r, c));
    os << '\n';
  }
}

ReturnPanel read_panel_csv(const std::filesystem::path& path) {
  const auto table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "date")
    throw InputError(path.string() + ": panel header must be date,<ticker>...");
  ReturnPanel panel;
  panel.tickers.assign(table.header.begin() + 1, table.header.end());
  panel.returns.resize(static_cast<Eigen::Index>(table.rows.size()),
                       static_cast<Eigen::Index>(panel.tickers.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto ctx = path.string() + ":" + std::to_string(table.line_numbers[r]);
    panel.dates.push_back(table.rows[r][0]);
    for (std::size_t c = 1; c < table.header.size(); ++c)
      panel.returns(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) =
          parse_double(table.rows[r][c], ctx);
  }
  panel.validate();
  return panel;
}

}  // namespace phi4
