#include "ostrovsky/field_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "ostrovsky/errors.hpp"

namespace ostrovsky {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_number(std::string_view token, std::string_view what) {
  while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) token.remove_prefix(1);
  while (!token.empty() && (token.back() == ' ' || token.back() == '\t' || token.back() == '\r'))
    token.remove_suffix(1);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), x);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw PreconditionError("malformed " + std::string(what) + ": '" + std::string(token) + "'");
  return x;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_field_csv(std::ostream& os, const FourierField& f,
                     const std::vector<std::string>& comments) {
  const GridSpec& g = f.grid();
  os << "# ostrovsky-field A=" << format_number(g.length) << " m=" << g.modes << " N=" << g.points
     << '\n';
  for (const auto& c : comments) os << "# " << c << '\n';
  os << "k,re,im\n";
  for (int k = 1; k <= g.modes; ++k) {
    const Complex c = f.coefficients()[k - 1];
    os << k << ',' << format_number(c.real()) << ',' << format_number(c.imag()) << '\n';
  }
}

FourierField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ostrovsky-field", 0) != 0)
    throw PreconditionError("field file must start with '# ostrovsky-field A=... m=...'");
  std::map<std::string, std::string, std::less<>> header;
  for (auto tok : split(std::string_view(line).substr(17), ' ')) {
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) continue;
    header.emplace(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
  }
  if (!header.count("A") || !header.count("m"))
    throw PreconditionError("field header lacks A or m");
  const double length = parse_number(header["A"], "A");
  const double modes_d = parse_number(header["m"], "m");
  const int modes = static_cast<int>(modes_d);
  if (modes != modes_d) throw PreconditionError("field header m must be an integer");
  int points = 0;
  if (header.count("N")) points = static_cast<int>(parse_number(header["N"], "N"));
  FourierField f(GridSpec::make(length, modes, points));

  bool seen_columns = false;
  std::vector<bool> filled(modes, false);
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!seen_columns) {
      if (line != "k,re,im")
        throw PreconditionError("expected column header 'k,re,im' at line " +
                                std::to_string(line_no));
      seen_columns = true;
      continue;
    }
    const auto cols = split(line, ',');
    if (cols.size() != 3)
      throw PreconditionError("expected 3 columns at line " + std::to_string(line_no));
    const double kd = parse_number(cols[0], "k");
    const int k = static_cast<int>(kd);
    if (k != kd || k < 1 || k > modes)
      throw PreconditionError("wavenumber out of range at line " + std::to_string(line_no));
    if (filled[k - 1])
      throw PreconditionError("duplicate wavenumber at line " + std::to_string(line_no));
    filled[k - 1] = true;
    f.coefficients()[k - 1] = Complex(parse_number(cols[1], "re"), parse_number(cols[2], "im"));
  }
  if (!seen_columns) throw PreconditionError("field file has no 'k,re,im' table");
  return f;
}

void save_field(const std::filesystem::path& path, const FourierField& f,
                const std::vector<std::string>& comments) {
  std::ofstream os(path);
  if (!os) throw PreconditionError("cannot write " + path.string());
  write_field_csv(os, f, comments);
  if (!os) throw PreconditionError("error writing " + path.string());
}

FourierField load_field(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot open " + path.string());
  return read_field_csv(is);
}

}  // namespace ostrovsky
