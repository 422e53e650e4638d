#include "nodalab/field_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "nodalab/errors.hpp"

namespace nodalab {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("field snapshot: bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw IoError("field snapshot: bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(item);
  return out;
}

}  // namespace

const char* tag_name(FieldTag tag) {
  switch (tag) {
    case FieldTag::Solution: return "solution";
    case FieldTag::SteklovEigenfunction: return "steklov";
    case FieldTag::Gauged: return "gauged";
    case FieldTag::Rescaled: return "rescaled";
  }
  return "solution";
}

FieldTag parse_tag(const std::string& name) {
  if (name == "solution") return FieldTag::Solution;
  if (name == "steklov") return FieldTag::SteklovEigenfunction;
  if (name == "gauged") return FieldTag::Gauged;
  if (name == "rescaled") return FieldTag::Rescaled;
  throw IoError("field snapshot: unknown tag '" + name + "'");
}

void write_field_csv(std::ostream& out, const ScalarField& field) {
  const Grid& g = field.grid();
  std::ostringstream header;
  header.precision(17);
  if (g.kind() == GridKind::Rectangle) {
    header << "# grid=rectangle,nx=" << g.nx() << ",ny=" << g.ny()
           << ",x_min=" << format_double(g.x_min()) << ",x_max=" << format_double(g.x_max())
           << ",y_min=" << format_double(g.y_min()) << ",y_max=" << format_double(g.y_max());
  } else {
    header << "# grid=disk,nx=" << g.rings() << ",ny=" << g.ntheta()
           << ",radius=" << format_double(g.radius()) << ",nr=" << g.nr();
  }
  header << ",tag=" << tag_name(field.tag());
  out << header.str() << "\n";
  out << "i,j,x,y,value\n";
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto [i, j] = g.ij(k);
    const Point2 p = g.node(k);
    out << i << ',' << j << ',' << format_double(p.x()) << ',' << format_double(p.y()) << ','
        << format_double(field.value(k)) << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_field_csv(out, field);
  if (!out) throw IoError("write failed: " + path.string());
}

ScalarField read_field_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw IoError("field snapshot: missing '# grid=' header");
  }
  std::map<std::string, std::string> kv;
  for (const auto& item : split(line.substr(2), ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw IoError("field snapshot: bad header item '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  auto need = [&kv](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw IoError(std::string("field snapshot: header lacks ") + key);
    return it->second;
  };

  const std::string& kind = need("grid");
  Grid grid = Grid::rectangle(0, 1, 0, 1, 3, 3);
  if (kind == "rectangle") {
    grid = Grid::rectangle(parse_double(need("x_min")), parse_double(need("x_max")),
                           parse_double(need("y_min")), parse_double(need("y_max")),
                           parse_int(need("nx")), parse_int(need("ny")));
  } else if (kind == "disk") {
    const int nr = parse_int(need("nr"));
    grid = Grid::extended_disk(parse_double(need("radius")), nr, parse_int(need("ny")),
                               parse_int(need("nx")) - nr);
  } else {
    throw IoError("field snapshot: unknown grid kind '" + kind + "'");
  }
  const FieldTag tag = kv.count("tag") ? parse_tag(kv["tag"]) : FieldTag::Solution;

  if (!std::getline(in, line) || line != "i,j,x,y,value") {
    throw IoError("field snapshot: missing column header");
  }
  std::vector<double> values(grid.node_count(), 0.0);
  std::vector<char> seen(values.size(), 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 5) throw IoError("field snapshot: malformed row '" + line + "'");
    const int i = parse_int(cols[0]);
    const int j = parse_int(cols[1]);
    const std::size_t k = grid.index(i, j);
    if (k >= values.size() || seen[k]) throw IoError("field snapshot: bad node " + line);
    values[k] = parse_double(cols[4]);
    seen[k] = 1;
    ++rows;
  }
  if (rows != values.size()) throw IoError("field snapshot: node count mismatch");
  return ScalarField(grid, std::move(values), tag);
}

ScalarField read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_field_csv(in);
}

}  // namespace nodalab
