#include "korn/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace korn {

namespace {

constexpr char kDomainMagic[8] = {'K', 'O', 'R', 'N', 'D', 'O', 'M', '1'};

std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw Error("cannot write " + path);
  return f;
}

std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
  if (!f) throw Error("cannot read " + path);
  return f;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("domain file truncated");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  while (*b == ' ') ++b;
  const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (ec != std::errc() || ptr == b) throw Error(where + ": bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& where) {
  int v = 0;
  const char* b = s.data();
  while (*b == ' ') ++b;
  const auto [ptr, ec] = std::from_chars(b, s.data() + s.size(), v);
  if (ec != std::errc() || ptr == b) throw Error(where + ": bad integer '" + s + "'");
  return v;
}

// Rows after the header line, each split on commas.
std::vector<std::vector<std::string>> read_rows(const std::string& path, std::vector<std::string>& header) {
  auto f = open_in(path);
  std::string line;
  if (!std::getline(f, line)) throw Error(path + ": empty file");
  header = split_csv(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split_csv(line));
    if (rows.back().size() != header.size()) throw Error(path + ": ragged row " + std::to_string(rows.size()));
  }
  return rows;
}

const char* axis_name(int a) { return a == 0 ? "x" : a == 1 ? "y" : "z"; }

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& text) {
  auto f = open_out(path, true);
  f << text;
}

std::string read_text(const std::string& path) {
  auto f = open_in(path, true);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

DomainSpec parse_domain_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("domain spec: ") + e.what());
  }
  if (!j.contains("kind") || !j.contains("resolution")) throw Error("domain spec needs kind and resolution");
  DomainSpec s;
  s.kind = domain_kind_from_string(j.at("kind").get<std::string>());
  s.resolution = j.at("resolution").get<int>();
  s.depth = j.value("depth", 0);
  return s;
}

std::string domain_spec_json(const DomainSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["resolution"] = spec.resolution;
  if (spec.kind == DomainKind::KochPrefractal) j["depth"] = spec.depth;
  return j.dump();
}

DomainSpec read_domain_spec(const std::string& path) { return parse_domain_spec(read_text(path)); }

void write_domain(const std::string& path, const GridDomain& d) {
  auto f = open_out(path, true);
  f.write(kDomainMagic, sizeof kDomainMagic);
  put<std::int32_t>(f, d.dim());
  put<double>(f, d.h());
  for (int a = 0; a < 3; ++a) put<double>(f, d.origin()[a]);
  for (int a = 0; a < 3; ++a) put<std::int32_t>(f, d.extent()[a]);
  put<std::int32_t>(f, static_cast<std::int32_t>(d.spec().kind));
  put<std::int32_t>(f, d.spec().resolution);
  put<std::int32_t>(f, d.spec().depth);
  f.write(reinterpret_cast<const char*>(d.occupancy_mask().data()), static_cast<std::streamsize>(d.lattice_size()));
  f.write(reinterpret_cast<const char*>(d.cut_mask().data()), static_cast<std::streamsize>(d.lattice_size()));
  put<std::uint64_t>(f, d.size());
  f.write(reinterpret_cast<const char*>(d.delta().data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
}

GridDomain read_domain(const std::string& path) {
  auto f = open_in(path, true);
  char magic[8];
  f.read(magic, sizeof magic);
  if (!f || std::memcmp(magic, kDomainMagic, sizeof magic) != 0) throw Error(path + ": not a domain file");
  const int dim = get<std::int32_t>(f);
  const double h = get<double>(f);
  Point origin;
  for (int a = 0; a < 3; ++a) origin[a] = get<double>(f);
  Lattice extent;
  for (int a = 0; a < 3; ++a) extent[a] = get<std::int32_t>(f);
  DomainSpec spec;
  const int kind = get<std::int32_t>(f);
  if (kind < 0 || kind > static_cast<int>(DomainKind::Cube3d)) throw Error(path + ": bad domain kind");
  spec.kind = static_cast<DomainKind>(kind);
  spec.resolution = get<std::int32_t>(f);
  spec.depth = get<std::int32_t>(f);
  if (dim != 2 && dim != 3) throw Error(path + ": bad dimension");
  const std::size_t L = static_cast<std::size_t>(extent[0]) * extent[1] * extent[2];
  std::vector<std::uint8_t> occ(L), cut(L);
  f.read(reinterpret_cast<char*>(occ.data()), static_cast<std::streamsize>(L));
  f.read(reinterpret_cast<char*>(cut.data()), static_cast<std::streamsize>(L));
  const auto count = get<std::uint64_t>(f);
  std::vector<double> delta(count);
  f.read(reinterpret_cast<char*>(delta.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!f) throw Error(path + ": domain file truncated");
  return GridDomain::assemble(dim, h, origin, extent, std::move(occ), std::move(cut), std::move(delta), spec);
}

void write_domain_pbm(const std::string& path, const GridDomain& d) {
  auto f = open_out(path);
  const Lattice& e = d.extent();
  f << "P1\n# " << domain_spec_json(d.spec()) << "\n" << e[0] << " " << e[1] * e[2] << "\n";
  // Top row first, as in an image; z-slices follow each other.
  for (int k = 0; k < e[2]; ++k)
    for (int j = e[1] - 1; j >= 0; --j) {
      for (int i = 0; i < e[0]; ++i) f << (d.occupied({i, j, k}) ? '1' : '0') << (i + 1 < e[0] ? " " : "");
      f << "\n";
    }
}

void write_cells_csv(const std::string& path, const GridDomain& d) {
  auto f = open_out(path);
  f << "id";
  for (int a = 0; a < d.dim(); ++a) f << "," << axis_name(a);
  f << ",delta\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Point x = d.center(i);
    f << i;
    for (int a = 0; a < d.dim(); ++a) f << "," << format_double(x[a]);
    f << "," << format_double(d.delta(i)) << "\n";
  }
}

void write_cubes_csv(const std::string& path, const WhitneyDecomposition& decomp) {
  auto f = open_out(path);
  f << "id,level";
  for (int a = 0; a < decomp.dim; ++a) f << "," << axis_name(a);
  f << ",side\n";
  for (std::size_t c = 0; c < decomp.cubes.size(); ++c) {
    const auto& q = decomp.cubes[c];
    f << c << "," << q.level;
    for (int a = 0; a < decomp.dim; ++a) f << "," << format_double(q.center[a]);
    f << "," << format_double(q.side) << "\n";
  }
}

void write_edges_csv(const std::string& path, const WhitneyDecomposition& decomp) {
  auto f = open_out(path);
  f << "a,b,kind\n";
  for (std::size_t c = 0; c < decomp.all_neighbors.size(); ++c)
    for (int o : decomp.all_neighbors[c]) {
      if (o <= static_cast<int>(c)) continue;
      const auto& fn = decomp.face_neighbors[c];
      const bool face = std::binary_search(fn.begin(), fn.end(), o);
      f << c << "," << o << "," << (face ? "face" : "touch") << "\n";
    }
}

WhitneyDecomposition read_cubes_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, header);
  if (header.size() != 5 && header.size() != 6) throw Error(path + ": expected id,level,x,y[,z],side");
  WhitneyDecomposition d;
  d.dim = static_cast<int>(header.size()) - 3;
  if (rows.empty()) throw Error(path + ": no cubes");
  d.cubes.resize(rows.size());
  std::vector<char> seen(rows.size(), 0);
  for (const auto& r : rows) {
    const int id = to_int(r[0], path);
    if (id < 0 || static_cast<std::size_t>(id) >= rows.size() || seen[static_cast<std::size_t>(id)])
      throw Error(path + ": cube ids must be a permutation of 0..N-1");
    seen[static_cast<std::size_t>(id)] = 1;
    WhitneyCube q;
    q.level = to_int(r[1], path);
    for (int a = 0; a < d.dim; ++a) q.center[a] = to_double(r[static_cast<std::size_t>(2 + a)], path);
    q.side = to_double(r.back(), path);
    if (!(q.side > 0.0)) throw Error(path + ": non-positive side");
    d.cubes[static_cast<std::size_t>(id)] = q;
  }
  d.coarsest = 0.0;
  d.min_side = std::numeric_limits<double>::infinity();
  Point lo = Point::Constant(std::numeric_limits<double>::infinity());
  for (const auto& q : d.cubes) {
    d.coarsest = std::max(d.coarsest, q.side);
    d.min_side = std::min(d.min_side, q.side);
    lo = lo.cwiseMin(q.lo(d.dim));
  }
  if (d.dim == 2) lo[2] = 0.0;
  d.origin = lo;
  for (auto& q : d.cubes) {
    const Point l = q.lo(d.dim);
    for (int a = 0; a < d.dim; ++a) q.index[a] = static_cast<int>(std::llround((l[a] - lo[a]) / q.side));
  }
  compute_neighbors(d);
  return d;
}

void write_tree_csv(const std::string& path, const RootedTree& tree) {
  auto f = open_out(path);
  f << "id,parent,depth,level\n";
  for (std::size_t t = 0; t < tree.size(); ++t)
    f << t << "," << tree.parent[t] << "," << tree.depth[t] << "," << tree.level[t] << "\n";
}

RootedTree read_tree_csv(const std::string& path) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, header);
  if (header.size() != 4) throw Error(path + ": expected id,parent,depth,level");
  std::vector<int> parent(rows.size(), -2), level(rows.size(), 0);
  for (const auto& r : rows) {
    const int id = to_int(r[0], path);
    if (id < 0 || static_cast<std::size_t>(id) >= rows.size() || parent[static_cast<std::size_t>(id)] != -2)
      throw Error(path + ": node ids must be a permutation of 0..N-1");
    parent[static_cast<std::size_t>(id)] = to_int(r[1], path);
    level[static_cast<std::size_t>(id)] = to_int(r[3], path);
  }
  return RootedTree::from_parents(std::move(parent), std::move(level));
}

void write_field_csv(const std::string& path, const Field& u) {
  u.check();
  auto f = open_out(path);
  f << "cell";
  for (int a = 0; a < u.dim(); ++a) f << ",v" << a + 1;
  f << "\n";
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    f << i;
    for (int a = 0; a < u.dim(); ++a) f << "," << format_double(u.values(i, a));
    f << "\n";
  }
}

Field read_field_csv(const std::string& path, const GridDomain& d) {
  std::vector<std::string> header;
  const auto rows = read_rows(path, header);
  if (static_cast<int>(header.size()) != d.dim() + 1) throw Error(path + ": component count does not match domain");
  if (rows.size() != d.size()) throw Error(path + ": row count does not match the domain's cell count");
  Field u(d, path);
  std::vector<char> seen(d.size(), 0);
  for (const auto& r : rows) {
    const int c = to_int(r[0], path);
    if (c < 0 || static_cast<std::size_t>(c) >= d.size() || seen[static_cast<std::size_t>(c)])
      throw Error(path + ": bad cell index " + r[0]);
    seen[static_cast<std::size_t>(c)] = 1;
    for (int a = 0; a < d.dim(); ++a) u.values(c, a) = to_double(r[static_cast<std::size_t>(1 + a)], path);
  }
  u.check();
  return u;
}

}  // namespace korn
