#include "slabflow/vtk.hpp"

#include "slabflow/config.hpp"
#include "slabflow/error.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace slabflow {

namespace {

constexpr int kTriangle = 5;
constexpr int kTetra = 10;

/// Whitespace tokenizer over a whole file.
class Tokens {
 public:
  explicit Tokens(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    text_ = buf.str();
  }

  std::string line() {
    const auto nl = text_.find('\n', pos_);
    std::string s = text_.substr(pos_, nl == std::string::npos ? std::string::npos : nl - pos_);
    pos_ = nl == std::string::npos ? text_.size() : nl + 1;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  bool done() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::string_view word() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of file");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return std::string_view(text_).substr(start, pos_ - start);
  }

  void expect(std::string_view w) {
    const auto got = word();
    if (got != w) fail("expected " + std::string(w) + ", got " + std::string(got));
  }

  double number() { return parse_number(word(), path_); }
  long integer() {
    const double v = number();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<long>(v);
  }

  [[noreturn]] void fail(const std::string& what) const { throw Error(path_ + ": " + what); }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string path_, text_;
  std::size_t pos_ = 0;
};

std::string mesh_title(const SimplexMesh& m) {
  const auto& g = m.geometry;
  return "slabflow mesh r_in=" + format_number(g.r_in) + " r_out=" + format_number(g.r_out) +
         " n_sides=" + std::to_string(g.n_sides) + " t_begin=" + format_number(m.t_begin) +
         " t_end=" + format_number(m.t_end);
}

std::map<std::string, std::string> title_values(const std::string& title) {
  std::map<std::string, std::string> kv;
  std::istringstream in(title);
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return kv;
}

}  // namespace

const NamedField* VtkData::field(const std::string& name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

NamedField scalar_field(std::string name, std::span<const double> values) {
  return {std::move(name), 1, std::vector<double>(values.begin(), values.end())};
}

NamedField tensor_field(std::string name, std::span<const Mat3> values) {
  NamedField f{std::move(name), 6, {}};
  f.values.reserve(values.size() * 6);
  for (const Mat3& m : values) {
    for (double v : {m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(1, 2), m(0, 2)}) f.values.push_back(v);
  }
  return f;
}

void write_vtk(const std::string& path, const VtkData& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  const std::size_t n = data.points.size();
  out << "# vtk DataFile Version 3.0\n" << data.title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << n << " double\n";
  for (const Vec3& p : data.points) {
    out << format_number(p.x()) << ' ' << format_number(p.y()) << ' ' << format_number(p.z()) << '\n';
  }
  std::size_t size = 0;
  for (const auto& c : data.cells) size += c.size() + 1;
  out << "CELLS " << data.cells.size() << ' ' << size << '\n';
  for (const auto& c : data.cells) {
    out << c.size();
    for (int v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << data.cell_types.size() << '\n';
  for (int t : data.cell_types) out << t << '\n';

  if (!data.fields.empty()) out << "POINT_DATA " << n << '\n';
  std::vector<const NamedField*> arrays;
  for (const auto& f : data.fields) {
    if (f.values.size() != n * static_cast<std::size_t>(f.components)) {
      throw PreconditionError("write_vtk: field " + f.name + " has the wrong size");
    }
    if (f.components != 1) {
      arrays.push_back(&f);
      continue;
    }
    out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : f.values) out << format_number(v) << '\n';
  }
  if (!arrays.empty()) {
    out << "FIELD FieldData " << arrays.size() << '\n';
    for (const NamedField* f : arrays) {
      out << f->name << ' ' << f->components << ' ' << n << " double\n";
      for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < f->components; ++c) out << (c ? " " : "") << format_number(f->values[i * f->components + c]);
        out << '\n';
      }
    }
  }
  if (!out) throw Error("write failed for " + path);
}

VtkData read_vtk(const std::string& path) {
  Tokens in(path);
  VtkData d;
  if (in.line().rfind("# vtk DataFile", 0) != 0) in.fail("missing vtk header");
  d.title = in.line();
  in.expect("ASCII");
  in.expect("DATASET");
  in.expect("UNSTRUCTURED_GRID");
  in.expect("POINTS");
  const long n = in.integer();
  in.word();
  d.points.resize(n);
  for (auto& p : d.points) {
    for (int c = 0; c < 3; ++c) p[c] = in.number();
  }
  in.expect("CELLS");
  const long m = in.integer();
  in.integer();
  d.cells.resize(m);
  for (auto& c : d.cells) {
    c.resize(in.integer());
    for (int& v : c) {
      v = static_cast<int>(in.integer());
      if (v < 0 || v >= n) in.fail("cell references a missing point");
    }
  }
  in.expect("CELL_TYPES");
  if (in.integer() != m) in.fail("CELL_TYPES count differs from CELLS");
  d.cell_types.resize(m);
  for (int& t : d.cell_types) t = static_cast<int>(in.integer());

  while (!in.done()) {
    const std::string_view section = in.word();
    if (section == "POINT_DATA") {
      if (in.integer() != n) in.fail("POINT_DATA count differs from POINTS");
    } else if (section == "SCALARS") {
      NamedField f{std::string(in.word()), 1, {}};
      in.word();
      f.components = static_cast<int>(in.integer());
      in.expect("LOOKUP_TABLE");
      in.word();
      f.values.resize(n * f.components);
      for (double& v : f.values) v = in.number();
      d.fields.push_back(std::move(f));
    } else if (section == "FIELD") {
      in.word();
      const long arrays = in.integer();
      for (long a = 0; a < arrays; ++a) {
        NamedField f{std::string(in.word()), 1, {}};
        f.components = static_cast<int>(in.integer());
        if (in.integer() != n) in.fail("field array length differs from POINTS");
        in.word();
        f.values.resize(n * f.components);
        for (double& v : f.values) v = in.number();
        d.fields.push_back(std::move(f));
      }
    } else {
      in.fail("unsupported section " + std::string(section));
    }
  }
  return d;
}

void write_mesh_vtk(const std::string& path, const SimplexMesh& mesh, std::span<const NamedField> fields) {
  VtkData d;
  d.title = mesh_title(mesh);
  d.points = mesh.nodes;
  d.cells.reserve(mesh.tets.size());
  for (const Tet& t : mesh.tets) d.cells.push_back({t[0], t[1], t[2], t[3]});
  d.cell_types.assign(mesh.tets.size(), kTetra);
  d.fields.assign(fields.begin(), fields.end());
  std::vector<double> planes(mesh.nodes.size()), frozen(mesh.nodes.size());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    planes[i] = static_cast<double>(mesh.planes[i]);
    frozen[i] = mesh.frozen[i];
  }
  d.fields.push_back(scalar_field("planes", planes));
  d.fields.push_back(scalar_field("frozen", frozen));
  write_vtk(path, d);
}

SimplexMesh mesh_from_vtk(const VtkData& d) {
  const auto kv = title_values(d.title);
  SimplexMesh m;
  try {
    m.geometry.r_in = parse_number(kv.at("r_in"), "r_in");
    m.geometry.r_out = parse_number(kv.at("r_out"), "r_out");
    m.geometry.n_sides = static_cast<int>(parse_number(kv.at("n_sides"), "n_sides"));
    m.t_begin = parse_number(kv.at("t_begin"), "t_begin");
    m.t_end = parse_number(kv.at("t_end"), "t_end");
  } catch (const std::out_of_range&) {
    throw Error("mesh_from_vtk: title lacks the geometry record");
  }
  const NamedField* planes = d.field("planes");
  const NamedField* frozen = d.field("frozen");
  if (!planes || !frozen) throw Error("mesh_from_vtk: planes or frozen field missing");
  m.nodes = d.points;
  m.planes.resize(m.nodes.size());
  m.frozen.resize(m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    m.planes[i] = static_cast<PlaneMask>(planes->values[i]);
    m.frozen[i] = frozen->values[i] != 0.0;
  }
  for (std::size_t k = 0; k < d.cells.size(); ++k) {
    if (d.cell_types[k] != kTetra || d.cells[k].size() != 4) throw Error("mesh_from_vtk: non-tetrahedral cell");
    const auto& c = d.cells[k];
    m.tets.push_back({c[0], c[1], c[2], c[3]});
  }
  rebuild_boundary_facets(m);
  return m;
}

void write_surface_vtk(const std::string& path, const TriangleSurface& surface) {
  VtkData d;
  d.title = "slabflow surface";
  d.points = surface.vertices;
  for (const Tri& t : surface.triangles) d.cells.push_back({t[0], t[1], t[2]});
  d.cell_types.assign(surface.triangles.size(), kTriangle);
  write_vtk(path, d);
}

void write_slice_vtk(const std::string& path, const TimeSlice& slice) {
  VtkData d;
  d.title = "slabflow slice t=" + format_number(slice.t);
  for (const Vec2& p : slice.points) d.points.emplace_back(p.x(), p.y(), slice.t);
  for (const Tri& t : slice.triangles) d.cells.push_back({t[0], t[1], t[2]});
  d.cell_types.assign(slice.triangles.size(), kTriangle);
  for (std::size_t f = 0; f < slice.fields.size(); ++f) d.fields.push_back(scalar_field(slice.field_names[f], slice.fields[f]));
  write_vtk(path, d);
}

}  // namespace slabflow
