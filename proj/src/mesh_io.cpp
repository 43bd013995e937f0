#include "p2m/mesh.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace p2m {
namespace {

struct RawMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> faces;
  std::vector<std::array<Index, 2>> wires;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return s;
}

std::string readAll(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MeshError("cannot open mesh file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void addPolygon(RawMesh& raw, const std::vector<Index>& poly) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) raw.faces.push_back({poly[0], poly[i], poly[i + 1]});
}

RawMesh parseObj(const std::string& text) {
  RawMesh raw;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  auto resolve = [&](long idx) -> Index {
    const long n = long(raw.vertices.size());
    const long r = idx < 0 ? n + idx : idx - 1;
    if (idx == 0 || r < 0 || r >= n)
      throw MeshError("OBJ line " + std::to_string(lineNo) + ": vertex index out of range");
    return Index(r);
  };
  while (std::getline(in, line)) {
    ++lineNo;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z()))
        throw MeshError("OBJ line " + std::to_string(lineNo) + ": malformed vertex");
      raw.vertices.push_back(p);
    } else if (tag == "f" || tag == "l") {
      std::vector<Index> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
        if (ec != std::errc() || ptr != head.data() + head.size())
          throw MeshError("OBJ line " + std::to_string(lineNo) + ": malformed index '" + tok + "'");
        poly.push_back(resolve(idx));
      }
      if (tag == "f") {
        addPolygon(raw, poly);
      } else {
        for (std::size_t i = 0; i + 1 < poly.size(); ++i) raw.wires.push_back({poly[i], poly[i + 1]});
      }
    }
  }
  return raw;
}

template <typename T>
T readLE(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  static_assert(std::endian::native == std::endian::little, "big-endian hosts are not supported");
  return v;
}

RawMesh parseStl(const std::string& data) {
  RawMesh raw;
  const bool sizeMatchesBinary =
      data.size() >= 84 && data.size() == 84 + 50 * std::size_t(readLE<std::uint32_t>(data.data() + 80));
  const bool looksAscii = data.compare(0, 5, "solid") == 0 && !sizeMatchesBinary;
  if (looksAscii) {
    std::istringstream in(data);
    std::string tok;
    std::vector<Index> poly;
    while (in >> tok) {
      if (tok == "vertex") {
        Vec3 p;
        if (!(in >> p.x() >> p.y() >> p.z())) throw MeshError("STL: malformed vertex");
        poly.push_back(Index(raw.vertices.size()));
        raw.vertices.push_back(p);
      } else if (tok == "endloop") {
        addPolygon(raw, poly);
        poly.clear();
      }
    }
    return raw;
  }
  if (!sizeMatchesBinary) throw MeshError("STL: file size does not match binary triangle count");
  const std::uint32_t n = readLE<std::uint32_t>(data.data() + 80);
  raw.vertices.reserve(3 * std::size_t(n));
  for (std::uint32_t t = 0; t < n; ++t) {
    const char* rec = data.data() + 84 + 50 * std::size_t(t) + 12;
    for (int k = 0; k < 3; ++k) {
      Vec3 p(readLE<float>(rec + 12 * k), readLE<float>(rec + 12 * k + 4), readLE<float>(rec + 12 * k + 8));
      raw.vertices.push_back(p);
    }
    const Index base = Index(3 * t);
    raw.faces.push_back({base, base + 1, base + 2});
  }
  return raw;
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool isList = false;
  std::string countType;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

std::size_t plyTypeSize(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  throw MeshError("PLY: unknown property type '" + t + "'");
}

double plyReadBinary(const char* p, const std::string& t) {
  if (t == "char" || t == "int8") return readLE<std::int8_t>(p);
  if (t == "uchar" || t == "uint8") return readLE<std::uint8_t>(p);
  if (t == "short" || t == "int16") return readLE<std::int16_t>(p);
  if (t == "ushort" || t == "uint16") return readLE<std::uint16_t>(p);
  if (t == "int" || t == "int32") return readLE<std::int32_t>(p);
  if (t == "uint" || t == "uint32") return readLE<std::uint32_t>(p);
  if (t == "float" || t == "float32") return readLE<float>(p);
  return readLE<double>(p);
}

RawMesh parsePly(const std::string& data) {
  std::size_t headerEnd = data.find("end_header");
  if (data.compare(0, 3, "ply") != 0 || headerEnd == std::string::npos) throw MeshError("PLY: bad header");
  std::size_t bodyStart = data.find('\n', headerEnd);
  if (bodyStart == std::string::npos) throw MeshError("PLY: bad header");
  ++bodyStart;

  std::istringstream header(data.substr(0, headerEnd));
  std::string line;
  std::string format;
  std::vector<PlyElement> elements;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "format") {
      ls >> format;
    } else if (tag == "element") {
      PlyElement el;
      ls >> el.name >> el.count;
      elements.push_back(el);
    } else if (tag == "property") {
      if (elements.empty()) throw MeshError("PLY: property before element");
      PlyProperty prop;
      ls >> prop.type;
      if (prop.type == "list") {
        prop.isList = true;
        ls >> prop.countType >> prop.type;
      }
      ls >> prop.name;
      elements.back().properties.push_back(prop);
    }
  }
  if (format != "ascii" && format != "binary_little_endian")
    throw MeshError("PLY: unsupported format '" + format + "'");
  const bool ascii = format == "ascii";

  RawMesh raw;
  std::istringstream asciiIn(ascii ? data.substr(bodyStart) : std::string());
  std::size_t pos = bodyStart;
  auto need = [&](std::size_t n) {
    if (pos + n > data.size()) throw MeshError("PLY: truncated binary body");
  };
  auto scalar = [&](const std::string& type) -> double {
    if (ascii) {
      double v;
      if (!(asciiIn >> v)) throw MeshError("PLY: truncated ascii body");
      return v;
    }
    const std::size_t sz = plyTypeSize(type);
    need(sz);
    const double v = plyReadBinary(data.data() + pos, type);
    pos += sz;
    return v;
  };

  for (const PlyElement& el : elements) {
    for (std::size_t i = 0; i < el.count; ++i) {
      Vec3 p = Vec3::Zero();
      std::vector<Index> poly;
      for (const PlyProperty& prop : el.properties) {
        if (prop.isList) {
          const auto n = std::size_t(scalar(prop.countType));
          std::vector<Index> items(n);
          for (auto& it : items) it = Index(scalar(prop.type));
          if (el.name == "face" && (prop.name == "vertex_indices" || prop.name == "vertex_index"))
            poly = std::move(items);
        } else {
          const double v = scalar(prop.type);
          if (el.name == "vertex") {
            if (prop.name == "x") p.x() = v;
            if (prop.name == "y") p.y() = v;
            if (prop.name == "z") p.z() = v;
          }
        }
      }
      if (el.name == "vertex") raw.vertices.push_back(p);
      if (el.name == "face") addPolygon(raw, poly);
    }
  }
  return raw;
}

struct BitKey {
  std::array<std::uint64_t, 3> bits;
  bool operator==(const BitKey&) const = default;
};
struct BitKeyHash {
  std::size_t operator()(const BitKey& k) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (auto b : k.bits) h = (h ^ b) * 0xff51afd7ed558ccdull;
    return h;
  }
};

// Returns a remap raw-vertex -> welded id, in first-occurrence order.
std::vector<Index> weld(const std::vector<Vec3>& pts, double eps, std::vector<Vec3>& out) {
  std::vector<Index> remap(pts.size());
  out.clear();
  if (eps <= 0) {
    std::unordered_map<BitKey, Index, BitKeyHash> ids;
    ids.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      BitKey k;
      for (int d = 0; d < 3; ++d) k.bits[d] = std::bit_cast<std::uint64_t>(pts[i][d] + 0.0);
      auto [it, inserted] = ids.try_emplace(k, Index(out.size()));
      if (inserted) out.push_back(pts[i]);
      remap[i] = it->second;
    }
    return remap;
  }
  std::unordered_map<BitKey, std::vector<Index>, BitKeyHash> grid;
  auto cellOf = [&](const Vec3& p) {
    std::array<std::int64_t, 3> c;
    for (int d = 0; d < 3; ++d) c[d] = std::int64_t(std::floor(p[d] / eps));
    return c;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto c = cellOf(pts[i]);
    Index found = Index(-1);
    for (int dx = -1; dx <= 1 && found == Index(-1); ++dx)
      for (int dy = -1; dy <= 1 && found == Index(-1); ++dy)
        for (int dz = -1; dz <= 1 && found == Index(-1); ++dz) {
          BitKey k{{std::uint64_t(c[0] + dx), std::uint64_t(c[1] + dy), std::uint64_t(c[2] + dz)}};
          auto it = grid.find(k);
          if (it == grid.end()) continue;
          for (Index rep : it->second)
            if ((out[rep] - pts[i]).norm() <= eps) {
              found = rep;
              break;
            }
        }
    if (found == Index(-1)) {
      found = Index(out.size());
      out.push_back(pts[i]);
      grid[BitKey{{std::uint64_t(c[0]), std::uint64_t(c[1]), std::uint64_t(c[2])}}].push_back(found);
    }
    remap[i] = found;
  }
  return remap;
}

}  // namespace

Mesh loadMesh(const std::filesystem::path& path, double weldEpsilon, LoadReport* report) {
  const std::string ext = lower(path.extension().string());
  if (ext != ".obj" && ext != ".ply" && ext != ".stl")
    throw MeshError("unsupported mesh format: " + path.string());
  const std::string data = readAll(path);
  RawMesh raw = ext == ".obj" ? parseObj(data) : ext == ".ply" ? parsePly(data) : parseStl(data);
  if (raw.vertices.empty() || (raw.faces.empty() && raw.wires.empty()))
    throw MeshError("empty mesh: " + path.string());

  std::vector<Vec3> welded;
  const std::vector<Index> remap = weld(raw.vertices, weldEpsilon, welded);
  for (auto& f : raw.faces)
    for (Index& i : f) i = remap[i];
  for (auto& w : raw.wires)
    for (Index& i : w) i = remap[i];

  LoadReport local;
  Mesh mesh = Mesh::fromFaces(std::move(welded), raw.faces, raw.wires, &local);
  local.rawVertices = raw.vertices.size();
  if (mesh.faceCount() == 0 && mesh.edgeCount() == 0) throw MeshError("empty mesh after cleanup: " + path.string());
  if (report) *report = local;
  return mesh;
}

void saveObj(const Mesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path.string());
  char buf[128];
  for (const Vec3& p : mesh.vertices()) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
  for (const auto& f : mesh.faces()) out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  for (std::size_t e = 0; e < mesh.edgeCount(); ++e)
    if (mesh.edgeFaces(Index(e)).empty())
      out << "l " << mesh.edges()[e][0] + 1 << ' ' << mesh.edges()[e][1] + 1 << '\n';
  if (!out) throw MeshError("write failed: " + path.string());
}

}  // namespace p2m
