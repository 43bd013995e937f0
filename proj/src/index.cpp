#include "p2m/index.hpp"

#include "p2m/parallel.hpp"
#include "p2m/vorocell.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <sstream>

namespace p2m {

struct IndexBuilder {
  static BuildResult run(Mesh mesh, const BuildOptions& opts) {
    using Clock = std::chrono::steady_clock;
    auto seconds = [](Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
    if (mesh.vertexCount() == 0) throw MeshError("cannot index an empty mesh");

    BuildResult result;
    P2MIndex& idx = result.index;
    const auto t0 = Clock::now();

    const VoronoiConfig cfg = VoronoiConfig::around(mesh.bounds());
    idx.meta_.center = cfg.center;
    idx.meta_.halfExtent = cfg.halfExtent;
    idx.meta_.tolerance = cfg.tolerance();
    idx.meta_.leafSize = opts.leafSize;
    idx.meta_.fanout = opts.fanout;

    idx.edgeSlabs_.resize(mesh.edgeCount());
    for (Index e = 0; e < mesh.edgeCount(); ++e) {
      const VerticalSpace vs = verticalSpaceEdge(mesh, e);
      idx.edgeSlabs_[e] = {vs.planes[0], vs.planes[1]};
    }
    idx.faceSpaces_.resize(mesh.faceCount());
    for (Index f = 0; f < mesh.faceCount(); ++f) {
      const VerticalSpace vs = verticalSpaceFace(mesh, f);
      idx.faceSpaces_[f] = {vs.planes[0], vs.planes[1], vs.planes[2]};
    }

    const auto t1 = Clock::now();
    idx.kdtree_ = KdTree(mesh.vertices(), opts.leafSize);
    const auto t2 = Clock::now();

    CellBuildOptions cellOpts;
    cellOpts.initialNeighbors = opts.initialNeighbors;
    cellOpts.threads = opts.threads;
    std::vector<VoronoiCell> cells = buildCells(mesh.vertices(), idx.kdtree_, cfg, cellOpts);
    const NeighborGraph graph(cells);
    const auto t3 = Clock::now();

    TableBuildOptions tableOpts;
    tableOpts.margin = cfg.tolerance();
    tableOpts.threads = opts.threads;
    idx.table_ = buildTable(mesh, cells, graph, tableOpts);
    const auto t4 = Clock::now();

    if (opts.cellVolumes) {
      result.cellVolumes.resize(cells.size());
      for (std::size_t v = 0; v < cells.size(); ++v) result.cellVolumes[v] = cells[v].polytope.volume();
    }
    std::vector<VoronoiCell>().swap(cells);

    const auto t5 = Clock::now();
    idx.rtrees_.resize(mesh.vertexCount());
    parallelChunks(mesh.vertexCount(), opts.threads, [&](unsigned, std::size_t begin, std::size_t end) {
      std::vector<Aabb> boxes;
      for (std::size_t v = begin; v < end; ++v) {
        boxes.clear();
        for (const auto& entry : idx.table_.lists[v]) boxes.push_back(entry.box);
        idx.rtrees_[v] = RTree(boxes, opts.fanout);
      }
    });
    const auto t6 = Clock::now();

    idx.mesh_ = std::move(mesh);
    result.timings.kdtree = seconds(t1, t2);
    result.timings.voronoi = seconds(t2, t3);
    result.timings.interception = seconds(t3, t4);
    result.timings.rtree = seconds(t5, t6);
    result.timings.total = seconds(t0, t6);
    return result;
  }
};

BuildResult buildIndex(Mesh mesh, const BuildOptions& opts) { return IndexBuilder::run(std::move(mesh), opts); }

P2MIndex::MemoryUsage P2MIndex::memoryUsage() const {
  MemoryUsage m;
  m.mesh = mesh_.memoryBytes() + edgeSlabs_.capacity() * sizeof(edgeSlabs_[0]) +
           faceSpaces_.capacity() * sizeof(faceSpaces_[0]);
  m.kdtree = kdtree_.memoryBytes();
  m.table = table_.memoryBytes();
  m.rtrees = rtrees_.capacity() * sizeof(RTree);
  for (const RTree& t : rtrees_) m.rtrees += t.memoryBytes();
  return m;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

static_assert(std::endian::native == std::endian::little, "index files are written in host byte order");

constexpr char kMagic[4] = {'P', '2', 'M', '1'};
enum Section : std::uint32_t { kMesh = 1, kKdTree = 2, kTable = 3, kRTrees = 4, kMeta = 5 };
constexpr std::uint32_t kSectionCount = 5;

std::uint64_t fnv1a(const char* data, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < n; ++i) h = (h ^ std::uint8_t(data[i])) * 1099511628211ull;
  return h;
}

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    const char* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void vec(const Vec3& v) {
    put(v.x());
    put(v.y());
    put(v.z());
  }
  void box(const Aabb& b) {
    vec(b.min());
    vec(b.max());
  }
  void plane(const Plane3& p) {
    vec(p.normal);
    put(p.offset);
  }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : p_(data), end_(data + size) {}
  template <typename T>
  T get() {
    if (std::size_t(end_ - p_) < sizeof(T)) throw IndexFormatError(IndexErrorCode::Truncated, "index section truncated");
    T v;
    std::memcpy(&v, p_, sizeof(T));
    p_ += sizeof(T);
    return v;
  }
  Vec3 vec() {
    const double x = get<double>(), y = get<double>(), z = get<double>();
    return {x, y, z};
  }
  Aabb box() {
    const Vec3 lo = vec();
    const Vec3 hi = vec();
    Aabb b;
    b.min() = lo;
    b.max() = hi;
    return b;
  }
  Plane3 plane() {
    Plane3 p;
    p.normal = vec();
    p.offset = get<double>();
    return p;
  }
  // Guards element counts against the remaining bytes before allocating.
  std::uint64_t count(std::size_t minElementBytes) {
    const auto n = get<std::uint64_t>();
    if (minElementBytes && n > std::size_t(end_ - p_) / minElementBytes)
      throw IndexFormatError(IndexErrorCode::Corrupted, "index section has an impossible element count");
    return n;
  }
  bool done() const { return p_ == end_; }

 private:
  const char* p_;
  const char* end_;
};

}  // namespace

struct IndexCodec {
  static std::string encodeMesh(const P2MIndex& idx) {
    Writer w;
    const Mesh& m = idx.mesh_;
    w.put<std::uint64_t>(m.vertexCount());
    for (const Vec3& p : m.vertices()) w.vec(p);
    w.put<std::uint64_t>(m.faceCount());
    for (const auto& f : m.faces())
      for (Index i : f) w.put(i);
    w.put<std::uint64_t>(m.edgeCount());
    for (const auto& e : m.edges())
      for (Index i : e) w.put(i);
    for (const auto& s : idx.edgeSlabs_)
      for (const Plane3& p : s) w.plane(p);
    for (const auto& s : idx.faceSpaces_)
      for (const Plane3& p : s) w.plane(p);
    return std::move(w.bytes());
  }

  static void decodeMesh(Reader& r, P2MIndex& idx) {
    std::vector<Vec3> verts(r.count(24));
    for (Vec3& p : verts) p = r.vec();
    std::vector<std::array<Index, 3>> faces(r.count(12));
    for (auto& f : faces)
      for (Index& i : f) i = r.get<Index>();
    std::vector<std::array<Index, 2>> edges(r.count(8));
    for (auto& e : edges)
      for (Index& i : e) i = r.get<Index>();
    for (const auto& f : faces)
      for (Index i : f)
        if (i >= verts.size()) throw IndexFormatError(IndexErrorCode::Corrupted, "face index out of range");

    LoadReport report;
    std::vector<std::array<Index, 2>> wires;
    {
      // Edges past those bounding faces are wire edges.
      Mesh probe = Mesh::fromFaces(verts, faces, {}, &report);
      for (std::size_t e = probe.edgeCount(); e < edges.size(); ++e) wires.push_back(edges[e]);
    }
    idx.mesh_ = Mesh::fromFaces(std::move(verts), faces, wires, &report);
    if (idx.mesh_.faceCount() != faces.size() || idx.mesh_.edges() != edges)
      throw IndexFormatError(IndexErrorCode::Corrupted, "mesh section is inconsistent");

    idx.edgeSlabs_.resize(edges.size());
    for (auto& s : idx.edgeSlabs_)
      for (Plane3& p : s) p = r.plane();
    idx.faceSpaces_.resize(faces.size());
    for (auto& s : idx.faceSpaces_)
      for (Plane3& p : s) p = r.plane();
  }

  static std::string encodeKdTree(const P2MIndex& idx) {
    Writer w;
    const KdTree& t = idx.kdtree_;
    w.put<std::uint32_t>(t.leafSize());
    w.put<std::uint64_t>(t.nodes().size());
    for (const auto& n : t.nodes()) {
      w.put(n.split);
      w.put(n.first);
      w.put(n.second);
      w.put(n.axis);
      w.put(n.leaf);
    }
    w.put<std::uint64_t>(t.ids().size());
    for (auto id : t.ids()) w.put(id);
    for (const Vec3& p : t.points()) w.vec(p);
    return std::move(w.bytes());
  }

  static void decodeKdTree(Reader& r, P2MIndex& idx) {
    const auto leaf = r.get<std::uint32_t>();
    std::vector<KdTree::Node> nodes(r.count(18));
    for (auto& n : nodes) {
      n.split = r.get<double>();
      n.first = r.get<std::uint32_t>();
      n.second = r.get<std::uint32_t>();
      n.axis = r.get<std::uint8_t>();
      n.leaf = r.get<std::uint8_t>();
    }
    std::vector<std::uint32_t> ids(r.count(4));
    for (auto& id : ids) id = r.get<std::uint32_t>();
    std::vector<Vec3> pts(ids.size());
    for (Vec3& p : pts) p = r.vec();
    const std::size_t nv = idx.mesh_.vertexCount();
    if (ids.size() != nv) throw IndexFormatError(IndexErrorCode::Corrupted, "KD-tree size does not match mesh");
    for (const auto& n : nodes) {
      const bool ok = n.leaf ? (n.first <= n.second && n.second <= nv) : (n.first < nodes.size() && n.second < nodes.size() && n.axis < 3);
      if (!ok) throw IndexFormatError(IndexErrorCode::Corrupted, "KD-tree node out of range");
    }
    for (auto id : ids)
      if (id >= nv) throw IndexFormatError(IndexErrorCode::Corrupted, "KD-tree id out of range");
    idx.kdtree_ = KdTree::fromParts(std::move(nodes), std::move(ids), std::move(pts), leaf);
  }

  static std::string encodeTable(const P2MIndex& idx) {
    Writer w;
    w.put<std::uint64_t>(idx.table_.lists.size());
    for (const auto& list : idx.table_.lists) {
      w.put<std::uint64_t>(list.size());
      for (const auto& e : list) {
        w.put(std::uint8_t(e.primitive.kind));
        w.put(e.primitive.id);
        w.box(e.box);
      }
    }
    return std::move(w.bytes());
  }

  static void decodeTable(Reader& r, P2MIndex& idx) {
    idx.table_.lists.resize(r.count(8));
    if (idx.table_.lists.size() != idx.mesh_.vertexCount())
      throw IndexFormatError(IndexErrorCode::Corrupted, "table size does not match mesh");
    for (auto& list : idx.table_.lists) {
      list.resize(r.count(53));
      for (auto& e : list) {
        const auto kind = r.get<std::uint8_t>();
        e.primitive.id = r.get<Index>();
        e.box = r.box();
        if (kind == std::uint8_t(PrimitiveKind::Edge) && e.primitive.id < idx.mesh_.edgeCount())
          e.primitive.kind = PrimitiveKind::Edge;
        else if (kind == std::uint8_t(PrimitiveKind::Face) && e.primitive.id < idx.mesh_.faceCount())
          e.primitive.kind = PrimitiveKind::Face;
        else
          throw IndexFormatError(IndexErrorCode::Corrupted, "table entry references an invalid primitive");
      }
    }
  }

  static std::string encodeRTrees(const P2MIndex& idx) {
    Writer w;
    w.put<std::uint64_t>(idx.rtrees_.size());
    for (const RTree& t : idx.rtrees_) {
      w.put<std::uint64_t>(t.nodes().size());
      for (const auto& n : t.nodes()) {
        w.box(n.box);
        w.put(n.first);
        w.put(n.count);
        w.put(n.leaf);
      }
      w.put<std::uint64_t>(t.items().size());
      for (auto i : t.items()) w.put(i);
    }
    return std::move(w.bytes());
  }

  static void decodeRTrees(Reader& r, P2MIndex& idx) {
    idx.rtrees_.resize(r.count(16));
    if (idx.rtrees_.size() != idx.mesh_.vertexCount())
      throw IndexFormatError(IndexErrorCode::Corrupted, "R-tree count does not match mesh");
    for (std::size_t v = 0; v < idx.rtrees_.size(); ++v) {
      std::vector<RTree::Node> nodes(r.count(55));
      for (auto& n : nodes) {
        n.box = r.box();
        n.first = r.get<std::uint32_t>();
        n.count = r.get<std::uint16_t>();
        n.leaf = r.get<std::uint8_t>();
      }
      std::vector<std::uint32_t> items(r.count(4));
      for (auto& i : items) i = r.get<std::uint32_t>();
      const std::size_t listSize = idx.table_.lists[v].size();
      if (items.size() != listSize) throw IndexFormatError(IndexErrorCode::Corrupted, "R-tree does not match its list");
      for (auto i : items)
        if (i >= listSize) throw IndexFormatError(IndexErrorCode::Corrupted, "R-tree item out of range");
      for (const auto& n : nodes) {
        const std::size_t limit = n.leaf ? items.size() : nodes.size();
        if (std::size_t(n.first) + n.count > limit) throw IndexFormatError(IndexErrorCode::Corrupted, "R-tree node out of range");
      }
      std::vector<Aabb> boxes;
      boxes.reserve(listSize);
      for (const auto& entry : idx.table_.lists[v]) boxes.push_back(entry.box);
      idx.rtrees_[v] = RTree::fromParts(std::move(nodes), std::move(items), boxes);
    }
  }

  static std::string encodeMeta(const P2MIndex& idx) {
    Writer w;
    w.vec(idx.meta_.center);
    w.put(idx.meta_.halfExtent);
    w.put(idx.meta_.tolerance);
    w.put(idx.meta_.leafSize);
    w.put(idx.meta_.fanout);
    return std::move(w.bytes());
  }

  static void decodeMeta(Reader& r, P2MIndex& idx) {
    idx.meta_.center = r.vec();
    idx.meta_.halfExtent = r.get<double>();
    idx.meta_.tolerance = r.get<double>();
    idx.meta_.leafSize = r.get<std::uint32_t>();
    idx.meta_.fanout = r.get<std::uint32_t>();
  }
};

std::string encodeIndex(const P2MIndex& index) {
  const std::array<std::pair<std::uint32_t, std::string>, kSectionCount> sections{{
      {kMesh, IndexCodec::encodeMesh(index)},
      {kKdTree, IndexCodec::encodeKdTree(index)},
      {kTable, IndexCodec::encodeTable(index)},
      {kRTrees, IndexCodec::encodeRTrees(index)},
      {kMeta, IndexCodec::encodeMeta(index)},
  }};
  Writer w;
  w.bytes().append(kMagic, 4);
  w.put(kIndexFormatVersion);
  w.put(kSectionCount);
  std::string body;
  for (const auto& [id, bytes] : sections) {
    w.put(id);
    w.put<std::uint64_t>(bytes.size());
    body += bytes;
  }
  w.put(fnv1a(body.data(), body.size()));
  w.bytes() += body;
  return std::move(w.bytes());
}

void saveIndex(const P2MIndex& index, const std::filesystem::path& path) {
  const std::string bytes = encodeIndex(index);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IndexFormatError(IndexErrorCode::Io, "cannot write index file " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw IndexFormatError(IndexErrorCode::Io, "failed writing index file " + path.string());
}

P2MIndex decodeIndex(const std::string& bytes) {
  constexpr std::size_t headerSize = 4 + 4 + 4 + kSectionCount * 12 + 8;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    if (bytes.size() < 4 && std::memcmp(bytes.data(), kMagic, bytes.size()) == 0)
      throw IndexFormatError(IndexErrorCode::Truncated, "index file truncated in header");
    throw IndexFormatError(IndexErrorCode::BadMagic, "not a P2M index file (bad magic)");
  }
  if (bytes.size() < headerSize) throw IndexFormatError(IndexErrorCode::Truncated, "index file truncated in header");
  Reader head(bytes.data() + 4, headerSize - 4);
  const auto version = head.get<std::uint32_t>();
  if (version != kIndexFormatVersion)
    throw IndexFormatError(IndexErrorCode::VersionMismatch,
                           "index format version " + std::to_string(version) + ", expected " + std::to_string(kIndexFormatVersion));
  if (head.get<std::uint32_t>() != kSectionCount)
    throw IndexFormatError(IndexErrorCode::Corrupted, "unexpected section count");
  std::array<std::pair<std::uint32_t, std::uint64_t>, kSectionCount> table;
  std::uint64_t bodySize = 0;
  for (auto& [id, len] : table) {
    id = head.get<std::uint32_t>();
    len = head.get<std::uint64_t>();
    bodySize += len;
  }
  const auto checksum = head.get<std::uint64_t>();
  if (bytes.size() - headerSize < bodySize) throw IndexFormatError(IndexErrorCode::Truncated, "index file truncated");
  if (bytes.size() - headerSize > bodySize) throw IndexFormatError(IndexErrorCode::Corrupted, "trailing bytes after index body");
  if (fnv1a(bytes.data() + headerSize, bodySize) != checksum)
    throw IndexFormatError(IndexErrorCode::Corrupted, "index checksum mismatch");

  P2MIndex idx;
  std::size_t offset = headerSize;
  const std::uint32_t expected[kSectionCount] = {kMesh, kKdTree, kTable, kRTrees, kMeta};
  for (std::size_t s = 0; s < kSectionCount; ++s) {
    const auto [id, len] = table[s];
    if (id != expected[s]) throw IndexFormatError(IndexErrorCode::Corrupted, "unexpected section order");
    Reader r(bytes.data() + offset, len);
    switch (id) {
      case kMesh: IndexCodec::decodeMesh(r, idx); break;
      case kKdTree: IndexCodec::decodeKdTree(r, idx); break;
      case kTable: IndexCodec::decodeTable(r, idx); break;
      case kRTrees: IndexCodec::decodeRTrees(r, idx); break;
      case kMeta: IndexCodec::decodeMeta(r, idx); break;
    }
    if (!r.done()) throw IndexFormatError(IndexErrorCode::Corrupted, "section length mismatch");
    offset += len;
  }
  return idx;
}

P2MIndex loadIndex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexFormatError(IndexErrorCode::Io, "cannot open index file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decodeIndex(ss.str());
}

}  // namespace p2m
