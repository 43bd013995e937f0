// p2m: build, query, benchmark and inspect point-to-mesh distance indices.

#include "p2m/bvh.hpp"
#include "p2m/corpus.hpp"
#include "p2m/index.hpp"
#include "p2m/parallel.hpp"
#include "p2m/query.hpp"
#include "p2m/sampling.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace p2m;

namespace {

using Clock = std::chrono::steady_clock;

double secondsSince(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const char* kindName(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::Vertex: return "vertex";
    case PrimitiveKind::Edge: return "edge";
    case PrimitiveKind::Face: return "face";
  }
  return "?";
}

bool sameDistance(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(std::abs(a), std::abs(b)); }

struct Common {
  double weldEps = 0.0;
  std::uint32_t leafSize = 8;
  std::uint32_t fanout = 8;
  unsigned threads = defaultThreadCount();
};

void addBuildFlags(CLI::App* cmd, Common& c) {
  cmd->add_option("--weld-eps", c.weldEps, "Merge vertices closer than this (0 = exact duplicates only)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--leaf-size", c.leafSize, "KD-tree leaf bucket size")->check(CLI::PositiveNumber);
  cmd->add_option("--fanout", c.fanout, "R-tree fanout")->check(CLI::Range(2u, 64u));
  cmd->add_option("--threads", c.threads, "Worker threads (default: P2M_THREADS or hardware)")
      ->check(CLI::PositiveNumber);
}

BuildOptions buildOptions(const Common& c) {
  BuildOptions o;
  o.leafSize = c.leafSize;
  o.fanout = c.fanout;
  o.threads = c.threads;
  return o;
}

Mesh readMesh(const std::string& path, const Common& c) {
  LoadReport report;
  Mesh mesh = loadMesh(path, c.weldEps, &report);
  if (report.degenerateFaces || report.duplicateFaces)
    std::cerr << "note: dropped " << report.degenerateFaces << " degenerate and " << report.duplicateFaces
              << " duplicate faces\n";
  return mesh;
}

bool isIndexFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string(magic, 4) == "P2M1";
}

std::vector<Vec3> readPoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open points file '" + path + "'");
  std::vector<Vec3> pts;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    Vec3 p;
    std::string rest;
    if (!(ss >> p.x() >> p.y() >> p.z()) || (ss >> rest) || !p.allFinite())
      throw std::runtime_error(path + ":" + std::to_string(lineNo) + ": expected three finite numbers \"x y z\"");
    pts.push_back(p);
  }
  return pts;
}

void printTimings(const BuildTimings& t, std::ostream& out) {
  out << "phase,seconds\n";
  out << "kdtree," << t.kdtree << '\n';
  out << "voronoi," << t.voronoi << '\n';
  out << "interception," << t.interception << '\n';
  out << "rtree," << t.rtree << '\n';
  out << "total," << t.total << '\n';
}

void printMemory(const P2MIndex& idx, std::ostream& out) {
  const auto m = idx.memoryUsage();
  out << "structure,bytes\n";
  out << "mesh," << m.mesh << '\n';
  out << "kdtree," << m.kdtree << '\n';
  out << "table," << m.table << '\n';
  out << "rtrees," << m.rtrees << '\n';
}

// build ---------------------------------------------------------------------

int cmdBuild(const std::string& meshPath, const std::string& outPath, const Common& c) {
  Mesh mesh = readMesh(meshPath, c);
  std::cerr << "mesh: " << mesh.vertexCount() << " vertices, " << mesh.edgeCount() << " edges, " << mesh.faceCount()
            << " faces\n";
  BuildResult r = buildIndex(std::move(mesh), buildOptions(c));
  saveIndex(r.index, outPath);
  printTimings(r.timings, std::cout);
  std::cout << '\n';
  printMemory(r.index, std::cout);
  return 0;
}

// query ---------------------------------------------------------------------

int cmdQuery(const std::string& input, const std::string& pointsPath, const std::string& outPath, bool verify,
             const Common& c) {
  const std::vector<Vec3> pts = readPoints(pointsPath);
  P2MIndex index = isIndexFile(input) ? loadIndex(input) : buildIndex(readMesh(input, c), buildOptions(c)).index;
  const BatchResult batch = queryBatch(index, pts, c.threads);

  std::ofstream file;
  if (!outPath.empty()) {
    file.open(outPath);
    if (!file) throw std::runtime_error("cannot write '" + outPath + "'");
  }
  std::ostream& out = outPath.empty() ? std::cout : file;
  char buf[256];
  out << "idx,distance,kind,prim_id,cx,cy,cz\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const QueryResult& r = batch.results[i];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%s,%u,%.17g,%.17g,%.17g\n", i, r.distance, kindName(r.primitive.kind),
                  r.primitive.id, r.closest.x(), r.closest.y(), r.closest.z());
    out << buf;
  }

  if (!verify) return 0;
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (!sameDistance(bruteForceQuery(index.mesh(), pts[i]).distance, batch.results[i].distance)) ++mismatches;
  std::cerr << "verify: " << mismatches << " mismatches in " << pts.size() << " queries\n";
  return mismatches == 0 ? 0 : 3;
}

// bench ---------------------------------------------------------------------

struct SolverStats {
  double average = 0, median = 0, p99 = 0;  // microseconds
};

template <typename Fn>
SolverStats timeQueries(std::size_t n, Fn&& fn) {
  std::vector<double> us(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto t0 = Clock::now();
    fn(i);
    us[i] = secondsSince(t0) * 1e6;
  }
  SolverStats s;
  if (n == 0) return s;
  double sum = 0;
  for (double u : us) sum += u;
  s.average = sum / double(n);
  std::sort(us.begin(), us.end());
  s.median = us[n / 2];
  s.p99 = us[std::min(n - 1, std::size_t(std::ceil(0.99 * double(n))) - 1)];
  return s;
}

std::vector<double> parseList(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

struct BenchConfig {
  std::size_t queries = 1000000;
  double boxScale = 10;
  std::uint64_t seed = 1;
  std::string baseline = "bvh";
  std::size_t baselineQueries = 0;  // 0 = same as queries
  bool verify = false;
  std::string sweep;
  std::string threadSweep;
};

int cmdBench(const std::string& meshPath, const BenchConfig& cfg, const Common& c) {
  Mesh mesh = readMesh(meshPath, c);
  const Aabb bounds = mesh.bounds();
  BuildResult built = buildIndex(std::move(mesh), buildOptions(c));
  const P2MIndex& index = built.index;

  std::cout << "# mesh " << meshPath << ": " << index.mesh().vertexCount() << " vertices, "
            << index.mesh().faceCount() << " faces\n";
  printTimings(built.timings, std::cout);
  std::cout << '\n';
  printMemory(index, std::cout);
  std::cout << '\n';

  const std::vector<Vec3> pts = samplePoints(bounds, cfg.boxScale, cfg.queries, cfg.seed);
  std::vector<QueryResult> ours(pts.size());
  const SolverStats p2mStats = timeQueries(pts.size(), [&](std::size_t i) { ours[i] = p2mQuery(index, pts[i]); });

  std::cout << "solver,queries,avg_us,median_us,p99_us,speedup,mismatches\n";
  std::printf("p2m,%zu,%.4f,%.4f,%.4f,1,0\n", pts.size(), p2mStats.average, p2mStats.median, p2mStats.p99);
  std::fflush(stdout);

  std::size_t totalMismatches = 0;
  if (cfg.baseline != "none") {
    const std::size_t nb = cfg.baselineQueries == 0 ? pts.size() : std::min(cfg.baselineQueries, pts.size());
    std::vector<QueryResult> base(nb);
    SolverStats s;
    if (cfg.baseline == "bvh") {
      const BvhTree bvh(index.mesh());
      s = timeQueries(nb, [&](std::size_t i) { base[i] = bvh.query(pts[i]); });
    } else {
      s = timeQueries(nb, [&](std::size_t i) { base[i] = bruteForceQuery(index.mesh(), pts[i]); });
    }
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < nb; ++i)
      if (!sameDistance(base[i].distance, ours[i].distance)) ++mismatches;
    totalMismatches += mismatches;
    std::printf("%s,%zu,%.4f,%.4f,%.4f,%.3f,%zu\n", cfg.baseline.c_str(), nb, s.average, s.median, s.p99,
                s.average / p2mStats.average, mismatches);
  }

  if (cfg.verify && cfg.baseline != "brute") {
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!sameDistance(bruteForceQuery(index.mesh(), pts[i]).distance, ours[i].distance)) ++mismatches;
    totalMismatches += mismatches;
    std::printf("verify,%zu,,,,,%zu\n", pts.size(), mismatches);
  }

  if (!cfg.sweep.empty()) {
    std::cout << "\nbox_scale,avg_us,kd_us,resolve_us,kd_nodes,candidates,tested\n";
    for (double scale : parseList(cfg.sweep)) {
      const auto sp = samplePoints(bounds, scale, cfg.queries, cfg.seed);
      const BatchResult b = queryBatch(index, sp, 1);
      const double n = double(sp.size());
      std::printf("%g,%.4f,%.4f,%.4f,%.2f,%.3f,%.3f\n", scale, b.timings.wall / n * 1e6, b.timings.kdSearch / n * 1e6,
                  b.timings.resolve / n * 1e6, double(b.counters.kdNodes) / n, double(b.counters.candidates) / n,
                  double(b.counters.tested) / n);
    }
  }

  if (!cfg.threadSweep.empty()) {
    std::cout << "\nthreads,wall_s,queries_per_s,mismatches\n";
    for (double t : parseList(cfg.threadSweep)) {
      const BatchResult b = queryBatch(index, pts, unsigned(t));
      std::size_t mismatches = 0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (!(b.results[i] == ours[i])) ++mismatches;
      totalMismatches += mismatches;
      std::printf("%u,%.4f,%.1f,%zu\n", unsigned(t), b.timings.wall, double(pts.size()) / b.timings.wall, mismatches);
    }
  }
  return totalMismatches == 0 ? 0 : 3;
}

// stats ---------------------------------------------------------------------

int cmdStats(const std::string& meshPath, const std::string& histogramPath, const Common& c) {
  Mesh mesh = readMesh(meshPath, c);
  const MeshStats ms = meshStats(mesh);
  BuildOptions opts = buildOptions(c);
  opts.cellVolumes = true;
  BuildResult built = buildIndex(std::move(mesh), opts);
  const TableStats ts = tableStats(built.index.table(), built.cellVolumes);

  std::cout << "vertices,edges,faces,quality_mean,quality_min,bad_triangle_fraction\n";
  std::printf("%zu,%zu,%zu,%.6f,%.6f,%.6f\n\n", ms.vertexCount, ms.edgeCount, ms.faceCount, ms.meanQuality,
              ms.minQuality, ms.badTriangleFraction);
  std::cout << "kind,avg,weighted_avg,max\n";
  std::printf("edges,%.3f,%.3f,%zu\n", ts.edges.average, ts.edges.weightedAverage, ts.edges.maximum);
  std::printf("faces,%.3f,%.3f,%zu\n", ts.faces.average, ts.faces.weightedAverage, ts.faces.maximum);
  std::printf("total,%.3f,%.3f,%zu\n\n", ts.total.average, ts.total.weightedAverage, ts.total.maximum);
  std::cout << "length_from,length_to,vertices\n";
  const auto bins = listLengthHistogram(built.index.table());
  for (std::size_t k = 0; k < bins.size(); ++k)
    std::printf("%zu,%zu,%zu\n", k == 0 ? std::size_t(0) : std::size_t(1) << k, (std::size_t(2) << k) - 1, bins[k]);

  if (!histogramPath.empty()) {
    std::ofstream out(histogramPath);
    if (!out) throw std::runtime_error("cannot write '" + histogramPath + "'");
    writeLengthHistogramCsv(built.index.table(), out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Point-to-mesh distance queries through nearest-vertex interception tables"};
  app.require_subcommand(1);
  Common common;

  std::string meshPath, outPath, pointsPath, histogramPath, shape;
  bool verify = false;

  auto* build = app.add_subcommand("build", "Preprocess a mesh into an index file");
  build->add_option("mesh", meshPath, "Mesh file (OBJ, PLY, STL)")->required();
  build->add_option("-o,--output", outPath, "Index file to write")->required();
  addBuildFlags(build, common);

  auto* query = app.add_subcommand("query", "Answer closest-point queries for a points file");
  query->add_option("input", meshPath, "Index file or mesh file")->required();
  query->add_option("points", pointsPath, "Points file, one \"x y z\" per line")->required();
  query->add_option("-o,--output", outPath, "CSV output (default stdout)");
  query->add_flag("--verify", verify, "Cross-check every query against brute force");
  addBuildFlags(query, common);

  BenchConfig bench;
  auto* benchCmd = app.add_subcommand("bench", "Time P2M queries against a baseline");
  benchCmd->add_option("mesh", meshPath, "Mesh file")->required();
  benchCmd->add_option("--queries", bench.queries, "Number of random queries")->check(CLI::PositiveNumber);
  benchCmd->add_option("--box-scale", bench.boxScale, "Sampling box scale relative to the mesh bbox")
      ->check(CLI::Range(1.0, 1e6));
  benchCmd->add_option("--seed", bench.seed, "Query sampling seed");
  benchCmd->add_option("--baseline", bench.baseline, "Baseline solver")
      ->check(CLI::IsMember({"brute", "bvh", "none"}));
  benchCmd->add_option("--baseline-queries", bench.baselineQueries,
                       "Time the baseline on the first N queries only (0 = all)");
  benchCmd->add_flag("--verify", bench.verify, "Cross-check every query against brute force");
  benchCmd->add_option("--sweep", bench.sweep, "Comma separated box scales for a cost sweep, e.g. 1.5,3,10");
  benchCmd->add_option("--thread-sweep", bench.threadSweep, "Comma separated thread counts, e.g. 1,2,4,8");
  addBuildFlags(benchCmd, common);

  auto* stats = app.add_subcommand("stats", "Interception-list statistics and triangle quality");
  stats->add_option("mesh", meshPath, "Mesh file")->required();
  stats->add_option("--histogram", histogramPath, "Write the exact list-length distribution as CSV");
  addBuildFlags(stats, common);

  auto* gen = app.add_subcommand("gen", "Write a procedural test mesh as OBJ");
  gen->add_option("shape", shape, "Shape name")->required()->check(CLI::IsMember(corpus::names()));
  gen->add_option("-o,--output", outPath, "OBJ file to write")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) return cmdBuild(meshPath, outPath, common);
    if (*query) return cmdQuery(meshPath, pointsPath, outPath, verify, common);
    if (*benchCmd) return cmdBench(meshPath, bench, common);
    if (*stats) return cmdStats(meshPath, histogramPath, common);
    if (*gen) {
      saveObj(corpus::byName(shape), outPath);
      return 0;
    }
  } catch (const OutOfDomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
