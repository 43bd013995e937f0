#pragma once

// Procedural test meshes: the shapes used by the tests, the acceptance suite
// and `p2m gen`.

#include "p2m/mesh.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace p2m::corpus {

/// Axis-aligned unit cube [0,1]^3, 8 vertices and 12 faces.
Mesh cube();

/// Regular tetrahedron.
Mesh tetrahedron();

/// Subdivided icosahedron projected on the unit sphere; 20 * 4^level faces.
Mesh icosphere(int level);

/// Icosphere with every vertex pushed radially by a smooth low-frequency
/// bump field plus a small seeded jitter (scan-like surface).
Mesh bumpySphere(int level, std::uint64_t seed, double bump = 0.08, double jitter = 0.004);

/// Torus with nu x nv quads split into 2 nu nv triangles. Small nv with large
/// nu gives long skinny triangles.
Mesh torus(int nu, int nv, double major = 1.0, double minor = 0.3);

/// Torus with radial bumps and jitter on the tube surface.
Mesh bumpyTorus(int nu, int nv, std::uint64_t seed, double major = 1.0, double minor = 0.3);

/// Extruded spur gear with a central bore; a CAD-like part with sharp
/// creases, flat caps and long thin cap triangles.
Mesh gear(int teeth, double outer = 1.0, double root = 0.8, double bore = 0.3, double thickness = 0.25);

/// Shapes available by name through `p2m gen`.
std::vector<std::string> names();

/// Builds a named shape (see names()); throws std::invalid_argument.
Mesh byName(const std::string& name);

}  // namespace p2m::corpus
