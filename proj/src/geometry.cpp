#include "hpss/geometry.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace hpss {
namespace {

constexpr double kDensitySlack = 1e-12;

std::size_t segments_for(double length, int per_wavelength) {
  // Guard against ceil(10.000000000001) when the product is integral.
  return static_cast<std::size_t>(std::ceil(length * per_wavelength - 1e-9));
}

void check_density(int per_wavelength, const char* what) {
  if (per_wavelength < kMinElementsPerWavelength)
    throw Error(std::string(what) + ": at least " + std::to_string(kMinElementsPerWavelength) +
                " elements per wavelength required, got " + std::to_string(per_wavelength));
}

double max_extent(const Mesh& mesh, const Element& e) {
  if (mesh.kind == MeshKind::Surface) return mesh.wavelength / kMinElementsPerWavelength;
  return mesh.wavelength / (kMinElementsPerWavelength * std::sqrt(e.eps_r.real()));
}

}  // namespace

void Mesh::validate() const {
  if (!(wavelength > 0.0)) throw Error("mesh: wavelength must be positive");
  for (std::size_t i = 0; i < elements.size(); ++i) {
    const Element& e = elements[i];
    if (!(e.extent > 0.0)) throw Error("mesh: element " + std::to_string(i) + " has extent <= 0");
    if (kind == MeshKind::Surface && e.eps_r != Complex(1.0, 0.0))
      throw Error("mesh: surface element " + std::to_string(i) + " must have eps_r = 1");
    if (kind == MeshKind::Volume && e.eps_r.real() < 1.0)
      throw Error("mesh: volume element " + std::to_string(i) + " has Re(eps_r) < 1");
    if (e.extent > max_extent(*this, e) * (1.0 + kDensitySlack))
      throw Error("mesh: element " + std::to_string(i) + " violates the lambda/10 density rule");
  }
}

Mesh discretize_strip(double length_in_wavelengths, int elements_per_wavelength,
                      double wavelength) {
  if (!(length_in_wavelengths > 0.0)) throw Error("strip: length must be positive");
  check_density(elements_per_wavelength, "strip");
  Mesh mesh;
  mesh.kind = MeshKind::Surface;
  mesh.wavelength = wavelength;
  const std::size_t n = segments_for(length_in_wavelengths, elements_per_wavelength);
  const double length = length_in_wavelengths * wavelength;
  const double d = length / static_cast<double>(n);
  mesh.elements.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    mesh.elements.push_back({Point(-0.5 * length + (static_cast<double>(i) + 0.5) * d, 0.0), d});
  mesh.validate();
  return mesh;
}

Mesh discretize_circle(double radius_in_wavelengths, int elements_per_wavelength,
                       double wavelength) {
  if (!(radius_in_wavelengths > 0.0)) throw Error("circle: radius must be positive");
  check_density(elements_per_wavelength, "circle");
  Mesh mesh;
  mesh.kind = MeshKind::Surface;
  mesh.wavelength = wavelength;
  const std::size_t n =
      segments_for(2.0 * kPi * radius_in_wavelengths, elements_per_wavelength);
  const double r = radius_in_wavelengths * wavelength;
  const double dphi = 2.0 * kPi / static_cast<double>(n);
  mesh.elements.reserve(n);
  // Match points sit on the circle; extent is the arc length they represent.
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = (static_cast<double>(i) + 0.5) * dphi;
    mesh.elements.push_back({Point(r * std::cos(phi), r * std::sin(phi)), r * dphi});
  }
  mesh.validate();
  return mesh;
}

namespace {

std::vector<Point> raster_disk(double r, double side) {
  std::vector<Point> centers;
  const long reach = static_cast<long>(std::ceil(r / side)) + 1;
  for (long j = -reach; j <= reach; ++j)
    for (long i = -reach; i <= reach; ++i) {
      const Point c(static_cast<double>(i) * side, static_cast<double>(j) * side);
      if (c.norm() < r) centers.push_back(c);
    }
  return centers;
}

}  // namespace

Mesh discretize_disk(double radius_in_wavelengths, int cells_per_wavelength, Complex eps_r,
                     const DiskOptions& options) {
  if (!(radius_in_wavelengths > 0.0)) throw Error("disk: radius must be positive");
  if (eps_r.real() < 1.0) throw Error("disk: Re(eps_r) must be >= 1");
  check_density(cells_per_wavelength, "disk");
  const double lambda = options.wavelength;
  const double r = radius_in_wavelengths * lambda;
  const double side0 = lambda / (cells_per_wavelength * std::sqrt(eps_r.real()));

  double side = side0;
  std::vector<Point> centers = raster_disk(r, side);
  if (options.match_area) {
    const double target = kPi * r * r;
    double best_err = std::abs(static_cast<double>(centers.size()) * side * side / target - 1.0);
    double best_side = side;
    for (int t = 1; t < 200 && best_err >= 0.005; ++t) {
      const double trial = side0 * (1.0 - 0.002 * t);
      const auto c = raster_disk(r, trial);
      const double err = std::abs(static_cast<double>(c.size()) * trial * trial / target - 1.0);
      if (err < best_err) {
        best_err = err;
        best_side = trial;
      }
    }
    side = best_side;
    centers = raster_disk(r, side);
  }
  if (centers.empty()) throw Error("disk: no cell centers fall inside the disk");

  Mesh mesh;
  mesh.kind = MeshKind::Volume;
  mesh.wavelength = lambda;
  mesh.elements.reserve(centers.size());
  for (const Point& c : centers)
    mesh.elements.push_back({c, side, options.permittivity ? options.permittivity(c) : eps_r});
  mesh.validate();
  return mesh;
}

void write_mesh_csv(const Mesh& mesh, std::ostream& out) {
  out << "cx,cy,extent,eps_r_re,eps_r_im\n";
  out << std::setprecision(17);
  for (const Element& e : mesh.elements)
    out << e.center.x() << ',' << e.center.y() << ',' << e.extent << ',' << e.eps_r.real() << ','
        << e.eps_r.imag() << '\n';
}

Mesh read_mesh_csv(std::istream& in, double wavelength) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("cx,cy,extent,eps_r_re,eps_r_im", 0) != 0)
    throw Error("mesh csv: missing header 'cx,cy,extent,eps_r_re,eps_r_im'");
  Mesh mesh;
  mesh.wavelength = wavelength;
  mesh.kind = MeshKind::Surface;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    double v[5];
    for (int k = 0; k < 5; ++k) {
      std::string field;
      if (!std::getline(ss, field, ',')) throw Error("mesh csv: row " + std::to_string(row) + " has fewer than 5 fields");
      try {
        v[k] = std::stod(field);
      } catch (const std::exception&) {
        throw Error("mesh csv: row " + std::to_string(row) + " has a non-numeric field");
      }
    }
    Element e{Point(v[0], v[1]), v[2], Complex(v[3], v[4])};
    if (e.eps_r != Complex(1.0, 0.0)) mesh.kind = MeshKind::Volume;
    mesh.elements.push_back(e);
  }
  if (mesh.empty()) throw Error("mesh csv: no elements");
  mesh.validate();
  return mesh;
}

}  // namespace hpss
