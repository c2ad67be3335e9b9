#pragma once

#include "hpss/kernels.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace hpss {

inline constexpr double kRcsFloorDb = -200.0;

/// Echo width normalized to the wavelength, in dB, on a strictly increasing grid.
struct RcsCurve {
  std::vector<double> angles;  // radians
  std::vector<double> sigma_db;
  std::string label;
};

/// `count` angles from start to stop inclusive, in degrees, returned in radians.
std::vector<double> angle_grid_deg(double start_deg, double stop_deg, int count);

/// F(phi) = sum_j J_j w_j exp(j k rho(phi) . c_j); current in mesh order.
std::vector<Complex> far_field(const KernelSpec& spec, const CVector& current,
                               const std::vector<double>& angles);

/// sigma / lambda = k eta^2 |F|^2 / (4 lambda), in dB with a -200 dB floor.
RcsCurve bistatic_rcs(const KernelSpec& spec, const CVector& current,
                      const std::vector<double>& angles, std::string label = {});

/// TM-z eigenfunction series for a PEC circular cylinder lit from `incidence`
/// (the same convention as Excitation::angle).
RcsCurve series_pec_cylinder(double radius_in_wavelengths, const std::vector<double>& angles,
                             double incidence = 0.0, int extra_terms = 20);

/// Two-region series for a homogeneous lossless dielectric cylinder.
RcsCurve series_dielectric_cylinder(double radius_in_wavelengths, Complex eps_r,
                                    const std::vector<double>& angles, double incidence = 0.0,
                                    int extra_terms = 20);

/// RMS of the dB differences; the angle grids must match.
double rcs_rms_error(const RcsCurve& a, const RcsCurve& b);

/// CSV "angle_deg,sigma_dB".
void write_rcs_csv(const RcsCurve& curve, std::ostream& out);

}  // namespace hpss
