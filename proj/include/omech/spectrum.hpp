#pragma once

#include <string>

#include <Eigen/Core>

namespace omech {

// A sampled one-sided PSD. freq is the offset from `reference` in Hz,
// values are quanta/(s Hz) when device-referred.
struct Spectrum {
  Eigen::ArrayXd freq;
  Eigen::ArrayXd values;
  double rbw = 0;    // resolution bandwidth, 0 means unconvolved
  double floor = 0;  // flat background already included in values
  double reference = 0;
  std::string label;

  Eigen::Index size() const { return freq.size(); }
};

// Throws SchemaMismatch if the grid is not strictly increasing or values are not finite.
void check_spectrum(const Spectrum& s);

// n points from center - half_width to center + half_width inclusive.
Eigen::ArrayXd uniform_grid(double center, double half_width, Eigen::Index n);

}  // namespace omech
