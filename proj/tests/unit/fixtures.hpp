#pragma once

#include <cmath>
#include <random>

#include "pvprof/core_sdm.hpp"

namespace pvprof::testing {

// 72-cell c-Si module used as the reference set in the oracle script.
inline constexpr SdmParamsRef kReferenceModule{9.5, 3e-10, 0.35, 450.0, 1.0};
inline constexpr int kCells = 72;

inline double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

// c-Si-like random draw inside the default fitting box.
inline SdmParamsRef random_csi_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SdmParamsRef p;
  p.i_ph_ref = 4.0 + 8.0 * u(rng);
  p.i_0_ref = std::pow(10.0, -12.0 + 3.5 * u(rng));
  p.r_s = 0.05 + 0.75 * u(rng);
  p.r_sh_ref = std::pow(10.0, 2.0 + 2.0 * u(rng));
  p.n_diode = 0.9 + 0.5 * u(rng);
  return p;
}

// Dense scan of p = v * i(v) over [0, voc] with `points` samples.
inline double grid_scan_pmax(const SdmParamsOperating& op, int points) {
  const double voc = open_circuit_voltage(op);
  double best = 0.0;
  for (int k = 0; k < points; ++k) {
    const double v = voc * k / (points - 1);
    best = std::max(best, v * solve_current(v, op));
  }
  return best;
}

}  // namespace pvprof::testing
