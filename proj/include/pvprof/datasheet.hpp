#pragma once

#include "pvprof/core_sdm.hpp"

namespace pvprof {

// Module datasheet values at STC.
struct Datasheet {
  double v_oc = 0.0;       // V
  double i_sc = 0.0;       // A
  double v_mp = 0.0;       // V
  double i_mp = 0.0;       // A
  double alpha_isc = 0.0;  // A/C
  double beta_voc = 0.0;   // V/C
  int cells_in_series = 0;

  bool operator==(const Datasheet&) const = default;
};

// Throws ConfigError unless 0 < v_mp < v_oc, 0 < i_mp < i_sc, the MPP
// product is below v_oc * i_sc and cells_in_series >= 1.
void validate(const Datasheet& ds);

// Datasheet a module with these parameters would carry: Isc, Voc and MPP at
// STC; beta_voc from the modeled Voc at 35 C minus 25 C, divided by 10.
Datasheet datasheet_from_params(const SdmParamsRef& params, int cells_in_series, double alpha_isc = 0.0);

struct DesotoFitReport {
  SdmParamsRef params;
  int iterations = 0;
  double max_residual = 0.0;  // largest scaled condition residual at exit
};

// Solves the five STC conditions (Isc, Voc, MPP point, zero dP/dV at MPP,
// Voc temperature slope) by damped Newton iteration. Throws NumericError on
// non-convergence after 100 iterations, ConfigError for invalid datasheets.
DesotoFitReport fit_desoto_from_datasheet_report(const Datasheet& ds);
SdmParamsRef fit_desoto_from_datasheet(const Datasheet& ds);

}  // namespace pvprof
