#pragma once

// Five-parameter single-diode model: reference-to-operating translation,
// implicit I-V solves, maximum power point search and module-to-array scaling.

namespace pvprof {

namespace constants {
inline constexpr double kBoltzmannJ = 1.380649e-23;         // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kBoltzmannEv = kBoltzmannJ / kElementaryCharge;
inline constexpr double kBandGapRef = 1.121;                 // eV, silicon
inline constexpr double kBandGapTempCoeff = 0.0002677;       // 1/K
inline constexpr double kIrradianceRef = 1000.0;             // W/m^2
inline constexpr double kTempRefC = 25.0;
inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kNightShuntCap = 1e8;                // Ohm
inline constexpr double kResidualTolerance = 1e-9;           // A
}  // namespace constants

// Parameters at reference conditions (1000 W/m^2, 25 C), module level.
struct SdmParamsRef {
  double i_ph_ref = 0.0;  // A
  double i_0_ref = 0.0;   // A
  double r_s = 0.0;       // Ohm
  double r_sh_ref = 0.0;  // Ohm
  double n_diode = 0.0;

  bool operator==(const SdmParamsRef&) const = default;
};

struct OperatingConditions {
  double g_poa = 0.0;   // W/m^2
  double t_cell = 25.0; // C
};

struct SdmParamsOperating {
  double i_ph = 0.0;
  double i_0 = 0.0;
  double r_s = 0.0;
  double r_sh = 0.0;
  double a_mod = 0.0;  // n * Ns * k * T / q, volts
};

struct ArrayTopology {
  int cells_in_series = 60;
  int modules_per_string = 1;
  int strings_in_parallel = 1;

  bool operator==(const ArrayTopology&) const = default;
};

struct IvPoint {
  double v = 0.0;
  double i = 0.0;
  double p = 0.0;
};

struct ArrayOperatingPoint {
  double v_dc = 0.0;
  double i_dc = 0.0;
  double power() const { return v_dc * i_dc; }
};

// Throw ConfigError when the invariants of the type are violated.
void validate(const SdmParamsRef& params);
void validate(const OperatingConditions& cond);
void validate(const ArrayTopology& topo);

// De Soto auxiliary equations without air-mass or incidence-angle modifiers.
// alpha_isc is the short-circuit current temperature coefficient in A/C.
SdmParamsOperating translate_to_operating(const SdmParamsRef& params, const OperatingConditions& cond,
                                          int cells_in_series, double alpha_isc = 0.0);

// i_ph - i_0 (exp((v + i r_s)/a) - 1) - (v + i r_s)/r_sh - i
double diode_residual(double v, double i, const SdmParamsOperating& op);

// Terminal current from the diode-node voltage v_d = v + i r_s (explicit).
double current_at_diode_voltage(double v_d, const SdmParamsOperating& op);

double solve_current(double v, const SdmParamsOperating& op);
double solve_voltage(double i, const SdmParamsOperating& op);
double open_circuit_voltage(const SdmParamsOperating& op);
double short_circuit_current(const SdmParamsOperating& op);

// Maximum power point on [0, Voc]. Returns the zero point for a dark module.
IvPoint find_mpp(const SdmParamsOperating& op);

// Uniform array: module MPP voltage times modules per string, current times
// parallel strings.
ArrayOperatingPoint simulate_array_mpp(const SdmParamsRef& params, const ArrayTopology& topo,
                                       const OperatingConditions& cond, double alpha_isc = 0.0);

}  // namespace pvprof
