#include "pvprof/core_sdm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

using namespace constants;

constexpr double kGolden = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kMppBracket = 1e-9;             // V
constexpr int kMaxRootIterations = 200;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

std::string describe(const SdmParamsOperating& op) {
  std::ostringstream os;
  os.precision(17);
  os << "i_ph=" << op.i_ph << " i_0=" << op.i_0 << " r_s=" << op.r_s << " r_sh=" << op.r_sh
     << " a=" << op.a_mod;
  return os.str();
}

// Safeguarded Newton on a monotone decreasing function with a sign-changing
// bracket f(lo) >= 0 >= f(hi). fn(x, &df) returns f(x) and its derivative.
template <class F>
double decreasing_root(F&& fn, double lo, double hi, double x0) {
  double df = 0.0;
  double x = std::clamp(x0, lo, hi);
  double f = fn(x, &df);
  for (int iter = 0; iter < kMaxRootIterations; ++iter) {
    if (f == 0.0) return x;
    if (f > 0.0)
      lo = x;
    else
      hi = x;
    double next = x - f / df;
    bool newton_ok = std::isfinite(next) && next > lo && next < hi;
    if (!newton_ok) next = 0.5 * (lo + hi);
    double step = next - x;
    x = next;
    f = fn(x, &df);
    double scale = std::max({std::abs(x), std::abs(lo), std::abs(hi), 1e-300});
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * scale ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * scale)
      break;
  }
  return x;
}

// Diode-node voltage v_d for which the terminal current equals `current`.
double diode_voltage_for_current(double current, const SdmParamsOperating& op) {
  double excess = op.i_ph - current;
  if (excess <= 0.0) return 0.0;
  double hi = op.r_sh * excess;
  if (op.i_0 > 0.0) hi = std::min(hi, op.a_mod * std::log1p(excess / op.i_0));
  auto fn = [&](double vd, double* df) {
    double e = std::exp(vd / op.a_mod);
    *df = -op.i_0 / op.a_mod * e - 1.0 / op.r_sh;
    return op.i_ph - op.i_0 * std::expm1(vd / op.a_mod) - vd / op.r_sh - current;
  };
  return decreasing_root(fn, 0.0, hi, hi);
}

}  // namespace

void validate(const SdmParamsRef& p) {
  if (!finite_positive(p.i_ph_ref) || !finite_positive(p.i_0_ref) || !finite_positive(p.r_s) ||
      !finite_positive(p.r_sh_ref) || !finite_positive(p.n_diode))
    throw ConfigError("single-diode parameters must be finite and strictly positive");
  if (p.n_diode < 0.5 || p.n_diode > 2.5)
    throw ConfigError("diode ideality factor outside [0.5, 2.5]");
  if (p.i_0_ref >= p.i_ph_ref) throw ConfigError("saturation current must be below photocurrent");
}

void validate(const OperatingConditions& c) {
  if (!std::isfinite(c.g_poa) || c.g_poa < 0.0) throw ConfigError("irradiance must be finite and >= 0");
  if (!std::isfinite(c.t_cell) || c.t_cell < -60.0 || c.t_cell > 120.0)
    throw ConfigError("cell temperature outside [-60, 120] C");
}

void validate(const ArrayTopology& t) {
  if (t.cells_in_series < 1 || t.modules_per_string < 1 || t.strings_in_parallel < 1)
    throw ConfigError("array topology counts must be >= 1");
}

SdmParamsOperating translate_to_operating(const SdmParamsRef& params, const OperatingConditions& cond,
                                          int cells_in_series, double alpha_isc) {
  validate(params);
  validate(cond);
  if (cells_in_series < 1) throw ConfigError("cells_in_series must be >= 1");

  const double t_ref = kTempRefC + kKelvinOffset;
  const double t_k = cond.t_cell + kKelvinOffset;
  const double dt = t_k - t_ref;
  const double eg = kBandGapRef * (1.0 - kBandGapTempCoeff * dt);

  SdmParamsOperating op;
  op.r_s = params.r_s;
  op.a_mod = params.n_diode * cells_in_series * kBoltzmannJ * t_k / kElementaryCharge;
  op.i_0 = params.i_0_ref * std::pow(t_k / t_ref, 3) *
           std::exp(kBandGapRef / (kBoltzmannEv * t_ref) - eg / (kBoltzmannEv * t_k));
  if (cond.g_poa == 0.0) {
    op.i_ph = 0.0;
    op.r_sh = kNightShuntCap;
  } else {
    const double ratio = cond.g_poa / kIrradianceRef;
    op.i_ph = std::max(0.0, ratio * (params.i_ph_ref + alpha_isc * dt));
    op.r_sh = params.r_sh_ref / ratio;
  }
  return op;
}

double diode_residual(double v, double i, const SdmParamsOperating& op) {
  const double vd = v + i * op.r_s;
  return op.i_ph - op.i_0 * std::expm1(vd / op.a_mod) - vd / op.r_sh - i;
}

double current_at_diode_voltage(double v_d, const SdmParamsOperating& op) {
  return op.i_ph - op.i_0 * std::expm1(v_d / op.a_mod) - v_d / op.r_sh;
}

double solve_current(double v, const SdmParamsOperating& op) {
  if (!(v >= 0.0)) throw ConfigError("solve_current requires v >= 0");
  auto fn = [&](double i, double* df) {
    const double vd = v + i * op.r_s;
    const double e = std::exp(vd / op.a_mod);
    *df = -op.i_0 * op.r_s / op.a_mod * e - op.r_s / op.r_sh - 1.0;
    return op.i_ph - op.i_0 * std::expm1(vd / op.a_mod) - vd / op.r_sh - i;
  };
  double dummy = 0.0;
  double width = std::max(op.i_ph, 1e-6);
  double lo = -op.i_ph;
  double hi = 2.0 * op.i_ph;
  if (lo == hi) {
    lo = -width;
    hi = width;
  }
  int expansions = 0;
  while (fn(lo, &dummy) < 0.0) {
    lo -= width;
    width *= 2.0;
    if (++expansions > 80) throw NumericError("solve_current: no root bracket for " + describe(op));
  }
  width = std::max(op.i_ph, 1e-6);
  expansions = 0;
  while (fn(hi, &dummy) > 0.0) {
    hi += width;
    width *= 2.0;
    if (++expansions > 80) throw NumericError("solve_current: no root bracket for " + describe(op));
  }
  const double i = decreasing_root(fn, lo, hi, std::clamp(op.i_ph - v / op.r_sh, lo, hi));
  if (!(std::abs(diode_residual(v, i, op)) < kResidualTolerance)) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_current: residual above tolerance at v=" << v << " for " << describe(op);
    throw NumericError(os.str());
  }
  return i;
}

double solve_voltage(double i, const SdmParamsOperating& op) {
  if (!(i >= 0.0)) throw ConfigError("solve_voltage requires i >= 0");
  if (op.i_ph == 0.0) {
    if (i > 0.0) throw ConfigError("solve_voltage: current above short-circuit current");
    return 0.0;
  }
  const double isc = short_circuit_current(op);
  if (i > isc * (1.0 + 1e-12)) throw ConfigError("solve_voltage: current above short-circuit current");
  const double vd = diode_voltage_for_current(i, op);
  const double v = vd - i * op.r_s;
  if (!(std::abs(diode_residual(v, i, op)) < kResidualTolerance))
    throw NumericError("solve_voltage: residual above tolerance for " + describe(op));
  return v;
}

double open_circuit_voltage(const SdmParamsOperating& op) {
  if (op.i_ph <= 0.0) return 0.0;
  return diode_voltage_for_current(0.0, op);
}

double short_circuit_current(const SdmParamsOperating& op) { return solve_current(0.0, op); }

IvPoint find_mpp(const SdmParamsOperating& op) {
  if (op.i_ph <= 0.0) return {};

  // Search along the diode-node voltage, where current is explicit and the
  // terminal voltage v = v_d - i r_s is monotone in v_d.
  const double vd_lo = short_circuit_current(op) * op.r_s;
  const double vd_hi = open_circuit_voltage(op);
  auto power = [&](double vd) {
    const double i = current_at_diode_voltage(vd, op);
    return (vd - i * op.r_s) * i;
  };

  double a = vd_lo, b = vd_hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double pc = power(c), pd = power(d);
  while (b - a > kMppBracket) {
    if (pc >= pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - kGolden * (b - a);
      pc = power(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + kGolden * (b - a);
      pd = power(d);
    }
  }
  double vd = pc >= pd ? c : d;

  // Newton polish on dP/dv_d = 0 using analytic derivatives.
  for (int k = 0; k < 3; ++k) {
    const double e = std::exp(vd / op.a_mod);
    const double i = current_at_diode_voltage(vd, op);
    const double di = -op.i_0 / op.a_mod * e - 1.0 / op.r_sh;
    const double d2i = -op.i_0 / (op.a_mod * op.a_mod) * e;
    const double v = vd - op.r_s * i;
    const double dv = 1.0 - op.r_s * di;
    const double d2v = -op.r_s * d2i;
    const double dp = dv * i + v * di;
    const double d2p = d2v * i + 2.0 * dv * di + v * d2i;
    if (!(d2p < 0.0)) break;
    const double next = std::clamp(vd - dp / d2p, vd_lo, vd_hi);
    const double step = next - vd;
    // The bracket is already at the optimum; a large step means the local
    // quadratic model is unreliable.
    if (!(std::abs(step) < 1e-6 * std::max(1.0, vd))) break;
    vd = next;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(vd))) break;
  }

  IvPoint pt;
  pt.i = current_at_diode_voltage(vd, op);
  pt.v = vd - pt.i * op.r_s;
  pt.p = pt.v * pt.i;
  return pt;
}

ArrayOperatingPoint simulate_array_mpp(const SdmParamsRef& params, const ArrayTopology& topo,
                                       const OperatingConditions& cond, double alpha_isc) {
  validate(topo);
  const SdmParamsOperating op = translate_to_operating(params, cond, topo.cells_in_series, alpha_isc);
  const IvPoint mpp = find_mpp(op);
  return {mpp.v * topo.modules_per_string, mpp.i * topo.strings_in_parallel};
}

}  // namespace pvprof
