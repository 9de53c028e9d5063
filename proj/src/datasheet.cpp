#include "pvprof/datasheet.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

using namespace constants;
using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

constexpr int kMaxNewtonIterations = 100;
constexpr double kTempDeltaC = 10.0;

// Unknowns: i_ph, ln i_0, ln r_s, ln r_sh, n.
SdmParamsRef unpack(const Vec5& x) {
  return {x[0], std::exp(x[1]), std::exp(x[2]), std::exp(x[3]), x[4]};
}

double thermal_voltage_ref(int cells) { return cells * kBoltzmannJ * (kTempRefC + kKelvinOffset) / kElementaryCharge; }

// Open-circuit voltage from the translated equation at temperature t_c,
// bisection-free: Newton on the monotone diode equation from its upper bound.
double voc_at(const SdmParamsRef& p, int cells, double alpha_isc, double t_c) {
  SdmParamsOperating op;
  const double t_ref = kTempRefC + kKelvinOffset;
  const double t_k = t_c + kKelvinOffset;
  const double eg = kBandGapRef * (1.0 - kBandGapTempCoeff * (t_k - t_ref));
  op.i_ph = p.i_ph_ref + alpha_isc * (t_k - t_ref);
  op.i_0 = p.i_0_ref * std::pow(t_k / t_ref, 3) * std::exp(kBandGapRef / (kBoltzmannEv * t_ref) - eg / (kBoltzmannEv * t_k));
  op.r_s = p.r_s;
  op.r_sh = p.r_sh_ref;
  op.a_mod = p.n_diode * cells * kBoltzmannJ * t_k / kElementaryCharge;
  return open_circuit_voltage(op);
}

Vec5 conditions(const Vec5& x, const Datasheet& ds) {
  const SdmParamsRef p = unpack(x);
  const double a = p.n_diode * thermal_voltage_ref(ds.cells_in_series);
  Vec5 f;
  const double vd_sc = ds.i_sc * p.r_s;
  f[0] = (p.i_ph_ref - p.i_0_ref * std::expm1(vd_sc / a) - vd_sc / p.r_sh_ref - ds.i_sc) / ds.i_sc;
  f[1] = (p.i_ph_ref - p.i_0_ref * std::expm1(ds.v_oc / a) - ds.v_oc / p.r_sh_ref) / ds.i_sc;
  const double vd_mp = ds.v_mp + ds.i_mp * p.r_s;
  f[2] = (p.i_ph_ref - p.i_0_ref * std::expm1(vd_mp / a) - vd_mp / p.r_sh_ref - ds.i_mp) / ds.i_sc;
  const double conductance = p.i_0_ref / a * std::exp(vd_mp / a) + 1.0 / p.r_sh_ref;
  f[3] = 1.0 - (ds.v_mp / ds.i_mp) * conductance / (1.0 + p.r_s * conductance);
  const double voc_hot = voc_at(p, ds.cells_in_series, ds.alpha_isc, kTempRefC + kTempDeltaC);
  const double voc_ref = voc_at(p, ds.cells_in_series, ds.alpha_isc, kTempRefC);
  f[4] = (voc_hot - voc_ref - kTempDeltaC * ds.beta_voc) / ds.v_oc;
  return f;
}

bool admissible(const Vec5& x) {
  return x.allFinite() && x[0] > 0.0 && x[4] >= 0.5 && x[4] <= 2.5 && x[1] < std::log(x[0]) && x[3] < std::log(1e9) &&
         x[2] < std::log(1e3);
}

Mat5 jacobian(const Vec5& x, const Datasheet& ds) {
  Mat5 jac;
  for (int j = 0; j < 5; ++j) {
    const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
    Vec5 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.col(j) = (conditions(xp, ds) - conditions(xm, ds)) / (2.0 * h);
  }
  return jac;
}

struct NewtonOutcome {
  Vec5 x = Vec5::Zero();
  double residual = INFINITY;
  int iterations = 0;
};

NewtonOutcome damped_newton(Vec5 x, const Datasheet& ds) {
  NewtonOutcome out;
  Vec5 f = conditions(x, ds);
  double norm = f.norm();
  int iter = 0;
  for (; iter < kMaxNewtonIterations && norm > 1e-14; ++iter) {
    const Vec5 step = jacobian(x, ds).colPivHouseholderQr().solve(-f);
    if (!step.allFinite()) break;
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40; ++k, lambda *= 0.5) {
      const Vec5 trial = x + lambda * step;
      if (!admissible(trial)) continue;
      const Vec5 ft = conditions(trial, ds);
      if (ft.allFinite() && ft.norm() < norm) {
        x = trial;
        f = ft;
        norm = ft.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.x = x;
  out.residual = f.cwiseAbs().maxCoeff();
  out.iterations = iter;
  return out;
}

}  // namespace

void validate(const Datasheet& ds) {
  if (!(ds.v_oc > 0.0 && ds.i_sc > 0.0 && ds.v_mp > 0.0 && ds.i_mp > 0.0))
    throw ConfigError("datasheet Voc, Isc, Vmp and Imp must be positive");
  if (!(ds.v_mp < ds.v_oc)) throw ConfigError("datasheet requires v_mp < v_oc");
  if (!(ds.i_mp < ds.i_sc)) throw ConfigError("datasheet requires i_mp < i_sc");
  if (!(ds.v_mp * ds.i_mp < ds.v_oc * ds.i_sc)) throw ConfigError("datasheet MPP power exceeds Voc * Isc");
  if (!std::isfinite(ds.alpha_isc) || !std::isfinite(ds.beta_voc)) throw ConfigError("datasheet coefficients must be finite");
  if (ds.cells_in_series < 1) throw ConfigError("datasheet cells_in_series must be >= 1");
}

Datasheet datasheet_from_params(const SdmParamsRef& params, int cells_in_series, double alpha_isc) {
  const SdmParamsOperating op = translate_to_operating(params, {kIrradianceRef, kTempRefC}, cells_in_series, alpha_isc);
  Datasheet ds;
  ds.i_sc = short_circuit_current(op);
  ds.v_oc = open_circuit_voltage(op);
  const IvPoint mpp = find_mpp(op);
  ds.v_mp = mpp.v;
  ds.i_mp = mpp.i;
  ds.alpha_isc = alpha_isc;
  const SdmParamsOperating hot =
      translate_to_operating(params, {kIrradianceRef, kTempRefC + kTempDeltaC}, cells_in_series, alpha_isc);
  ds.beta_voc = (open_circuit_voltage(hot) - ds.v_oc) / kTempDeltaC;
  ds.cells_in_series = cells_in_series;
  return ds;
}

DesotoFitReport fit_desoto_from_datasheet_report(const Datasheet& ds) {
  validate(ds);
  const double vt = thermal_voltage_ref(ds.cells_in_series);

  NewtonOutcome best;
  for (double n0 : {1.5, 1.1, 1.0, 1.3, 2.0}) {
    for (double rsh0 : {100.0, 1000.0, 30.0, 1e4}) {
      const double a0 = n0 * vt;
      const double i0 = ds.i_sc * std::exp(-ds.v_oc / a0);
      double rs0 = (a0 * std::log1p((ds.i_sc - ds.i_mp) / i0) - ds.v_mp) / ds.i_mp;
      if (!(rs0 > 0.0)) rs0 = 0.01 * ds.v_oc / ds.i_sc;
      Vec5 x;
      x << ds.i_sc, std::log(i0), std::log(rs0), std::log(rsh0), n0;
      if (!admissible(x)) continue;
      NewtonOutcome out = damped_newton(x, ds);
      if (out.residual < best.residual) best = out;
      if (best.residual < 1e-10) break;
    }
    if (best.residual < 1e-10) break;
  }
  if (!(best.residual < 1e-8)) {
    std::ostringstream os;
    os << "datasheet extraction did not converge; max scaled residual " << best.residual;
    throw NumericError(os.str());
  }
  DesotoFitReport report;
  report.params = unpack(best.x);
  report.iterations = best.iterations;
  report.max_residual = best.residual;
  return report;
}

SdmParamsRef fit_desoto_from_datasheet(const Datasheet& ds) { return fit_desoto_from_datasheet_report(ds).params; }

}  // namespace pvprof
