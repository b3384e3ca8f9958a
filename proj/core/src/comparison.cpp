#include "rfdelyap/comparison.hpp"

#include <algorithm>
#include <cmath>

namespace rfdelyap {

namespace {

double rk4(const ScalarField& f, double t, double w, double h) {
  const double k1 = f(t, w);
  const double k2 = f(t + 0.5 * h, w + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, w + 0.5 * h * k2);
  const double k4 = f(t + h, w + h * k3);
  return w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ScalarTrajectory run(const ScalarField& f, double w0, double t0, double t_end, double step,
                     bool clip, double lo, double hi) {
  if (!(t_end > t0)) throw ConfigError("scalar solver: t_end must exceed t0");
  if (!(step > 0.0)) throw ConfigError("scalar solver: step must be positive");
  const auto M = static_cast<std::size_t>(std::ceil((t_end - t0) / step - 1e-9));
  const double h = (t_end - t0) / static_cast<double>(M);
  ScalarTrajectory out;
  out.t.reserve(M + 1);
  out.w.reserve(M + 1);
  out.t.push_back(t0);
  out.w.push_back(w0);
  double w = w0;
  for (std::size_t k = 0; k < M; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    w = rk4(f, t, w, h);
    if (clip) w = std::max(w, 0.0);
    if (!std::isfinite(w) || w < lo || w > hi)
      throw DomainError("scalar solver: solution left its interval at t = " + std::to_string(t + h));
    out.t.push_back(t0 + static_cast<double>(k + 1) * h);
    out.w.push_back(w);
  }
  return out;
}

}  // namespace

double ScalarTrajectory::at(double time) const {
  if (t.empty()) throw std::out_of_range("scalar trajectory: empty");
  if (time <= t.front()) return w.front();
  if (time >= t.back()) return w.back();
  const auto it = std::upper_bound(t.begin(), t.end(), time);
  const auto k = static_cast<std::size_t>(it - t.begin()) - 1;
  const double s = (time - t[k]) / (t[k + 1] - t[k]);
  return (1.0 - s) * w[k] + s * w[k + 1];
}

ScalarTrajectory solve_eta(const ComparisonProblem& p, double t0, double t_end, double step) {
  if (p.eta0 < 0.0) throw ConfigError("solve_eta: eta0 must be nonnegative");
  ScalarField f = [&p](double t, double e) { return -p.rho(std::max(e, 0.0)) + p.mu(t); };
  return run(f, p.eta0, t0, t_end, step, true, -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity());
}

ScalarTrajectory solve_scalar(const ScalarField& f, double w0, double t0, double t_end,
                              double step, double lo, double hi) {
  return run(f, w0, t0, t_end, step, false, lo, hi);
}

ScalarTrajectory solve_perturbed(const ScalarField& f, double w0, double lambda, double t0,
                                 double t_end, double step) {
  if (lambda < 0.0) throw ConfigError("solve_perturbed: lambda must be nonnegative");
  ScalarField g = [&f, lambda](double t, double z) { return f(t, z) + lambda; };
  return run(g, w0, t0, t_end, step, false, -std::numeric_limits<double>::infinity(),
             std::numeric_limits<double>::infinity());
}

nlohmann::json DominationReport::to_json() const {
  nlohmann::json j = {{"holds", holds},
                      {"mode", mode == DominationMode::monotone ? "monotone" : "bounded"},
                      {"worst_gap", worst_gap},
                      {"checked", checked},
                      {"monotonicity_warning", monotonicity_warning}};
  j["first_violation"] = first_violation ? nlohmann::json(*first_violation) : nlohmann::json();
  return j;
}

DominationReport check_dominated(const std::vector<double>& times, const std::vector<double>& v,
                                 const ScalarField& f, double w0, DominationMode mode,
                                 double J_lo, double J_hi, double tol, double max_step) {
  if (times.size() != v.size() || times.empty())
    throw ConfigError("check_dominated: times and values must have the same nonzero length");
  DominationReport rep;
  rep.mode = mode;
  double w = w0;
  auto visit = [&](std::size_t i) {
    const double gap = (v[i] - w) / (1.0 + std::abs(w));
    rep.worst_gap = std::max(rep.worst_gap, gap);
    ++rep.checked;
    if (v[i] > w + tol * (1.0 + std::abs(w)) && !rep.first_violation) {
      rep.holds = false;
      rep.first_violation = times[i];
    }
  };
  visit(0);
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double span = times[i] - times[i - 1];
    if (!(span > 0.0)) throw ConfigError("check_dominated: times must be increasing");
    const auto sub = static_cast<std::size_t>(std::max(1.0, std::ceil(span / max_step - 1e-9)));
    const double h = span / static_cast<double>(sub);
    for (std::size_t s = 0; s < sub; ++s) {
      const double t = times[i - 1] + static_cast<double>(s) * h;
      if (mode == DominationMode::monotone) {
        const double dw = 1e-6 * (1.0 + std::abs(w));
        if (f(t, w + dw) < f(t, w) - 1e-12) rep.monotonicity_warning = true;
      }
      w = rk4(f, t, w, h);
      if (!std::isfinite(w) || w < J_lo || w > J_hi)
        throw DomainError("check_dominated: w left its interval at t = " + std::to_string(t + h));
    }
    visit(i);
  }
  return rep;
}

}  // namespace rfdelyap
