#include "rfdelyap/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>

#include "rfdelyap/hermite.hpp"

namespace rfdelyap {

namespace {

// Node-aligned storage shared by the stepping loop and the stage views.
struct Grid {
  std::size_t n = 0;
  double step = 0.0;
  std::vector<double> x, dl, dr;

  const double* node(std::size_t k) const { return x.data() + k * n; }
};

// History seen by one RK stage: completed cells use Hermite data, the part of
// the current step in (t_k, t_k + c h] interpolates linearly towards the
// stage state. Offsets are taken relative to node k so restarted runs read
// identical cell coordinates.
class StageView final : public HistoryView {
 public:
  StageView(const Grid& g, double span, std::size_t k, double c, const State* stage)
      : g_(g), span_(span), k_(k), c_(c), stage_(stage) {}

  double span() const override { return span_; }
  std::size_t dim() const override { return g_.n; }

  State at(double theta) const override {
    const double tol = 1e-9 * g_.step;
    if (theta > tol || theta < -span_ - tol)
      throw std::out_of_range("stage history: theta outside the delay window");
    double off = c_ + theta / g_.step;
    const double nearest = std::round(off);
    if (std::abs(off - nearest) <= 1e-9) off = nearest;
    const std::size_t n = g_.n;
    const double* xk = g_.node(k_);
    if (off >= c_ || (c_ == 0.0 && off >= 0.0)) {
      if (stage_ == nullptr) return State(xk, xk + n);
      return *stage_;
    }
    if (off > 0.0) {
      const double s = off / c_;
      State out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = (1.0 - s) * xk[i] + s * (*stage_)[i];
      return out;
    }
    const double jr = std::floor(off);
    const double s = off - jr;
    const auto j = static_cast<std::size_t>(static_cast<long>(k_) + static_cast<long>(jr));
    const double* y0 = g_.node(j);
    if (s == 0.0) return State(y0, y0 + n);
    const double* y1 = g_.node(j + 1);
    State out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = hermite::value(y0[i], y1[i], g_.dr[j * n + i], g_.dl[(j + 1) * n + i], g_.step, s);
    return out;
  }

 private:
  const Grid& g_;
  double span_;
  std::size_t k_;
  double c_;
  const State* stage_;
};

// Initial history on the integration grid, with derivative samples.
HistorySegment prepare_history(const HistorySegment& x0, double r, double step, std::size_t dim) {
  if (x0.dim() != dim) throw ConfigError("integrate: initial history has the wrong dimension");
  if (r == 0.0) {
    const auto h = x0.head();
    return HistorySegment(step, dim, std::vector<double>(h.begin(), h.end()),
                          std::vector<double>(dim, 0.0));
  }
  if (x0.span() + 1e-9 * x0.grid_step() < r)
    throw ConfigError("integrate: initial history is shorter than the delay span");
  HistorySegment h = x0;
  if (std::abs(h.span() - r) > 1e-9 * step) h = h.tail(r);
  const double ratio = h.grid_step() / step;
  if (std::abs(ratio - std::round(ratio)) <= 1e-9 && std::round(ratio) >= 1.0) {
    h = h.refine(static_cast<std::size_t>(std::llround(ratio)));
  } else {
    const double inv = step / h.grid_step();
    if (std::abs(inv - std::round(inv)) <= 1e-9) {
      const auto f = static_cast<std::size_t>(std::llround(inv));
      const std::size_t N = h.intervals() / f;
      std::vector<double> s, dl, dr;
      for (std::size_t k = 0; k <= N; ++k) {
        const auto v = h.node(k * f);
        s.insert(s.end(), v.begin(), v.end());
        if (h.has_derivatives()) {
          const auto a = h.left_derivative(k * f);
          const auto b = h.right_derivative(k * f);
          dl.insert(dl.end(), a.begin(), a.end());
          dr.insert(dr.end(), b.begin(), b.end());
        }
      }
      h = h.has_derivatives() ? HistorySegment(step, dim, s, dl, dr) : HistorySegment(step, dim, s);
    } else {
      h = HistorySegment::sample(r, step, dim, [&](double th) { return h.at(th); });
    }
  }
  if (h.has_derivatives()) return h;
  // Secant slopes make the Hermite cells reproduce linear interpolation.
  const std::size_t N = h.intervals();
  std::vector<double> dl(h.samples().size(), 0.0), dr(h.samples().size(), 0.0);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < dim; ++i) {
      const double slope = (h.node(k + 1)[i] - h.node(k)[i]) / step;
      dr[k * dim + i] = slope;
      dl[(k + 1) * dim + i] = slope;
    }
  return HistorySegment(step, dim, h.samples(), std::move(dl), std::move(dr));
}

bool finite_and_bounded(const State& v, double limit) {
  return all_finite(v) && euclidean_norm(v) <= limit;
}

void format_double(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace

Trajectory::Trajectory(double t0, double grid_step, double delay_span, std::size_t dim,
                       std::vector<double> samples, std::vector<double> dleft,
                       std::vector<double> dright, TrajectoryStatus status, nlohmann::json signal)
    : t0_(t0),
      grid_step_(grid_step),
      delay_span_(delay_span),
      dim_(dim),
      hist_(delay_span > 0.0 ? static_cast<std::size_t>(grid_count(delay_span, grid_step)) : 0),
      samples_(std::move(samples)),
      dleft_(std::move(dleft)),
      dright_(std::move(dright)),
      status_(status),
      signal_(std::move(signal)) {}

double Trajectory::time(std::size_t k) const {
  return t0_ + (static_cast<double>(k) - static_cast<double>(hist_)) * grid_step_;
}

std::size_t Trajectory::index_of(double t) const {
  const double q = (t - t0_) / grid_step_ + static_cast<double>(hist_);
  const double k = std::round(q);
  if (std::abs(q - k) > 1e-7 || k < 0.0 || k >= static_cast<double>(node_count()))
    throw std::out_of_range("trajectory: time " + std::to_string(t) + " is not a stored grid time");
  return static_cast<std::size_t>(k);
}

std::span<const double> Trajectory::node(std::size_t k) const {
  return {samples_.data() + k * dim_, dim_};
}
std::span<const double> Trajectory::left_derivative(std::size_t k) const {
  return {dleft_.data() + k * dim_, dim_};
}
std::span<const double> Trajectory::right_derivative(std::size_t k) const {
  return {dright_.data() + k * dim_, dim_};
}

State Trajectory::at(double t) const {
  const double pos = (t - t_first()) / grid_step_;
  const double last = static_cast<double>(node_count() - 1);
  if (pos < -1e-9 || pos > last + 1e-9)
    throw std::out_of_range("trajectory: time outside the stored range");
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) <= 1e-9) {
    const auto v = node(static_cast<std::size_t>(nearest));
    return State(v.begin(), v.end());
  }
  const auto k = static_cast<std::size_t>(std::floor(pos));
  const double s = pos - static_cast<double>(k);
  State out(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    out[i] = hermite::value(samples_[k * dim_ + i], samples_[(k + 1) * dim_ + i],
                            dright_[k * dim_ + i], dleft_[(k + 1) * dim_ + i], grid_step_, s);
  return out;
}

HistorySegment Trajectory::window(double t, double span, bool extend) const {
  if (span < 0.0 || (span > 0.0 && !is_grid_multiple(span, grid_step_)))
    throw ConfigError("trajectory: window span must be a grid multiple");
  const auto k = static_cast<long>(index_of(t));
  const long m = span > 0.0 ? grid_count(span, grid_step_) : 0;
  const long first = k - m;
  if (first < 0 && !extend) throw std::out_of_range("trajectory: window reaches before the start");
  const std::size_t n = dim_;
  std::vector<double> s, dl, dr;
  s.reserve(static_cast<std::size_t>(m + 1) * n);
  dl.reserve(s.capacity());
  dr.reserve(s.capacity());
  for (long i = first; i <= k; ++i) {
    if (i < 0) {
      s.insert(s.end(), samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(n));
      dl.insert(dl.end(), n, 0.0);
      dr.insert(dr.end(), n, 0.0);
      continue;
    }
    const auto u = static_cast<std::size_t>(i);
    s.insert(s.end(), samples_.begin() + static_cast<std::ptrdiff_t>(u * n),
             samples_.begin() + static_cast<std::ptrdiff_t>((u + 1) * n));
    if (i == 0 && first < 0)
      dl.insert(dl.end(), n, 0.0);
    else
      dl.insert(dl.end(), dleft_.begin() + static_cast<std::ptrdiff_t>(u * n),
                dleft_.begin() + static_cast<std::ptrdiff_t>((u + 1) * n));
    dr.insert(dr.end(), dright_.begin() + static_cast<std::ptrdiff_t>(u * n),
              dright_.begin() + static_cast<std::ptrdiff_t>((u + 1) * n));
  }
  return HistorySegment(grid_step_, n, std::move(s), std::move(dl), std::move(dr));
}

const std::vector<double>& Trajectory::cell_maxima() const {
  if (cell_max_.empty() && node_count() > 1) {
    cell_max_.resize(node_count() - 1);
    for (std::size_t k = 0; k + 1 < node_count(); ++k)
      cell_max_[k] = hermite::cell_max_norm(samples_.data() + k * dim_,
                                            samples_.data() + (k + 1) * dim_,
                                            dright_.data() + k * dim_,
                                            dleft_.data() + (k + 1) * dim_, dim_, grid_step_);
  }
  return cell_max_;
}

double Trajectory::window_norm(double t, double span) const { return window(t, span).sup_norm(); }

std::vector<double> Trajectory::window_norms(double span) const {
  const std::size_t m = span > 0.0 ? static_cast<std::size_t>(grid_count(span, grid_step_)) : 0;
  std::vector<double> out(node_count());
  if (m == 0) {
    for (std::size_t k = 0; k < node_count(); ++k) out[k] = euclidean_norm(node(k));
    return out;
  }
  const auto& cells = cell_maxima();
  std::deque<std::size_t> dq;  // cell indices with decreasing maxima
  out[0] = euclidean_norm(node(0));
  for (std::size_t k = 1; k < node_count(); ++k) {
    const std::size_t c = k - 1;
    while (!dq.empty() && cells[dq.back()] <= cells[c]) dq.pop_back();
    dq.push_back(c);
    while (k >= m && dq.front() < k - m) dq.pop_front();
    out[k] = cells[dq.front()];
  }
  return out;
}

double Trajectory::running_sup(double t) const {
  const std::size_t k = index_of(t);
  double best = euclidean_norm(node(0));
  const auto& cells = cell_maxima();
  for (std::size_t c = 0; c < k; ++c) best = std::max(best, cells[c]);
  return best;
}

nlohmann::json Trajectory::metadata() const {
  return {{"status", completed() ? "completed" : "blow_up"},
          {"t0", t0_},
          {"t_last", t_last()},
          {"grid_step", grid_step_},
          {"delay_span", delay_span_},
          {"dim", dim_},
          {"nodes", node_count()},
          {"signal", signal_}};
}

void Trajectory::write_csv(std::ostream& os) const {
  os << "t";
  for (std::size_t i = 0; i < dim_; ++i) os << ",x" << i + 1;
  for (std::size_t i = 0; i < dim_; ++i) os << ",dx" << i + 1;
  os << "\n";
  for (std::size_t k = 0; k < node_count(); ++k) {
    format_double(os, time(k));
    for (std::size_t i = 0; i < dim_; ++i) {
      os << ",";
      format_double(os, samples_[k * dim_ + i]);
    }
    for (std::size_t i = 0; i < dim_; ++i) {
      os << ",";
      format_double(os, dright_[k * dim_ + i]);
    }
    os << "\n";
  }
}

Trajectory integrate(const RfdeSystem& sys, double t0, const HistorySegment& x0,
                     const DisturbanceSignal& d, double t_end, IntegratorOptions opts) {
  const double r = sys.delay_span;
  const double step = opts.grid_step > 0.0 ? opts.grid_step : default_grid_step(sys);
  if (!(t_end > t0)) throw ConfigError("integrate: t_end must exceed t0");
  if (r > 0.0 && !is_grid_multiple(r, step))
    throw ConfigError("integrate: grid_step must divide the delay span");
  if (d.dim() != sys.box.dim()) throw ConfigError("integrate: signal dimension does not match the box");
  if (!all_finite(x0.samples())) throw ConfigError("integrate: non-finite initial history");

  const std::size_t n = sys.state_dim;
  const HistorySegment h0 = prepare_history(x0, r, step, n);
  const std::size_t N = h0.intervals();
  const auto M = static_cast<std::size_t>(std::max(1.0, std::ceil((t_end - t0) / step - 1e-9)));
  const double t_stop = t0 + static_cast<double>(M) * step;

  // Nodes where left limits must be evaluated separately.
  std::vector<char> jump(M + 1, 0);
  auto mark = [&](double p, const char* what) {
    if (p <= t0 + 1e-9 * step || p > t_stop + 1e-9 * step) return;
    if (!is_grid_multiple(p - t0, step, 1e-7))
      throw ConfigError(std::string("integrate: ") + what + " at t = " + std::to_string(p) +
                        " is not on the integration grid");
    jump[static_cast<std::size_t>(grid_count(p - t0, step))] = 1;
  };
  for (double p : sys.discontinuities.in(t0, t_stop)) mark(p, "system discontinuity");
  for (double p : d.discontinuities_in(t0, t_stop)) mark(p, "signal switch");

  Grid g;
  g.n = n;
  g.step = step;
  const std::size_t total = (N + M + 1) * n;
  g.x = h0.samples();
  g.dl = h0.left_derivatives();
  g.dr = h0.right_derivatives();
  g.x.reserve(total);
  g.dl.reserve(total);
  g.dr.reserve(total);

  auto time_of = [&](std::size_t m) { return t0 + static_cast<double>(m) * step; };
  auto call = [&](Instant t, const HistoryView& view, const State& dist) {
    return sys.rhs(t, view, dist);
  };

  TrajectoryStatus status = TrajectoryStatus::completed;
  State Y(n), k1, k2, k3, k4;
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t k = N + m;
    const double tk = time_of(m);
    const double tn = time_of(m + 1);
    const double* xk = g.node(k);

    k1 = call({tk, false}, StageView(g, r, k, 0.0, nullptr), d(tk));
    if (!all_finite(k1)) {
      status = TrajectoryStatus::blow_up;
      break;
    }
    std::copy(k1.begin(), k1.end(), g.dr.begin() + static_cast<std::ptrdiff_t>(k * n));
    if (m == 0 && N == 0)
      std::copy(k1.begin(), k1.end(), g.dl.begin() + static_cast<std::ptrdiff_t>(k * n));
    if (m > 0 && !jump[m])
      std::copy(k1.begin(), k1.end(), g.dl.begin() + static_cast<std::ptrdiff_t>(k * n));

    const double half = 0.5 * step;
    for (std::size_t i = 0; i < n; ++i) Y[i] = xk[i] + half * k1[i];
    k2 = call({tk + half, false}, StageView(g, r, k, 0.5, &Y), d(tk + half));
    for (std::size_t i = 0; i < n; ++i) Y[i] = xk[i] + half * k2[i];
    k3 = call({tk + half, false}, StageView(g, r, k, 0.5, &Y), d(tk + half));
    for (std::size_t i = 0; i < n; ++i) Y[i] = xk[i] + step * k3[i];
    k4 = call({tn, true}, StageView(g, r, k, 1.0, &Y), d.left_limit(tn));

    State next(n);
    for (std::size_t i = 0; i < n; ++i)
      next[i] = xk[i] + step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!all_finite(k2) || !all_finite(k3) || !all_finite(k4) ||
        !finite_and_bounded(next, opts.overflow)) {
      status = TrajectoryStatus::blow_up;
      break;
    }
    g.x.insert(g.x.end(), next.begin(), next.end());
    // k4 stands in for the left derivative until the node's own value is known.
    g.dl.insert(g.dl.end(), k4.begin(), k4.end());
    g.dr.insert(g.dr.end(), k4.begin(), k4.end());
    if (jump[m + 1]) {
      State left = call({tn, true}, StageView(g, r, k + 1, 0.0, nullptr), d.left_limit(tn));
      if (all_finite(left))
        std::copy(left.begin(), left.end(), g.dl.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
    }
  }

  const std::size_t last = g.x.size() / n - 1;
  if (status == TrajectoryStatus::completed && last > N) {
    const double tl = time_of(last - N);
    State fr = call({tl, false}, StageView(g, r, last, 0.0, nullptr), d(tl));
    if (all_finite(fr)) {
      std::copy(fr.begin(), fr.end(), g.dr.begin() + static_cast<std::ptrdiff_t>(last * n));
      if (!jump[last - N])
        std::copy(fr.begin(), fr.end(), g.dl.begin() + static_cast<std::ptrdiff_t>(last * n));
    }
  }
  return Trajectory(t0, step, r, n, std::move(g.x), std::move(g.dl), std::move(g.dr), status,
                    d.description());
}

ContinuityGap continuity_gap(const RfdeSystem& sys, double t0, const HistorySegment& x0,
                             const HistorySegment& y0, const DisturbanceSignal& d, double t_end,
                             IntegratorOptions opts) {
  if (!sys.lipschitz) throw ConfigError("continuity_gap: system has no one-sided Lipschitz modulus");
  const Trajectory tx = integrate(sys, t0, x0, d, t_end, opts);
  const Trajectory ty = integrate(sys, t0, y0, d, t_end, opts);
  const double r = sys.delay_span;
  const std::size_t N = tx.history_intervals();
  const std::size_t common = std::min(tx.node_count(), ty.node_count());
  const double initial = (tx.window(t0, r) - ty.window(t0, r)).sup_norm();
  ContinuityGap out;
  // Windows from node N on cover [t0 - r, t], so their running max is the sup.
  double sx = 0.0, sy = 0.0;
  const auto nx = tx.window_norms(r);
  const auto ny = ty.window_norms(r);
  for (std::size_t k = N; k < common; ++k) {
    const double t = tx.time(k);
    sx = std::max(sx, nx[k]);
    sy = std::max(sy, ny[k]);
    out.times.push_back(t);
    out.measured.push_back((tx.window(t, r) - ty.window(t, r)).sup_norm());
    out.bound.push_back(initial * std::exp((*sys.lipschitz)(t, sx + sy) * (t - t0)));
  }
  return out;
}

}  // namespace rfdelyap
