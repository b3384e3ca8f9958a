#include "rfdelyap/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "rfdelyap/hermite.hpp"

namespace rfdelyap {

namespace hermite {

namespace {

double norm_at(const double* y0, const double* y1, const double* m0, const double* m1,
               std::size_t dim, double h, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double v = m0 ? value(y0[i], y1[i], m0[i], m1[i], h, s) : (1.0 - s) * y0[i] + s * y1[i];
    acc += v * v;
  }
  return std::sqrt(acc);
}

// d/ds of |p(s)|^2 / 2.
double radial_slope(const double* y0, const double* y1, const double* m0, const double* m1,
                    std::size_t dim, double h, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double v = value(y0[i], y1[i], m0[i], m1[i], h, s);
    const double dv = slope(y0[i], y1[i], m0[i], m1[i], h, s) * h;
    acc += v * dv;
  }
  return acc;
}

}  // namespace

double cell_max_norm(const double* y0, const double* y1, const double* m0, const double* m1,
                     std::size_t dim, double h) {
  double best = std::max(norm_at(y0, y1, nullptr, nullptr, dim, h, 0.0),
                         norm_at(y0, y1, nullptr, nullptr, dim, h, 1.0));
  if (!m0 || !m1) return best;

  if (dim == 1) {
    // p(s) = a0 + a1 s + a2 s^2 + a3 s^3; interior extrema solve p'(s) = 0.
    const double a1 = h * m0[0];
    const double a2 = -3.0 * y0[0] - 2.0 * h * m0[0] + 3.0 * y1[0] - h * m1[0];
    const double a3 = 2.0 * y0[0] + h * m0[0] - 2.0 * y1[0] + h * m1[0];
    const double qa = 3.0 * a3, qb = 2.0 * a2, qc = a1;
    auto consider = [&](double s) {
      if (s > 0.0 && s < 1.0) best = std::max(best, norm_at(y0, y1, m0, m1, dim, h, s));
    };
    if (std::abs(qa) < 1e-300) {
      if (std::abs(qb) > 1e-300) consider(-qc / qb);
    } else {
      const double disc = qb * qb - 4.0 * qa * qc;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (qb + std::copysign(sq, qb));
        if (q != 0.0) {
          consider(q / qa);
          consider(qc / q);
        } else {
          consider(0.0);
        }
      }
    }
    return best;
  }

  // Vector case: bracket sign changes of d|p|^2/ds and bisect.
  constexpr int kSamples = 32;
  double prev_s = 0.0;
  double prev_g = radial_slope(y0, y1, m0, m1, dim, h, 0.0);
  for (int i = 1; i <= kSamples; ++i) {
    const double s = static_cast<double>(i) / kSamples;
    const double g = radial_slope(y0, y1, m0, m1, dim, h, s);
    best = std::max(best, norm_at(y0, y1, m0, m1, dim, h, s));
    if (prev_g > 0.0 && g < 0.0) {
      double lo = prev_s, hi = s;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (radial_slope(y0, y1, m0, m1, dim, h, mid) > 0.0)
          lo = mid;
        else
          hi = mid;
      }
      best = std::max(best, norm_at(y0, y1, m0, m1, dim, h, 0.5 * (lo + hi)));
    }
    prev_s = s;
    prev_g = g;
  }
  return best;
}

}  // namespace hermite

HistorySegment::HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples)
    : grid_step_(grid_step), dim_(dim), samples_(std::move(samples)) {
  validate();
}

HistorySegment::HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples,
                               std::vector<double> derivatives)
    : grid_step_(grid_step),
      dim_(dim),
      samples_(std::move(samples)),
      dleft_(derivatives),
      dright_(std::move(derivatives)) {
  validate();
}

HistorySegment::HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples,
                               std::vector<double> left_derivatives,
                               std::vector<double> right_derivatives)
    : grid_step_(grid_step),
      dim_(dim),
      samples_(std::move(samples)),
      dleft_(std::move(left_derivatives)),
      dright_(std::move(right_derivatives)) {
  validate();
}

void HistorySegment::validate() {
  if (!(grid_step_ > 0.0) || !std::isfinite(grid_step_))
    throw ConfigError("history: grid_step must be positive and finite");
  if (dim_ == 0) throw ConfigError("history: dimension must be positive");
  if (samples_.empty() || samples_.size() % dim_ != 0)
    throw ConfigError("history: sample count is not a multiple of the dimension");
  if (!all_finite(samples_)) throw ConfigError("history: non-finite sample");
  if (dleft_.size() != dright_.size())
    throw ConfigError("history: left/right derivative arrays differ in size");
  if (!dleft_.empty() && dleft_.size() != samples_.size())
    throw ConfigError("history: derivative samples must match the sample shape");
  if (!all_finite(dleft_) || !all_finite(dright_))
    throw ConfigError("history: non-finite derivative sample");
  intervals_ = samples_.size() / dim_ - 1;
  span_ = static_cast<double>(intervals_) * grid_step_;
}

HistorySegment HistorySegment::zero(double span, double grid_step, std::size_t dim) {
  State z(dim, 0.0);
  return constant(span, grid_step, z);
}

HistorySegment HistorySegment::constant(double span, double grid_step,
                                        std::span<const double> value) {
  if (span < 0.0 || !is_grid_multiple(span, grid_step))
    throw ConfigError("history: grid_step must divide span");
  const auto n = static_cast<std::size_t>(grid_count(span, grid_step)) + 1;
  std::vector<double> s;
  s.reserve(n * value.size());
  for (std::size_t k = 0; k < n; ++k) s.insert(s.end(), value.begin(), value.end());
  std::vector<double> d(s.size(), 0.0);
  return HistorySegment(grid_step, value.size(), std::move(s), std::move(d));
}

HistorySegment HistorySegment::sample(double span, double grid_step, std::size_t dim,
                                      const std::function<State(double)>& f,
                                      const std::function<State(double)>& df) {
  if (span < 0.0 || !is_grid_multiple(span, grid_step))
    throw ConfigError("history: grid_step must divide span");
  const auto intervals = static_cast<std::size_t>(grid_count(span, grid_step));
  std::vector<double> s, d;
  s.reserve((intervals + 1) * dim);
  for (std::size_t k = 0; k <= intervals; ++k) {
    const double theta = (static_cast<double>(k) - static_cast<double>(intervals)) * grid_step;
    const State v = f(theta);
    if (v.size() != dim) throw ConfigError("history: sampler returned wrong dimension");
    s.insert(s.end(), v.begin(), v.end());
    if (df) {
      const State dv = df(theta);
      if (dv.size() != dim) throw ConfigError("history: derivative sampler returned wrong dimension");
      d.insert(d.end(), dv.begin(), dv.end());
    }
  }
  if (df) return HistorySegment(grid_step, dim, std::move(s), std::move(d));
  return HistorySegment(grid_step, dim, std::move(s));
}

double HistorySegment::theta(std::size_t k) const {
  return (static_cast<double>(k) - static_cast<double>(intervals_)) * grid_step_;
}

std::span<const double> HistorySegment::node(std::size_t k) const {
  return {samples_.data() + k * dim_, dim_};
}

std::span<const double> HistorySegment::left_derivative(std::size_t k) const {
  if (dleft_.empty()) return {};
  return {dleft_.data() + k * dim_, dim_};
}

std::span<const double> HistorySegment::right_derivative(std::size_t k) const {
  if (dright_.empty()) return {};
  return {dright_.data() + k * dim_, dim_};
}

double HistorySegment::cell_value(std::size_t k, double s, std::size_t i) const {
  const double y0 = samples_[k * dim_ + i];
  const double y1 = samples_[(k + 1) * dim_ + i];
  if (dleft_.empty()) return (1.0 - s) * y0 + s * y1;
  return hermite::value(y0, y1, dright_[k * dim_ + i], dleft_[(k + 1) * dim_ + i], grid_step_, s);
}

double HistorySegment::cell_max_norm(std::size_t k) const {
  const double* m0 = dleft_.empty() ? nullptr : dright_.data() + k * dim_;
  const double* m1 = dleft_.empty() ? nullptr : dleft_.data() + (k + 1) * dim_;
  return hermite::cell_max_norm(samples_.data() + k * dim_, samples_.data() + (k + 1) * dim_, m0,
                                m1, dim_, grid_step_);
}

State HistorySegment::at(double theta) const {
  const double tol = 1e-9 * grid_step_;
  if (theta > tol || theta < -span_ - tol)
    throw std::out_of_range("history: theta " + std::to_string(theta) + " outside [-" +
                            std::to_string(span_) + ", 0]");
  if (intervals_ == 0) return State(node(0).begin(), node(0).end());
  const double pos = (theta + span_) / grid_step_;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) <= 1e-9) {
    const auto k = static_cast<std::size_t>(std::clamp(nearest, 0.0, static_cast<double>(intervals_)));
    return State(node(k).begin(), node(k).end());
  }
  auto k = static_cast<std::size_t>(std::floor(pos));
  k = std::min(k, intervals_ - 1);
  const double s = pos - static_cast<double>(k);
  State out(dim_);
  for (std::size_t i = 0; i < dim_; ++i) out[i] = cell_value(k, s, i);
  return out;
}

double HistorySegment::sup_norm() const {
  double best = euclidean_norm(node(0));
  for (std::size_t k = 0; k < intervals_; ++k) best = std::max(best, cell_max_norm(k));
  return best;
}

HistorySegment HistorySegment::refine(std::size_t factor) const {
  if (factor == 0) throw ConfigError("history: refinement factor must be positive");
  if (factor == 1) return *this;
  if (intervals_ == 0) {
    HistorySegment copy = *this;
    copy.grid_step_ = grid_step_ / static_cast<double>(factor);
    return copy;
  }
  const std::size_t fine = intervals_ * factor;
  std::vector<double> s((fine + 1) * dim_);
  std::vector<double> dl, dr;
  if (has_derivatives()) {
    dl.resize(s.size());
    dr.resize(s.size());
  }
  const double inv = 1.0 / static_cast<double>(factor);
  for (std::size_t j = 0; j <= fine; ++j) {
    const std::size_t k = j / factor;
    const std::size_t m = j % factor;
    for (std::size_t i = 0; i < dim_; ++i) {
      if (m == 0) {
        s[j * dim_ + i] = samples_[k * dim_ + i];
        if (has_derivatives()) {
          dl[j * dim_ + i] = dleft_[k * dim_ + i];
          dr[j * dim_ + i] = dright_[k * dim_ + i];
        }
      } else {
        const double loc = static_cast<double>(m) * inv;
        s[j * dim_ + i] = cell_value(k, loc, i);
        if (has_derivatives()) {
          const double sl = hermite::slope(samples_[k * dim_ + i], samples_[(k + 1) * dim_ + i],
                                           dright_[k * dim_ + i], dleft_[(k + 1) * dim_ + i],
                                           grid_step_, loc);
          dl[j * dim_ + i] = sl;
          dr[j * dim_ + i] = sl;
        }
      }
    }
  }
  const double step = grid_step_ * inv;
  if (has_derivatives()) return HistorySegment(step, dim_, std::move(s), std::move(dl), std::move(dr));
  return HistorySegment(step, dim_, std::move(s));
}

HistorySegment HistorySegment::tail(double span) const {
  if (span < 0.0 || span > span_ + 1e-9 * grid_step_ || !is_grid_multiple(span, grid_step_))
    throw ConfigError("history: tail span must be a grid multiple not exceeding the span");
  const auto m = static_cast<std::size_t>(grid_count(span, grid_step_));
  const std::size_t first = intervals_ - m;
  auto slice = [&](const std::vector<double>& v) {
    if (v.empty()) return std::vector<double>{};
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first * dim_), v.end());
  };
  if (has_derivatives())
    return HistorySegment(grid_step_, dim_, slice(samples_), slice(dleft_), slice(dright_));
  return HistorySegment(grid_step_, dim_, slice(samples_));
}

HistorySegment HistorySegment::slice(std::size_t first, std::size_t intervals) const {
  if (first + intervals > intervals_) throw std::out_of_range("history: slice outside the segment");
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                               v.begin() + static_cast<std::ptrdiff_t>((first + intervals + 1) * dim_));
  };
  if (has_derivatives())
    return HistorySegment(grid_step_, dim_, cut(samples_), cut(dleft_), cut(dright_));
  return HistorySegment(grid_step_, dim_, cut(samples_));
}

HistorySegment HistorySegment::operator-(const HistorySegment& other) const {
  if (other.dim_ != dim_ || other.intervals_ != intervals_ ||
      std::abs(other.grid_step_ - grid_step_) > 1e-12 * grid_step_)
    throw ConfigError("history: difference requires identical grids");
  std::vector<double> s(samples_.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = samples_[i] - other.samples_[i];
  if (has_derivatives() && other.has_derivatives()) {
    std::vector<double> dl(s.size()), dr(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      dl[i] = dleft_[i] - other.dleft_[i];
      dr[i] = dright_[i] - other.dright_[i];
    }
    return HistorySegment(grid_step_, dim_, std::move(s), std::move(dl), std::move(dr));
  }
  return HistorySegment(grid_step_, dim_, std::move(s));
}

HistorySegment HistorySegment::scaled(double factor) const {
  auto mul = [factor](std::vector<double> v) {
    for (double& e : v) e *= factor;
    return v;
  };
  if (has_derivatives())
    return HistorySegment(grid_step_, dim_, mul(samples_), mul(dleft_), mul(dright_));
  return HistorySegment(grid_step_, dim_, mul(samples_));
}

nlohmann::json HistorySegment::to_json() const {
  nlohmann::json j;
  j["grid_step"] = grid_step_;
  j["dim"] = dim_;
  j["samples"] = samples_;
  if (has_derivatives()) {
    j["dleft"] = dleft_;
    j["dright"] = dright_;
  }
  return j;
}

HistorySegment HistorySegment::from_json(const nlohmann::json& j) {
  auto step = j.at("grid_step").get<double>();
  auto dim = j.at("dim").get<std::size_t>();
  auto s = j.at("samples").get<std::vector<double>>();
  if (j.contains("dleft"))
    return HistorySegment(step, dim, std::move(s), j.at("dleft").get<std::vector<double>>(),
                          j.at("dright").get<std::vector<double>>());
  return HistorySegment(step, dim, std::move(s));
}

void HistorySegment::write_csv(std::ostream& os) const {
  char buf[64];
  os << "theta";
  for (std::size_t i = 0; i < dim_; ++i) os << ",x" << (i + 1);
  if (has_derivatives())
    for (std::size_t i = 0; i < dim_; ++i) os << ",dx" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k <= intervals_; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", theta(k));
    os << buf;
    for (std::size_t i = 0; i < dim_; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", samples_[k * dim_ + i]);
      os << ',' << buf;
    }
    if (has_derivatives()) {
      // A single derivative column: right derivative, left one at the head.
      const auto& d = (k == intervals_) ? dleft_ : dright_;
      for (std::size_t i = 0; i < dim_; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", d[k * dim_ + i]);
        os << ',' << buf;
      }
    }
    os << '\n';
  }
}

HistorySegment HistorySegment::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("history csv: missing header");
  std::size_t xcols = 0, dcols = 0;
  {
    std::stringstream hs(line);
    std::string col;
    std::getline(hs, col, ',');
    if (col != "theta") throw ConfigError("history csv: first column must be theta");
    while (std::getline(hs, col, ',')) {
      if (col.rfind("dx", 0) == 0)
        ++dcols;
      else if (col.rfind("x", 0) == 0)
        ++xcols;
      else
        throw ConfigError("history csv: unknown column " + col);
    }
  }
  if (xcols == 0 || (dcols != 0 && dcols != xcols))
    throw ConfigError("history csv: inconsistent columns");
  std::vector<double> thetas, s, d;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != 1 + xcols + dcols) throw ConfigError("history csv: ragged row");
    thetas.push_back(row[0]);
    s.insert(s.end(), row.begin() + 1, row.begin() + 1 + static_cast<std::ptrdiff_t>(xcols));
    d.insert(d.end(), row.begin() + 1 + static_cast<std::ptrdiff_t>(xcols), row.end());
  }
  if (thetas.empty()) throw ConfigError("history csv: no rows");
  if (std::abs(thetas.back()) > 1e-12) throw ConfigError("history csv: last theta must be 0");
  double step = 1.0;
  if (thetas.size() > 1) {
    step = (thetas.back() - thetas.front()) / static_cast<double>(thetas.size() - 1);
    for (std::size_t k = 1; k < thetas.size(); ++k)
      if (std::abs(thetas[k] - thetas[k - 1] - step) > 1e-9 * step)
        throw ConfigError("history csv: theta grid is not uniform ascending");
  }
  if (dcols) return HistorySegment(step, xcols, std::move(s), std::move(d));
  return HistorySegment(step, xcols, std::move(s));
}

double sup_norm(const HistorySegment& x) { return x.sup_norm(); }

State interpolate(const HistorySegment& x, double theta) { return x.at(theta); }

HistorySegment apply_Eh(const HistorySegment& x, std::span<const double> v, double h) {
  if (v.size() != x.dim()) throw ConfigError("apply_Eh: direction has wrong dimension");
  if (h < 0.0) throw ConfigError("apply_Eh: h must be nonnegative");
  const std::size_t n = x.dim();
  if (x.intervals() == 0) {
    State out(x.head().begin(), x.head().end());
    for (std::size_t i = 0; i < n; ++i) out[i] += h * v[i];
    return HistorySegment(x.grid_step(), n, std::move(out));
  }
  if (h >= x.span() - 1e-9 * x.grid_step())
    throw ConfigError("apply_Eh: requires 0 <= h < span");
  if (!is_grid_multiple(h, x.grid_step()))
    throw ConfigError("apply_Eh: h must be a multiple of the grid step");
  const auto m = static_cast<std::size_t>(grid_count(h, x.grid_step()));
  if (m == 0) return x;

  const std::size_t N = x.intervals();
  const std::size_t joint = N - m;
  const auto head = x.head();
  std::vector<double> s((N + 1) * n);
  for (std::size_t j = 0; j <= N; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (j <= joint)
        s[j * n + i] = x.samples()[(j + m) * n + i];
      else
        s[j * n + i] = head[i] + static_cast<double>(j - joint) * x.grid_step() * v[i];
    }
  }
  if (!x.has_derivatives()) return HistorySegment(x.grid_step(), n, std::move(s));

  std::vector<double> dl(s.size()), dr(s.size());
  for (std::size_t j = 0; j <= N; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (j < joint) {
        dl[j * n + i] = x.left_derivatives()[(j + m) * n + i];
        dr[j * n + i] = x.right_derivatives()[(j + m) * n + i];
      } else if (j == joint) {
        dl[j * n + i] = x.left_derivatives()[N * n + i];
        dr[j * n + i] = v[i];
      } else {
        dl[j * n + i] = v[i];
        dr[j * n + i] = v[i];
      }
    }
  }
  return HistorySegment(x.grid_step(), n, std::move(s), std::move(dl), std::move(dr));
}

namespace {

double distance(const State& a, const State& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

// Points covering [lo, hi] with spacing at most `spacing`, endpoints included.
std::vector<double> cover(double lo, double hi, double spacing) {
  std::vector<double> pts;
  if (hi <= lo) return {hi};
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / spacing));
  pts.reserve(count + 1);
  for (std::size_t i = 0; i <= count; ++i)
    pts.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count));
  return pts;
}

}  // namespace

double modulus_G2(const HistorySegment& x, double h) {
  if (h < 0.0) throw ConfigError("modulus_G2: h must be nonnegative");
  if (h == 0.0 || x.intervals() == 0) return 0.0;
  const double spacing = x.grid_step() / 4.0;
  const State head(x.head().begin(), x.head().end());

  double front = 0.0;
  for (double theta : cover(-std::min(h, x.span()), 0.0, spacing))
    front = std::max(front, distance(head, x.at(theta)));

  double shift = 0.0;
  if (h < x.span()) {
    for (double theta : cover(-x.span(), -h, spacing))
      shift = std::max(shift, distance(x.at(std::min(theta + h, 0.0)), x.at(theta)));
  }
  return front + shift;
}

}  // namespace rfdelyap
