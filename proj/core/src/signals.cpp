#include "rfdelyap/signals.hpp"

#include <algorithm>
#include <cmath>

namespace rfdelyap {

namespace {

double lookup_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

void check_increasing(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw ConfigError("signal: switch times must be finite");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw ConfigError("signal: switch times must be strictly increasing");
  }
}

}  // namespace

DisturbanceBox::DisturbanceBox(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw ConfigError("box: bound dimensions differ");
  for (std::size_t i = 0; i < lower.size(); ++i)
    if (std::isnan(lower[i]) || std::isnan(upper[i]) || lower[i] > upper[i])
      throw ConfigError("box: lower bound exceeds upper bound");
}

bool DisturbanceBox::bounded() const {
  for (std::size_t i = 0; i < dim(); ++i)
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) return false;
  return true;
}

bool DisturbanceBox::contains(std::span<const double> d, double tol) const {
  if (d.size() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double slack = tol * std::max(1.0, std::abs(d[i]));
    if (!(d[i] >= lower[i] - slack && d[i] <= upper[i] + slack)) return false;
  }
  return true;
}

std::vector<State> DisturbanceBox::vertices() const {
  if (!bounded()) throw ConfigError("box: vertices of an unbounded box");
  std::vector<State> out;
  const std::size_t count = std::size_t{1} << dim();
  out.reserve(count);
  for (std::size_t mask = 0; mask < count; ++mask) {
    State v(dim());
    for (std::size_t i = 0; i < dim(); ++i) v[i] = (mask >> i) & 1 ? upper[i] : lower[i];
    out.push_back(std::move(v));
  }
  // Degenerate coordinates produce repeated vertices; keep the first copy.
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

State DisturbanceBox::center() const {
  State c(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    if (std::isfinite(lower[i]) && std::isfinite(upper[i]))
      c[i] = 0.5 * (lower[i] + upper[i]);
    else if (std::isfinite(lower[i]))
      c[i] = lower[i];
    else if (std::isfinite(upper[i]))
      c[i] = upper[i];
    else
      c[i] = 0.0;
  }
  return c;
}

nlohmann::json DisturbanceBox::to_json() const {
  return {{"lower", lower}, {"upper", upper}};
}

DisturbanceBox DisturbanceBox::from_json(const nlohmann::json& j) {
  auto read = [](const nlohmann::json& arr) {
    std::vector<double> out;
    for (const auto& e : arr) {
      if (e.is_string()) {
        const auto s = e.get<std::string>();
        if (s == "inf" || s == "+inf")
          out.push_back(std::numeric_limits<double>::infinity());
        else if (s == "-inf")
          out.push_back(-std::numeric_limits<double>::infinity());
        else
          throw ConfigError("box: unknown bound '" + s + "'");
      } else {
        out.push_back(e.get<double>());
      }
    }
    return out;
  };
  return DisturbanceBox(read(j.at("lower")), read(j.at("upper")));
}

DisturbanceSignal::DisturbanceSignal(DisturbanceBox box, std::vector<Piece> pieces,
                                     nlohmann::json description)
    : box_(std::move(box)), pieces_(std::move(pieces)), description_(std::move(description)) {
  if (pieces_.empty()) throw ConfigError("signal: at least one piece is required");
  pieces_.front().start = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 2; i < pieces_.size(); ++i)
    if (!(pieces_[i].start > pieces_[i - 1].start))
      throw ConfigError("signal: piece starts must be strictly increasing");
}

std::size_t DisturbanceSignal::piece_index(double t, bool left) const {
  const double tol = lookup_tolerance(t);
  // Right limit: last piece with start <= t + tol. Left limit: last piece
  // with start <= t - tol (a start at t itself does not count).
  const double key = left ? t - tol : t + tol;
  auto it = std::upper_bound(pieces_.begin() + 1, pieces_.end(), key,
                             [](double v, const Piece& p) { return v < p.start; });
  return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

State DisturbanceSignal::operator()(double t) const { return pieces_[piece_index(t, false)].eval(t); }

State DisturbanceSignal::left_limit(double t) const { return pieces_[piece_index(t, true)].eval(t); }

std::vector<double> DisturbanceSignal::discontinuity_times() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].start);
  return out;
}

std::vector<double> DisturbanceSignal::discontinuities_in(double from, double to) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < pieces_.size(); ++i)
    if (pieces_[i].start >= from && pieces_[i].start <= to) out.push_back(pieces_[i].start);
  return out;
}

DisturbanceSignal make_constant(const DisturbanceBox& box, State value) {
  if (!box.contains(value)) throw ConfigError("signal: constant value outside the box");
  nlohmann::json desc = {{"kind", "constant"}, {"box", box.to_json()}, {"values", {value}},
                         {"switch_times", nlohmann::json::array()}};
  std::vector<DisturbanceSignal::Piece> pieces{{0.0, [value](double) { return value; }}};
  return DisturbanceSignal(box, std::move(pieces), std::move(desc));
}

DisturbanceSignal make_piecewise_constant(const DisturbanceBox& box,
                                          std::vector<double> switch_times,
                                          std::vector<State> values) {
  check_increasing(switch_times);
  if (values.size() != switch_times.size() + 1)
    throw ConfigError("signal: piecewise_constant needs one more value than switch times");
  for (const auto& v : values)
    if (!box.contains(v)) throw ConfigError("signal: piecewise_constant value outside the box");
  nlohmann::json desc = {{"kind", "piecewise_constant"},
                         {"box", box.to_json()},
                         {"switch_times", switch_times},
                         {"values", values}};
  std::vector<DisturbanceSignal::Piece> pieces;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double start = i == 0 ? 0.0 : switch_times[i - 1];
    pieces.push_back({start, [v = values[i]](double) { return v; }});
  }
  return DisturbanceSignal(box, std::move(pieces), std::move(desc));
}

DisturbanceSignal make_bang_bang(const DisturbanceBox& box, std::vector<double> switch_times,
                                 bool start_upper) {
  if (!box.bounded()) throw ConfigError("signal: bang_bang requires a bounded box");
  std::vector<State> values;
  for (std::size_t i = 0; i <= switch_times.size(); ++i)
    values.push_back(((i % 2 == 0) != start_upper) ? box.lower : box.upper);
  auto sig = make_piecewise_constant(box, std::move(switch_times), std::move(values));
  nlohmann::json desc = sig.description();
  desc["kind"] = "bang_bang";
  desc["start_upper"] = start_upper;
  return DisturbanceSignal(box, sig.pieces(), std::move(desc));
}

DisturbanceSignal make_sinusoid(const DisturbanceBox& box, double amplitude, double omega,
                                double phase) {
  if (!box.bounded()) throw ConfigError("signal: sinusoid requires a bounded box");
  const State c = box.center();
  State amp(box.dim());
  for (std::size_t i = 0; i < box.dim(); ++i)
    amp[i] = std::min(std::abs(amplitude), 0.5 * (box.upper[i] - box.lower[i]));
  nlohmann::json desc = {{"kind", "smooth"},   {"family", "sinusoid"}, {"box", box.to_json()},
                         {"amplitude", amplitude}, {"omega", omega},       {"phase", phase}};
  auto eval = [c, amp, omega, phase, box](double t) {
    State v(c.size());
    const double s = std::sin(omega * t + phase);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::clamp(c[i] + amp[i] * s, box.lower[i], box.upper[i]);
    return v;
  };
  std::vector<DisturbanceSignal::Piece> pieces{{0.0, eval}};
  return DisturbanceSignal(box, std::move(pieces), std::move(desc));
}

DisturbanceSignal shift(const DisturbanceSignal& d, double offset) {
  if (offset == 0.0) return d;
  std::vector<DisturbanceSignal::Piece> pieces;
  for (const auto& p : d.pieces())
    pieces.push_back({p.start - offset, [eval = p.eval, offset](double t) { return eval(t + offset); }});
  nlohmann::json desc = {{"kind", "shift"}, {"base", d.description()}, {"offset", offset}};
  return DisturbanceSignal(d.box(), std::move(pieces), std::move(desc));
}

DisturbanceSignal concat(const DisturbanceSignal& head, double t_split,
                         const DisturbanceSignal& tail) {
  if (head.dim() != tail.dim()) throw ConfigError("signal: concat of different dimensions");
  nlohmann::json desc = {{"kind", "concat"}, {"head", head.description()}, {"t_split", t_split},
                         {"tail", tail.description()}};
  const double tol = lookup_tolerance(t_split);
  std::vector<DisturbanceSignal::Piece> pieces;
  for (const auto& p : head.pieces())
    if (pieces.empty() || p.start < t_split - tol) pieces.push_back(p);

  // Tail piece active at local time 0 starts at t_split; later ones follow.
  const auto& tp = tail.pieces();
  std::size_t first = 0;
  for (std::size_t i = 1; i < tp.size(); ++i)
    if (tp[i].start <= lookup_tolerance(0.0)) first = i;
  auto relocate = [t_split](const DisturbanceSignal::Evaluator& e) {
    return [e, t_split](double t) { return e(t - t_split); };
  };
  if (t_split <= tol && pieces.size() == 1 && head.pieces().size() >= 1) {
    // Degenerate split: the head contributes nothing on [0, inf).
    pieces.clear();
  }
  pieces.push_back({t_split, relocate(tp[first].eval)});
  for (std::size_t i = first + 1; i < tp.size(); ++i)
    pieces.push_back({tp[i].start + t_split, relocate(tp[i].eval)});
  // The box of the result is the hull of both boxes.
  DisturbanceBox box = head.box();
  for (std::size_t i = 0; i < box.dim(); ++i) {
    box.lower[i] = std::min(box.lower[i], tail.box().lower[i]);
    box.upper[i] = std::max(box.upper[i], tail.box().upper[i]);
  }
  return DisturbanceSignal(box, std::move(pieces), std::move(desc));
}

DisturbanceSignal signal_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "shift") return shift(signal_from_json(j.at("base")), j.at("offset").get<double>());
  if (kind == "concat")
    return concat(signal_from_json(j.at("head")), j.at("t_split").get<double>(),
                  signal_from_json(j.at("tail")));
  const auto box = DisturbanceBox::from_json(j.at("box"));
  if (kind == "smooth") {
    const auto family = j.value("family", std::string("sinusoid"));
    if (family != "sinusoid") throw ConfigError("signal: unknown smooth family '" + family + "'");
    return make_sinusoid(box, j.at("amplitude").get<double>(), j.at("omega").get<double>(),
                         j.value("phase", 0.0));
  }
  auto times = j.value("switch_times", std::vector<double>{});
  if (kind == "bang_bang") return make_bang_bang(box, std::move(times), j.value("start_upper", false));
  auto values = j.at("values").get<std::vector<State>>();
  if (kind == "constant") {
    if (values.size() != 1) throw ConfigError("signal: constant needs exactly one value");
    return make_constant(box, values.front());
  }
  if (kind == "piecewise_constant") return make_piecewise_constant(box, std::move(times), std::move(values));
  throw ConfigError("signal: unknown kind '" + kind + "'");
}

std::vector<double> snap_to_grid(std::vector<double> times, double step, double origin) {
  for (double& t : times) t = origin + std::round((t - origin) / step) * step;
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [step](double a, double b) { return std::abs(a - b) < 1e-9 * step; }),
              times.end());
  return times;
}

}  // namespace rfdelyap
