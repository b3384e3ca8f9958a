#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfdelyap/types.hpp"

namespace rfdelyap {

/// Read access to a state history x(theta), theta in [-span, 0].
///
/// Right-hand sides receive a view rather than a concrete segment so the
/// integrator can hand out stage histories without materializing them.
class HistoryView {
 public:
  virtual ~HistoryView() = default;
  virtual double span() const = 0;
  virtual std::size_t dim() const = 0;
  virtual State at(double theta) const = 0;
};

/// A continuous history on a uniform grid theta_k = -span + k * grid_step.
///
/// Dense values come from cubic Hermite interpolation when derivative samples
/// are present and from linear interpolation otherwise. Each node carries a
/// left and a right derivative so that kinks of a solution at discontinuity
/// times (and at the initial time) are represented exactly; the cell
/// [theta_k, theta_{k+1}] uses the right derivative at k and the left
/// derivative at k + 1.
///
/// A segment with span 0 holds a single vector and stands for R^n itself.
class HistorySegment final : public HistoryView {
 public:
  HistorySegment() = default;

  /// `samples` is row-major, (N + 1) rows of `dim` values.
  HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples);
  HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples,
                 std::vector<double> derivatives);
  HistorySegment(double grid_step, std::size_t dim, std::vector<double> samples,
                 std::vector<double> left_derivatives, std::vector<double> right_derivatives);

  static HistorySegment zero(double span, double grid_step, std::size_t dim);
  static HistorySegment constant(double span, double grid_step, std::span<const double> value);

  /// Samples `f` (and `df` when given) at the grid nodes.
  static HistorySegment sample(double span, double grid_step, std::size_t dim,
                               const std::function<State(double)>& f,
                               const std::function<State(double)>& df = {});

  double span() const override { return span_; }
  std::size_t dim() const override { return dim_; }
  State at(double theta) const override;

  double grid_step() const { return grid_step_; }
  std::size_t intervals() const { return intervals_; }
  std::size_t node_count() const { return intervals_ + 1; }
  bool has_derivatives() const { return !dleft_.empty(); }
  double theta(std::size_t k) const;

  std::span<const double> node(std::size_t k) const;
  std::span<const double> left_derivative(std::size_t k) const;
  std::span<const double> right_derivative(std::size_t k) const;
  std::span<const double> head() const { return node(intervals_); }

  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& left_derivatives() const { return dleft_; }
  const std::vector<double>& right_derivatives() const { return dright_; }

  /// Dense value at cell k, local coordinate s in [0, 1].
  double cell_value(std::size_t k, double s, std::size_t component) const;
  double cell_max_norm(std::size_t k) const;

  /// max over theta of |x(theta)| using the dense interpolant.
  double sup_norm() const;

  /// Same function re-gridded with step grid_step / factor (node-exact).
  HistorySegment refine(std::size_t factor) const;

  /// Restriction to the trailing window [-span, 0]; span must be a grid multiple.
  HistorySegment tail(double span) const;
  /// Nodes first .. first + intervals as a new segment.
  HistorySegment slice(std::size_t first, std::size_t intervals) const;

  HistorySegment operator-(const HistorySegment& other) const;
  HistorySegment scaled(double factor) const;

  nlohmann::json to_json() const;
  static HistorySegment from_json(const nlohmann::json& j);

  /// Columns theta, x1..xn and, when derivatives are present, dx1..dxn.
  void write_csv(std::ostream& os) const;
  static HistorySegment read_csv(std::istream& is);

 private:
  void validate();

  double span_ = 0.0;
  double grid_step_ = 1.0;
  std::size_t intervals_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> samples_;
  std::vector<double> dleft_;
  std::vector<double> dright_;
};

double sup_norm(const HistorySegment& x);

/// Dense value at theta in [-span, 0]; throws std::out_of_range outside.
State interpolate(const HistorySegment& x, double theta);

/// E_h(x; v): the history shifted by h with the ray x(0) + (theta + h) v
/// spliced onto (-h, 0]. h must be a grid multiple with 0 <= h < span. For a
/// span-0 segment the operator degenerates to x + h v.
HistorySegment apply_Eh(const HistorySegment& x, std::span<const double> v, double h);

/// Modulus-of-continuity functional:
/// sup |x(0) - x(theta)| over [-min(h, span), 0] plus, when h < span,
/// sup |x(theta + h) - x(theta)| over [-span, -h].
double modulus_G2(const HistorySegment& x, double h);

}  // namespace rfdelyap
