#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

namespace robustreg {

/// One observation's covariate.  Designs are either coordinate-valued
/// (raw / custom feature maps) or cell-valued (indicator feature maps);
/// exactly one of the two representations is active.
struct InputPoint {
  Eigen::VectorXd coords;
  std::int32_t cell = -1;

  static InputPoint from_coords(Eigen::VectorXd x) {
    InputPoint p;
    p.coords = std::move(x);
    return p;
  }
  static InputPoint from_cell(std::int32_t c) {
    InputPoint p;
    p.cell = c;
    return p;
  }
  bool is_cell() const { return cell >= 0; }
};

/// Axis-aligned parameter box; the hypothesis class is
/// F = { x -> <theta, phi(x)> : theta in the box }.
struct ParamBox {
  Eigen::VectorXd lo, hi;

  ParamBox() = default;
  ParamBox(Eigen::VectorXd lo_, Eigen::VectorXd hi_);

  int dim() const { return static_cast<int>(lo.size()); }
  Eigen::VectorXd widths() const { return hi - lo; }
  Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
  bool contains(const Eigen::VectorXd& theta, double tol = 0.0) const;
  Eigen::VectorXd clip(const Eigen::VectorXd& theta) const;
};

/// Feature map phi: input -> R^d.  Tabulated/evaluable only; no symbolic form.
class FeatureMap {
 public:
  enum class Kind { RawCoordinates, PartitionIndicators, ScaledIndicators, Custom };

  /// phi(x) = x; sup_bounds[j] must dominate sup_x |x_j| over the design.
  static FeatureMap raw_coordinates(int dim, Eigen::VectorXd sup_bounds);
  /// phi_j(x) = 1{x in cell j}
  static FeatureMap partition_indicators(int cells);
  /// phi_j(x) = 1{x in cell j} / sqrt(p_j); orthonormal when P(cell j) = p_j
  static FeatureMap scaled_indicators(Eigen::VectorXd cell_probs);
  /// arbitrary tabulated basis on coordinate inputs
  static FeatureMap custom(int dim, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval,
                           Eigen::VectorXd sup_bounds, bool orthonormal = false);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  /// declared property E[phi_j phi_k] = delta_jk under the design law
  bool orthonormal() const { return orthonormal_; }
  /// per-coordinate bounds s_j >= sup_x |phi_j(x)|
  const Eigen::VectorXd& sup_bounds() const { return sup_bounds_; }
  /// cell probabilities (ScaledIndicators only)
  const Eigen::VectorXd& cell_probs() const;

  bool cell_based() const {
    return kind_ == Kind::PartitionIndicators || kind_ == Kind::ScaledIndicators;
  }

  Eigen::VectorXd evaluate(const InputPoint& x) const;

 private:
  FeatureMap() = default;
  Kind kind_ = Kind::RawCoordinates;
  int dim_ = 0;
  bool orthonormal_ = false;
  Eigen::VectorXd sup_bounds_;
  Eigen::VectorXd cell_probs_;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> custom_;
};

struct LinearModel {
  Eigen::VectorXd theta;
};

struct Dataset {
  std::vector<InputPoint> inputs;
  Eigen::VectorXd outputs;

  int n() const { return static_cast<int>(outputs.size()); }
};

/// Loss in the prediction argument: value(y, z) with curvature bounds
/// b1 <= d^2/dz^2 value <= b2.
struct LossSpec {
  std::function<double(double y, double z)> value;
  double b1 = 2.0;
  double b2 = 2.0;

  static LossSpec least_squares();
};

double predict(const LinearModel& model, const FeatureMap& fmap, const InputPoint& x);

/// n-vector of predictions <theta, phi(x_i)>
Eigen::VectorXd predict_all(const LinearModel& model, const FeatureMap& fmap, const Dataset& data);

/// n x d matrix with rows phi(x_i)
Eigen::MatrixXd design_matrix(const FeatureMap& fmap, const Dataset& data);

/// (1/n) sum_i loss(y_i, f_theta(x_i)); errors on an empty dataset
double empirical_risk(const LinearModel& model, const FeatureMap& fmap, const Dataset& data,
                      const LossSpec& loss = LossSpec::least_squares());

/// Upper bound on sup_{f,g in F} ||f - g||_inf from box widths and feature
/// sup bounds: sum_j w_j s_j in general; max_j w_j s_j (exact) for
/// disjoint-support indicator maps.
double linf_diameter_bound(const ParamBox& box, const FeatureMap& fmap);

Eigen::VectorXd project_to_box(const Eigen::VectorXd& theta, const ParamBox& box);

/// Max violation of b1 <= second difference <= b2 over the given grids
/// (central second differences in the prediction argument, step h).
double loss_curvature_violation(const LossSpec& loss, const Eigen::VectorXd& y_grid,
                                const Eigen::VectorXd& z_grid, double h = 1e-4);

}  // namespace robustreg
