#include "robustreg/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace robustreg {

ParamBox::ParamBox(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw std::invalid_argument("ParamBox: lo/hi must be nonempty and of equal dimension");
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]) || !(lo[j] < hi[j]))
      throw std::invalid_argument("ParamBox: requires finite lo[j] < hi[j] in every coordinate");
  }
}

bool ParamBox::contains(const Eigen::VectorXd& theta, double tol) const {
  if (theta.size() != lo.size()) return false;
  return (theta.array() >= lo.array() - tol).all() && (theta.array() <= hi.array() + tol).all();
}

Eigen::VectorXd ParamBox::clip(const Eigen::VectorXd& theta) const {
  if (theta.size() != lo.size()) throw std::invalid_argument("ParamBox::clip: dimension mismatch");
  return theta.cwiseMax(lo).cwiseMin(hi);
}

FeatureMap FeatureMap::raw_coordinates(int dim, Eigen::VectorXd sup_bounds) {
  if (dim <= 0) throw std::invalid_argument("FeatureMap: dim must be positive");
  if (sup_bounds.size() != dim || (sup_bounds.array() < 0).any())
    throw std::invalid_argument("FeatureMap: sup_bounds must be nonnegative, one per coordinate");
  FeatureMap f;
  f.kind_ = Kind::RawCoordinates;
  f.dim_ = dim;
  f.sup_bounds_ = std::move(sup_bounds);
  return f;
}

FeatureMap FeatureMap::partition_indicators(int cells) {
  if (cells <= 0) throw std::invalid_argument("FeatureMap: cell count must be positive");
  FeatureMap f;
  f.kind_ = Kind::PartitionIndicators;
  f.dim_ = cells;
  f.sup_bounds_ = Eigen::VectorXd::Ones(cells);
  return f;
}

FeatureMap FeatureMap::scaled_indicators(Eigen::VectorXd cell_probs) {
  const Eigen::Index k = cell_probs.size();
  if (k == 0 || (cell_probs.array() <= 0).any())
    throw std::invalid_argument("FeatureMap: cell probabilities must be positive");
  if (std::abs(cell_probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("FeatureMap: cell probabilities must sum to 1");
  FeatureMap f;
  f.kind_ = Kind::ScaledIndicators;
  f.dim_ = static_cast<int>(k);
  f.sup_bounds_ = cell_probs.array().sqrt().inverse();
  f.cell_probs_ = std::move(cell_probs);
  f.orthonormal_ = true;  // E[phi_j phi_k] = delta_jk under the matching design
  return f;
}

FeatureMap FeatureMap::custom(int dim, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval,
                              Eigen::VectorXd sup_bounds, bool orthonormal) {
  if (dim <= 0) throw std::invalid_argument("FeatureMap: dim must be positive");
  if (!eval) throw std::invalid_argument("FeatureMap: custom evaluator must be callable");
  if (sup_bounds.size() != dim || (sup_bounds.array() < 0).any())
    throw std::invalid_argument("FeatureMap: sup_bounds must be nonnegative, one per feature");
  FeatureMap f;
  f.kind_ = Kind::Custom;
  f.dim_ = dim;
  f.sup_bounds_ = std::move(sup_bounds);
  f.custom_ = std::move(eval);
  f.orthonormal_ = orthonormal;
  return f;
}

const Eigen::VectorXd& FeatureMap::cell_probs() const {
  if (kind_ != Kind::ScaledIndicators)
    throw std::logic_error("FeatureMap::cell_probs: only scaled-indicator maps carry probabilities");
  return cell_probs_;
}

Eigen::VectorXd FeatureMap::evaluate(const InputPoint& x) const {
  switch (kind_) {
    case Kind::RawCoordinates: {
      if (x.coords.size() != dim_)
        throw std::invalid_argument("FeatureMap: input has wrong coordinate dimension");
      return x.coords;
    }
    case Kind::PartitionIndicators:
    case Kind::ScaledIndicators: {
      if (!x.is_cell() || x.cell >= dim_)
        throw std::invalid_argument("FeatureMap: indicator map expects a cell index in [0, cells)");
      Eigen::VectorXd phi = Eigen::VectorXd::Zero(dim_);
      phi[x.cell] = kind_ == Kind::ScaledIndicators ? 1.0 / std::sqrt(cell_probs_[x.cell]) : 1.0;
      return phi;
    }
    case Kind::Custom: {
      Eigen::VectorXd phi = custom_(x.coords);
      if (phi.size() != dim_)
        throw std::runtime_error("FeatureMap: custom evaluator returned wrong dimension");
      return phi;
    }
  }
  throw std::logic_error("FeatureMap: unreachable");
}

LossSpec LossSpec::least_squares() {
  LossSpec l;
  l.value = [](double y, double z) {
    const double r = y - z;
    return r * r;
  };
  l.b1 = 2.0;
  l.b2 = 2.0;
  return l;
}

double predict(const LinearModel& model, const FeatureMap& fmap, const InputPoint& x) {
  if (model.theta.size() != fmap.dim())
    throw std::invalid_argument("predict: parameter/feature dimension mismatch");
  if (fmap.cell_based()) {
    // avoid materializing the one-hot vector on the common path
    if (!x.is_cell() || x.cell >= fmap.dim())
      throw std::invalid_argument("predict: indicator map expects a cell index in [0, cells)");
    const double scale = fmap.kind() == FeatureMap::Kind::ScaledIndicators
                             ? 1.0 / std::sqrt(fmap.cell_probs()[x.cell])
                             : 1.0;
    return model.theta[x.cell] * scale;
  }
  return model.theta.dot(fmap.evaluate(x));
}

Eigen::VectorXd predict_all(const LinearModel& model, const FeatureMap& fmap, const Dataset& data) {
  const int n = data.n();
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = predict(model, fmap, data.inputs[i]);
  return out;
}

Eigen::MatrixXd design_matrix(const FeatureMap& fmap, const Dataset& data) {
  const int n = data.n();
  if (static_cast<int>(data.inputs.size()) != n)
    throw std::invalid_argument("design_matrix: inputs/outputs length mismatch");
  Eigen::MatrixXd X(n, fmap.dim());
  for (int i = 0; i < n; ++i) X.row(i) = fmap.evaluate(data.inputs[i]).transpose();
  return X;
}

double empirical_risk(const LinearModel& model, const FeatureMap& fmap, const Dataset& data,
                      const LossSpec& loss) {
  const int n = data.n();
  if (n == 0) throw std::invalid_argument("empirical_risk: empty dataset");
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += loss.value(data.outputs[i], predict(model, fmap, data.inputs[i]));
  return acc / n;
}

double linf_diameter_bound(const ParamBox& box, const FeatureMap& fmap) {
  if (box.dim() != fmap.dim())
    throw std::invalid_argument("linf_diameter_bound: box/feature dimension mismatch");
  const Eigen::VectorXd term = box.widths().cwiseProduct(fmap.sup_bounds());
  // indicator features have disjoint supports, so the sup-norm gap is attained
  // one cell at a time and the max is exact; generic maps get the triangle bound
  if (fmap.cell_based()) return term.maxCoeff();
  return term.sum();
}

Eigen::VectorXd project_to_box(const Eigen::VectorXd& theta, const ParamBox& box) {
  return box.clip(theta);
}

double loss_curvature_violation(const LossSpec& loss, const Eigen::VectorXd& y_grid,
                                const Eigen::VectorXd& z_grid, double h) {
  double worst = 0.0;
  for (Eigen::Index a = 0; a < y_grid.size(); ++a) {
    for (Eigen::Index b = 0; b < z_grid.size(); ++b) {
      const double y = y_grid[a], z = z_grid[b];
      const double second =
          (loss.value(y, z + h) - 2.0 * loss.value(y, z) + loss.value(y, z - h)) / (h * h);
      worst = std::max(worst, std::max(loss.b1 - second, second - loss.b2));
    }
  }
  return worst;
}

}  // namespace robustreg
