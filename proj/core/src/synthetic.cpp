#include "robustreg/synthetic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "robustreg/kvconfig.hpp"

namespace robustreg {

NoiseSpec NoiseSpec::gaussian(double sd) {
  if (!(sd >= 0.0)) throw std::invalid_argument("NoiseSpec: gaussian sd must be nonnegative");
  NoiseSpec s;
  s.kind = NoiseKind::Gaussian;
  s.scale = sd;
  return s;
}

NoiseSpec NoiseSpec::student_t(double nu, double scale) {
  if (!(nu > 2.0))
    throw std::invalid_argument("NoiseSpec: student-t requires nu > 2 (finite conditional variance)");
  if (!(scale >= 0.0)) throw std::invalid_argument("NoiseSpec: scale must be nonnegative");
  NoiseSpec s;
  s.kind = NoiseKind::StudentT;
  s.nu = nu;
  s.scale = scale;
  return s;
}

double NoiseSpec::variance() const {
  switch (kind) {
    case NoiseKind::Gaussian: return scale * scale;
    case NoiseKind::StudentT: return scale * scale * nu / (nu - 2.0);
    case NoiseKind::TwoPoint:
      throw std::logic_error("NoiseSpec: two-point noise variance is input-dependent");
  }
  throw std::logic_error("NoiseSpec: unreachable");
}

double NoiseSpec::sample(Rng& rng) const {
  switch (kind) {
    case NoiseKind::Gaussian: return scale * rng.gaussian();
    case NoiseKind::StudentT: return scale * rng.student_t(nu);
    case NoiseKind::TwoPoint:
      throw std::logic_error("NoiseSpec: two-point noise is sampled by the hypercube variant");
  }
  throw std::logic_error("NoiseSpec: unreachable");
}

DistributionSpec DistributionSpec::gaussian_design(Eigen::MatrixXd sigma, Eigen::VectorXd theta0,
                                                   NoiseSpec noise, ParamBox box, double quad_coeff,
                                                   int quad_axis) {
  const Eigen::Index d = sigma.rows();
  if (d == 0 || sigma.cols() != d || theta0.size() != d || box.dim() != d)
    throw std::invalid_argument("gaussian_design: dimension mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw std::invalid_argument("gaussian_design: covariance must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian_design: covariance must be positive definite");
  if (quad_axis < 0 || quad_axis >= d)
    throw std::invalid_argument("gaussian_design: quad_axis out of range");
  if (noise.kind == NoiseKind::TwoPoint)
    throw std::invalid_argument("gaussian_design: two-point noise is hypercube-only");
  DistributionSpec s;
  s.variant_ = Variant::GaussianDesign;
  s.sigma_ = std::move(sigma);
  s.sigma_chol_ = llt.matrixL();
  s.theta0_ = std::move(theta0);
  s.noise_ = noise;
  s.box_ = std::move(box);
  s.quad_coeff_ = quad_coeff;
  s.quad_axis_ = quad_axis;
  return s;
}

DistributionSpec DistributionSpec::partition_design(Eigen::VectorXd cell_probs, double theta0,
                                                    NoiseSpec noise, ParamBox box, bool scaled) {
  const Eigen::Index d = cell_probs.size();
  if (d == 0 || box.dim() != d) throw std::invalid_argument("partition_design: dimension mismatch");
  if ((cell_probs.array() < 0).any() || std::abs(cell_probs.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("partition_design: cell probabilities must be >= 0 and sum to 1");
  if (scaled && (cell_probs.array() <= 0).any())
    throw std::invalid_argument("partition_design: scaled features need strictly positive cells");
  if (noise.kind == NoiseKind::TwoPoint)
    throw std::invalid_argument("partition_design: two-point noise is hypercube-only");
  DistributionSpec s;
  s.variant_ = Variant::PartitionDesign;
  s.cell_probs_ = std::move(cell_probs);
  s.location_ = theta0;
  s.noise_ = noise;
  s.box_ = std::move(box);
  s.scaled_features_ = scaled;
  return s;
}

DistributionSpec DistributionSpec::hypercube(double beta, int sign) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("hypercube: beta must be in (0,1]");
  if (sign != 1 && sign != -1) throw std::invalid_argument("hypercube: sign must be +1 or -1");
  DistributionSpec s;
  s.variant_ = Variant::Hypercube;
  s.beta_ = beta;
  s.sign_ = sign;
  s.cell_probs_ = Eigen::Vector2d(1.0 - beta, beta);
  s.noise_.kind = NoiseKind::TwoPoint;
  s.box_ = ParamBox(Eigen::Vector2d(-1.0, -1.0), Eigen::Vector2d(1.0, 1.0));
  return s;
}

FeatureMap DistributionSpec::feature_map() const {
  switch (variant_) {
    case Variant::GaussianDesign: {
      // sup bound per coordinate is infinite for a Gaussian input; the
      // diameter helper is therefore only meaningful for indicator designs
      Eigen::VectorXd sup = Eigen::VectorXd::Constant(dim(), std::numeric_limits<double>::infinity());
      return FeatureMap::raw_coordinates(dim(), std::move(sup));
    }
    case Variant::PartitionDesign:
      return scaled_features_ ? FeatureMap::scaled_indicators(cell_probs_)
                              : FeatureMap::partition_indicators(dim());
    case Variant::Hypercube: return FeatureMap::partition_indicators(2);
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

Eigen::MatrixXd DistributionSpec::gram() const {
  switch (variant_) {
    case Variant::GaussianDesign: return sigma_;
    case Variant::PartitionDesign:
      if (scaled_features_) return Eigen::MatrixXd::Identity(dim(), dim());
      return cell_probs_.asDiagonal();
    case Variant::Hypercube: return cell_probs_.asDiagonal();
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

Eigen::VectorXd DistributionSpec::cross_moment() const {
  switch (variant_) {
    case Variant::GaussianDesign:
      // the centered quadratic term has zero cross moment with X (odd moments)
      return sigma_ * theta0_;
    case Variant::PartitionDesign:
      if (scaled_features_) return location_ * cell_probs_.array().sqrt().matrix();
      return location_ * cell_probs_;
    case Variant::Hypercube: return Eigen::Vector2d(0.0, sign_ * beta_);
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

double DistributionSpec::output_second_moment() const {
  switch (variant_) {
    case Variant::GaussianDesign: {
      const double v = sigma_(quad_axis_, quad_axis_);
      return theta0_.dot(sigma_ * theta0_) + 2.0 * quad_coeff_ * quad_coeff_ * v * v +
             noise_.variance();
    }
    case Variant::PartitionDesign: return location_ * location_ + noise_.variance();
    case Variant::Hypercube: return 1.0;
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

double DistributionSpec::regression_sup() const {
  switch (variant_) {
    case Variant::GaussianDesign:
      if (theta0_.isZero(0.0) && quad_coeff_ == 0.0) return 0.0;
      return std::numeric_limits<double>::infinity();
    case Variant::PartitionDesign: return std::abs(location_);
    case Variant::Hypercube: return 1.0;
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

double DistributionSpec::conditional_noise_second_moment() const {
  switch (variant_) {
    case Variant::GaussianDesign:
    case Variant::PartitionDesign: return noise_.variance();
    case Variant::Hypercube: return 1.0 - beta_;
  }
  throw std::logic_error("DistributionSpec: unreachable");
}

const Eigen::VectorXd& DistributionSpec::cell_probs() const {
  if (variant_ == Variant::GaussianDesign)
    throw std::logic_error("DistributionSpec: gaussian design has no cells");
  return cell_probs_;
}

double DistributionSpec::location() const {
  if (variant_ != Variant::PartitionDesign)
    throw std::logic_error("DistributionSpec: location applies to partition designs");
  return location_;
}

const Eigen::MatrixXd& DistributionSpec::design_cov() const {
  if (variant_ != Variant::GaussianDesign)
    throw std::logic_error("DistributionSpec: design covariance applies to gaussian designs");
  return sigma_;
}

const Eigen::VectorXd& DistributionSpec::design_coef() const {
  if (variant_ != Variant::GaussianDesign)
    throw std::logic_error("DistributionSpec: design coefficients apply to gaussian designs");
  return theta0_;
}

double DistributionSpec::hypercube_beta() const {
  if (variant_ != Variant::Hypercube)
    throw std::logic_error("DistributionSpec: beta applies to the hypercube variant");
  return beta_;
}

int DistributionSpec::hypercube_sign() const {
  if (variant_ != Variant::Hypercube)
    throw std::logic_error("DistributionSpec: sign applies to the hypercube variant");
  return sign_;
}

Dataset DistributionSpec::sample(int n, std::uint64_t seed) const {
  if (n < 2) throw std::invalid_argument("sample: n must be at least 2");
  Rng rng(seed);
  Dataset data;
  data.inputs.reserve(n);
  data.outputs.resize(n);
  switch (variant_) {
    case Variant::GaussianDesign: {
      const int d = dim();
      Eigen::VectorXd z(d);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) z[j] = rng.gaussian();
        Eigen::VectorXd x = sigma_chol_ * z;
        const double xa = x[quad_axis_];
        double y = theta0_.dot(x) + noise_.sample(rng);
        if (quad_coeff_ != 0.0) y += quad_coeff_ * (xa * xa - sigma_(quad_axis_, quad_axis_));
        data.inputs.push_back(InputPoint::from_coords(std::move(x)));
        data.outputs[i] = y;
      }
      break;
    }
    case Variant::PartitionDesign: {
      for (int i = 0; i < n; ++i) {
        data.inputs.push_back(InputPoint::from_cell(rng.categorical(cell_probs_)));
        data.outputs[i] = location_ + noise_.sample(rng);
      }
      break;
    }
    case Variant::Hypercube: {
      const double amp = 1.0 / std::sqrt(beta_);
      const double p_plus = 0.5 * (1.0 + sign_ * std::sqrt(beta_));
      for (int i = 0; i < n; ++i) {
        const bool rare = rng.bernoulli(beta_);
        data.inputs.push_back(InputPoint::from_cell(rare ? 1 : 0));
        data.outputs[i] = rare ? (rng.bernoulli(p_plus) ? amp : -amp) : 0.0;
      }
      break;
    }
  }
  return data;
}

std::string DistributionSpec::serialize() const {
  KvFile file;
  KvSection& s = file.emplace("spec");
  switch (variant_) {
    case Variant::GaussianDesign:
      s.set("variant", "gaussian-design");
      s.set("design_cov", kv_from_matrix(sigma_));
      s.set("design_coef", kv_from_vector(theta0_));
      s.set("quad_coeff", kv_from_double(quad_coeff_));
      s.set("quad_axis", kv_from_int(quad_axis_));
      break;
    case Variant::PartitionDesign:
      s.set("variant", "partition-design");
      s.set("cell_probs", kv_from_vector(cell_probs_));
      s.set("location", kv_from_double(location_));
      s.set("features", scaled_features_ ? "scaled" : "plain");
      break;
    case Variant::Hypercube:
      s.set("variant", "hypercube");
      s.set("beta", kv_from_double(beta_));
      s.set("sign", kv_from_int(sign_));
      break;
  }
  if (variant_ != Variant::Hypercube) {
    s.set("noise_kind", noise_.kind == NoiseKind::Gaussian ? "gaussian" : "student-t");
    s.set("noise_scale", kv_from_double(noise_.scale));
    if (noise_.kind == NoiseKind::StudentT) s.set("noise_nu", kv_from_double(noise_.nu));
    s.set("box_lo", kv_from_vector(box_.lo));
    s.set("box_hi", kv_from_vector(box_.hi));
  }
  return file.render();
}

namespace {

NoiseSpec parse_noise(const KvSection& s) {
  const std::string kind = s.require("noise_kind");
  const double scale = kv_to_double(s.require("noise_scale"));
  if (kind == "gaussian") return NoiseSpec::gaussian(scale);
  if (kind == "student-t") return NoiseSpec::student_t(kv_to_double(s.require("noise_nu")), scale);
  throw std::invalid_argument("spec: unknown noise kind '" + kind + "'");
}

ParamBox parse_box(const KvSection& s) {
  return ParamBox(kv_to_vector(s.require("box_lo")), kv_to_vector(s.require("box_hi")));
}

}  // namespace

DistributionSpec DistributionSpec::deserialize(const std::string& text) {
  const KvFile file = KvFile::parse(text);
  const KvSection& s = file.require("spec");
  const std::string variant = s.require("variant");
  if (variant == "gaussian-design") {
    return gaussian_design(kv_to_matrix(s.require("design_cov")),
                           kv_to_vector(s.require("design_coef")), parse_noise(s), parse_box(s),
                           kv_to_double(s.get_or("quad_coeff", "0")),
                           static_cast<int>(kv_to_int(s.get_or("quad_axis", "0"))));
  }
  if (variant == "partition-design") {
    const std::string features = s.get_or("features", "plain");
    if (features != "plain" && features != "scaled")
      throw std::invalid_argument("spec: features must be 'plain' or 'scaled'");
    return partition_design(kv_to_vector(s.require("cell_probs")),
                            kv_to_double(s.require("location")), parse_noise(s), parse_box(s),
                            features == "scaled");
  }
  if (variant == "hypercube") {
    return hypercube(kv_to_double(s.require("beta")), static_cast<int>(kv_to_int(s.require("sign"))));
  }
  throw std::invalid_argument("spec: unknown variant '" + variant + "'");
}

Eigen::VectorXd constrained_argmin_quadratic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& b,
                                             const ParamBox& box, double tol) {
  const Eigen::Index d = Q.rows();
  if (Q.cols() != d || b.size() != d || box.dim() != d)
    throw std::invalid_argument("constrained_argmin_quadratic: dimension mismatch");
  if (!(tol > 0.0)) throw std::invalid_argument("constrained_argmin_quadratic: tol must be positive");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("constrained_argmin_quadratic: eigen decomposition failed");
  const double lmax = es.eigenvalues().maxCoeff();

  // gradient of c0 - 2<t,b> + t^T Q t is 2(Qt - b)
  auto gradient = [&](const Eigen::VectorXd& t) { return (2.0 * (Q * t - b)).eval(); };
  // exact worst-case directional derivative over the box: min_theta <g, theta - t>
  auto certificate_gap = [&](const Eigen::VectorXd& t, const Eigen::VectorXd& g) {
    double gap = 0.0;
    for (Eigen::Index j = 0; j < d; ++j)
      gap += g[j] * ((g[j] > 0.0 ? box.lo[j] : box.hi[j]) - t[j]);
    return gap;  // >= -tol certifies optimality
  };

  if (!(lmax > 0.0)) {
    // risk is affine: each coordinate optimum sits at a box face
    Eigen::VectorXd t(d);
    for (Eigen::Index j = 0; j < d; ++j)
      t[j] = b[j] > 0.0 ? box.hi[j] : (b[j] < 0.0 ? box.lo[j] : 0.5 * (box.lo[j] + box.hi[j]));
    return t;
  }

  const double step = 1.0 / (2.0 * lmax);
  Eigen::VectorXd t = box.center();
  const int max_iters = 200000;
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd g = gradient(t);
    if (certificate_gap(t, g) >= -tol) return t;
    t = box.clip(t - step * g);
  }
  throw std::runtime_error("constrained_argmin_quadratic: no convergence in " +
                           std::to_string(max_iters) + " iterations; best iterate [" +
                           kv_from_vector(t) + "]");
}

double RiskOracle::risk(const Eigen::VectorXd& theta) const {
  return c0 - 2.0 * theta.dot(b) + theta.dot(Q * theta);
}

RiskOracle make_risk_oracle(const DistributionSpec& spec, double tol) {
  RiskOracle o;
  o.Q = spec.gram();
  o.b = spec.cross_moment();
  o.c0 = spec.output_second_moment();
  o.box = spec.box();
  o.theta_star = constrained_argmin_quadratic(o.Q, o.b, o.box, tol);
  o.risk_star = o.risk(o.theta_star);
  return o;
}

double sigma_sup_conditional(const DistributionSpec& spec, const ParamBox& box) {
  const Eigen::VectorXd theta_star =
      constrained_argmin_quadratic(spec.gram(), spec.cross_moment(), box, 1e-12);
  switch (spec.variant()) {
    case DistributionSpec::Variant::GaussianDesign: {
      const Eigen::VectorXd delta = spec.design_coef() - theta_star;
      const double drift = delta.lpNorm<Eigen::Infinity>();
      if (spec.quad_coeff() != 0.0 || drift > 1e-9)
        throw std::domain_error(
            "sigma_sup_conditional: conditional residual second moment is unbounded over gaussian "
            "inputs unless the regression function lies in the class (use the variance-factor "
            "route instead)");
      return std::sqrt(spec.noise().variance());
    }
    case DistributionSpec::Variant::PartitionDesign: {
      const Eigen::VectorXd& p = spec.cell_probs();
      const bool scaled = spec.feature_map().kind() == FeatureMap::Kind::ScaledIndicators;
      const double noise_var = spec.noise().variance();
      double sup = 0.0;
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p[j] <= 0.0) continue;  // never observed
        const double fitted = theta_star[j] * (scaled ? 1.0 / std::sqrt(p[j]) : 1.0);
        const double gap = spec.location() - fitted;
        sup = std::max(sup, noise_var + gap * gap);
      }
      return std::sqrt(sup);
    }
    case DistributionSpec::Variant::Hypercube: {
      const double beta = spec.hypercube_beta();
      const double sign = spec.hypercube_sign();
      const double v0 = theta_star[0], v1 = theta_star[1];
      const double cell0 = v0 * v0;  // Y = 0 there
      const double cell1 = 1.0 / beta - 2.0 * sign * v1 + v1 * v1;
      return std::sqrt(std::max(cell0, cell1));
    }
  }
  throw std::logic_error("sigma_sup_conditional: unreachable");
}

double clipped_predictor_risk(const DistributionSpec& spec, const Eigen::VectorXd& theta,
                              double clip_bound) {
  if (!(clip_bound >= 0.0)) throw std::invalid_argument("clipped_predictor_risk: bound must be >= 0");
  // per-cell conditional moments (m1, m2) of Y and cell masses
  Eigen::VectorXd mass, m1, m2;
  const FeatureMap fmap = spec.feature_map();
  switch (spec.variant()) {
    case DistributionSpec::Variant::PartitionDesign: {
      mass = spec.cell_probs();
      m1 = Eigen::VectorXd::Constant(mass.size(), spec.location());
      m2 = Eigen::VectorXd::Constant(mass.size(),
                                     spec.location() * spec.location() + spec.noise().variance());
      break;
    }
    case DistributionSpec::Variant::Hypercube: {
      const double beta = spec.hypercube_beta();
      mass = Eigen::Vector2d(1.0 - beta, beta);
      m1 = Eigen::Vector2d(0.0, static_cast<double>(spec.hypercube_sign()));
      m2 = Eigen::Vector2d(0.0, 1.0 / beta);
      break;
    }
    case DistributionSpec::Variant::GaussianDesign:
      throw std::domain_error(
          "clipped_predictor_risk: needs a cell-based design (finitely many prediction values)");
  }
  if (theta.size() != mass.size())
    throw std::invalid_argument("clipped_predictor_risk: dimension mismatch");
  double risk = 0.0;
  for (Eigen::Index j = 0; j < mass.size(); ++j) {
    if (mass[j] <= 0.0) continue;
    const double raw = theta[j] * fmap.sup_bounds()[j];  // indicator value on cell j
    const double c = std::clamp(raw, -clip_bound, clip_bound);
    risk += mass[j] * (m2[j] - 2.0 * c * m1[j] + c * c);
  }
  return risk;
}

std::pair<DistributionSpec, DistributionSpec> hypercube_pair(int n) {
  if (n < 1) throw std::invalid_argument("hypercube_pair: n must be >= 1");
  const double beta = 1.0 / (2.0 * std::sqrt(static_cast<double>(n)));
  return {DistributionSpec::hypercube(beta, -1), DistributionSpec::hypercube(beta, +1)};
}

}  // namespace robustreg
