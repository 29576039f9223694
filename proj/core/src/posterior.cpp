#include "robustreg/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robustreg/truncation.hpp"

namespace robustreg {

PriorSampleSet PriorSampleSet::generate(const ParamBox& box, int m, std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("PriorSampleSet: need at least one sample");
  const int d = box.dim();
  const Eigen::VectorXd w = box.widths();
  PriorSampleSet out;
  out.seed = seed;
  out.thetas.resize(m, d);
  Rng rng(seed);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < d; ++k) out.thetas(j, k) = box.lo[k] + w[k] * rng.uniform();
  return out;
}

double PosteriorConfig::default_lambda(double sigma, double H) {
  if (!(sigma >= 0.0) || !(H >= 0.0) || 2.0 * sigma + H <= 0.0)
    throw std::invalid_argument("default_lambda: need sigma, H >= 0 with 2*sigma + H > 0");
  const double s = 2.0 * sigma + H;
  return 0.32 / (s * s);
}

Eigen::VectorXd ChainResult::final_draw() const {
  if (draws.rows() == 0) throw std::logic_error("ChainResult: no kept draws");
  return draws.row(draws.rows() - 1).transpose();
}

TruncatedTilt::TruncatedTilt(const Dataset& data, const FeatureMap& fmap, double lambda,
                             const PriorSampleSet& prior, bool mirror)
    : lambda_(lambda), mirror_(mirror) {
  if (!(lambda > 0.0)) throw std::invalid_argument("TruncatedTilt: lambda must be positive");
  if (prior.m() < 1) throw std::invalid_argument("TruncatedTilt: empty prior sample set");
  if (prior.thetas.cols() != fmap.dim())
    throw std::invalid_argument("TruncatedTilt: prior sample dimension does not match features");
  design_ = design_matrix(fmap, data);
  y_ = Eigen::Map<const Eigen::VectorXd>(data.outputs.data(),
                                         static_cast<Eigen::Index>(data.outputs.size()));
  // (y_i - f'_j(x_i))^2, computed once and reused by every density evaluation
  const Eigen::MatrixXd prior_pred = design_ * prior.thetas.transpose();  // n x m
  prior_sq_ = ((-prior_pred).colwise() + y_).transpose().array().square();
}

double TruncatedTilt::log_score(const Eigen::VectorXd& theta) const {
  const int m_rows = m();
  if (n() == 0) return 0.0;  // empty product: every candidate scores log(1)
  const Eigen::ArrayXd resid_sq = (y_ - design_ * theta).array().square();
  w_ = lambda_ * ((-prior_sq_).rowwise() + resid_sq.transpose());
  Eigen::VectorXd per_sample(m_rows);
  if (mirror_) {
    w_ = (w_ + 0.5 * w_.square()).log1p();
    per_sample = w_.rowwise().sum();
  } else {
    w_ = (0.5 * w_.square() - w_).log1p();
    per_sample = -w_.rowwise().sum();
  }
  return log_mean_exp(per_sample);
}

double trunc_posterior_score(const Eigen::VectorXd& theta, const Dataset& data,
                             const FeatureMap& fmap, double lambda, const PriorSampleSet& prior,
                             bool mirror) {
  return TruncatedTilt(data, fmap, lambda, prior, mirror).log_score(theta);
}

double log_posterior_trunc(const Eigen::VectorXd& theta, const Dataset& data,
                           const FeatureMap& fmap, double lambda, const PriorSampleSet& prior,
                           bool mirror) {
  return -trunc_posterior_score(theta, data, fmap, lambda, prior, mirror);
}

double log_posterior_gibbs(const Eigen::VectorXd& theta, const Dataset& data,
                           const FeatureMap& fmap, double lambda, const LossSpec& loss) {
  if (!(lambda > 0.0)) throw std::invalid_argument("log_posterior_gibbs: lambda must be positive");
  LinearModel model{theta};
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i)
    total += loss.value(data.outputs[i], predict(model, fmap, data.inputs[i]));
  return -lambda * total;
}

ChainResult mh_sample(const std::function<double(const Eigen::VectorXd&)>& log_density,
                      const ParamBox& box, const PosteriorConfig& cfg) {
  const int d = box.dim();
  if (cfg.chain_length < 1) throw std::invalid_argument("mh_sample: chain_length must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.chain_length)
    throw std::invalid_argument("mh_sample: need 0 <= burn_in < chain_length");
  if (cfg.thin < 1) throw std::invalid_argument("mh_sample: thin must be positive");

  Eigen::VectorXd scale = cfg.proposal_scale.size() > 0
                              ? cfg.proposal_scale
                              : Eigen::VectorXd(0.05 * box.widths());
  if (scale.size() != d || !(scale.array() > 0.0).all())
    throw std::invalid_argument("mh_sample: proposal_scale must be positive and match the box");

  Rng rng(cfg.seed);
  Eigen::VectorXd cur = box.center();
  double cur_ld = log_density(cur);
  const int total = cfg.chain_length;
  const int burn = cfg.burn_in;
  const int kept = (total - 1 - burn) / cfg.thin + 1;

  ChainResult out;
  out.draws.resize(kept, d);
  out.log_density_trace.resize(kept);

  // Burn-in proposal adaptation: five blocks, doubling on acceptance > 0.5
  // and halving below 0.2; the scale is frozen before any kept draw.
  const int block = std::max(1, (burn + 4) / 5);
  int block_accepts = 0;
  int block_steps = 0;
  long post_accepts = 0;
  int row = 0;
  Eigen::VectorXd prop(d);

  for (int s = 0; s < total; ++s) {
    for (int j = 0; j < d; ++j) prop[j] = cur[j] + scale[j] * rng.gaussian();
    bool accepted = false;
    if (box.contains(prop)) {
      const double prop_ld = log_density(prop);
      if (std::log(rng.uniform_pos()) < prop_ld - cur_ld) {
        cur = prop;
        cur_ld = prop_ld;
        accepted = true;
      }
    }
    if (s < burn) {
      if (cfg.adapt_proposal) {
        block_accepts += accepted ? 1 : 0;
        ++block_steps;
        if (block_steps == block || s + 1 == burn) {
          const double rate = static_cast<double>(block_accepts) / block_steps;
          if (rate > 0.5)
            scale *= 2.0;
          else if (rate < 0.2)
            scale *= 0.5;
          block_accepts = 0;
          block_steps = 0;
        }
      }
    } else {
      post_accepts += accepted ? 1 : 0;
      if ((total - 1 - s) % cfg.thin == 0) {
        out.draws.row(row) = cur.transpose();
        out.log_density_trace[row] = cur_ld;
        ++row;
      }
    }
  }

  out.acceptance_rate = static_cast<double>(post_accepts) / (total - burn);
  out.proposal_scale = scale;
  if (out.acceptance_rate < 0.01)
    out.warning = "acceptance rate below 1%; proposal scale is likely too large for the target";
  else if (out.acceptance_rate > 0.99)
    out.warning = "acceptance rate above 99%; proposal scale is likely too small for the target";
  return out;
}

LinearModel posterior_mean(const ChainResult& chain) {
  if (chain.draws.rows() == 0) throw std::invalid_argument("posterior_mean: no kept draws");
  return LinearModel{chain.draws.colwise().mean().transpose()};
}

GridPosterior grid_posterior(const std::function<double(const Eigen::VectorXd&)>& log_density,
                             const ParamBox& box, int resolution) {
  const int d = box.dim();
  if (d > 2)
    throw std::invalid_argument("grid_posterior: only 1- and 2-dimensional boxes are supported");
  if (resolution < 16) throw std::invalid_argument("grid_posterior: resolution must be >= 16");

  GridPosterior g;
  g.box = box;
  g.resolution = resolution;
  const Eigen::VectorXd w = box.widths();
  long cells = 1;
  for (int k = 0; k < d; ++k) cells *= resolution;
  g.nodes.resize(cells, d);
  Eigen::VectorXd logd(cells);
  Eigen::VectorXd node(d);
  for (long c = 0; c < cells; ++c) {
    long rest = c;
    for (int k = d - 1; k >= 0; --k) {
      const long idx = rest % resolution;
      rest /= resolution;
      node[k] = box.lo[k] + (idx + 0.5) * w[k] / resolution;
    }
    g.nodes.row(c) = node.transpose();
    logd[c] = log_density(node);
  }
  const double shift = logd.maxCoeff();
  if (!std::isfinite(shift))
    throw std::runtime_error("grid_posterior: log-density is not finite on the grid");
  g.mass = (logd.array() - shift).exp();
  g.mass /= g.mass.sum();
  return g;
}

Eigen::VectorXd GridPosterior::binned_axis_mass(int axis, int bins) const {
  const int d = box.dim();
  if (axis < 0 || axis >= d) throw std::invalid_argument("binned_axis_mass: axis out of range");
  if (bins < 1 || resolution % bins != 0)
    throw std::invalid_argument("binned_axis_mass: bins must divide the grid resolution");
  const int per_bin = resolution / bins;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(bins);
  for (long c = 0; c < mass.size(); ++c) {
    long rest = c;
    long axis_idx = 0;
    for (int k = d - 1; k >= 0; --k) {
      const long idx = rest % resolution;
      rest /= resolution;
      if (k == axis) axis_idx = idx;
    }
    out[static_cast<int>(axis_idx) / per_bin] += mass[c];
  }
  return out;
}

Eigen::VectorXd bin_samples(const Eigen::VectorXd& values, double lo, double hi, int bins) {
  if (bins < 1) throw std::invalid_argument("bin_samples: need at least one bin");
  if (!(hi > lo)) throw std::invalid_argument("bin_samples: need hi > lo");
  if (values.size() == 0) throw std::invalid_argument("bin_samples: empty sample");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(bins);
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double t = (values[i] - lo) / (hi - lo) * bins;
    const int b = std::clamp(static_cast<int>(std::floor(t)), 0, bins - 1);
    out[b] += 1.0;
  }
  out /= static_cast<double>(values.size());
  return out;
}

double total_variation(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  return 0.5 * (p - q).lpNorm<1>();
}

}  // namespace robustreg
