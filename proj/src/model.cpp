#include "cosafed/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "cosafed/rng.hpp"

namespace cosafed {

namespace {

// Logits for one example: z_c = b_c + sum_f w[c,f] x_f.
void compute_logits(const ParamVector& params, std::span<const float> x,
                    int n_classes, std::vector<double>& z) {
  const int n_features = static_cast<int>(x.size());
  const double* bias = params.data() +
                       static_cast<std::size_t>(n_features) * n_classes;
  for (int c = 0; c < n_classes; ++c) {
    const double* w = params.data() + static_cast<std::size_t>(c) * n_features;
    double acc = bias[c];
    for (int f = 0; f < n_features; ++f) acc += w[f] * x[f];
    z[c] = acc;
  }
}

}  // namespace

ModelInit parse_model_init(const std::string& name) {
  if (name == "zero") return ModelInit::Zero;
  if (name == "gaussian") return ModelInit::Gaussian;
  throw Error(ErrorCategory::config, "unknown init '" + name + "'");
}

ParamVector init_model(ModelShape shape, std::uint64_t seed, ModelInit init) {
  if (shape.n_features < 1 || shape.n_classes < 2) {
    throw Error(ErrorCategory::config,
                "invalid model shape (" + std::to_string(shape.n_features) +
                    ", " + std::to_string(shape.n_classes) + ")");
  }
  ParamVector params(shape.param_count(), 0.0);
  if (init == ModelInit::Gaussian) {
    auto rng = make_stream(seed, kSeedInit);
    for (double& v : params) v = 0.01 * normal_unit(rng);
  }
  return params;
}

ModelShape infer_shape(std::size_t param_count, int n_features) {
  const std::size_t per_class = static_cast<std::size_t>(n_features) + 1;
  if (n_features < 1 || per_class == 0 || param_count % per_class != 0 ||
      param_count / per_class < 2) {
    throw Error(ErrorCategory::param,
                "parameter count " + std::to_string(param_count) +
                    " does not fit feature dimension " +
                    std::to_string(n_features));
  }
  return ModelShape{n_features, static_cast<int>(param_count / per_class)};
}

ParamVector local_sgd(const ParamVector& start, const Dataset& data,
                      std::span<const std::int32_t> indices,
                      const SgdOptions& opt, std::uint64_t seed) {
  if (indices.empty()) {
    throw Error(ErrorCategory::data, "local_sgd: empty client dataset (skip)");
  }
  if (!(opt.lr > 0.0) && opt.lr != 0.0) {
    throw Error(ErrorCategory::param, "local_sgd: lr must be positive");
  }
  if (opt.batch_size < 1) {
    throw Error(ErrorCategory::param, "local_sgd: batch_size must be >= 1");
  }
  const ModelShape shape = infer_shape(start.size(), data.n_features());
  const int n_classes = shape.n_classes;
  const int n_features = shape.n_features;

  ParamVector params = start;
  if (opt.local_epochs <= 0 || opt.lr == 0.0) return params;

  std::vector<std::int32_t> order(indices.begin(), indices.end());
  auto rng = make_stream(seed, kSeedSgd);
  std::vector<double> z(n_classes);
  ParamVector grad(params.size());

  for (int epoch = 0; epoch < opt.local_epochs; ++epoch) {
    shuffle_seeded(order, rng);
    for (std::size_t pos = 0; pos < order.size();
         pos += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t end =
          std::min(order.size(), pos + static_cast<std::size_t>(opt.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - pos);
      std::fill(grad.begin(), grad.end(), 0.0);

      for (std::size_t k = pos; k < end; ++k) {
        const auto idx = static_cast<std::size_t>(order[k]);
        const auto x = data.example(idx);
        const int label = data.labels[idx];
        compute_logits(params, x, n_classes, z);

        const double zmax = *std::max_element(z.begin(), z.end());
        if (!std::isfinite(zmax)) {
          throw Error(ErrorCategory::train,
                      "local_sgd: non-finite loss (divergence)");
        }
        double sum = 0.0;
        for (int c = 0; c < n_classes; ++c) {
          z[c] = std::exp(z[c] - zmax);
          sum += z[c];
        }
        double* gb = grad.data() +
                     static_cast<std::size_t>(n_features) * n_classes;
        for (int c = 0; c < n_classes; ++c) {
          const double p = z[c] / sum;
          const double g = (p - (c == label ? 1.0 : 0.0)) * inv_batch;
          double* gw = grad.data() + static_cast<std::size_t>(c) * n_features;
          for (int f = 0; f < n_features; ++f) gw[f] += g * x[f];
          gb[c] += g;
        }
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        params[i] -= opt.lr * grad[i];
      }
    }
  }
  return params;
}

ParamVector local_sgd(const ParamVector& start, const Dataset& data,
                      const SgdOptions& opt, std::uint64_t seed) {
  std::vector<std::int32_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  return local_sgd(start, data, all, opt, seed);
}

EvalResult evaluate(const ParamVector& params, const Dataset& data) {
  if (data.size() == 0) {
    throw Error(ErrorCategory::data, "evaluate: empty dataset");
  }
  const ModelShape shape = infer_shape(params.size(), data.n_features());
  const int n_classes = shape.n_classes;

  std::vector<double> z(n_classes);
  std::size_t correct = 0;
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    compute_logits(params, data.example(i), n_classes, z);
    int best = 0;
    for (int c = 1; c < n_classes; ++c) {
      if (z[c] > z[best]) best = c;  // ties keep the lowest index
    }
    const int label = data.labels[i];
    if (best == label) ++correct;

    const double zmax = z[best];
    double sum = 0.0;
    for (int c = 0; c < n_classes; ++c) sum += std::exp(z[c] - zmax);
    loss_sum += zmax + std::log(sum) - z[label];
  }
  EvalResult result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  result.loss = loss_sum / static_cast<double>(data.size());
  if (!std::isfinite(result.loss)) {
    throw Error(ErrorCategory::train, "evaluate: non-finite loss");
  }
  return result;
}

double cosine_similarity(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCategory::param, "cosine_similarity: length mismatch");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double l1_norm(const ParamVector& v) noexcept {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(const ParamVector& v) noexcept {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace cosafed
