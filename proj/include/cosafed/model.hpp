#pragma once

#include <cstdint>
#include <span>

#include "cosafed/data.hpp"
#include "cosafed/types.hpp"

namespace cosafed {

// Multinomial logistic regression on flat parameter vectors. Layout:
// weights class-major (w[c * n_features + f]) followed by n_classes biases.
// All functions are pure in their inputs plus an explicit seed.

enum class ModelInit { Zero, Gaussian };

ModelInit parse_model_init(const std::string& name);

ParamVector init_model(ModelShape shape, std::uint64_t seed = 0,
                       ModelInit init = ModelInit::Zero);

/// Recovers (n_features, n_classes) from a parameter count; the count must
/// factor as n_classes * (n_features + 1).
ModelShape infer_shape(std::size_t param_count, int n_features);

struct SgdOptions {
  double lr = 0.1;
  int local_epochs = 1;
  int batch_size = 64;
};

/// Mini-batch SGD over the examples named by `indices` (full passes,
/// reshuffled each epoch from `seed` only). Returns the trained copy.
ParamVector local_sgd(const ParamVector& start, const Dataset& data,
                      std::span<const std::int32_t> indices,
                      const SgdOptions& opt, std::uint64_t seed);

ParamVector local_sgd(const ParamVector& start, const Dataset& data,
                      const SgdOptions& opt, std::uint64_t seed);

/// Accuracy by argmax (ties: lowest class index) and mean cross-entropy
/// with log-sum-exp stabilization.
EvalResult evaluate(const ParamVector& params, const Dataset& data);

/// dot(a,b) / (|a| |b|), clamped to [-1, 1]; 0 when either norm is zero.
double cosine_similarity(const ParamVector& a, const ParamVector& b);

double l1_norm(const ParamVector& v) noexcept;
double l2_norm(const ParamVector& v) noexcept;

}  // namespace cosafed
