#pragma once

// Internal forward/backward passes of the generator network. Batches are
// stacked row-blocks: the motion tensor of sample s occupies rows
// [s*L, (s+1)*L). Hand-written backprop keeps the dependency surface at
// Eigen only and the arithmetic fully deterministic.

#include <vector>

#include "armo/diffusion.hpp"

namespace armo::diffusion::net {

struct BatchIn {
    int count = 0;
    Eigen::MatrixXd x;              // (count*L) x 6 noisy samples
    std::vector<int> t;             // diffusion step per sample
    std::vector<ConditionSet> cond; // per sample
};

struct Cache;

struct ForwardOut {
    Eigen::MatrixXd x0hat;  // (count*L) x 6
    Eigen::MatrixXd vraw;   // (count*L) x 6 (zero when variance head disabled)
};

ForwardOut forward(const ModelWeights& weights, const BatchIn& in, Cache* cache);

/// Accumulates parameter gradients (parallel to weights.tensors) for the
/// upstream gradients of forward()'s outputs.
void backward(const ModelWeights& weights, const Cache& cache,
              const Eigen::MatrixXd& dx0hat, const Eigen::MatrixXd& dvraw,
              std::vector<Eigen::MatrixXd>& grads);

/// Encoder block alone: one condition feature row per entry of `cond`.
Eigen::MatrixXd encode(const ModelWeights& weights,
                       const std::vector<ConditionSet>& cond);

/// Decoder stack alone, fed precomputed condition features (one row per
/// sample); used by sampling, where the encoder output is reused across steps.
ForwardOut decode(const ModelWeights& weights, const Eigen::MatrixXd& x,
                  const std::vector<int>& t, const Eigen::MatrixXd& cond_features,
                  const std::vector<int>& l_valid, Cache* cache);

Eigen::VectorXd sinusoidal_embedding(double position, int dim);

/// Every tensor of the network with its name and shape, zero-valued, in the
/// canonical (serialization) order.
std::vector<NamedTensor> parameter_spec(const ModelParams& params);

Cache* new_cache();
void free_cache(Cache* cache);

struct CacheDeleter {
    void operator()(Cache* c) const { free_cache(c); }
};

}  // namespace armo::diffusion::net
