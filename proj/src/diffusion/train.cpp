#include <algorithm>
#include <cmath>
#include <numeric>

#include "armo/diffusion.hpp"
#include "armo/rng.hpp"

namespace armo::diffusion {

TrainResult train(const std::vector<MotionSample>& dataset, const ModelParams& params,
                  const LossWeights& loss_weights, int epochs, std::uint64_t seed,
                  const TrainConfig& config) {
    if (dataset.empty())
        throw DomainError(ErrorCode::EmptyDataset, "training dataset is empty");
    params.validate();
    if (epochs < 1)
        throw DomainError(ErrorCode::InvalidArgument, "epochs must be >= 1");

    TrainResult result;
    result.weights = ModelWeights::init(params, seed);
    ModelWeights& weights = result.weights;

    std::vector<ConditionSet> conds;
    conds.reserve(dataset.size());
    for (const auto& s : dataset) conds.push_back(ConditionSet::of(s));

    // AdamW state.
    constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    std::vector<Eigen::MatrixXd> m(weights.tensors.size()), v(weights.tensors.size());
    for (std::size_t i = 0; i < weights.tensors.size(); ++i) {
        m[i] = Eigen::MatrixXd::Zero(weights.tensors[i].value.rows(),
                                     weights.tensors[i].value.cols());
        v[i] = m[i];
    }
    long step = 0;

    Rng rng = Rng::stream(seed, 0xDA7A);
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        const double lr =
            config.lr * std::min(1.0, static_cast<double>(epoch) /
                                          std::max(1, config.warmup_epochs));
        rng.shuffle(order.begin(), order.end());

        double epoch_total = 0.0;
        int batches = 0;
        for (std::size_t offset = 0; offset < order.size();
             offset += config.batch_size) {
            const std::size_t count =
                std::min<std::size_t>(config.batch_size, order.size() - offset);
            std::vector<TrainingItem> batch(count);
            for (std::size_t b = 0; b < count; ++b) {
                const int s = order[offset + b];
                batch[b].sample = dataset[s];
                batch[b].cond = conds[s];
                batch[b].t = static_cast<int>(rng.uniform_index(params.diffusion_steps));
                batch[b].noise.resize(kSequenceLength, kChannels);
                for (int r = 0; r < kSequenceLength; ++r)
                    for (int c = 0; c < kChannels; ++c)
                        batch[b].noise(r, c) = rng.normal();
            }

            const LossGradients lg =
                training_loss_gradients(weights, batch, loss_weights);
            epoch_total += lg.losses.total;
            ++batches;

            ++step;
            const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t i = 0; i < weights.tensors.size(); ++i) {
                auto& theta = weights.tensors[i].value;
                m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * lg.grads[i];
                v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * lg.grads[i].cwiseAbs2();
                const Eigen::MatrixXd update =
                    (m[i] / bc1).array() / ((v[i] / bc2).array().sqrt() + kEps);
                theta -= lr * (update + config.weight_decay * theta);
            }
        }
        result.epoch_loss.push_back(epoch_total / std::max(1, batches));
    }

    // Storage is 32-bit; quantize so in-memory weights equal their file image.
    weights.quantize_to_storage();
    return result;
}

}  // namespace armo::diffusion
