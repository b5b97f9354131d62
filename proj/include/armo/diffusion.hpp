#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "armo/optimize.hpp"
#include "armo/robot_model.hpp"
#include "armo/types.hpp"

namespace armo::diffusion {

inline constexpr int kSequenceLength = 80;  // padded training length
inline constexpr int kChannels = 6;         // positions (3) + velocities (3)
inline constexpr double kSampleFps = 12.0;

enum class Variant : char { Joint = 'J', Cartesian = 'C' };

Variant variant_from_string(const std::string& name);
std::string to_string(Variant v);

/// Fixed-length padded training sample. Rows >= l_valid repeat the last valid
/// pose with zero velocities; velocity channels hold forward differences of
/// the position channels times fps (last valid row is zero).
struct MotionSample {
    Eigen::MatrixXd data{kSequenceLength, kChannels};
    int l_valid = kSequenceLength;
    double fps = kSampleFps;

    void validate() const;
};

struct ConditionSet {
    Vec3 x_start = Vec3::Zero();
    Vec3 x_end = Vec3::Zero();
    int l_valid = kSequenceLength;

    static ConditionSet of(const MotionSample& sample);
};

struct ModelParams {
    Variant variant = Variant::Joint;
    int hidden = 64;          // h (desk default; 256 at full scale)
    int depth = 2;            // decoder stack count N
    int heads = 4;
    int diffusion_steps = 1000;  // T
    int ddim_steps = 50;
    double sigma_frac = 1.0 / 6.0;  // fusion sigma = l_valid * sigma_frac
    bool learn_variance = true;

    void validate() const;
};

/// Weights w0..w5 of the total training loss.
struct LossWeights {
    double vlb = 0.001;
    double pv = 1.0;
    double va = 0.5;
    double pad = 0.2;
    double start = 1.0;
    double end = 1.0;
};

struct NamedTensor {
    std::string name;
    std::vector<int> shape;  // serialized shape; value has rows = shape[0]
    Eigen::MatrixXd value;
};

/// Named-parameter store of the generator network. Values are kept in double
/// for computation but the storage format is 32-bit floats, so
/// quantize_to_storage() is applied whenever file round-trip identity matters.
struct ModelWeights {
    ModelParams params;
    std::uint64_t init_seed = 0;
    std::vector<NamedTensor> tensors;

    int index_of(const std::string& name) const;
    Eigen::MatrixXd& tensor(const std::string& name);
    const Eigen::MatrixXd& tensor(const std::string& name) const;

    static ModelWeights init(const ModelParams& params, std::uint64_t seed);
    void quantize_to_storage();
};

void save_weights(const ModelWeights& weights, const std::filesystem::path& file);
ModelWeights load_weights(const std::filesystem::path& file);

/// Gaussian endpoint-proximity fusion weights: valid index i gets
/// exp(-2 i^2 / sigma^2) + exp(-2 (l_valid-1-i)^2 / sigma^2) with
/// sigma = l_valid * sigma_frac; padded indices get exactly 0.
Eigen::VectorXd ffm_weights(int l_valid, int length, double sigma_frac);

/// Cosine noise schedule; index t in [0, diffusion_steps) counts noising
/// steps, so alpha_bar[0] ~ 1 and alpha_bar[T-1] ~ 0.
struct NoiseSchedule {
    Eigen::VectorXd beta;
    Eigen::VectorXd alpha_bar;
    Eigen::VectorXd alpha_bar_prev;
    Eigen::VectorXd posterior_var;          // beta-tilde
    Eigen::VectorXd posterior_logvar_clipped;

    static NoiseSchedule cosine(int steps);
};

/// Condition feature of the encoder block (token MLPs, 4-head self-attention,
/// mean pooling). Deterministic in (weights, cond).
Eigen::VectorXd encoder_forward(const ModelWeights& weights, const ConditionSet& cond);

/// Predicted clean sample for a noisy input at diffusion step t. The sample's
/// l_valid drives the fusion weights.
Eigen::MatrixXd decoder_forward(const ModelWeights& weights,
                                const MotionSample& noisy, int t,
                                const Eigen::VectorXd& cond_feature);

/// Splits a 60 Hz joint trajectory at near-zero-velocity frames, keeps
/// segments of 120..400 source frames, downsamples to 12 Hz, appends finite
/// difference velocities and pads to 80 steps. The Cartesian variant maps
/// frames through forward kinematics to wrist-center positions first.
std::vector<MotionSample> segment_dataset(const JointTrajectory& raw, Variant variant,
                                          const RobotModel& model);

struct TrainingItem {
    MotionSample sample;
    ConditionSet cond;
    int t = 0;
    Eigen::MatrixXd noise;  // standard normal, same shape as sample.data
};

struct LossBreakdown {
    double total = 0.0;
    double vlb = 0.0;
    double pv = 0.0;
    double va = 0.0;
    double pad = 0.0;
    double start = 0.0;
    double end = 0.0;
};

LossBreakdown training_losses(const ModelWeights& weights,
                              const std::vector<TrainingItem>& batch,
                              const LossWeights& loss_weights);

struct LossGradients {
    LossBreakdown losses;
    std::vector<Eigen::MatrixXd> grads;  // parallel to weights.tensors
};

LossGradients training_loss_gradients(const ModelWeights& weights,
                                      const std::vector<TrainingItem>& batch,
                                      const LossWeights& loss_weights);

/// Region loss terms with their gradients w.r.t. the prediction; shared by
/// training and by the mask-separation checks.
namespace losses {

struct Term {
    double value = 0.0;
    Eigen::MatrixXd grad;  // d value / d prediction
};

Term valid_mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid);
Term pad_mse(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid);
Term velocity_acceleration(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred,
                           int l_valid);
Term start_row(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid);
Term end_row(const Eigen::MatrixXd& x, const Eigen::MatrixXd& pred, int l_valid);

}  // namespace losses

struct TrainConfig {
    double lr = 2e-4;
    double weight_decay = 1.2e-4;
    int warmup_epochs = 20;  // linear ramp
    int batch_size = 32;
};

struct TrainResult {
    ModelWeights weights;
    std::vector<double> epoch_loss;  // mean total loss per epoch
};

/// AdamW training with a cosine noise schedule and clean-sample prediction.
/// Deterministic given seed. Throws EmptyDataset.
TrainResult train(const std::vector<MotionSample>& dataset, const ModelParams& params,
                  const LossWeights& loss_weights, int epochs, std::uint64_t seed,
                  const TrainConfig& config = {});

/// Deterministic DDIM sampling (eta = 0) over params.ddim_steps, conditioned
/// through the encoder; positions are clamped to joint limits (J) or the
/// workspace sphere (C).
MotionSample ddim_sample(const ModelWeights& weights, const ConditionSet& cond,
                         std::uint64_t seed, const RobotModel& model);

struct PostprocessResult {
    JointTrajectory trajectory;
    int ik_failures = 0;
    OptimizeReport report;
};

/// Valid-segment extraction, linear endpoint alignment onto the condition,
/// conversion to joint space (IK with continuity selection for the Cartesian
/// variant, direct angles for the joint variant, forward-facing wrist either
/// way), then the repair/smoothing/retiming stage.
PostprocessResult postprocess(const RobotModel& model, const MotionSample& sample,
                              const ConditionSet& cond, Variant variant,
                              const PsoParams& pso = {}, std::uint64_t seed = 0);

}  // namespace armo::diffusion
