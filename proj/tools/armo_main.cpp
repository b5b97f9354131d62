// Command-line front end: synthetic clip generation, human-to-robot
// retargeting, trajectory repair, generator training/sampling, and the
// style-preservation metric report.

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "armo/collision.hpp"
#include "armo/diffusion.hpp"
#include "armo/io.hpp"
#include "armo/kinematics.hpp"
#include "armo/metrics.hpp"
#include "armo/optimize.hpp"
#include "armo/retarget.hpp"
#include "armo/robot_model.hpp"
#include "armo/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

armo::RobotModel load_model_or_canonical(const std::string& path) {
    return path.empty() ? armo::RobotModel::canonical()
                        : armo::load_robot_model(path);
}

armo::Vec3 parse_triple(const std::string& text, const std::string& what) {
    std::stringstream ss(text);
    armo::Vec3 v;
    char sep1 = 0, sep2 = 0;
    if (!(ss >> v[0] >> sep1 >> v[1] >> sep2 >> v[2]) || sep1 != ',' || sep2 != ',')
        throw armo::DomainError(armo::ErrorCode::InvalidArgument,
                                what + ": expected three comma-separated numbers");
    return v;
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw armo::DomainError(armo::ErrorCode::IoError,
                                "not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

json report_to_json(const armo::OptimizeReport& report) {
    return json{{"repaired", report.repaired},
                {"removed", report.removed},
                {"iterations", report.iterations},
                {"pre_collision_count", report.pre_collision_count},
                {"post_collision_count", report.post_collision_count},
                {"seconds", report.seconds}};
}

struct PsoOptions {
    armo::PsoParams params;

    void attach(CLI::App* cmd) {
        cmd->add_option("--pso-particles", params.particles, "swarm size");
        cmd->add_option("--pso-iters", params.max_iters, "swarm iterations per point");
        cmd->add_option("--threshold", params.threshold, "repair acceptance fitness");
        cmd->add_flag_callback(
            "--no-smoothing", [this] { params.smoothing = false; },
            "skip the spline/Gaussian smoothing stage");
        cmd->add_flag_callback(
            "--strict-sampling", [this] { params.redraw_r_each_iter = false; },
            "draw the swarm's r1, r2 once per point instead of per iteration");
    }
};

int run_synth(const std::string& out_dir, armo::SynthConfig cfg) {
    fs::create_directories(out_dir);
    const auto clips = armo::synth_human_motion(cfg);
    for (std::size_t i = 0; i < clips.size(); ++i) {
        std::ostringstream name;
        name << "clip_" << std::setw(3) << std::setfill('0') << i << ".json";
        armo::save_human_motion(clips[i], fs::path(out_dir) / name.str());
    }
    std::cout << "wrote " << clips.size() << " clips to " << out_dir << "\n";
    return 0;
}

int run_retarget(const std::string& robot_cfg, const std::string& in_file,
                 const std::string& out_file, bool no_optimize,
                 const armo::RetargetConfig& rcfg, const armo::PsoParams& pso,
                 std::uint64_t seed) {
    const armo::RobotModel model = load_model_or_canonical(robot_cfg);
    const armo::HumanMotion motion = armo::load_human_motion(in_file);

    const armo::HumanMotion prepped = armo::preprocess(motion, rcfg);
    armo::MapResult mapped = armo::map_trajectory(model, prepped, rcfg);

    json summary{{"scale", mapped.scale},
                 {"wrist", mapped.wrist_id},
                 {"elbow", mapped.elbow_id},
                 {"frames", mapped.trajectory.frames.size()},
                 {"clamped_frames", mapped.clamped_frames.size()},
                 {"singular_frames", mapped.singular_frames.size()}};

    if (no_optimize) {
        armo::save_joint_trajectory(mapped.trajectory, out_file);
    } else {
        auto [optimized, report] =
            armo::optimize_trajectory(model, mapped.trajectory, pso, seed);
        armo::save_joint_trajectory(optimized, out_file);
        summary["optimize"] = report_to_json(report);
    }
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_optimize(const std::string& robot_cfg, const std::string& in_file,
                 const std::string& out_file, const armo::PsoParams& pso,
                 std::uint64_t seed) {
    const armo::RobotModel model = load_model_or_canonical(robot_cfg);
    const armo::JointTrajectory traj = armo::load_joint_trajectory(in_file);
    auto [optimized, report] = armo::optimize_trajectory(model, traj, pso, seed);
    armo::save_joint_trajectory(optimized, out_file);
    std::cout << report_to_json(report).dump() << "\n";
    return 0;
}

int run_train(const std::string& variant_name, const std::string& data_dir,
              const std::string& out_file, int epochs, std::uint64_t seed, int hidden,
              const std::string& robot_cfg) {
    const auto variant = armo::diffusion::variant_from_string(variant_name);
    const armo::RobotModel model = load_model_or_canonical(robot_cfg);

    std::vector<armo::diffusion::MotionSample> dataset;
    for (const auto& file : sorted_json_files(data_dir)) {
        const auto traj = armo::load_joint_trajectory(file);
        auto samples = armo::diffusion::segment_dataset(traj, variant, model);
        for (auto& s : samples) dataset.push_back(std::move(s));
    }

    armo::diffusion::ModelParams params;
    params.variant = variant;
    params.hidden = hidden;
    const auto result = armo::diffusion::train(dataset, params, {}, epochs, seed);

    const fs::path out(out_file);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    armo::diffusion::save_weights(result.weights, out);

    json summary{{"samples", dataset.size()},
                 {"epochs", epochs},
                 {"first_epoch_loss", result.epoch_loss.front()},
                 {"final_epoch_loss", result.epoch_loss.back()},
                 {"weights", out_file}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_generate(const std::string& variant_name, const std::string& weights_file,
                 const std::string& start_text, const std::string& end_text,
                 int l_valid, const std::string& out_file, std::uint64_t seed,
                 const std::string& robot_cfg, const armo::PsoParams& pso) {
    const auto weights = armo::diffusion::load_weights(weights_file);
    if (!variant_name.empty() &&
        armo::diffusion::variant_from_string(variant_name) != weights.params.variant)
        throw armo::DomainError(armo::ErrorCode::InvalidArgument,
                                "requested variant does not match the weights file");
    const armo::RobotModel model = load_model_or_canonical(robot_cfg);

    armo::diffusion::ConditionSet cond;
    cond.x_start = parse_triple(start_text, "--start");
    cond.x_end = parse_triple(end_text, "--end");
    cond.l_valid = l_valid;

    const auto sample = armo::diffusion::ddim_sample(weights, cond, seed, model);
    const auto post = armo::diffusion::postprocess(model, sample, cond,
                                                   weights.params.variant, pso, seed);
    armo::save_joint_trajectory(post.trajectory, out_file);

    json summary{{"frames", post.trajectory.frames.size()},
                 {"l_valid", cond.l_valid},
                 {"ik_failures", post.ik_failures},
                 {"optimize", report_to_json(post.report)}};
    std::cout << summary.dump() << "\n";
    return 0;
}

int run_eval(const std::string& human_dir, const std::string& robot_dir,
             const std::string& out_file, const std::string& robot_cfg,
             const armo::RetargetConfig& rcfg) {
    const armo::RobotModel model = load_model_or_canonical(robot_cfg);

    std::vector<Eigen::VectorXd> feat_robot_c, feat_robot_b;
    std::vector<Eigen::VectorXd> feat_human_w, feat_human_e, feat_concat;
    double dtw_c_sum = 0.0, dtw_b_sum = 0.0, ccr_sum = 0.0;
    int clips = 0;

    for (const auto& human_file : sorted_json_files(human_dir)) {
        const fs::path robot_file = fs::path(robot_dir) / human_file.filename();
        if (!fs::exists(robot_file)) continue;

        const armo::HumanMotion prepped =
            armo::preprocess(armo::load_human_motion(human_file), rcfg);
        const auto sel = armo::select_active_wrist(prepped);
        armo::CartesianTrajectory wrist{prepped.fps, prepped.landmark(sel.wrist_id)};
        armo::CartesianTrajectory elbow{prepped.fps, prepped.landmark(sel.elbow_id)};
        const double scale = armo::compute_scale(model, wrist, rcfg);
        for (auto& p : wrist.points) p *= scale;
        for (auto& p : elbow.points) p *= scale;

        const auto traj = armo::load_joint_trajectory(robot_file);
        armo::CartesianTrajectory robot_c{traj.fps, {}}, robot_b{traj.fps, {}};
        for (const auto& q : traj.frames) {
            const auto fk = armo::forward_kinematics(model, q);
            robot_c.points.push_back(fk.wrist);
            robot_b.points.push_back(fk.elbow);
        }

        const auto fc = armo::metrics::extract_features(robot_c);
        const auto fb = armo::metrics::extract_features(robot_b);
        feat_robot_c.push_back(fc.values);
        feat_robot_b.push_back(fb.values);
        feat_human_w.push_back(armo::metrics::extract_features(wrist).values);
        feat_human_e.push_back(armo::metrics::extract_features(elbow).values);

        Eigen::VectorXd concat(70);
        concat << fb.values, fc.values;
        feat_concat.push_back(concat);

        dtw_c_sum += armo::metrics::dtw(robot_c, wrist);
        dtw_b_sum += armo::metrics::dtw(robot_b, elbow);
        ccr_sum += armo::metrics::ccr(robot_c);
        ++clips;
    }

    if (clips < 2)
        throw armo::DomainError(armo::ErrorCode::TooFew,
                                "eval needs at least 2 matched clip pairs");

    armo::metrics::MetricReport report;
    report.fid_c = armo::metrics::fid(feat_robot_c, feat_human_w);
    report.fid_b = armo::metrics::fid(feat_robot_b, feat_human_e);
    report.dtw_c = dtw_c_sum / clips;
    report.dtw_b = dtw_b_sum / clips;
    report.ccr = ccr_sum / clips;
    report.dist = armo::metrics::dist(feat_concat);

    const json j{{"fid_c", report.fid_c}, {"fid_b", report.fid_b},
                 {"dtw_c", report.dtw_c}, {"dtw_b", report.dtw_b},
                 {"ccr", report.ccr},     {"dist", report.dist},
                 {"clips", clips}};
    armo::atomic_write(out_file, j.dump());
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"expressive motion generation for a 6-DOF desktop arm"};
    app.require_subcommand(1);
    // --h is a real option of the train subcommand; keep help on --help only.
    app.set_help_flag("--help", "print help");

    std::string robot_cfg, in_file, out_path, variant = "j";
    std::string start_text, end_text, data_dir, weights_file, human_dir, robot_dir;
    std::uint64_t seed = 0;
    bool no_optimize = false;
    int epochs = 500, hidden = 64, l_valid = 80;
    armo::SynthConfig synth_cfg;
    armo::RetargetConfig retarget_cfg;
    PsoOptions pso;

    auto* synth = app.add_subcommand("synth", "generate synthetic motion clips");
    synth->set_help_flag("--help", "print help");
    synth->add_option("--out", out_path, "output directory")->required();
    synth->add_option("--clips", synth_cfg.clips, "clip count");
    synth->add_option("--seed", synth_cfg.seed, "random seed");
    synth->add_option("--duration-min", synth_cfg.min_duration, "seconds");
    synth->add_option("--duration-max", synth_cfg.max_duration, "seconds");
    synth->add_option("--frequency-min", synth_cfg.min_frequency, "Hz");
    synth->add_option("--frequency-max", synth_cfg.max_frequency, "Hz");
    synth->add_option("--amplitude-min", synth_cfg.min_amplitude, "meters");
    synth->add_option("--amplitude-max", synth_cfg.max_amplitude, "meters");

    auto* retarget = app.add_subcommand("retarget", "map a human clip to joint space");
    retarget->set_help_flag("--help", "print help");
    retarget->add_option("--robot", robot_cfg, "robot config file");
    retarget->add_option("--in", in_file, "human motion JSON")->required();
    retarget->add_option("--out", out_path, "joint trajectory JSON")->required();
    retarget->add_flag("--no-optimize", no_optimize, "skip repair/smoothing/retiming");
    retarget->add_option("--seed", seed, "random seed");
    retarget->add_option("--scale-policy", retarget_cfg.scale_policy,
                         "fraction of reach used by the mapped wrist");
    retarget->add_option("--lowpass-cutoff", retarget_cfg.lowpass_cutoff_hz, "Hz");
    retarget->add_option("--continuity-weight", retarget_cfg.continuity_weight,
                         "tie-break weight (radians)");
    pso.attach(retarget);

    auto* optimize = app.add_subcommand("optimize", "repair and retime a trajectory");
    optimize->set_help_flag("--help", "print help");
    optimize->add_option("--robot", robot_cfg, "robot config file");
    optimize->add_option("--in", in_file, "joint trajectory JSON")->required();
    optimize->add_option("--out", out_path, "joint trajectory JSON")->required();
    optimize->add_option("--seed", seed, "random seed");
    pso.attach(optimize);

    auto* train = app.add_subcommand("train", "train the motion generator");
    train->set_help_flag("--help", "print help");
    train->add_option("--variant", variant, "j (joint) or c (cartesian)")->required();
    train->add_option("--data", data_dir, "directory of joint trajectory JSONs")
        ->required();
    train->add_option("--out", out_path, "weights file")->required();
    train->add_option("--epochs", epochs, "training epochs");
    train->add_option("--seed", seed, "random seed");
    train->add_option("--h", hidden, "hidden width");
    train->add_option("--robot", robot_cfg, "robot config file");

    auto* generate = app.add_subcommand("generate", "sample a new trajectory");
    generate->set_help_flag("--help", "print help");
    generate->add_option("--variant", variant, "j or c (must match the weights)");
    generate->add_option("--weights", weights_file, "weights file")->required();
    generate->add_option("--start", start_text, "start state a,b,c")->required();
    generate->add_option("--end", end_text, "end state a,b,c")->required();
    generate->add_option("--lvalid", l_valid, "valid step count (1..80)");
    generate->add_option("--out", out_path, "joint trajectory JSON")->required();
    generate->add_option("--seed", seed, "random seed");
    generate->add_option("--robot", robot_cfg, "robot config file");
    pso.attach(generate);

    auto* eval = app.add_subcommand("eval", "style-preservation metric report");
    eval->set_help_flag("--help", "print help");
    eval->add_option("--human", human_dir, "directory of human clips")->required();
    eval->add_option("--robot", robot_dir, "directory of robot trajectories")
        ->required();
    eval->add_option("--out", out_path, "report JSON")->required();
    eval->add_option("--robot-config", robot_cfg, "robot config file");
    eval->add_option("--scale-policy", retarget_cfg.scale_policy,
                     "fraction of reach used by the mapped wrist");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 1;
    }

    try {
        if (synth->parsed()) return run_synth(out_path, synth_cfg);
        if (retarget->parsed())
            return run_retarget(robot_cfg, in_file, out_path, no_optimize,
                                retarget_cfg, pso.params, seed);
        if (optimize->parsed())
            return run_optimize(robot_cfg, in_file, out_path, pso.params, seed);
        if (train->parsed())
            return run_train(variant, data_dir, out_path, epochs, seed, hidden,
                             robot_cfg);
        if (generate->parsed())
            return run_generate(variant, weights_file, start_text, end_text, l_valid,
                                out_path, seed, robot_cfg, pso.params);
        if (eval->parsed())
            return run_eval(human_dir, robot_dir, out_path, robot_cfg, retarget_cfg);
    } catch (const armo::DomainError& e) {
        const json err{{"error",
                        {{"code", armo::to_string(e.code())}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        const json err{{"error", {{"code", "internal_error"}, {"message", e.what()}}}};
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
