#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "armo/collision.hpp"
#include "armo/io.hpp"
#include "armo/kinematics.hpp"
#include "armo/retarget.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kWorkDir = fs::temp_directory_path() / "armo_cli_test";

int run(const std::string& args, const fs::path& stdout_file = {},
        const fs::path& stderr_file = {}) {
    std::string cmd = std::string(ARMO_CLI_PATH) + " " + args;
    cmd += " >" + (stdout_file.empty() ? "/dev/null" : stdout_file.string());
    cmd += " 2>" + (stderr_file.empty() ? "/dev/null" : stderr_file.string());
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("command surface") {
    fs::remove_all(kWorkDir);
    fs::create_directories(kWorkDir);
    const auto dir = [&](const std::string& name) {
        return (kWorkDir / name).string();
    };

    SUBCASE("unknown flags and missing arguments exit with 1") {
        CHECK(run("--bogus") == 1);
        CHECK(run("synth") == 1);                       // missing --out
        CHECK(run("retarget --in x.json") == 1);        // missing --out
        CHECK(run("definitely-not-a-command") == 1);
    }

    SUBCASE("synth is deterministic per seed") {
        REQUIRE(run("synth --out " + dir("a") + " --clips 3 --seed 11") == 0);
        REQUIRE(run("synth --out " + dir("b") + " --clips 3 --seed 11") == 0);
        REQUIRE(run("synth --out " + dir("c") + " --clips 3 --seed 12") == 0);
        for (int i = 0; i < 3; ++i) {
            const std::string name = "clip_00" + std::to_string(i) + ".json";
            CHECK(slurp(kWorkDir / "a" / name) == slurp(kWorkDir / "b" / name));
        }
        CHECK(slurp(kWorkDir / "a" / "clip_000.json") !=
              slurp(kWorkDir / "c" / "clip_000.json"));
    }

    SUBCASE("domain failures exit with 2 and a machine-readable error") {
        // Two-frame clip: too short to preprocess.
        json clip;
        clip["fps"] = 60.0;
        json zeros = json::array({json::array({0.0, 0.0, 0.0}),
                                  json::array({0.0, 0.0, 0.0})});
        for (const char* id : {"3", "18", "19", "20", "21"}) clip["points"][id] = zeros;
        {
            std::ofstream out(kWorkDir / "short.json");
            out << clip.dump();
        }
        const fs::path err = kWorkDir / "err.json";
        CHECK(run("retarget --in " + dir("short.json") + " --out " + dir("t.json"),
                  {}, err) == 2);
        const json parsed = json::parse(slurp(err));
        CHECK(parsed["error"]["code"] == "sequence_too_short");
    }

    SUBCASE("end-to-end pipeline with a reproducible generate step") {
        REQUIRE(run("synth --out " + dir("clips") +
                    " --clips 4 --seed 3 --duration-min 2.5 --duration-max 3.0") == 0);

        // Retarget every clip; keep one no-optimize output for the constraint check.
        for (int i = 0; i < 4; ++i) {
            const std::string clip = dir("clips") + "/clip_00" + std::to_string(i) +
                                     ".json";
            REQUIRE(run("retarget --in " + clip + " --out " + dir("robot") +
                        "/clip_00" + std::to_string(i) + ".json --seed 5") == 0);
        }
        REQUIRE(run("retarget --in " + dir("clips") + "/clip_000.json --out " +
                    dir("raw.json") + " --no-optimize") == 0);

        // The raw mapping satisfies the scaled-wrist constraint.
        {
            const armo::RobotModel model = armo::RobotModel::canonical();
            const auto motion =
                armo::load_human_motion(kWorkDir / "clips" / "clip_000.json");
            const auto prepped = armo::preprocess(motion);
            const auto mapped = armo::map_trajectory(model, prepped);
            const auto traj = armo::load_joint_trajectory(kWorkDir / "raw.json");
            REQUIRE(traj.frames.size() == mapped.trajectory.frames.size());
            const auto& wrist = prepped.landmark(mapped.wrist_id);
            for (std::size_t i = 0; i < traj.frames.size(); ++i) {
                const auto fk = armo::forward_kinematics(model, traj.frames[i]);
                CHECK((fk.wrist - mapped.scale * wrist[i]).norm() < 1e-6);
            }
        }

        REQUIRE(run("train --variant j --data " + dir("robot") + " --out " +
                    dir("weights.bin") + " --epochs 3 --seed 9 --h 16") == 0);

        const std::string gen_args = "generate --variant j --weights " +
                                     dir("weights.bin") +
                                     " --start 0.2,0.5,-0.4 --end -0.3,0.7,-0.2 "
                                     "--lvalid 30 --seed 21 --out ";
        REQUIRE(run(gen_args + dir("gen1.json")) == 0);
        REQUIRE(run(gen_args + dir("gen2.json")) == 0);
        CHECK(slurp(kWorkDir / "gen1.json") == slurp(kWorkDir / "gen2.json"));

        // Generated trajectories are collision-free and within limits.
        {
            const armo::RobotModel model = armo::RobotModel::canonical();
            const auto traj = armo::load_joint_trajectory(kWorkDir / "gen1.json");
            REQUIRE_FALSE(traj.frames.empty());
            CHECK(traj.has_timestamps());
            for (double c : armo::batch_collision_cost(model, traj)) CHECK(c == 0.0);
            for (const auto& q : traj.frames) CHECK(model.within_limits(q));
        }

        const fs::path report = kWorkDir / "report.json";
        REQUIRE(run("eval --human " + dir("clips") + " --robot " + dir("robot") +
                    " --out " + report.string(), report) == 0);
        const json parsed = json::parse(slurp(report));
        for (const char* key : {"fid_c", "fid_b", "dtw_c", "dtw_b", "ccr", "dist"}) {
            REQUIRE(parsed.contains(key));
            CHECK(std::isfinite(parsed[key].get<double>()));
            CHECK(parsed[key].get<double>() >= -1e-8);
        }
        CHECK(parsed["clips"] == 4);
    }
}
