#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* kConfig = R"({
  "dims": [6, 6, 1],
  "agents": [{"kind": "ground", "count": 2}],
  "task_slots": 2,
  "obstacle_density": 0.0,
  "mode": "continuous",
  "episode_len": 30,
  "hidden_dim": 16,
  "batch_size": 60,
  "rollout_fragment": 20,
  "sgd_iters": 2
})";

struct CliFixture {
    fs::path dir;
    fs::path config;

    CliFixture() : dir(fs::temp_directory_path() / "swarm_cli_test") {
        fs::remove_all(dir);
        fs::create_directories(dir);
        config = dir / "scenario.json";
        std::ofstream(config) << kConfig;
    }
    ~CliFixture() { fs::remove_all(dir); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(SWARM_CLI_PATH) + " " + args + " >" +
                                (dir / "stdout.txt").string() + " 2>" + (dir / "stderr.txt").string();
        const int rc = std::system(cmd.c_str());
        return WEXITSTATUS(rc);
    }
    std::string stderr_text() const {
        std::ifstream in(dir / "stderr.txt");
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }
};

}  // namespace

TEST_CASE("cli: train writes checkpoint, curve, and manifest") {
    CliFixture fx;
    const int rc = fx.run("train --config " + fx.config.string() + " --seed 7 --steps 120 --out " +
                          (fx.dir / "runs/a").string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(fx.dir / "runs/a/checkpoint.json"));
    CHECK(fs::exists(fx.dir / "runs/a/curve.csv"));
    CHECK(fs::exists(fx.dir / "runs/a/manifest.json"));

    // manifest records config, seed, and version
    std::ifstream in(fx.dir / "runs/a/manifest.json");
    const std::string manifest((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(manifest.find("\"seed\": 7") != std::string::npos);
    CHECK(manifest.find("\"artifact_version\"") != std::string::npos);
    CHECK(manifest.find("\"task_slots\": 2") != std::string::npos);
}

TEST_CASE("cli: eval consumes a trained checkpoint") {
    CliFixture fx;
    REQUIRE(fx.run("train --config " + fx.config.string() + " --seed 1 --steps 60 --out " +
                   (fx.dir / "t").string()) == 0);
    const int rc = fx.run("eval --config " + fx.config.string() + " --checkpoint " +
                          (fx.dir / "t/checkpoint.json").string() + " --episodes 2 --seed 3 --out " +
                          (fx.dir / "e").string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(fx.dir / "e/metrics.csv"));
}

TEST_CASE("cli: bench runs the allocator table") {
    CliFixture fx;
    const int rc = fx.run("bench --config " + fx.config.string() +
                          " --allocators hungarian,greedy,random --seeds 1..3 --episodes 1 --out " +
                          (fx.dir / "b").string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(fx.dir / "b/runs.csv"));
    CHECK(fs::exists(fx.dir / "b/table_cost.csv"));

    // three seeds x three allocators -> 9 data rows
    std::ifstream runs(fx.dir / "b/runs.csv");
    int lines = 0;
    std::string line;
    while (std::getline(runs, line)) ++lines;
    CHECK(lines == 1 + 9);
}

TEST_CASE("cli: invalid override exits with a configuration error") {
    CliFixture fx;
    const int rc = fx.run("train --config " + fx.config.string() +
                          " --set gamma=2.0 --steps 10 --out " + (fx.dir / "x").string());
    CHECK(rc == 1);
    CHECK(fx.stderr_text().find("gamma") != std::string::npos);
}

TEST_CASE("cli: unknown override key is rejected, not ignored") {
    CliFixture fx;
    const int rc = fx.run("train --config " + fx.config.string() +
                          " --set warp_speed=9 --steps 10 --out " + (fx.dir / "x").string());
    CHECK(rc == 1);
    CHECK(fx.stderr_text().find("warp_speed") != std::string::npos);
}

TEST_CASE("cli: missing config file names the problem") {
    CliFixture fx;
    const int rc = fx.run("train --config /no/such/file.json --out " + (fx.dir / "x").string());
    CHECK(rc == 1);
    CHECK(fx.stderr_text().find("file.json") != std::string::npos);
}

TEST_CASE("cli: mismatched checkpoint is a configuration error") {
    CliFixture fx;
    REQUIRE(fx.run("train --config " + fx.config.string() + " --seed 1 --steps 60 --out " +
                   (fx.dir / "t").string()) == 0);
    const int rc = fx.run("eval --config " + fx.config.string() + " --set task_slots=3 --checkpoint " +
                          (fx.dir / "t/checkpoint.json").string() + " --episodes 1 --out " +
                          (fx.dir / "e").string());
    CHECK(rc == 1);
}

TEST_CASE("cli: ablate emits paired artifacts") {
    CliFixture fx;
    const int rc = fx.run("ablate --config " + fx.config.string() +
                          " --steps 60 --episodes 1 --seed 2 --out " + (fx.dir / "ab").string());
    REQUIRE(rc == 0);
    CHECK(fs::exists(fx.dir / "ab/ablation.csv"));
    CHECK(fs::exists(fx.dir / "ab/checkpoint_full.json"));
    CHECK(fs::exists(fx.dir / "ab/checkpoint_no_graphsage.json"));
}
