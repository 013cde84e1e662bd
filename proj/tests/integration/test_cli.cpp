// Black-box checks of the installed command surface: exit codes, artifact
// shapes, manifest reruns, and file/in-memory composition. The binary under
// test comes from DATAMAP_CLI_PATH; the shipped data files from
// DATAMAP_DATA_DIR.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <sys/wait.h>

#include "datamap/dynlog.hpp"
#include "datamap/io_util.hpp"
#include "datamap/regions.hpp"
#include "datamap/trainer.hpp"

using namespace datamap;
namespace fs = std::filesystem;

namespace {

std::string env_or_fail(const char* name) {
    const char* v = std::getenv(name);
    REQUIRE_MESSAGE(v != nullptr, name << " must be set");
    return v;
}

struct CliResult {
    int code = -1;
    std::string output;
};

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::path("cli_work") / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int calls = 0;
    const fs::path capture = fs::path("cli_work") / ("out" + std::to_string(calls++) + ".txt");
    fs::create_directories(capture.parent_path());
    const std::string cmd = env_or_fail("DATAMAP_CLI_PATH") + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_file(capture.string());
    return r;
}

std::vector<fs::path> files_matching(const fs::path& dir, const std::string& suffix) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
            out.push_back(entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

fs::path single_file(const fs::path& dir, const std::string& suffix) {
    const auto hits = files_matching(dir, suffix);
    REQUIRE_MESSAGE(hits.size() == 1, dir << " has " << hits.size() << " files ending " << suffix);
    return hits.front();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        out[entry.path().filename().string()] = read_file(entry.path().string());
    }
    return out;
}

std::size_t count_markers(const std::string& svg) {
    std::size_t n = 0;
    for (std::size_t pos = svg.find("class=\"lvl"); pos != std::string::npos; pos = svg.find("class=\"lvl", pos + 1)) {
        ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("help and version exit 0") {
    CHECK(run_cli("--help").code == 0);
    const auto version = run_cli("--version");
    CHECK(version.code == 0);
    CHECK(version.output.find("0.1.0") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("").code == 1);
    CHECK(run_cli("--bogus").code == 1);
    CHECK(run_cli("train --model transformer").code == 1);
    CHECK(run_cli("frobnicate").code == 1);
}

TEST_CASE("validate accepts the shipped sample log") {
    const auto dir = fresh_dir("validate_ok");
    const auto sample = fs::path(env_or_fail("DATAMAP_DATA_DIR")) / "sample_log.jsonl";
    const auto r = run_cli("validate --log " + sample.string() + " --out-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("no violations") != std::string::npos);
    CHECK(read_file(single_file(dir, ".violations.txt").string()).empty());
}

TEST_CASE("validate reports violations and exits 2") {
    const auto dir = fresh_dir("validate_bad");
    const fs::path bad = dir / "bad.jsonl";
    write_file(bad.string(),
               "{\"epoch\":0,\"id\":\"a\",\"gold\":0,\"probs\":[-0.2,1.2]}\n"
               "{\"epoch\":1,\"id\":\"a\",\"gold\":0,\"probs\":[0.5,0.5]}\n");
    const auto r = run_cli("validate --log " + bad.string() + " --out-dir " + dir.string());
    CHECK(r.code == 2);
    CHECK(!read_file(single_file(dir, ".violations.txt").string()).empty());
}

TEST_CASE("missing input files exit 2") {
    const auto dir = fresh_dir("missing");
    CHECK(run_cli("train --dataset nowhere.csv --out-dir " + dir.string()).code == 2);
    CHECK(run_cli("map --log nowhere.jsonl --out-dir " + dir.string()).code == 2);
}

TEST_CASE("divergent training exits 3") {
    const auto dir = fresh_dir("diverge");
    const auto r = run_cli("train --n-per-class 10 --epochs 2 --lr 1e10 --seed 1 --out-dir " + dir.string());
    CHECK(r.code == 3);
    CHECK(r.output.find("numerical failure") != std::string::npos);
}

TEST_CASE("map draws min(N, max_points) markers") {
    const auto train_dir = fresh_dir("map_train");
    REQUIRE(run_cli("train --n-per-class 6 --epochs 2 --seed 4 --out-dir " + train_dir.string()).code == 0);
    const auto log = single_file(train_dir, ".log.jsonl");

    const auto full_dir = fresh_dir("map_full");
    REQUIRE(run_cli("map --log " + log.string() + " --out-dir " + full_dir.string()).code == 0);
    CHECK(count_markers(read_file(single_file(full_dir, ".map.svg").string())) == 12);

    const auto capped_dir = fresh_dir("map_capped");
    REQUIRE(run_cli("map --log " + log.string() + " --max-points 5 --out-dir " + capped_dir.string()).code == 0);
    CHECK(count_markers(read_file(single_file(capped_dir, ".map.svg").string())) == 5);
}

TEST_CASE("reruns are byte-identical") {
    for (const std::string spec : {std::string("train --n-per-class 8 --epochs 3 --seed 5"),
                                   std::string("noise-exp --n-per-class 30 --overlap 0.3 --epochs 3 --seed 5")}) {
        const auto dir = fresh_dir("rerun");
        REQUIRE(run_cli(spec + " --out-dir " + dir.string()).code == 0);
        const auto first = dir_contents(dir);
        REQUIRE(run_cli(spec + " --out-dir " + dir.string()).code == 0);
        CHECK(dir_contents(dir) == first);
    }
}

TEST_CASE("training on a subset file equals the in-memory subset") {
    const auto full_dir = fresh_dir("compose_full");
    REQUIRE(run_cli("train --n-per-class 40 --overlap 0.6 --model linear --epochs 4 --lr 0.05 --seed 3 --out-dir " +
                    full_dir.string())
                .code == 0);
    const auto dataset_file = single_file(full_dir, ".dataset.csv");
    const auto table_file = single_file(full_dir, ".table.csv");

    const auto select_dir = fresh_dir("compose_select");
    REQUIRE(run_cli("select --table " + table_file.string() + " --strategy ambiguous --fraction 0.4 --out-dir " +
                    select_dir.string())
                .code == 0);
    const auto subset_file = single_file(select_dir, ".subset.txt");

    const auto subset_dir = fresh_dir("compose_train");
    REQUIRE(run_cli("train --dataset " + dataset_file.string() + " --subset " + subset_file.string() +
                    " --model linear --epochs 4 --lr 0.05 --seed 3 --out-dir " + subset_dir.string())
                .code == 0);
    const auto cli_log = read_file(single_file(subset_dir, ".log.jsonl").string());

    const auto data = trainer::parse_dataset_file(dataset_file.string());
    const auto subset = regions::parse_subset_file(subset_file.string());
    trainer::TrainConfig cfg;
    cfg.family = trainer::Family::linear;
    cfg.epochs = 4;
    cfg.learning_rate = 0.05;
    cfg.seed = 3;
    const auto run = trainer::train(trainer::restrict_to_ids(data, subset.instance_ids), cfg);
    CHECK(dynlog::serialize_log(run.log) == cli_log);
}

TEST_CASE("report aggregates prior manifests and is rerun-stable") {
    const auto dir = fresh_dir("report");
    REQUIRE(run_cli("train --n-per-class 6 --epochs 2 --seed 8 --out-dir " + dir.string()).code == 0);
    const auto log = single_file(dir, ".log.jsonl");
    REQUIRE(run_cli("map --log " + log.string() + " --out-dir " + dir.string()).code == 0);

    REQUIRE(run_cli("report --out-dir " + dir.string()).code == 0);
    const auto first = read_file(single_file(dir, ".report.txt").string());
    CHECK(first.find("runs=2") != std::string::npos);
    CHECK(first.find("  train\n") != std::string::npos);
    CHECK(first.find("  map\n") != std::string::npos);

    REQUIRE(run_cli("report --out-dir " + dir.string()).code == 0);
    CHECK(read_file(single_file(dir, ".report.txt").string()) == first);
}
