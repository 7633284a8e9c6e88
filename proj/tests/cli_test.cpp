#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "pimorch/io.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("pimorch_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

Result run(const std::string& args) {
    const auto out = scratch() / "stdout.txt";
    const auto err = scratch() / "stderr.txt";
    const std::string cmd = "SOURCE_DATE_EPOCH=0 " + std::string(PIMORCH_CLI) + " " + args + " >" + out.string() +
                            " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = pimorch::read_text_file(out.string());
    r.err = pimorch::read_text_file(err.string());
    return r;
}

std::string model(const std::string& name) { return testing::source_path("configs/models/" + name + ".json"); }
std::string arch() { return testing::source_path("configs/arch/pim_16x16.json"); }
std::string base(const std::string& name) { return "--model " + model(name) + " --arch " + arch(); }

std::string write_tmp(const std::string& name, const std::string& content) {
    const auto p = scratch() / name;
    pimorch::write_text_file(p.string(), content);
    return p.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("validate fixtures") {
    for (const auto& name : testing::fixture_names()) CHECK(run("validate " + base(name)).code == 0);
    auto r = run("validate " + base("swin_b_640") + " --schedule " +
                 testing::source_path("configs/schedules/swin_b_640_reference.json"));
    CHECK(r.code == 0);
}

TEST_CASE("exit codes") {
    CHECK(run("").code == 1);
    CHECK(run("schedule --model").code == 1);
    CHECK(run("frobnicate").code == 1);
    CHECK(run("validate --model " + write_tmp("bad.json", "{ nope") + " --arch " + arch()).code == 1);
    CHECK(run("validate --model /nonexistent.json --arch " + arch()).code == 1);

    std::string a = pimorch::read_text_file(arch());
    auto pos = a.find("\"node_cap_mib\": 8");
    REQUIRE(pos != std::string::npos);
    a.replace(pos, 17, "\"node_cap_bytes\": 1024");
    auto r = run("schedule --model " + model("swin_t_224") + " --arch " + write_tmp("tiny_cap.json", a));
    CHECK(r.code == 2);
    CHECK(r.err.find("Constraint 5") != std::string::npos);

    CHECK(run("compare " + base("swin_t_224") + " --baselines b,q").code == 1);
}

TEST_CASE("compare emits one row per schedule") {
    auto r = run("compare " + base("swin_b_640") + " --baselines b,p,ah --format csv");
    REQUIRE(r.code == 0);
    std::istringstream is(r.out);
    std::string line;
    int rows = 0;
    std::getline(is, line);
    CHECK(line.rfind("label,", 0) == 0);
    while (std::getline(is, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 4);
}

TEST_CASE("pipeline through artifacts") {
    const auto sched = (scratch() / "schedule.json").string();
    const auto plc = (scratch() / "placement.json").string();
    const auto rep = (scratch() / "report.json").string();
    REQUIRE(run("schedule " + base("swin_t_224") + " --emit " + sched).code == 0);
    REQUIRE(run("validate " + base("swin_t_224") + " --schedule " + sched).code == 0);
    REQUIRE(run("place " + base("swin_t_224") + " --schedule " + sched + " --emit " + plc).code == 0);
    REQUIRE(run("simulate " + base("swin_t_224") + " --schedule " + sched + " --placement " + plc +
                " --format json --emit " + rep)
                .code == 0);
    auto csv = run("report --input " + rep + " --format csv");
    CHECK(csv.code == 0);
    CHECK(csv.out.find("orchestrated,swin_t_224") != std::string::npos);

    const std::string doc = pimorch::read_text_file(sched);
    CHECK(doc.find("\"manifest\"") != std::string::npos);
    CHECK(doc.find("fnv1a64") != std::string::npos);
    CHECK(doc.find("1970-01-01T00:00:00Z") != std::string::npos);
}

TEST_CASE("outputs are byte-identical across runs") {
    auto a = run("schedule " + base("swin_s_640") + " --emit -");
    auto b = run("schedule " + base("swin_s_640") + " --emit -");
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    auto c = run("compare " + base("swin_t_640") + " --format json");
    auto d = run("compare " + base("swin_t_640") + " --format json");
    CHECK(c.out == d.out);
}

TEST_CASE("csv files get a manifest sidecar") {
    const auto csv = (scratch() / "sweep.csv").string();
    auto r = run("sweep " + base("swin_t_224") + " --grids 8x8,16x16 --caps 4,8 --emit " + csv);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(csv + ".manifest.json"));
    std::istringstream is(pimorch::read_text_file(csv));
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 5);
}

TEST_CASE("help lists every subcommand") {
    auto r = run("--help");
    CHECK(r.code == 0);
    for (const char* sub : {"validate", "candidates", "schedule", "place", "simulate", "compare", "report", "sweep"}) {
        CHECK(r.out.find(sub) != std::string::npos);
    }
}

}
