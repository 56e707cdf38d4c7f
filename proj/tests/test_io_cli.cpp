#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "terracal/cli.hpp"
#include "terracal/ground_truth.hpp"
#include "terracal/scm.hpp"
#include "terracal/implement.hpp"
#include "terracal/io.hpp"
#include "terracal/manifest.hpp"
#include "terracal/particle_system.hpp"

using namespace terracal;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
    std::vector<const char*> argv{"terracal"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "terracal_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string tiny_settle_config() {
    return "particle_count = 500\n"
           "bin_x = 0.14\n"
           "bin_y = 0.14\n"
           "settle_duration = 5\n"
           "sample_stride = 25\n"
           "seed = 9\n";
}

}  // namespace

TEST_CASE("shortest round-trip double formatting") {
    for (double v : {0.1, -4957.0, 1.0 / 3.0, 6.806e-3, 1e-300, 0.0}) {
        CHECK(io::parse_double(io::format_double(v)) == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK_THROWS(io::parse_double("not-a-number"));
}

TEST_CASE("config parsing, comments, merge and errors") {
    const auto cfg = io::Config::parse("a = 1\n# comment\nb = hello # trailing\n\nflag = true\n"
                                       "list = 1 2,3\n");
    CHECK(cfg.get_num("a", 0) == 1);
    CHECK(cfg.get_str("b", "") == "hello");
    CHECK(cfg.get_flag("flag", false));
    CHECK(cfg.get_list("list", {}) == std::vector<double>{1, 2, 3});
    CHECK(cfg.get_num("missing", 7.5) == 7.5);

    try {
        io::Config::parse("a = 1\nbroken line\n");
        FAIL("expected parse error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    io::Config base = io::Config::parse("x = 1\ny = 2\n");
    base.merge(io::Config::parse("y = 3\nz = 4\n"));
    CHECK(base.get_num("x", 0) == 1);
    CHECK(base.get_num("y", 0) == 3);
    CHECK(base.get_num("z", 0) == 4);
}

TEST_CASE("content digest is stable and content sensitive") {
    CHECK(io::digest_hex("") == io::digest_hex(""));
    CHECK(io::digest_hex("abc") != io::digest_hex("abd"));
    CHECK(io::digest_hex("abc").size() == 16);
}

TEST_CASE("snapshot CSV round trip") {
    dem::MaterialParams mat;
    dem::ParticleSystem sys;
    sys.material = mat;
    sys.add({0.1, 0.2, 0.3}, {1.0 / 3.0, 0, -0.1}, {0, 5, 0});
    sys.add({-1e-7, 2e8, 0.5}, {0, 0, 0}, {0.1, 0.2, 0.3});
    const auto parsed = dem::ParticleSystem::from_csv(sys.to_csv(), mat, sys.gravity);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed.pos[0].x == sys.pos[0].x);
    CHECK(parsed.vel[0].x == sys.vel[0].x);
    CHECK(parsed.ang_vel[1].z == sys.ang_vel[1].z);
    CHECK(parsed.to_csv() == sys.to_csv());
    CHECK_THROWS(dem::ParticleSystem::from_csv("id,x\n0,1\n", mat, sys.gravity));
}

TEST_CASE("obj mesh loading") {
    const std::string obj = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    const auto mesh = dem::TriMesh::load_obj(obj);
    REQUIRE(mesh.faces.size() == 1);
    CHECK(mesh.face_normal(0).z == doctest::Approx(1.0));

    const std::string with_slashes = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n";
    CHECK(dem::TriMesh::load_obj(with_slashes).faces.size() == 1);

    CHECK_THROWS(dem::TriMesh::load_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"));  // degenerate
    CHECK_THROWS(dem::TriMesh::load_obj("v 0 0 0\nf 1 2 3\n"));                    // out of range
}

TEST_CASE("config resolution: defaults, desk scale, user override") {
    const io::Config base = cli::resolve_config("", {});
    CHECK(base.get_num("particle_radius", 0) == 0.005);
    CHECK(base.get_num("bin_x", 0) == 2.0);  // paper scale by default
    CHECK(base.get_num("annulus_omega_deg", 0) == 1.0);

    io::Config over;
    over.set("desk_scale", "true");
    over.set("plate_radii", "0.04 0.06");
    const io::Config desk = cli::resolve_config("", over);
    CHECK(desk.get_num("bin_x", 0) == 0.4);                       // desk geometry applied
    CHECK(desk.get_str("plate_radii", "") == "0.04 0.06");        // explicit key still wins
    CHECK(desk.get_num("particle_radius", 0) == 0.005);           // material untouched

    CHECK_THROWS_AS(cli::resolve_config("/nonexistent/cfg.txt", {}), cli::ConfigMissing);
}

TEST_CASE("settle subcommand: artifacts, determinism, manifest round trip") {
    const fs::path dir1 = fresh_dir("settle1");
    const fs::path dir2 = fresh_dir("settle2");
    const fs::path dir3 = fresh_dir("settle3");
    const std::string cfg_path = (dir1 / "rig.cfg").string();
    io::write_file(cfg_path, tiny_settle_config());

    CHECK(run_cli({"--config", cfg_path, "--out-dir", dir1.string(), "settle"}) == 0);
    CHECK(fs::exists(dir1 / "bed.csv"));
    CHECK(fs::exists(dir1 / "settle_ke.csv"));
    CHECK(fs::exists(dir1 / "manifest_settle.json"));

    // same seed twice: byte-identical snapshot
    io::write_file((dir2 / "rig.cfg").string(), tiny_settle_config());
    CHECK(run_cli({"--config", (dir2 / "rig.cfg").string(), "--out-dir", dir2.string(),
                   "settle"}) == 0);
    CHECK(io::digest_file((dir1 / "bed.csv").string()) ==
          io::digest_file((dir2 / "bed.csv").string()));

    // manifest records the resolved config; re-running from it reproduces digests
    const auto man = nlohmann::json::parse(io::read_file((dir1 / "manifest_settle.json").string()));
    CHECK(man["status"] == "ok");
    CHECK(man["outputs"].contains((dir1 / "bed.csv").string()));
    std::string replay_cfg;
    for (const auto& [key, value] : man["config"].items())
        replay_cfg += key + " = " + value.get<std::string>() + "\n";
    io::write_file((dir3 / "replay.cfg").string(), replay_cfg);
    CHECK(run_cli({"--config", (dir3 / "replay.cfg").string(), "--out-dir", dir3.string(),
                   "settle"}) == 0);
    CHECK(io::digest_file((dir3 / "bed.csv").string()) ==
          io::digest_file((dir1 / "bed.csv").string()));

    // a different seed changes the bed
    CHECK(run_cli({"--config", cfg_path, "--seed", "10", "--out-dir", dir3.string(), "settle"}) ==
          0);
    CHECK(io::digest_file((dir3 / "bed.csv").string()) !=
          io::digest_file((dir1 / "bed.csv").string()));
}

TEST_CASE("missing config file exits with status 2 and a manifest") {
    const fs::path dir = fresh_dir("missing_cfg");
    CHECK(run_cli({"--config", (dir / "nope.cfg").string(), "--out-dir", dir.string(), "settle"}) ==
          2);
    const auto man = nlohmann::json::parse(io::read_file((dir / "manifest_settle.json").string()));
    CHECK(man["status"] == "error");
    const std::string err = man["error"];
    CHECK(err.find("nope.cfg") != std::string::npos);
}

TEST_CASE("sink and shear pipeline on a tiny bed feeds calibrate and wheel") {
    const fs::path dir = fresh_dir("pipeline");
    const std::string cfg_path = (dir / "rig.cfg").string();
    io::write_file(cfg_path, tiny_settle_config() +
                                 "plate_radii = 0.015 0.02\n"
                                 "press_speeds = 0.05\n"
                                 "target_depth = 0.0085\n"
                                 "sample_depths = 0.002 0.004 0.006 0.008\n"
                                 "smooth_window = 0.02\n"
                                 "annulus_r_inner = 0.02\n"
                                 "annulus_r_outer = 0.035\n"
                                 "annulus_thickness = 0.01\n"
                                 "annulus_omega_deg = 40\n"
                                 "loads = 0.3 0.6\n"
                                 "shear_duration = 1.0\n"
                                 "steady_time = 0.8\n"
                                 "transient_times = 0.3 0.5\n"
                                 "iters = 4000\n"
                                 "chains = 2\n"
                                 "wheel_radius = 0.05\n"
                                 "wheel_width = 0.04\n"
                                 "wheel_mass = 0.8\n"
                                 "wheel_speed = 0.2\n"
                                 "run_duration = 1.5\n"
                                 "slips = 0 0.4 0.8\n"
                                 "terrain_length = 1.2\n"
                                 "terrain_width = 0.3\n");

    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "settle"}) == 0);
    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "sink"}) == 0);
    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "shear"}) == 0);

    const auto gt = bev::GroundTruthSet::from_csv(io::read_file((dir / "ground_truth.csv").string()));
    CHECK(gt.sinkage.size() == 8);    // 2 radii x 4 depths, averaged over speeds
    CHECK(gt.steady.size() == 2);     // 2 loads
    CHECK(gt.transient.size() == 4);  // 2 loads x 2 times
    CHECK(gt.annulus_r_outer == doctest::Approx(0.035));

    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "calibrate"}) == 0);
    CHECK(fs::exists(dir / "calibrated_params.txt"));
    CHECK(fs::exists(dir / "chains_pressure.csv"));
    CHECK(fs::exists(dir / "posterior_summary.txt"));
    CHECK(fs::exists(dir / "posterior_kde.csv"));
    const auto params = scm::ScmParams::parse(io::read_file((dir / "calibrated_params.txt").string()));
    CHECK(params.Kphi > 0.0);

    // single-chain summary reports R-hat as unavailable
    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "calibrate", "--chains", "1",
                     "--iters", "2000"}) == 0);
    CHECK(io::read_file((dir / "posterior_summary.txt").string()).find("n/a (single chain)") !=
          std::string::npos);

    // wheel sweep on the calibrated parameters, then compare a curve with itself
    REQUIRE(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "wheel", "--backend",
                     "scm"}) == 0);
    const fs::path curve = dir / "curve_scm.csv";
    REQUIRE(fs::exists(curve));
    REQUIRE(run_cli({"--out-dir", dir.string(), "compare", curve.string(), curve.string()}) == 0);
    const std::string report = io::read_file((dir / "compare.txt").string());
    CHECK(report.find("max_rel_deviation,0\n") != std::string::npos);

    // unknown backend is a usage error
    CHECK(run_cli({"--config", cfg_path, "--out-dir", dir.string(), "wheel", "--backend",
                   "nope"}) != 0);

    // empty experiment matrix is rejected
    io::write_file((dir / "empty.cfg").string(), tiny_settle_config() + "loads =\n");
    CHECK(run_cli({"--config", (dir / "empty.cfg").string(), "--out-dir", dir.string(), "shear"}) ==
          1);
}
