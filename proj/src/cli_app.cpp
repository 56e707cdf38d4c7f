#include "terracal/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <CLI11.hpp>

#include "terracal/bevameter.hpp"
#include "terracal/calibrate.hpp"
#include "terracal/manifest.hpp"
#include "terracal/wheel_rig.hpp"

namespace terracal::cli {

io::Config base_defaults() {
    io::Config cfg;
    // material (particle-particle and particle-implement alike)
    cfg.set("particle_radius", "0.005");
    cfg.set("particle_density", "2650");
    cfg.set("kn", "10000");
    cfg.set("kt", "10000");
    cfg.set("gamma_n", "10000");
    cfg.set("gamma_t", "2000");
    cfg.set("mu_s", "0.9");
    cfg.set("mu_r", "0.9");
    cfg.set("cohesion_ratio", "0.5");  // f_c as a fraction of one particle weight
    cfg.set("gravity", "9.81");
    cfg.set("dt", "0");  // 0 = half the stability bound
    cfg.set("seed", "42");
    cfg.set("threads", "1");
    cfg.set("desk_scale", "false");
    // settling
    cfg.set("bin_x", "2.0");
    cfg.set("bin_y", "2.0");
    cfg.set("particle_count", "2760000");
    cfg.set("settle_duration", "15");
    cfg.set("ke_threshold", "1e-8");
    cfg.set("sample_stride", "50");
    // plate sinkage rig
    cfg.set("plate_radii", "0.2 0.3");
    cfg.set("press_speeds", "0.01 0.005 0.0025");
    cfg.set("target_depth", "0.21");
    cfg.set("sample_depths", "0.025 0.05 0.075 0.1 0.125 0.15 0.175 0.2");
    cfg.set("smooth_window", "0.2");
    // annulus shear rig
    cfg.set("annulus_r_inner", "0.45");
    cfg.set("annulus_r_outer", "0.6");
    cfg.set("annulus_thickness", "0.15");
    cfg.set("annulus_omega_deg", "1.0");
    cfg.set("loads", "25 50 75 100 125 150 175 200");
    cfg.set("shear_duration", "12");
    cfg.set("steady_time", "5");
    cfg.set("transient_times", "1 2 3");
    // calibration
    cfg.set("iters", "50000");
    cfg.set("chains", "4");
    cfg.set("burn_in", "0.2");
    cfg.set("step_frac", "0.02");
    cfg.set("adapt", "true");
    cfg.set("residual_mode", "normalized");
    // wheel rig
    cfg.set("wheel_radius", "0.47");
    cfg.set("wheel_width", "0.3");
    cfg.set("wheel_mass", "20");
    cfg.set("wheel_speed", "1.0");
    cfg.set("run_duration", "15");
    cfg.set("slips", "0 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8");
    cfg.set("terrain_length", "16");
    cfg.set("terrain_width", "1.0");
    cfg.set("terrain_resolution", "0.01");
    cfg.set("scm_dt", "0.001");
    cfg.set("bed_x", "16");
    cfg.set("bed_y", "1.0");
    cfg.set("bed_particles", "4600000");
    return cfg;
}

io::Config desk_scale_overrides() {
    io::Config cfg;
    cfg.set("bin_x", "0.4");
    cfg.set("bin_y", "0.4");
    cfg.set("particle_count", "15000");
    cfg.set("plate_radii", "0.05 0.075");
    cfg.set("press_speeds", "0.025 0.05");
    cfg.set("target_depth", "0.034");
    cfg.set("sample_depths", "0.004 0.008 0.012 0.016 0.02 0.024 0.028 0.032");
    cfg.set("annulus_r_inner", "0.06");
    cfg.set("annulus_r_outer", "0.1");
    cfg.set("annulus_thickness", "0.03");
    cfg.set("annulus_omega_deg", "20");
    cfg.set("loads", "1 2 3 4");
    cfg.set("shear_duration", "3");
    cfg.set("steady_time", "2.5");
    cfg.set("transient_times", "0.5 1.0 1.5");
    cfg.set("smooth_window", "0.1");
    cfg.set("wheel_radius", "0.1");
    cfg.set("wheel_width", "0.06");
    cfg.set("wheel_mass", "2");
    cfg.set("wheel_speed", "0.25");
    cfg.set("run_duration", "4");
    cfg.set("terrain_length", "2.5");
    cfg.set("terrain_width", "0.5");
    cfg.set("bed_x", "1.0");
    cfg.set("bed_y", "0.25");
    cfg.set("bed_particles", "30000");
    return cfg;
}

io::Config resolve_config(const std::string& config_path, const io::Config& cli_overrides) {
    io::Config user;
    if (!config_path.empty()) {
        if (!io::file_exists(config_path))
            throw ConfigMissing("config file not found: " + config_path);
        user = io::Config::load(config_path);
    }
    io::Config merged = base_defaults();
    io::Config probe = user;
    probe.merge(cli_overrides);
    if (probe.get_flag("desk_scale", false)) merged.merge(desk_scale_overrides());
    merged.merge(user);
    merged.merge(cli_overrides);
    return merged;
}

namespace {

dem::MaterialParams material_from(const io::Config& cfg) {
    dem::MaterialParams mat;
    mat.radius = cfg.get_num("particle_radius", 0.005);
    mat.density = cfg.get_num("particle_density", 2650);
    mat.k_n = cfg.get_num("kn", 10000);
    mat.k_t = cfg.get_num("kt", 10000);
    mat.gamma_n = cfg.get_num("gamma_n", 10000);
    mat.gamma_t = cfg.get_num("gamma_t", 2000);
    mat.mu_s = cfg.get_num("mu_s", 0.9);
    mat.mu_r = cfg.get_num("mu_r", 0.9);
    const double g = cfg.get_num("gravity", 9.81);
    mat.f_c = cfg.get_num("cohesion_ratio", 0.5) * mat.particle_mass() * g;
    mat.validate();
    return mat;
}

bev::RigConfig rig_from(const io::Config& cfg) {
    bev::RigConfig rig;
    rig.bin_x = cfg.get_num("bin_x", 2.0);
    rig.bin_y = cfg.get_num("bin_y", 2.0);
    rig.particle_count = static_cast<std::size_t>(cfg.get_num("particle_count", 10000));
    rig.material = material_from(cfg);
    rig.gravity = {0, 0, -cfg.get_num("gravity", 9.81)};
    rig.dt = cfg.get_num("dt", 0);
    rig.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 42));
    rig.sample_stride = static_cast<int>(cfg.get_num("sample_stride", 50));
    rig.settle_duration = cfg.get_num("settle_duration", 15);
    rig.settle_ke_threshold = cfg.get_num("ke_threshold", 1e-8);
    rig.smooth_window = cfg.get_num("smooth_window", 0.2);
    rig.threads = static_cast<int>(cfg.get_num("threads", 1));
    return rig;
}

calib::CalibrateConfig calib_from(const io::Config& cfg) {
    calib::CalibrateConfig cc;
    cc.iterations = static_cast<long>(cfg.get_num("iters", 50000));
    cc.burn_in_fraction = cfg.get_num("burn_in", 0.2);
    cc.chain_count = static_cast<int>(cfg.get_num("chains", 4));
    cc.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 42));
    cc.step_fraction = cfg.get_num("step_frac", 0.02);
    cc.adapt = cfg.get_flag("adapt", true);
    const std::string mode = cfg.get_str("residual_mode", "normalized");
    if (mode == "normalized") cc.residual_mode = calib::ResidualMode::Normalized;
    else if (mode == "absolute") cc.residual_mode = calib::ResidualMode::Absolute;
    else throw std::runtime_error("residual_mode must be 'normalized' or 'absolute'");
    if (auto s2 = cfg.get_opt("sigma2")) cc.sigma2 = *s2;
    return cc;
}

mob::WheelRig wheel_from(const io::Config& cfg) {
    mob::WheelRig rig;
    rig.wheel_radius = cfg.get_num("wheel_radius", 0.47);
    rig.wheel_width = cfg.get_num("wheel_width", 0.3);
    rig.mass = cfg.get_num("wheel_mass", 20);
    rig.speed = cfg.get_num("wheel_speed", 1.0);
    rig.duration = cfg.get_num("run_duration", 15);
    if (cfg.has("wheel_mesh")) {
        const std::string path = cfg.get_str("wheel_mesh", "");
        rig.mesh = dem::TriMesh::load_obj(io::read_file(path));
    }
    return rig;
}

std::string out_path(const std::string& out_dir, const std::string& name) {
    return out_dir.empty() || out_dir == "." ? name : out_dir + "/" + name;
}

// loads the shared ground-truth file when present so sink/shear can each
// contribute their sections
bev::GroundTruthSet load_or_empty(const std::string& path) {
    if (io::file_exists(path)) return bev::GroundTruthSet::from_csv(io::read_file(path));
    return {};
}

int cmd_settle(const io::Config& cfg, const std::string& out_dir, io::RunManifest& man) {
    const auto result = bev::settle(rig_from(cfg));
    const std::string bed_path = out_path(out_dir, "bed.csv");
    io::write_file(bed_path, result.bed.to_csv());
    man.add_output(bed_path);
    std::string ke = "t,ke_per_particle\n";
    for (std::size_t k = 0; k < result.ke_t.size(); ++k)
        ke += io::format_double(result.ke_t[k]) + ',' + io::format_double(result.ke_history[k]) + '\n';
    const std::string ke_path = out_path(out_dir, "settle_ke.csv");
    io::write_file(ke_path, ke);
    man.add_output(ke_path);
    if (!result.reached_threshold)
        std::fprintf(stderr, "warning: settle KE %.3e J above threshold after %.2f s\n",
                     result.mean_ke, result.simulated_time);
    std::printf("settled %zu particles, KE/particle %.3e J after %.2f s\n", result.bed.size(),
                result.mean_ke, result.simulated_time);
    return 0;
}

int cmd_sink(const io::Config& cfg, const std::string& out_dir, const std::string& bed_path,
             io::RunManifest& man) {
    const auto rig = rig_from(cfg);
    man.add_input(bed_path);
    const auto bed = dem::ParticleSystem::from_csv(io::read_file(bed_path), rig.material, rig.gravity);
    const auto radii = cfg.get_list("plate_radii", {});
    const auto speeds = cfg.get_list("press_speeds", {});
    if (radii.empty() || speeds.empty()) throw std::runtime_error("empty experiment matrix");
    const double depth = cfg.get_num("target_depth", 0.2);

    std::vector<bev::SinkageSeries> runs;
    for (double r : radii)
        for (double v : speeds) {
            std::printf("plate r=%.3f m, v=%.4f m/s ...\n", r, v);
            runs.push_back(bev::plate_sinkage_test(bed, rig, r, v, depth));
        }

    const std::string truth_path = out_path(out_dir, "ground_truth.csv");
    bev::GroundTruthSet gt = load_or_empty(truth_path);
    const bev::AnnulusGeom geom{gt.annulus_r_inner, gt.annulus_r_outer};
    bev::GroundTruthSet fresh = bev::sample_ground_truth(
        runs, {}, cfg.get_list("sample_depths", {}), {}, 0.0, rig, geom, rig.smooth_window);
    gt.sinkage = fresh.sinkage;
    gt.plate_radii = fresh.plate_radii;
    gt.gravity = fresh.gravity;
    io::write_file(truth_path, gt.to_csv());
    man.add_output(truth_path);
    return 0;
}

int cmd_shear(const io::Config& cfg, const std::string& out_dir, const std::string& bed_path,
              io::RunManifest& man) {
    const auto rig = rig_from(cfg);
    man.add_input(bed_path);
    const auto bed = dem::ParticleSystem::from_csv(io::read_file(bed_path), rig.material, rig.gravity);
    const auto loads = cfg.get_list("loads", {});
    if (loads.empty()) throw std::runtime_error("empty experiment matrix");
    const bev::AnnulusGeom geom{cfg.get_num("annulus_r_inner", 0.45),
                                cfg.get_num("annulus_r_outer", 0.6)};
    const double thickness = cfg.get_num("annulus_thickness", 0.15);
    const double omega = cfg.get_num("annulus_omega_deg", 1.0) * std::numbers::pi / 180.0;
    const double duration = cfg.get_num("shear_duration", 12.0);

    std::vector<bev::TorqueSeries> runs;
    for (double load : loads) {
        std::printf("annulus load=%.1f kg ...\n", load);
        runs.push_back(bev::annulus_shear_test(bed, rig, geom, thickness, load, omega, duration));
    }

    const std::string truth_path = out_path(out_dir, "ground_truth.csv");
    bev::GroundTruthSet gt = load_or_empty(truth_path);
    bev::GroundTruthSet fresh = bev::sample_ground_truth(
        {}, runs, {}, cfg.get_list("transient_times", {1, 2, 3}), cfg.get_num("steady_time", 5.0),
        rig, geom, rig.smooth_window);
    gt.steady = fresh.steady;
    gt.transient = fresh.transient;
    gt.annulus_r_inner = fresh.annulus_r_inner;
    gt.annulus_r_outer = fresh.annulus_r_outer;
    gt.omega_deg_s = fresh.omega_deg_s;
    gt.gravity = fresh.gravity;
    io::write_file(truth_path, gt.to_csv());
    man.add_output(truth_path);
    return 0;
}

int cmd_calibrate(const io::Config& cfg, const std::string& out_dir, const std::string& truth_path,
                  io::RunManifest& man) {
    man.add_input(truth_path);
    const auto gt = bev::GroundTruthSet::from_csv(io::read_file(truth_path));
    if (gt.sinkage.empty()) throw std::runtime_error("ground truth: missing [sinkage] section");
    if (gt.steady.empty()) throw std::runtime_error("ground truth: missing [steady] section");
    if (gt.transient.empty()) throw std::runtime_error("ground truth: missing [transient] section");
    const auto cc = calib_from(cfg);
    if (cc.iterations < 10000)
        std::fprintf(stderr, "warning: %ld iterations is likely under-sampled\n", cc.iterations);

    const auto pressure = calib::calibrate_pressure(gt, cc);
    const auto shear = calib::calibrate_shear(gt, cc);
    const auto params = calib::posterior_mean_params(pressure.summary, shear.summary);

    const std::string params_path = out_path(out_dir, "calibrated_params.txt");
    io::write_file(params_path, params.serialize());
    man.add_output(params_path);

    const std::string cp = out_path(out_dir, "chains_pressure.csv");
    io::write_file(cp, calib::chains_csv(pressure.chains, {"Kc", "Kphi", "n"}));
    man.add_output(cp);
    const std::string ca = out_path(out_dir, "chains_shear_steady.csv");
    io::write_file(ca, calib::chains_csv(shear.chains, {"c", "phi_deg"}));
    man.add_output(ca);
    const std::string cb = out_path(out_dir, "chains_shear_ks.csv");
    io::write_file(cb, calib::chains_csv(shear.stage_b_chains, {"Ks"}));
    man.add_output(cb);

    std::string summary = "pressure " + pressure.summary.to_text();
    summary += "shear " + shear.summary.to_text();
    const std::string sum_path = out_path(out_dir, "posterior_summary.txt");
    io::write_file(sum_path, summary);
    man.add_output(sum_path);

    std::string kde = pressure.summary.kde_csv();
    {  // merge shear params into the same file, skipping the repeated header
        const std::string shear_kde = shear.summary.kde_csv();
        kde += shear_kde.substr(shear_kde.find('\n') + 1);
    }
    const std::string kde_path = out_path(out_dir, "posterior_kde.csv");
    io::write_file(kde_path, kde);
    man.add_output(kde_path);

    std::printf("%-8s %12s %12s %8s\n", "param", "mean", "sd", "r_hat");
    auto print_rows = [&](const calib::PosteriorSummary& s) {
        for (const auto& p : s.params) {
            if (s.r_hat_available)
                std::printf("%-8s %12.5g %12.5g %8.4f\n", p.name.c_str(), p.mean, p.sd, p.r_hat);
            else
                std::printf("%-8s %12.5g %12.5g %8s\n", p.name.c_str(), p.mean, p.sd,
                            "n/a (single chain)");
        }
    };
    print_rows(pressure.summary);
    print_rows(shear.summary);
    if (pressure.summary.r_hat_warning || shear.summary.r_hat_warning)
        std::fprintf(stderr, "warning: R-hat > 1.1 for at least one parameter\n");
    return 0;
}

int cmd_wheel(const io::Config& cfg, const std::string& out_dir, const std::string& params_path,
              const std::string& backend_name, io::RunManifest& man) {
    man.add_input(params_path);
    const auto params = scm::ScmParams::parse(io::read_file(params_path));
    mob::Backend backend;
    if (backend_name == "scm") backend = mob::Backend::SCM;
    else if (backend_name == "dem") backend = mob::Backend::DEM;
    else throw CLI::ValidationError("--backend", "unknown backend '" + backend_name + "'");

    const auto rig = wheel_from(cfg);
    mob::ScmTerrainConfig terrain;
    terrain.length = cfg.get_num("terrain_length", 6.5);
    terrain.width = cfg.get_num("terrain_width", 1.0);
    terrain.resolution = cfg.get_num("terrain_resolution", 0.01);
    terrain.dt = cfg.get_num("scm_dt", 1e-3);
    mob::DemBedConfig bed;
    bed.bin_x = cfg.get_num("bed_x", 1.0);
    bed.bin_y = cfg.get_num("bed_y", 0.25);
    bed.particle_count = static_cast<std::size_t>(cfg.get_num("bed_particles", 30000));
    bed.material = material_from(cfg);
    bed.gravity = cfg.get_num("gravity", 9.81);
    bed.dt = cfg.get_num("dt", 0);
    bed.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 42));
    bed.threads = static_cast<int>(cfg.get_num("threads", 1));

    const auto curve = mob::slip_sweep(rig, cfg.get_list("slips", {0}), backend, params, terrain, bed);
    const std::string curve_path = out_path(out_dir, "curve_" + curve.backend + ".csv");
    io::write_file(curve_path, curve.to_csv());
    man.add_output(curve_path);
    std::printf("%s\n", curve.to_csv().c_str());
    return 0;
}

int cmd_compare(const std::string& out_dir, const std::string& path_a, const std::string& path_b,
                io::RunManifest& man) {
    man.add_input(path_a);
    man.add_input(path_b);
    const auto a = mob::SweepCurve::from_csv(io::read_file(path_a));
    const auto b = mob::SweepCurve::from_csv(io::read_file(path_b));
    const auto report = mob::compare(a, b);
    const std::string report_path = out_path(out_dir, "compare.txt");
    io::write_file(report_path, report.to_text());
    man.add_output(report_path);
    std::printf("%s", report.to_text().c_str());
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"virtual-bevameter SCM calibration toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::string seed_override, threads_override;
    app.add_option("--config", config_path, "key = value config file");
    app.add_option("--seed", seed_override, "override the config seed");
    app.add_option("--threads", threads_override, "worker threads for the DEM force pass");
    app.add_option("--out-dir", out_dir, "output directory (must exist)");

    auto* settle = app.add_subcommand("settle", "settle a fresh soil bed");
    auto* sink = app.add_subcommand("sink", "plate sinkage experiments on a settled bed");
    auto* shear = app.add_subcommand("shear", "annulus shear experiments on a settled bed");
    auto* calibrate = app.add_subcommand("calibrate", "Bayesian calibration from ground truth");
    auto* wheel = app.add_subcommand("wheel", "single-wheel slip sweep");
    auto* comp = app.add_subcommand("compare", "compare two slip-sweep curves");

    std::string bed_path_sink, bed_path_shear, truth_path, params_path, backend = "scm";
    std::string curve_a, curve_b;
    std::string iters_override, chains_override;
    sink->add_option("--bed", bed_path_sink, "settled bed snapshot CSV");
    shear->add_option("--bed", bed_path_shear, "settled bed snapshot CSV");
    calibrate->add_option("--truth", truth_path, "ground truth CSV");
    calibrate->add_option("--iters", iters_override, "MH iterations per chain");
    calibrate->add_option("--chains", chains_override, "number of chains");
    wheel->add_option("--params", params_path, "SCM parameter file");
    wheel->add_option("--backend", backend, "scm | dem");
    comp->add_option("curve_a", curve_a, "first curve CSV")->required();
    comp->add_option("curve_b", curve_b, "second curve CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    io::Config cli_overrides;
    if (!seed_override.empty()) cli_overrides.set("seed", seed_override);
    if (!threads_override.empty()) cli_overrides.set("threads", threads_override);
    if (!iters_override.empty()) cli_overrides.set("iters", iters_override);
    if (!chains_override.empty()) cli_overrides.set("chains", chains_override);

    io::RunManifest man;
    const auto t0 = std::chrono::steady_clock::now();
    int status = 0;
    try {
        const io::Config cfg = resolve_config(config_path, cli_overrides);
        man.config = cfg.entries();
        man.seed = static_cast<std::uint64_t>(cfg.get_num("seed", 42));
        if (!config_path.empty()) man.add_input(config_path);

        if (settle->parsed()) {
            man.subcommand = "settle";
            status = cmd_settle(cfg, out_dir, man);
        } else if (sink->parsed()) {
            man.subcommand = "sink";
            if (bed_path_sink.empty()) bed_path_sink = out_path(out_dir, "bed.csv");
            status = cmd_sink(cfg, out_dir, bed_path_sink, man);
        } else if (shear->parsed()) {
            man.subcommand = "shear";
            if (bed_path_shear.empty()) bed_path_shear = out_path(out_dir, "bed.csv");
            status = cmd_shear(cfg, out_dir, bed_path_shear, man);
        } else if (calibrate->parsed()) {
            man.subcommand = "calibrate";
            if (truth_path.empty()) truth_path = out_path(out_dir, "ground_truth.csv");
            status = cmd_calibrate(cfg, out_dir, truth_path, man);
        } else if (wheel->parsed()) {
            man.subcommand = "wheel";
            if (params_path.empty()) params_path = out_path(out_dir, "calibrated_params.txt");
            status = cmd_wheel(cfg, out_dir, params_path, backend, man);
        } else if (comp->parsed()) {
            man.subcommand = "compare";
            status = cmd_compare(out_dir, curve_a, curve_b, man);
        }
    } catch (const ConfigMissing& e) {
        man.error = e.what();
        std::fprintf(stderr, "error: %s\n", e.what());
        status = 2;
    } catch (const std::exception& e) {
        man.error = e.what();
        std::fprintf(stderr, "error: %s\n", e.what());
        status = 1;
    }
    man.wall_clock_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        man.write(out_path(out_dir, "manifest_" + (man.subcommand.empty() ? "run" : man.subcommand) +
                                        ".json"));
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: could not write manifest: %s\n", e.what());
        if (status == 0) status = 1;
    }
    return status;
}

}  // namespace terracal::cli
