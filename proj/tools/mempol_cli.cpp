#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mempol/effective.hpp"
#include "mempol/imaging.hpp"
#include "mempol/io.hpp"
#include "mempol/polarization.hpp"
#include "mempol/runconfig.hpp"

namespace {

using namespace mempol;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 1;
    std::uint64_t seed = 0;
};

/// Run fn(i) for i in [0, n) on opts.threads workers; results must be
/// written into per-index slots so the output is thread-count invariant.
void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                errors[static_cast<std::size_t>(t)] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

const FrequencyGrid& require_grid(const RunConfig& cfg) {
    if (!cfg.grid) throw ConfigError("this command requires a \"grid\" block");
    return *cfg.grid;
}

const CellConfiguration& require_cells(const RunConfig& cfg) {
    if (!cfg.cells) throw ConfigError("this command requires a \"geometry\" block with cells");
    return *cfg.cells;
}

const ImagingConfig& require_imaging(const RunConfig& cfg) {
    if (!cfg.imaging) throw ConfigError("this command requires an \"imaging\" block");
    return *cfg.imaging;
}

void ensure_out_dir(const Options& opts) { fs::create_directories(opts.out_dir); }

void write_json(const Options& opts, const std::string& name, const Json& j) {
    write_text(fs::path(opts.out_dir) / name, j.dump(2) + "\n");
}

int cmd_mwf(const RunConfig& cfg, const Options& opts) {
    if (!cfg.mwf_r0) throw ConfigError("mwf: requires an \"mwf\" block with r0");
    const FrequencyGrid& grid = require_grid(cfg);
    const double r0 = *cfg.mwf_r0;
    CsvWriter csv({"omega", "re_m", "im_m", "peak_omega"});
    const double peak = mwf_peak_omega(cfg.model, r0);
    for (double w : grid.omegas) {
        const Complex m = mwf_circle(cfg.model, w, r0).m(0, 0);
        csv.row({w, m.real(), m.imag(), peak});
    }
    ensure_out_dir(opts);
    csv.write(fs::path(opts.out_dir) / "mwf.csv");
    Json summary;
    summary["peak_omega"] = peak;
    summary["peak_im_m"] = mwf_circle(cfg.model, peak, r0).m(0, 0).imag();
    summary["r0"] = r0;
    write_json(opts, "mwf_summary.json", summary);
    return kExitOk;
}

PolarizationSpectrum sweep_spectrum(const RunConfig& cfg) {
    return spectrum(require_cells(cfg), cfg.model, require_grid(cfg), cfg.n_nodes);
}

int cmd_spectrum(const RunConfig& cfg, const Options& opts, bool with_csv) {
    const PolarizationSpectrum spec = sweep_spectrum(cfg);
    ensure_out_dir(opts);
    if (with_csv) {
        CsvWriter csv({"omega", "re_m11", "re_m12", "re_m22", "im_m11", "im_m12", "im_m22",
                       "lambda1", "lambda2"});
        for (std::size_t i = 0; i < spec.grid.size(); ++i) {
            const Matrix2cd& m = spec.tensors[i].m;
            csv.row({spec.grid.omegas[i], m(0, 0).real(), m(0, 1).real(), m(1, 1).real(),
                     m(0, 0).imag(), m(0, 1).imag(), m(1, 1).imag(), spec.lambda1[i],
                     spec.lambda2[i]});
        }
        csv.write(fs::path(opts.out_dir) / "spectrum.csv");
    }
    Json report;
    report["tau1"] = spec.tau1;
    report["tau2"] = spec.tau2;
    report["peak_omega1"] = spec.peak_omega1;
    report["peak_omega2"] = spec.peak_omega2;
    write_json(opts, "debye.json", report);
    return kExitOk;
}

int cmd_effective(const RunConfig& cfg, const Options& opts) {
    if (!cfg.effective) throw ConfigError("effective: requires an \"effective\" block");
    const CellConfiguration& cells = require_cells(cfg);
    const FrequencyGrid& grid = require_grid(cfg);
    const EffectiveConfig& ec = *cfg.effective;
    const int n = static_cast<int>(grid.size());
    std::vector<EffectiveTensor> ks(static_cast<std::size_t>(n));
    std::vector<RandomEffectiveResult> rrs;
    PeriodicGreen pg;
    if (ec.mode == "periodic") cells.require_inside_unit_cell();
    if (ec.mode == "random") rrs.resize(static_cast<std::size_t>(n));
    parallel_for(n, opts.threads, [&](int i) {
        const double w = grid.omegas[static_cast<std::size_t>(i)];
        if (ec.mode == "dilute") {
            ks[static_cast<std::size_t>(i)] = dilute_effective(cells, cfg.model, w, cfg.n_nodes);
        } else if (ec.mode == "periodic") {
            ks[static_cast<std::size_t>(i)] =
                periodic_effective(cells, cfg.model, w, cfg.n_nodes, &pg);
        } else {
            rrs[static_cast<std::size_t>(i)] = random_dilute_effective(
                cells, cfg.model, w, ec.ensemble.params, ec.ensemble.n_samples, opts.seed,
                cfg.n_nodes);
            ks[static_cast<std::size_t>(i)] = rrs[static_cast<std::size_t>(i)].kstar;
        }
    });
    ensure_out_dir(opts);
    std::vector<std::string> cols = {"omega",  "re_k11", "im_k11", "re_k12", "im_k12",
                                     "re_k21", "im_k21", "re_k22", "im_k22"};
    if (ec.mode == "random") {
        cols.push_back("stderr_m11");
        cols.push_back("stderr_m12");
        cols.push_back("stderr_m22");
    }
    CsvWriter csv(cols);
    for (int i = 0; i < n; ++i) {
        const Matrix2cd& k = ks[static_cast<std::size_t>(i)].k;
        std::vector<double> row = {grid.omegas[static_cast<std::size_t>(i)],
                                   k(0, 0).real(),
                                   k(0, 0).imag(),
                                   k(0, 1).real(),
                                   k(0, 1).imag(),
                                   k(1, 0).real(),
                                   k(1, 0).imag(),
                                   k(1, 1).real(),
                                   k(1, 1).imag()};
        if (ec.mode == "random") {
            const Matrix2d& se = rrs[static_cast<std::size_t>(i)].stderr_m;
            row.push_back(se(0, 0));
            row.push_back(se(0, 1));
            row.push_back(se(1, 1));
        }
        csv.row(row);
    }
    csv.write(fs::path(opts.out_dir) / "effective.csv");
    return kExitOk;
}

struct ImagingScene {
    ProbeDomain probe;
    SuspensionInclusion inc;
    ForwardOperator op;
    Eigen::VectorXd g;
};

ImagingScene build_scene(const RunConfig& cfg) {
    const ImagingConfig& ic = require_imaging(cfg);
    ProbeDomain probe(ic.probe_radius, ic.probe_nodes);
    SuspensionInclusion inc{ic.inclusion, ic.f, sweep_spectrum(cfg)};
    ForwardOperator op(probe, ic.inclusion, ic.inclusion_nodes);
    const Vec2 a(std::cos(ic.pattern_angle), std::sin(ic.pattern_angle));
    return {probe, inc, std::move(op), probe.directional_pattern(a)};
}

int cmd_forward(const RunConfig& cfg, const Options& opts) {
    ImagingScene scene = build_scene(cfg);
    const ImagingConfig& ic = require_imaging(cfg);
    std::vector<double> omegas;
    if (ic.omega)
        omegas.push_back(*ic.omega);
    else
        omegas = require_grid(cfg).omegas;
    const ConfigGrid& bg = scene.probe.grid();
    std::vector<VectorXcd> us(omegas.size());
    parallel_for(static_cast<int>(omegas.size()), opts.threads, [&](int i) {
        us[static_cast<std::size_t>(i)] =
            forward_solve(scene.op, scene.inc, omegas[static_cast<std::size_t>(i)], scene.g).u;
    });
    ensure_out_dir(opts);
    CsvWriter csv({"omega", "node_index", "x", "y", "re_u", "im_u"});
    for (std::size_t i = 0; i < omegas.size(); ++i)
        for (int j = 0; j < bg.size; ++j) {
            const Vec2& x = bg.parts[0].x[static_cast<std::size_t>(j)];
            csv.row({omegas[i], static_cast<double>(j), x.x(), x.y(),
                     us[i][j].real(), us[i][j].imag()});
        }
    csv.write(fs::path(opts.out_dir) / "forward.csv");
    return kExitOk;
}

int cmd_image(const RunConfig& cfg, const Options& opts) {
    ImagingScene scene = build_scene(cfg);
    const FrequencyGrid& grid = require_grid(cfg);
    // interior sub-grid so the refinement stays inside the spectrum support
    FrequencyGrid sweep = FrequencyGrid::logspace(
        grid.omegas.front() * 1.05, grid.omegas.back() / 1.05,
        static_cast<int>(grid.size()));
    const DebyeEstimate est = estimate_debye(scene.op, scene.inc, scene.g, sweep);
    ensure_out_dir(opts);
    CsvWriter csv({"omega", "f_norm"});
    for (std::size_t i = 0; i < sweep.size(); ++i) csv.row({sweep.omegas[i], est.norms[i]});
    csv.write(fs::path(opts.out_dir) / "image_norms.csv");
    Json report;
    report["tau_hat"] = est.tau_hat;
    report["omega_hat"] = est.omega_hat;
    report["peak_value"] = est.peak_norm;
    report["direct_tau1"] = scene.inc.spectrum.tau1;
    report["direct_tau2"] = scene.inc.spectrum.tau2;
    write_json(opts, "image_report.json", report);
    if (cfg.pulse) {
        const PulseResponse pr = pulse_response(cfg.pulse->spec, scene.inc);
        CsvWriter pcsv({"t", "norm_m"});
        for (std::size_t i = 0; i < pr.t.size(); ++i) pcsv.row({pr.t[i], pr.m_t[i].norm()});
        pcsv.write(fs::path(opts.out_dir) / "pulse_response.csv");
    }
    return kExitOk;
}

int cmd_anisotropy(const RunConfig& cfg, const Options& opts) {
    ImagingScene scene = build_scene(cfg);
    const ImagingConfig& ic = require_imaging(cfg);
    const FrequencyGrid& grid = require_grid(cfg);
    const int n = static_cast<int>(grid.size());
    std::vector<AnisotropyStatistic> stats(static_cast<std::size_t>(n));
    parallel_for(n, opts.threads, [&](int i) {
        stats[static_cast<std::size_t>(i)] = anisotropy_statistic(
            scene.op, scene.inc, grid.omegas[static_cast<std::size_t>(i)], ic.n_angles);
    });
    ensure_out_dir(opts);
    CsvWriter csv({"omega", "s_min", "s_max", "ratio", "lambda_ratio"});
    for (int i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        csv.row({grid.omegas[idx], stats[idx].s_min, stats[idx].s_max, stats[idx].ratio,
                 scene.inc.spectrum.lambda1[idx] / scene.inc.spectrum.lambda2[idx]});
    }
    csv.write(fs::path(opts.out_dir) / "anisotropy.csv");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"membrane polarization spectroscopy toolkit"};
    app.require_subcommand(1);
    Options opts;
    app.add_option("--config", opts.config_path, "path to the JSON run configuration")
        ->required();
    app.add_option("--out", opts.out_dir, "output directory");
    app.add_option("--threads", opts.threads, "worker threads for frequency sweeps")
        ->check(CLI::PositiveNumber);
    app.add_option("--seed", opts.seed, "base seed for random-ensemble commands");
    auto* sub_mwf = app.add_subcommand("mwf", "analytic circle tensor spectrum");
    auto* sub_spectrum = app.add_subcommand("spectrum", "polarization tensor sweep + Debye times");
    auto* sub_debye = app.add_subcommand("debye", "Debye relaxation times only");
    auto* sub_effective = app.add_subcommand("effective", "effective admittivity sweep");
    auto* sub_forward = app.add_subcommand("forward", "synthetic boundary data");
    auto* sub_image = app.add_subcommand("image", "imaging functional sweep + tau estimate");
    auto* sub_anisotropy = app.add_subcommand("anisotropy", "anisotropy statistic vs frequency");
    for (auto* sub : {sub_mwf, sub_spectrum, sub_debye, sub_effective, sub_forward, sub_image,
                      sub_anisotropy})
        sub->fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitConfig;
    }
    try {
        const RunConfig cfg = RunConfig::load(opts.config_path);
        if (sub_mwf->parsed()) return cmd_mwf(cfg, opts);
        if (sub_spectrum->parsed()) return cmd_spectrum(cfg, opts, true);
        if (sub_debye->parsed()) return cmd_spectrum(cfg, opts, false);
        if (sub_effective->parsed()) return cmd_effective(cfg, opts);
        if (sub_forward->parsed()) return cmd_forward(cfg, opts);
        if (sub_image->parsed()) return cmd_image(cfg, opts);
        if (sub_anisotropy->parsed()) return cmd_anisotropy(cfg, opts);
        std::cerr << "no subcommand selected\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
