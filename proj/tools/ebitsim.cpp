#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ebitsim/checks.hpp"
#include "ebitsim/ebit.hpp"
#include "ebitsim/fock.hpp"
#include "ebitsim/io.hpp"
#include "ebitsim/pattern.hpp"
#include "ebitsim/rng.hpp"
#include "ebitsim/sampler.hpp"
#include "ebitsim/sha256.hpp"
#include "ebitsim/tomography.hpp"
#include "ebitsim/wigner.hpp"

namespace {

using namespace ebitsim;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNonConvergence = 2;
constexpr int kExitIo = 3;

struct Overrides {
    std::optional<std::string> config_path;
    std::optional<long long> samples;
    std::optional<int> bins;
    std::optional<unsigned long long> seed;
    std::optional<double> eta;
    std::optional<double> arm_transmission;
    std::optional<double> phi;
    std::optional<std::string> bell;
    std::optional<std::string> method;
    std::optional<int> n_max;
    std::optional<int> max_iters;
    std::optional<double> tol;
    std::optional<std::string> out_dir;
};

/// Config file values, overlaid by EBITSIM_OUT_DIR, overlaid by flags;
/// validated as a whole before anything runs.
PipelineConfig build_config(const Overrides& o) {
    PipelineConfig cfg;
    if (o.config_path)
        cfg = parse_config_file(*o.config_path);
    if (o.samples)
        cfg.n_samples = *o.samples;
    if (o.bins)
        cfg.n_phase_bins = *o.bins;
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.eta)
        cfg.experiment.efficiency = *o.eta;
    if (o.arm_transmission)
        cfg.experiment.arm_transmission = *o.arm_transmission;
    if (o.phi)
        cfg.experiment.phi_rad = *o.phi;
    if (o.bell) {
        if (*o.bell == "plus")
            cfg.experiment.phi_rad = 0.0;
        else if (*o.bell == "minus")
            cfg.experiment.phi_rad = M_PI;
        else
            throw std::invalid_argument("--bell must be 'plus' or 'minus'");
        cfg.experiment.arm_transmission = 1.0;
    }
    if (o.method && !method_from_name(*o.method, cfg.reconstruction.method))
        throw std::invalid_argument(
            "--method must be max_likelihood or pattern_function");
    if (o.n_max)
        cfg.reconstruction.n_max = *o.n_max;
    if (o.max_iters)
        cfg.reconstruction.max_iterations = *o.max_iters;
    if (o.tol)
        cfg.reconstruction.convergence_tol = *o.tol;
    if (const char* env = std::getenv("EBITSIM_OUT_DIR"))
        cfg.output_dir = env;
    if (o.out_dir)
        cfg.output_dir = *o.out_dir;

    std::string bad = validate_config(cfg);
    if (!bad.empty())
        throw std::invalid_argument("invalid configuration: " + bad);
    return cfg;
}

std::filesystem::path ensure_out_dir(const PipelineConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError(cfg.output_dir + ": cannot create output directory: " +
                      ec.message());
    return dir;
}

double derive_phi(const PipelineConfig& cfg, bool announce) {
    double phi = phi_from_delays(cfg.experiment, [](const std::string& w) {
        std::cerr << "warning: " << w << "\n";
    });
    if (announce) {
        if (cfg.experiment.phi_rad)
            std::cout << "preparation phase: " << format_double(phi)
                      << " rad (explicit override)\n";
        else
            std::cout << "preparation phase: " << format_double(phi)
                      << " rad, from pulse separation "
                      << format_double(cfg.experiment.pulse_separation_s)
                      << " s and interferometer delay "
                      << format_double(cfg.experiment.interferometer_delay_s)
                      << " s at pump wavelength "
                      << format_double(cfg.experiment.pump_wavelength_m)
                      << " m\n";
    }
    return phi;
}

int cmd_state(const Overrides& o) {
    PipelineConfig cfg = build_config(o);
    auto dir = ensure_out_dir(cfg);
    double phi = derive_phi(cfg, true);
    auto [alpha, beta] = arm_loss_amplitudes(cfg.experiment.arm_transmission);
    FockTruncation trunc(cfg.reconstruction.n_max);
    std::string hash = config_hash(cfg);

    auto ket = make_ebit(alpha, beta, phi, trunc);
    auto rho = heralded_state(ket, cfg.experiment.efficiency);

    auto ket_path = (dir / "state_ket.txt").string();
    auto rho_path = (dir / "state_rho.txt").string();
    write_ket(ket_path, ket, hash);
    write_density(rho_path, rho, hash);
    std::cout << "amplitudes: alpha=" << format_double(alpha)
              << " beta=" << format_double(beta) << "\n";
    std::cout << "wrote " << ket_path << "\n";
    std::cout << "wrote " << rho_path << "\n";
    return kExitOk;
}

int cmd_simulate(const Overrides& o) {
    PipelineConfig cfg = build_config(o);
    auto dir = ensure_out_dir(cfg);
    double phi = derive_phi(cfg, true);
    ScanConfig scan = make_scan_config(cfg);
    std::string bad = validate_scan(scan);
    if (!bad.empty())
        throw std::invalid_argument("invalid scan: " + bad);

    auto samples = run_scan(scan, phi);

    SampleFileMeta meta;
    meta.generator = rng_name();
    meta.seed = scan.seed;
    meta.eta = scan.eta;
    meta.alpha = scan.alpha;
    meta.beta = scan.beta;
    meta.n_samples = scan.n_samples;
    meta.phi_state = phi;
    meta.bins = cfg.n_phase_bins;
    meta.vacuum = scan.include_vacuum_bin;
    meta.input_sha256 = config_hash(cfg);

    auto path = (dir / "samples.csv").string();
    write_samples(path, samples, meta);
    std::cout << "wrote " << path << " (" << samples.size() << " records, "
              << cfg.n_phase_bins << " phase bins)\n";
    return kExitOk;
}

int cmd_reconstruct(const Overrides& o, const std::string& samples_path) {
    PipelineConfig cfg = build_config(o);
    auto dir = ensure_out_dir(cfg);
    SampleFileMeta meta;
    auto samples = read_samples(samples_path, &meta);
    std::string data_hash = file_sha256(samples_path);
    const auto& rc = cfg.reconstruction;

    // Ground truth for the report: the generating parameters embedded in
    // the sample file when they are present and sane, the configured
    // experiment otherwise.
    bool meta_truth =
        !meta.generator.empty() && meta.eta >= 0.0 && meta.eta <= 1.0 &&
        std::abs(meta.alpha * meta.alpha + meta.beta * meta.beta - 1.0) <=
            1e-9;
    double t_eta, t_alpha, t_beta, t_phi;
    if (meta_truth) {
        t_eta = meta.eta;
        t_alpha = meta.alpha;
        t_beta = meta.beta;
        t_phi = meta.phi_state;
    } else {
        t_eta = cfg.experiment.efficiency;
        auto ab = arm_loss_amplitudes(cfg.experiment.arm_transmission);
        t_alpha = ab.first;
        t_beta = ab.second;
        t_phi = derive_phi(cfg, false);
    }
    FockTruncation trunc(rc.n_max);
    auto rho_true =
        heralded_state(make_ebit(t_alpha, t_beta, t_phi, trunc), t_eta);

    std::optional<DensityMatrix> rho_hat;
    std::vector<std::pair<std::string, std::string>> rows;
    rows.emplace_back("method", method_name(rc.method));
    rows.emplace_back("n_samples", std::to_string(samples.size()));
    bool converged = true;
    if (rc.method == ReconstructionMethod::max_likelihood) {
        auto ml = ml_reconstruct(samples, rc);
        converged = ml.converged;
        rows.emplace_back("iterations", std::to_string(ml.iterations));
        rows.emplace_back("converged", ml.converged ? "1" : "0");
        rows.emplace_back("final_log_likelihood",
                          format_double(ml.final_log_likelihood));
        rho_hat.emplace(std::move(ml.rho));
    } else {
        rho_hat.emplace(pattern_reconstruct(samples, rc));
        PatternTable table(rc.n_max, rc.quadrature_points,
                           rc.quadrature_halfwidth);
        rows.emplace_back("kernel_defect",
                          format_double(table.orthogonality_defect()));
        std::cout << "kernel orthogonality self-test: defect "
                  << format_double(table.orthogonality_defect())
                  << " (gate 1e-6)\n";
    }

    auto rep = reconstruction_report(*rho_hat, rho_true);
    rows.emplace_back("truth_source", meta_truth ? "metadata" : "config");
    rows.emplace_back("fidelity", format_double(rep.fidelity));
    rows.emplace_back("trace_distance", format_double(rep.trace_distance));
    rows.emplace_back("eta_hat", format_double(rep.eta_hat));
    rows.emplace_back("visibility", format_double(rep.visibility));
    rows.emplace_back("multiphoton_weight",
                      format_double(rep.multiphoton_weight));
    rows.emplace_back("rho_00_00",
                      format_double(rho_hat->element(0, 0, 0, 0).real()));
    rows.emplace_back("rho_10_10",
                      format_double(rho_hat->element(1, 0, 1, 0).real()));
    rows.emplace_back("rho_01_01",
                      format_double(rho_hat->element(0, 1, 0, 1).real()));
    rows.emplace_back("re_rho_10_01",
                      format_double(rho_hat->element(1, 0, 0, 1).real()));
    rows.emplace_back("im_rho_10_01",
                      format_double(rho_hat->element(1, 0, 0, 1).imag()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        rho_hat->elements(), Eigen::EigenvaluesOnly);
    rows.emplace_back("min_eigenvalue",
                      format_double(es.eigenvalues().minCoeff()));

    auto rho_path = (dir / "rho_hat.txt").string();
    auto rep_path = (dir / "report.txt").string();
    write_density(rho_path, *rho_hat, data_hash);
    write_report(rep_path, rows, data_hash);
    std::cout << "wrote " << rho_path << "\n";
    std::cout << "wrote " << rep_path << "\n";
    std::cout << "fidelity vs " << (meta_truth ? "embedded" : "configured")
              << " truth: " << format_double(rep.fidelity) << "\n";
    if (!converged) {
        std::cerr << "error: reconstruction did not converge within "
                  << rc.max_iterations << " iterations\n";
        return kExitNonConvergence;
    }
    return kExitOk;
}

double parse_angle(const std::string& s) {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        std::string head = s.substr(0, s.size() - 2);
        if (head.empty())
            return M_PI;
        if (head == "-")
            return -M_PI;
        try {
            std::size_t used = 0;
            double mult = std::stod(head, &used);
            if (used == head.size())
                return mult * M_PI;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("bad angle '" + s + "'");
    }
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("bad angle '" + s + "'");
}

std::vector<double> parse_sweep(const std::string& spec) {
    std::size_t c1 = spec.find(':');
    std::size_t c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument(
            "--sweep-phi expects start:end:count, got '" + spec + "'");
    double start = parse_angle(spec.substr(0, c1));
    double end = parse_angle(spec.substr(c1 + 1, c2 - c1 - 1));
    int count = 0;
    try {
        count = std::stoi(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("--sweep-phi: bad count in '" + spec +
                                    "'");
    }
    if (count < 1)
        throw std::invalid_argument("--sweep-phi: count must be >= 1");
    std::vector<double> phis(count);
    for (int i = 0; i < count; ++i)
        phis[i] = count == 1 ? start
                             : start + (end - start) * i / double(count - 1);
    return phis;
}

int cmd_wigner(const Overrides& o, const std::string& source,
               const std::string& section_str, const std::string& fixed_str,
               const std::string& sweep_str, bool compare_analytic) {
    PipelineConfig cfg = build_config(o);
    auto dir = ensure_out_dir(cfg);

    Section section;
    if (!section_from_name(section_str, section))
        throw std::invalid_argument("unknown section '" + section_str +
                                    "' (x1y1, x1x2, x1y2, xplus_yplus, "
                                    "xminus_yminus)");
    double f1 = 0, f2 = 0;
    {
        int used = 0;
        if (std::sscanf(fixed_str.c_str(), "%lf ,%lf%n", &f1, &f2, &used) !=
                2 ||
            used != int(fixed_str.size()))
            throw std::invalid_argument("--fixed expects two numbers a,b, "
                                        "got '" +
                                        fixed_str + "'");
    }
    double eta = cfg.experiment.efficiency;
    std::vector<double> phis = sweep_str.empty()
                                   ? std::vector<double>{derive_phi(cfg, false)}
                                   : parse_sweep(sweep_str);

    std::optional<DensityMatrix> rho;
    std::string hash;
    if (source == "analytic") {
        // the closed form covers the balanced superposition only
        auto [a, b] = arm_loss_amplitudes(cfg.experiment.arm_transmission);
        if (std::abs(a - b) > 1e-12)
            throw std::invalid_argument(
                "analytic source requires experiment.arm_transmission = 1; "
                "use a density-matrix file for unbalanced states");
        hash = config_hash(cfg);
    } else {
        rho.emplace(read_density(source));
        hash = file_sha256(source);
    }

    AxisSpec ax;
    for (std::size_t i = 0; i < phis.size(); ++i) {
        WignerGrid grid =
            rho ? export_section_rho(*rho, section, ax, ax, f1, f2, phis[i],
                                     eta)
                : export_section_analytic(section, ax, ax, f1, f2, phis[i],
                                          eta);
        char fname[96];
        if (phis.size() == 1)
            std::snprintf(fname, sizeof fname, "wigner_%s.csv",
                          section_name(section));
        else
            std::snprintf(fname, sizeof fname, "wigner_%s_%03d.csv",
                          section_name(section), int(i));
        auto path = (dir / fname).string();
        write_wigner_grid(path, grid, hash);
        std::cout << "wrote " << path << " (phi=" << format_double(phis[i])
                  << ")\n";
        if (compare_analytic && rho) {
            auto ana = export_section_analytic(section, ax, ax, f1, f2,
                                               phis[i], eta);
            std::cout << "max |grid - analytic| = "
                      << format_double((grid.values - ana.values)
                                           .cwiseAbs()
                                           .maxCoeff())
                      << "\n";
        }
    }
    return kExitOk;
}

int cmd_verify(const Overrides& o, bool quick) {
    build_config(o); // full validation with field-level diagnostics
    auto print = [](const CheckResult& r) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " | "
                  << r.detail << "\n"
                  << std::flush;
    };
    auto inv = run_invariant_checks(quick, print);
    std::vector<CheckResult> acc;
    if (!quick)
        acc = run_acceptance_criteria(print);
    int failed = 0;
    for (const auto& r : inv)
        failed += r.pass ? 0 : 1;
    for (const auto& r : acc)
        failed += r.pass ? 0 : 1;
    int total = int(inv.size() + acc.size());
    std::cout << (total - failed) << "/" << total << " checks passed\n";
    return failed == 0 ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-mode single-photon homodyne simulation and tomography"};
    app.require_subcommand(1);

    Overrides o;
    auto* s_state =
        app.add_subcommand("state", "Write the ground-truth state files");
    auto* s_sim = app.add_subcommand("simulate",
                                     "Generate the quadrature sample file");
    auto* s_rec = app.add_subcommand(
        "reconstruct", "Reconstruct a density matrix from a sample file");
    std::string samples_path;
    s_rec->add_option("input", samples_path, "Sample CSV file")->required();
    auto* s_wig = app.add_subcommand("wigner",
                                     "Export Wigner-function section grids");
    std::string source = "analytic", section = "x1y1", fixed = "0,0", sweep;
    bool compare = false;
    s_wig->add_option("--source", source,
                      "'analytic' or a density-matrix file");
    s_wig->add_option("--section", section,
                      "x1y1, x1x2, x1y2, xplus_yplus, xminus_yminus");
    s_wig->add_option("--fixed", fixed, "Held coordinate pair a,b");
    s_wig->add_option("--sweep-phi", sweep,
                      "Phase sweep start:end:count (accepts 'pi')");
    s_wig->add_flag("--compare-analytic", compare,
                    "Print max difference against the closed form");
    auto* s_ver = app.add_subcommand(
        "verify", "Run invariant checks and acceptance criteria");
    bool quick = false;
    s_ver->add_flag("--quick", quick,
                    "Invariants only, reduced sample counts");

    for (auto* sub : {s_state, s_sim, s_rec, s_wig, s_ver}) {
        sub->add_option("--config", o.config_path,
                        "Configuration file (flat section.key = value)");
        sub->add_option("--out-dir", o.out_dir,
                        "Output directory (beats config and EBITSIM_OUT_DIR)");
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--samples", o.samples, "Total sample count");
        sub->add_option("--bins", o.bins, "Number of phase bins");
        sub->add_option("--eta", o.eta, "Overall efficiency in [0,1]");
        sub->add_option("--arm-transmission", o.arm_transmission,
                        "Long-arm amplitude transmission");
        sub->add_option("--phi", o.phi,
                        "Preparation phase (rad), overrides the delay "
                        "derivation");
        sub->add_option("--bell", o.bell,
                        "Balanced state at phase 0 (plus) or pi (minus)");
        sub->add_option("--method", o.method,
                        "max_likelihood or pattern_function");
        sub->add_option("--n-max", o.n_max, "Per-mode photon number cutoff");
        sub->add_option("--max-iters", o.max_iters,
                        "Reconstruction iteration cap");
        sub->add_option("--tol", o.tol, "Reconstruction convergence tolerance");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        if (s_state->parsed())
            return cmd_state(o);
        if (s_sim->parsed())
            return cmd_simulate(o);
        if (s_rec->parsed())
            return cmd_reconstruct(o, samples_path);
        if (s_wig->parsed())
            return cmd_wigner(o, source, section, fixed, sweep, compare);
        if (s_ver->parsed())
            return cmd_verify(o, quick);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitValidation;
}
