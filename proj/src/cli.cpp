// Copyright 2026 The nisqmaps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nisqmaps/cli.hpp"

#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nisqmaps/circuits.hpp"
#include "nisqmaps/ensembles.hpp"
#include "nisqmaps/io.hpp"
#include "nisqmaps/parallel.hpp"
#include "nisqmaps/pipeline.hpp"
#include "nisqmaps/spectral.hpp"

namespace nisqmaps {

namespace {

using nlohmann::json;

// "a:b:step" (inclusive) or a comma-separated list
std::vector<double> parse_real_grid(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<double> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(parse_double(item));
        if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
            throw Error(ErrorCode::InvalidArgument, "grid must be start:stop:step");
        }
        const auto count = static_cast<int>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
        for (int k = 0; k <= count; ++k) out.push_back(std::round((parts[0] + k * parts[2]) * 1e12) / 1e12);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty grid");
    return out;
}

std::vector<Index> parse_int_grid(const std::string& text) {
    std::vector<Index> out;
    for (double v : parse_real_grid(text)) out.push_back(static_cast<Index>(std::llround(v)));
    return out;
}

void emit_text(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << text;
    } else {
        write_text_file(path, text);
    }
}

struct FitFlags {
    double learning_rate = 0.01;
    int max_iters = 5000;
    double init_scale = 0.1;
    int patience = 0;
    std::size_t batch_size = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lr", learning_rate, "Adam learning rate");
        cmd->add_option("--iters", max_iters, "maximum Adam iterations");
        cmd->add_option("--init-scale", init_scale, "scale of the random initial perturbation");
        cmd->add_option("--patience", patience, "stop after this many iterations without improvement (0 = never)");
        cmd->add_option("--batch", batch_size, "modes per mini-batch (0 = full batch)");
    }

    FitConfig config(std::uint64_t seed) const {
        FitConfig cfg;
        cfg.learning_rate = learning_rate;
        cfg.max_iters = max_iters;
        cfg.init_scale = init_scale;
        cfg.patience = patience;
        cfg.batch_size = batch_size;
        cfg.seed = Seed{seed};
        return cfg;
    }
};

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Process tomography and spectral analysis of noisy quantum maps"};
    app.require_subcommand(0, 1);
    bool show_version = false;
    int threads = 0;
    app.add_flag("--version", show_version, "print version, schema and gate convention");
    app.add_option("--threads", threads, "cap on worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

    std::uint64_t seed = 0;
    std::string out_path;
    auto common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "random seed");
        cmd->add_option("--out", out_path, "output file ('-' or empty = stdout)");
    };

    // gen-truth
    TruthConfig truth_cfg;
    std::string ladder = "up";
    std::string rot_order = "yz";
    auto* gen_truth = app.add_subcommand("gen-truth", "sample a ground-truth map");
    common(gen_truth);
    gen_truth->add_option("--kind", truth_cfg.kind, "lindblad | du | circuit")->check(CLI::IsMember({"lindblad", "du", "circuit"}));
    gen_truth->add_option("--n", truth_cfg.n, "qubits")->check(CLI::Range(1, 6));
    gen_truth->add_option("--alpha", truth_cfg.alpha, "Hamiltonian weight");
    gen_truth->add_option("--beta", truth_cfg.beta, "map strength");
    gen_truth->add_option("--rank", truth_cfg.rank, "dissipator rank");
    gen_truth->add_option("--p", truth_cfg.p, "dissipative weight of the diluted unitary");
    gen_truth->add_option("--r", truth_cfg.r, "rank of the diluted unitary dissipator");
    gen_truth->add_option("--depth", truth_cfg.depth, "circuit blocks");
    gen_truth->add_option("--ladder", ladder, "CNOT ladder direction")->check(CLI::IsMember({"up", "down"}));
    gen_truth->add_option("--rot-order", rot_order, "rotation layer order")->check(CLI::IsMember({"yz", "zy"}));
    gen_truth->add_option("--noise-alpha", truth_cfg.noise_alpha, "Hamiltonian weight of the circuit noise");
    gen_truth->add_option("--noise-beta", truth_cfg.noise_beta, "strength of the circuit noise (0 = none)");
    gen_truth->add_option("--noise-rank", truth_cfg.noise_rank, "rank of the circuit noise dissipator");

    // gen-data
    std::string map_path;
    std::string spam_path;
    std::string spam_out;
    std::string test_out;
    double c1 = 1.0;
    double c2 = 1.0;
    std::uint64_t n_modes = 0;
    std::uint64_t shots = 1024;
    double train_fraction = 0.0;
    bool calibration = false;
    int data_n = 0;
    auto* gen_data = app.add_subcommand("gen-data", "simulate measurement frequencies");
    common(gen_data);
    gen_data->add_option("--map", map_path, "truth map JSON (omit with --calibration)");
    gen_data->add_option("--spam", spam_path, "SPAM model JSON (default: synthetic from --c1/--c2)");
    gen_data->add_option("--c1", c1, "state-preparation purity weight")->check(CLI::Range(0.0, 1.0));
    gen_data->add_option("--c2", c2, "measurement purity weight")->check(CLI::Range(0.0, 1.0));
    gen_data->add_option("--spam-out", spam_out, "write the synthetic SPAM model here");
    gen_data->add_option("--modes", n_modes, "number of random modes (0 = all)");
    gen_data->add_option("--shots", shots, "shots per mode")->check(CLI::PositiveNumber);
    gen_data->add_flag("--calibration", calibration, "SPAM-only data: identity map, all-z basis");
    gen_data->add_option("--n", data_n, "qubits (needed with --calibration)");
    gen_data->add_option("--train-fraction", train_fraction, "split off a test set");
    gen_data->add_option("--test-out", test_out, "test split output");

    // fit-spam
    std::string data_path;
    std::string spam_kind = "corruption";
    FitFlags spam_flags;
    auto* fit_spam_cmd = app.add_subcommand("fit-spam", "fit the SPAM model on calibration data");
    common(fit_spam_cmd);
    fit_spam_cmd->add_option("--data", data_path, "calibration dataset")->required();
    fit_spam_cmd->add_option("--model", spam_kind, "corruption | povm")->check(CLI::IsMember({"corruption", "povm"}));
    spam_flags.attach(fit_spam_cmd);

    // fit-map
    Index rank = 0;
    std::string report_path;
    FitFlags map_flags;
    auto* fit_map_cmd = app.add_subcommand("fit-map", "retrieve the map with SPAM frozen");
    common(fit_map_cmd);
    fit_map_cmd->add_option("--data", data_path, "training dataset")->required();
    fit_map_cmd->add_option("--spam", spam_path, "SPAM model JSON (default: ideal)");
    fit_map_cmd->add_option("--rank", rank, "Kraus rank (0 = d^2)");
    fit_map_cmd->add_option("--report", report_path, "fit report JSON");
    map_flags.attach(fit_map_cmd);

    // kl-eval
    auto* kl_cmd = app.add_subcommand("kl-eval", "mean KL divergence on a test set");
    common(kl_cmd);
    kl_cmd->add_option("--map", map_path, "map JSON")->required();
    kl_cmd->add_option("--spam", spam_path, "SPAM model JSON (default: ideal)");
    kl_cmd->add_option("--data", data_path, "test dataset")->required();

    // spectrum
    auto* spec_cmd = app.add_subcommand("spectrum", "superoperator eigenvalues as CSV");
    common(spec_cmd);
    spec_cmd->add_option("--map", map_path, "map JSON")->required();

    // fit-du
    std::string spectrum_path;
    Index du_d = 0;
    std::string grid_p_text;
    std::string grid_r_text;
    int m_samples = 5;
    double sigma = 0.0;
    std::string metric = "sd";
    auto* du_cmd = app.add_subcommand("fit-du", "fit a diluted-unitary ensemble to a spectrum");
    common(du_cmd);
    du_cmd->add_option("--spectrum", spectrum_path, "spectrum CSV")->required();
    du_cmd->add_option("--d", du_d, "Hilbert dimension (default: from the spectrum)");
    du_cmd->add_option("--grid-p", grid_p_text, "p grid, start:stop:step or list");
    du_cmd->add_option("--grid-r", grid_r_text, "r grid, start:stop:step or list");
    du_cmd->add_option("--samples", m_samples, "DU samples per grid point")->check(CLI::PositiveNumber);
    du_cmd->add_option("--sigma", sigma, "kernel width (default: mean nearest-neighbour distance)");
    du_cmd->add_option("--metric", metric, "sd | w2")->check(CLI::IsMember({"sd", "w2"}));

    // expressibility
    int ex_n = 4;
    std::string depths = "4";
    std::size_t n_samples = 10000;
    int bins = 75;
    std::string baseline = "sampled";
    auto* ex_cmd = app.add_subcommand("expressibility", "KL of circuit fidelities against Haar");
    common(ex_cmd);
    ex_cmd->add_option("--n", ex_n, "qubits")->check(CLI::Range(1, 12));
    ex_cmd->add_option("--depth", depths, "depth or comma-separated depths");
    ex_cmd->add_option("--samples", n_samples, "fidelity samples")->check(CLI::PositiveNumber);
    ex_cmd->add_option("--bins", bins, "histogram bins")->check(CLI::PositiveNumber);
    ex_cmd->add_option("--baseline", baseline, "sampled | analytic")->check(CLI::IsMember({"sampled", "analytic"}));
    ex_cmd->add_option("--ladder", ladder, "CNOT ladder direction")->check(CLI::IsMember({"up", "down"}));
    ex_cmd->add_option("--rot-order", rot_order, "rotation layer order")->check(CLI::IsMember({"yz", "zy"}));

    // plot-data
    std::string fit_path;
    std::string out_dir = ".";
    auto* plot_cmd = app.add_subcommand("plot-data", "CSV tables for eigenvalue scatter and radii plots");
    common(plot_cmd);
    plot_cmd->add_option("--spectrum", spectrum_path, "spectrum CSV")->required();
    plot_cmd->add_option("--fit", fit_path, "DU fit JSON for the circle overlay");
    plot_cmd->add_option("--dir", out_dir, "output directory");

    // run
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "execute a pipeline config");
    common(run_cmd);
    run_cmd->add_option("--config", config_path, "pipeline JSON config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << "run with --help for usage\n";
        return 2;
    }

    try {
        if (threads > 0) set_max_threads(threads);
        if (show_version) {
            out << "nisqmaps " << kVersion << " (schema " << kSchemaVersion << ", gate convention " << kGateConvention
                << ", qubit order " << kQubitOrder << ")\n";
            return 0;
        }
        if (app.get_subcommands().empty()) {
            err << app.help();
            return 2;
        }
        const Seed root{seed};
        truth_cfg.circuit.ladder = ladder == "up" ? Ladder::Up : Ladder::Down;
        truth_cfg.circuit.rot_order = rot_order == "yz" ? RotationOrder::YZ : RotationOrder::ZY;

        if (*gen_truth) {
            emit_text(out_path, kraus_map_to_json(make_truth(truth_cfg, root).map), out);
        } else if (*gen_data) {
            std::optional<KrausMap> truth;
            int n = data_n;
            if (!calibration) {
                if (map_path.empty()) throw CLI::RequiredError("--map");
                truth = kraus_map_from_json(read_text_file(map_path));
                n = static_cast<int>(std::lround(std::log2(static_cast<double>(truth->dim()))));
                if ((Index{1} << n) != truth->dim()) throw Error(ErrorCode::InvalidArgument, "gen-data: map dimension is not 2^n");
            } else if (n < 1) {
                throw CLI::RequiredError("--n");
            }
            const Index d = Index{1} << n;
            const SpamModel spam = spam_path.empty() ? synthetic_spam(d, c1, c2, derive_seed(root, "spam"))
                                                     : spam_model_from_json(read_text_file(spam_path));
            if (!spam_out.empty()) write_text_file(spam_out, spam_model_to_json(spam));
            std::vector<PauliMode> modes;
            if (calibration) {
                modes = spam_calibration_modes(n);
                truth = KrausMap::identity(d);
            } else {
                modes = sample_modes(n, n_modes == 0 ? mode_count(n) : n_modes, derive_seed(root, "modes"));
            }
            const TomographyDataset ds = simulate_frequencies(*truth, spam, modes, shots, derive_seed(root, "shots"));
            if (train_fraction > 0.0) {
                if (test_out.empty()) throw CLI::RequiredError("--test-out");
                auto [train, test] = split(ds, train_fraction, derive_seed(root, "split"));
                emit_text(out_path, dataset_to_text(train), out);
                write_text_file(test_out, dataset_to_text(test));
            } else {
                emit_text(out_path, dataset_to_text(ds), out);
            }
        } else if (*fit_spam_cmd) {
            const TomographyDataset ds = dataset_from_text(read_text_file(data_path));
            const SpamFit fit = fit_spam(ds, spam_flags.config(seed),
                                         spam_kind == "povm" ? SpamModelKind::Povm : SpamModelKind::Corruption);
            emit_text(out_path, spam_model_to_json(fit.model), out);
        } else if (*fit_map_cmd) {
            const TomographyDataset ds = dataset_from_text(read_text_file(data_path));
            const SpamModel spam = spam_path.empty() ? SpamModel::ideal(ds.dim()) : spam_model_from_json(read_text_file(spam_path));
            const MapFit fit = fit_map(ds, spam, rank == 0 ? ds.dim() * ds.dim() : rank, map_flags.config(seed));
            emit_text(out_path, kraus_map_to_json(fit.map), out);
            if (!report_path.empty()) write_text_file(report_path, fit_report_to_json(fit.report));
        } else if (*kl_cmd) {
            const KrausMap map = kraus_map_from_json(read_text_file(map_path));
            const TomographyDataset ds = dataset_from_text(read_text_file(data_path));
            const SpamModel spam = spam_path.empty() ? SpamModel::ideal(ds.dim()) : spam_model_from_json(read_text_file(spam_path));
            const double kl = kl_eval(map, spam, ds);
            json j{{"kl", kl}, {"inverse_kl", kl > 0.0 ? json(1.0 / kl) : json(nullptr)}, {"modes", ds.records.size()}};
            emit_text(out_path, j.dump() + "\n", out);
        } else if (*spec_cmd) {
            emit_text(out_path, spectrum_to_csv(spectrum(kraus_map_from_json(read_text_file(map_path)))), out);
        } else if (*du_cmd) {
            const Spectrum spec = spectrum_from_csv(read_text_file(spectrum_path));
            if (du_d == 0) {
                du_d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(spec.size()))));
            }
            const auto gp = grid_p_text.empty() ? default_grid_p() : parse_real_grid(grid_p_text);
            const auto gr = grid_r_text.empty() ? default_grid_r(du_d) : parse_int_grid(grid_r_text);
            const DUSpectrumBank bank(du_d, gp, gr, m_samples, root);
            const DUFit fit = fit_du(spec, bank, sigma > 0.0 ? std::optional<double>(sigma) : std::nullopt,
                                     metric == "w2" ? FitMetric::Wasserstein2 : FitMetric::SpectralDistance);
            emit_text(out_path, du_fit_to_json(fit), out);
        } else if (*ex_cmd) {
            const CircuitOptions opts{ladder == "up" ? Ladder::Up : Ladder::Down,
                                      rot_order == "yz" ? RotationOrder::YZ : RotationOrder::ZY};
            std::string csv = "depth,n_samples,value\n";
            for (Index depth : parse_int_grid(depths)) {
                const double value = expressibility(ex_n, static_cast<int>(depth), n_samples, bins,
                                                    derive_seed(root, static_cast<std::uint64_t>(depth)),
                                                    baseline == "analytic" ? Baseline::Analytic : Baseline::Sampled, opts);
                csv += std::to_string(depth) + "," + std::to_string(n_samples) + "," + format_double(value) + "\n";
            }
            emit_text(out_path, csv, out);
        } else if (*plot_cmd) {
            const Spectrum spec = spectrum_from_csv(read_text_file(spectrum_path));
            std::string scatter = "j,re,im,modulus\n";
            for (std::size_t j = 0; j < spec.size(); ++j) {
                const cplx v = spec.values[j];
                scatter += std::to_string(j + 1) + "," + format_double(v.real()) + "," + format_double(v.imag()) + "," +
                           format_double(std::abs(v)) + "\n";
            }
            const std::filesystem::path dir = out_dir;
            write_text_file(dir / "eigenvalues.csv", scatter);
            if (!fit_path.empty()) {
                const json fit = json::parse(read_text_file(fit_path));
                const double p = fit.at("p_star").get<double>();
                const Index r = fit.at("r_star").get<Index>();
                const DURadii radii = du_radii(p, r);
                std::string circles = "circle,angle,re,im\n";
                for (int k = 0; k <= 360; ++k) {
                    const double a = 2.0 * std::numbers::pi * k / 360.0;
                    auto row = [&](const char* name, double radius) {
                        circles += std::string(name) + "," + format_double(a) + "," + format_double(radius * std::cos(a)) +
                                   "," + format_double(radius * std::sin(a)) + "\n";
                    };
                    row("R_plus", radii.r_plus);
                    if (radii.r_minus) row("R_minus", *radii.r_minus);
                }
                write_text_file(dir / "circles.csv", circles);
                std::string curve = "p,R_plus,R_minus\n";
                for (int k = 0; k <= 100; ++k) {
                    const double pk = k / 100.0;
                    const DURadii rk = du_radii(pk, r);
                    curve += format_double(pk) + "," + format_double(rk.r_plus) + "," +
                             (rk.r_minus ? format_double(*rk.r_minus) : std::string()) + "\n";
                }
                write_text_file(dir / "radii_vs_p.csv", curve);
            }
        } else if (*run_cmd) {
            const std::string text = read_text_file(config_path);
            PipelineConfig cfg = PipelineConfig::from_json(text);
            if (!out_path.empty()) cfg.output_dir = out_path;
            if (run_cmd->count("--seed") > 0) cfg.seed = seed;
            const PipelineResult result = run_pipeline(cfg, text);
            if (result.status != 0) {
                err << json{{"error", "StageFailed"}, {"stage", result.failed_stage}, {"message", result.message}}.dump() << "\n";
                return 1;
            }
            out << result.manifest.string() << "\n";
        }
        return 0;
    } catch (const CLI::Error& e) {
        err << "missing option " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << json{{"error", to_string(e.code())}, {"message", e.what()}}.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << json{{"error", "Internal"}, {"message", e.what()}}.dump() << "\n";
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    return run(argc, argv, std::cout, std::cerr);
}

} // namespace nisqmaps
