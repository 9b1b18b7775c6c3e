#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nlts/io.hpp"
#include "nlts/lts.hpp"
#include "nlts/monitor.hpp"
#include "nlts/testkit.hpp"
#include "nlts/wedge.hpp"

namespace fs = std::filesystem;

namespace {

struct CmdState {
    std::string input;
    std::string input_dir;
    std::string out;
    std::string out_dir;
    std::string wedge_path;
    std::string wedge_tsv_path;
    std::string profiles_path;

    int A = 1, B = 2, G = 1, period = 12;
    bool no_shift = false;
    double h_frac = 0.75;
    bool h_frac_given = false;
    int nsamp = 250, nbest = 10, margin = 0;
    double huber_b = 2.0;
    int window = 15;
    double conf = 0.99;
    std::uint64_t seed = 0;
    int max_shifts = 3;
    int jobs = 1;
};

void add_model_options(CLI::App* cmd, CmdState& st) {
    cmd->add_option("--A", st.A, "trend polynomial degree")
        ->check(CLI::Range(0, 3));
    cmd->add_option("--B", st.B, "number of seasonal harmonics")
        ->check(CLI::Range(0, 6));
    cmd->add_option("--G", st.G, "amplitude polynomial degree")
        ->check(CLI::Range(0, 2));
    cmd->add_option("--period", st.period, "seasonal period")
        ->check(CLI::Range(2, 1000));
    cmd->add_flag("--no-shift", st.no_shift, "fit without a level-shift term");
    cmd->add_option("--h-frac", st.h_frac,
                    "trimming coverage as a fraction of T")
        ->check(CLI::Range(0.5, 1.0));
    cmd->add_option("--nsamp", st.nsamp, "elemental starts per shift position")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--nbest", st.nbest, "candidates kept per position")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--margin", st.margin,
                    "positions excluded at each end (0 = auto)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--huber-b", st.huber_b, "refinement clipping constant")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--window", st.window, "refinement window width (odd)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--conf", st.conf, "confidence level for flags and tests")
        ->check(CLI::Range(0.5, 0.9999999));
    cmd->add_option("--seed", st.seed, "random seed");
    cmd->add_option("--max-shifts", st.max_shifts,
                    "maximum shift-detection passes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--jobs", st.jobs, "worker threads")
        ->check(CLI::PositiveNumber);
}

nlts::ModelSpec make_spec(const CmdState& st) {
    nlts::ModelSpec spec;
    spec.trend_degree = st.A;
    spec.n_harmonics = st.B;
    spec.amplitude_degree = st.G;
    spec.period = st.period;
    spec.with_shift = !st.no_shift;
    spec.validate();
    return spec;
}

nlts::LtsOptions make_opts(const CmdState& st, int T) {
    nlts::LtsOptions opts;
    if (st.h_frac_given) {
        const int raw = static_cast<int>(std::floor(st.h_frac * T));
        opts.h = std::clamp(raw, (T + 1) / 2, T - 1);
    }
    opts.n_trials = st.nsamp;
    opts.n_best = st.nbest;
    opts.margin = st.margin;
    opts.huber_b = st.huber_b;
    opts.window_width = st.window;
    opts.conf_level = st.conf;
    opts.seed = st.seed;
    opts.jobs = st.jobs;
    return opts;
}

int run_fit(const CmdState& st) {
    const nlts::TimeSeries ts = nlts::read_series_csv(st.input);
    const nlts::ModelSpec spec = make_spec(st);
    const nlts::LtsOptions opts = make_opts(st, ts.size());

    nlts::FitResult first_pass;
    nlts::SeriesReport rep =
        nlts::detect_shifts(ts, spec, opts, st.max_shifts, &first_pass);
    rep.series_id = fs::path(st.input).stem().string();

    if (st.out.empty()) {
        std::cout << nlts::report_to_json(rep).dump(2) << "\n";
    } else {
        nlts::write_report_json(rep, st.out);
    }
    if (!st.wedge_path.empty() || !st.wedge_tsv_path.empty()) {
        if (first_pass.positions.empty())
            std::cerr << "warning: no shift scan ran; wedge output is empty\n";
        const auto w = nlts::build_wedge(first_pass.positions,
                                         first_pass.position_scaled_res);
        if (!st.wedge_path.empty()) nlts::render_wedge_svg(w, st.wedge_path);
        if (!st.wedge_tsv_path.empty())
            nlts::write_wedge_tsv(w, st.wedge_tsv_path);
    }
    if (!st.profiles_path.empty())
        nlts::write_profiles_json(first_pass, st.profiles_path);
    return 0;
}

int run_batch(const CmdState& st) {
    const fs::path dir(st.input_dir);
    if (!fs::is_directory(dir))
        throw std::invalid_argument("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".csv")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());

    const nlts::ModelSpec spec = make_spec(st);
    std::vector<nlts::BatchInput> inputs;
    std::vector<nlts::SeriesReport> read_failures;
    int common_T = -1;
    for (const auto& f : files) {
        const std::string id = f.stem().string();
        try {
            nlts::BatchInput in;
            in.id = id;
            in.series = nlts::read_series_csv(f);
            if (common_T < 0) common_T = in.series.size();
            inputs.push_back(std::move(in));
        } catch (const nlts::CsvError& e) {
            nlts::SeriesReport rep;
            rep.series_id = id;
            rep.model = spec;
            rep.failed = true;
            rep.warnings.push_back(std::string("read failed: ") + e.what());
            read_failures.push_back(std::move(rep));
        }
    }

    const fs::path out_dir(st.out_dir);
    fs::create_directories(out_dir);

    nlts::BatchResult result;
    if (!inputs.empty()) {
        const nlts::LtsOptions opts = make_opts(st, common_T);
        result = nlts::batch_run(inputs, spec, opts, st.max_shifts, st.jobs);
    }
    for (auto& rep : read_failures) {
        result.reports.push_back(std::move(rep));
        ++result.summary.n_series;
        ++result.summary.n_failures;
    }

    for (const auto& rep : result.reports)
        nlts::write_report_json(rep, out_dir / (rep.series_id + ".json"));
    {
        std::ofstream out(out_dir / "summary.json", std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " +
                                     (out_dir / "summary.json").string());
        out << nlts::batch_summary_to_json(result).dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust seasonal time-series fit with level-shift detection"};
    app.require_subcommand(1);
    CmdState st;

    CLI::App* fit = app.add_subcommand("fit", "fit a single series");
    fit->add_option("--input", st.input, "input CSV file")
        ->required()
        ->check(CLI::ExistingFile);
    fit->add_option("--out", st.out, "report JSON path (default: stdout)");
    fit->add_option("--wedge", st.wedge_path, "write the wedge plot SVG here");
    fit->add_option("--wedge-tsv", st.wedge_tsv_path,
                    "write the wedge matrix TSV here");
    fit->add_option("--profiles", st.profiles_path,
                    "write objective/refinement profile JSON here");
    add_model_options(fit, st);

    CLI::App* batch = app.add_subcommand("batch", "fit every CSV in a directory");
    batch->add_option("--input-dir", st.input_dir, "directory of CSV files")
        ->required();
    batch->add_option("--out-dir", st.out_dir, "directory for report JSONs")
        ->required();
    add_model_options(batch, st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    st.h_frac_given = fit->count("--h-frac") > 0 || batch->count("--h-frac") > 0;

    try {
        if (fit->parsed()) return run_fit(st);
        return run_batch(st);
    } catch (const nlts::CsvError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
