// Command line front end; everything goes through the public C interface.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circlefit.h"

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int exit_code_for(cf_status s) {
    switch (s) {
        case CF_OK: return 0;
        case CF_ERR_ARGUMENT: return 1;
        case CF_ERR_IO: return 2;
        default: return 3;
    }
}

int report_error(cf_status s) {
    std::cerr << "error: " << cf_last_error() << "\n";
    return exit_code_for(s);
}

// Emits to stdout, or atomically to a file when path is nonempty and not "-".
int emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return 0;
    }
    cf_status s = cf_write_text(path.c_str(), text.c_str());
    if (s != CF_OK) return report_error(s);
    return 0;
}

std::vector<double> split_numbers(const std::string& text, std::size_t count,
                                  const std::string& what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw CLI::ValidationError(what + ": expected " + std::to_string(count) +
                                       " comma separated numbers");
        }
    }
    if (out.size() != count)
        throw CLI::ValidationError(what + ": expected " + std::to_string(count) +
                                   " comma separated numbers");
    return out;
}

std::string read_text_file(const std::string& path, bool& ok) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) {
        ok = false;
        return {};
    }
    std::string text;
    char buf[4096];
    std::size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) text.append(buf, got);
    std::fclose(f);
    ok = true;
    return text;
}

using dataset_ptr = std::unique_ptr<cf_dataset, decltype(&cf_dataset_free)>;

dataset_ptr wrap(cf_dataset* d) {
    return dataset_ptr(d, &cf_dataset_free);
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::string input;
    std::string method = "lma";
    std::string prefit;
    std::string config_path;
    std::string out;
};

int run_fit(const FitArgs& args) {
    std::string options;
    if (!args.config_path.empty()) {
        bool ok = false;
        options = read_text_file(args.config_path, ok);
        if (!ok) {
            std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
            return 2;
        }
    }

    cf_dataset* raw = nullptr;
    cf_status s = cf_dataset_load(args.input.c_str(), &raw);
    if (s != CF_OK) return report_error(s);
    dataset_ptr data = wrap(raw);

    cf_fit_result r;
    s = cf_fit(data.get(), args.method.c_str(),
               args.prefit.empty() ? nullptr : args.prefit.c_str(),
               options.empty() ? nullptr : options.c_str(), &r);
    if (s != CF_OK) return report_error(s);

    std::string text;
    text += "input = " + args.input + "\n";
    text += "points = " + std::to_string(cf_dataset_size(data.get())) + "\n";
    text += "method = " + args.method + "\n";
    if (!args.prefit.empty()) text += "prefit = " + args.prefit + "\n";
    text += "status = " + std::string(r.status) + "\n";
    if (r.is_line) {
        text += "shape = line\n";
        text += "B = " + fmt(r.B) + "\n";
        text += "C = " + fmt(r.C) + "\n";
        text += "D = " + fmt(r.D) + "\n";
    } else {
        text += "shape = circle\n";
        text += "a = " + fmt(r.a) + "\n";
        text += "b = " + fmt(r.b) + "\n";
        text += "r = " + fmt(r.r) + "\n";
    }
    text += "objective = " + fmt(r.objective) + "\n";
    text += "iterations = " + std::to_string(r.iterations) + "\n";
    text += "newton_steps = " + std::to_string(r.newton_steps) + "\n";
    text += "flops = " + fmt(r.flops) + "\n";

    int rc = emit(args.out, text);
    if (rc != 0) return rc;
    std::string st = r.status;
    if (st != "Converged" && st != "Direct") return 3;
    return 0;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string kind = "arc";
    std::uint64_t n = 20;
    std::uint64_t seed = 1;
    std::uint64_t k = 4;
    double arc = 360.0;
    double sigma = 0.0;
    double radius = 1.0;
    std::string center = "0,0";
    double start = CF_ARC_START_AUTO;
    bool has_start = false;
    bool isotropic = false;
    bool random_angles = false;
    std::string out;
};

int run_generate(const GenerateArgs& args) {
    cf_dataset* raw = nullptr;
    cf_status s = CF_OK;
    std::string echo;

    if (args.kind == "square") {
        s = cf_generate_square(args.n, args.seed, &raw);
        echo = "# kind = square\n# n = " + std::to_string(args.n) + "\n# seed = " +
               std::to_string(args.seed) + "\n";
    } else if (args.kind == "arc") {
        std::vector<double> center = split_numbers(args.center, 2, "--center");
        cf_arc_spec spec;
        cf_arc_spec_init(&spec, args.n);
        spec.radius = args.radius;
        spec.arc_degrees = args.arc;
        spec.sigma = args.sigma;
        spec.center_x = center[0];
        spec.center_y = center[1];
        if (args.has_start) spec.start_degrees = args.start;
        spec.isotropic_noise = args.isotropic ? 1 : 0;
        spec.random_angles = args.random_angles ? 1 : 0;
        s = cf_generate_arc(&spec, args.seed, &raw);
        echo = "# kind = arc\n# n = " + std::to_string(args.n) + "\n# seed = " +
               std::to_string(args.seed) + "\n# radius = " + fmt(args.radius) +
               "\n# arc = " + fmt(args.arc) + "\n# sigma = " + fmt(args.sigma) +
               "\n# center = " + fmt(center[0]) + "," + fmt(center[1]) + "\n";
        if (args.has_start) echo += "# start = " + fmt(args.start) + "\n";
        if (args.isotropic) echo += "# noise = isotropic\n";
        if (args.random_angles) echo += "# angles = random\n";
    } else if (args.kind == "multimin") {
        s = cf_generate_multi_minima(args.k, &raw);
        echo = "# kind = multimin\n# k = " + std::to_string(args.k) + "\n";
    } else {
        std::cerr << "error: unknown kind '" << args.kind << "'\n";
        return 1;
    }
    if (s != CF_OK) return report_error(s);
    dataset_ptr data = wrap(raw);

    std::size_t n = cf_dataset_size(data.get());
    std::vector<double> xy(2 * n);
    s = cf_dataset_points(data.get(), xy.data());
    if (s != CF_OK) return report_error(s);

    std::string text = echo + "# x y\n";
    for (std::size_t i = 0; i < n; ++i)
        text += fmt(xy[2 * i]) + " " + fmt(xy[2 * i + 1]) + "\n";
    return emit(args.out, text);
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string experiment;
    std::string config_path;
    std::string out = ".";
    std::vector<std::string> overrides;  // key=value pairs from flags
};

int run_bench(const BenchArgs& args) {
    std::string config;
    if (!args.config_path.empty()) {
        bool ok = false;
        config = read_text_file(args.config_path, ok);
        if (!ok) {
            std::cerr << "error: cannot read config file '" << args.config_path << "'\n";
            return 2;
        }
        if (!config.empty() && config.back() != '\n') config += "\n";
    }
    // Flags win over the config file: later lines override earlier ones.
    for (const std::string& kv : args.overrides) config += kv + "\n";

    cf_status s = cf_bench_run(args.experiment.c_str(), config.empty() ? nullptr : config.c_str(),
                               args.out.c_str());
    if (s != CF_OK) return report_error(s);
    std::cout << "report written: " << args.out << "/report.json\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct ContourArgs {
    std::string input;
    std::string window;
    std::string res = "100,100";
    std::string out;
};

int run_contour(const ContourArgs& args) {
    std::vector<double> w = split_numbers(args.window, 4, "--window");
    std::vector<double> res = split_numbers(args.res, 2, "--res");
    int nx = static_cast<int>(res[0]);
    int ny = static_cast<int>(res[1]);
    if (res[0] != nx || res[1] != ny || nx < 2 || ny < 2) {
        std::cerr << "error: --res: expected two integers >= 2\n";
        return 1;
    }

    cf_dataset* raw = nullptr;
    cf_status s = cf_dataset_load(args.input.c_str(), &raw);
    if (s != CF_OK) return report_error(s);
    dataset_ptr data = wrap(raw);

    std::vector<double> values(static_cast<std::size_t>(nx) * ny);
    s = cf_contour(data.get(), w[0], w[1], w[2], w[3], nx, ny, values.data());
    if (s != CF_OK) return report_error(s);

    std::string text = "# input = " + args.input + "\n";
    text += "# window = " + fmt(w[0]) + "," + fmt(w[1]) + "," + fmt(w[2]) + "," + fmt(w[3]) + "\n";
    text += "# res = " + std::to_string(nx) + "," + std::to_string(ny) + "\n";
    text += "a,b,value\n";
    for (int i = 0; i < ny; ++i) {
        double b = w[2] + (w[3] - w[2]) * static_cast<double>(i) / (ny - 1);
        for (int j = 0; j < nx; ++j) {
            double a = w[0] + (w[1] - w[0]) * static_cast<double>(j) / (nx - 1);
            text += fmt(a) + "," + fmt(b) + "," +
                    fmt(values[static_cast<std::size_t>(i) * nx + j]) + "\n";
        }
    }
    return emit(args.out, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"circle and line least squares fitting"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit a circle or line to a dataset");
    fit->add_option("input", fit_args.input, "dataset file (x y pairs, # comments)")
        ->required();
    fit->add_option("--method", fit_args.method,
                    "af1|af2|af3|tri|cen|lmc|lma|landau|spath (default lma)");
    fit->add_option("--prefit", fit_args.prefit,
                    "starting guess for iterative methods: af1|af2|af3|tri|cen (default af2)");
    fit->add_option("--config", fit_args.config_path, "key=value solver settings file");
    fit->add_option("--out", fit_args.out, "write the report here instead of stdout");

    GenerateArgs gen_args;
    CLI::App* gen = app.add_subcommand("generate", "produce a synthetic dataset");
    gen->add_option("--kind", gen_args.kind, "square|arc|multimin (default arc)");
    gen->add_option("--n", gen_args.n, "number of points");
    gen->add_option("--seed", gen_args.seed, "random seed");
    gen->add_option("--k", gen_args.k, "multimin: copies of the origin");
    gen->add_option("--arc", gen_args.arc, "arc length in degrees (default 360)");
    gen->add_option("--sigma", gen_args.sigma, "noise level (default 0)");
    gen->add_option("--radius", gen_args.radius, "circle radius (default 1)");
    gen->add_option("--center", gen_args.center, "circle center as X,Y (default 0,0)");
    gen->add_option("--start", gen_args.start, "start angle in degrees (default: arc centered on top)")
        ->trigger_on_parse()
        ->each([&gen_args](const std::string&) { gen_args.has_start = true; });
    gen->add_flag("--isotropic", gen_args.isotropic, "Gaussian noise on both coordinates");
    gen->add_flag("--random-angles", gen_args.random_angles, "uniform random angles");
    gen->add_option("--out", gen_args.out, "write the dataset here instead of stdout");

    BenchArgs bench_args;
    std::string b_samples, b_starts, b_n, b_arc, b_sigma, b_seed;
    CLI::App* bench = app.add_subcommand("bench", "run a Monte Carlo experiment");
    bench->add_option("--experiment", bench_args.experiment,
                      "census|convergence|cost|escape|pairing")
        ->required();
    bench->add_option("--config", bench_args.config_path, "key=value experiment settings file");
    bench->add_option("--samples", b_samples, "datasets per cell");
    bench->add_option("--starts", b_starts, "initial guesses per dataset");
    bench->add_option("--n", b_n, "points per dataset");
    bench->add_option("--arc", b_arc, "arc length in degrees");
    bench->add_option("--sigma", b_sigma, "noise level");
    bench->add_option("--seed", b_seed, "random seed");
    bench->add_option("--out", bench_args.out, "output directory (default .)");

    ContourArgs contour_args;
    CLI::App* contour = app.add_subcommand("contour", "objective values on a center grid");
    contour->add_option("input", contour_args.input, "dataset file")->required();
    contour->add_option("--window", contour_args.window, "X0,X1,Y0,Y1 bounds of the grid")
        ->required();
    contour->add_option("--res", contour_args.res, "NX,NY grid resolution (default 100,100)");
    contour->add_option("--out", contour_args.out, "write the grid here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (fit->parsed()) return run_fit(fit_args);
        if (gen->parsed()) return run_generate(gen_args);
        if (bench->parsed()) {
            auto push = [&](const char* key, const std::string& v) {
                if (!v.empty()) bench_args.overrides.push_back(std::string(key) + "=" + v);
            };
            push("samples", b_samples);
            push("starts", b_starts);
            push("n", b_n);
            push("arc", b_arc);
            push("sigma", b_sigma);
            push("seed", b_seed);
            return run_bench(bench_args);
        }
        if (contour->parsed()) return run_contour(contour_args);
    } catch (const CLI::ParseError& e) {
        // Flag values validated after parsing, e.g. malformed number lists.
        std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
        return 1;
    }
    return 1;
}
