#include "circlefit.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <map>
#include <new>
#include <string>
#include <vector>

#include "circlefit/algebraic.hpp"
#include "circlefit/error.hpp"
#include "circlefit/generate.hpp"
#include "circlefit/geometric.hpp"
#include "circlefit/geometry.hpp"
#include "circlefit/harness.hpp"
#include "circlefit/io.hpp"

using namespace circlefit;

struct cf_dataset {
    DataSet data;
};

namespace {

thread_local std::string t_last_error;

cf_status set_error(cf_status code, const std::string& msg) {
    t_last_error = msg;
    return code;
}

cf_status map_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::Argument: return CF_ERR_ARGUMENT;
        case ErrorCode::Io: return CF_ERR_IO;
        case ErrorCode::Degenerate: return CF_ERR_DEGENERATE;
        case ErrorCode::Singular: return CF_ERR_SINGULAR;
        case ErrorCode::NonConverged: return CF_ERR_NONCONVERGED;
        case ErrorCode::Internal: return CF_ERR_INTERNAL;
    }
    return CF_ERR_INTERNAL;
}

template <typename Fn>
cf_status guarded(Fn&& fn) {
    try {
        fn();
        return CF_OK;
    } catch (const Error& e) {
        return set_error(map_code(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(CF_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return set_error(CF_ERR_INTERNAL, e.what());
    } catch (...) {
        return set_error(CF_ERR_INTERNAL, "unknown error");
    }
}

bool parse_prefit_name(const std::string& s, PrefitMethod& out) {
    if (s == "af1") out = PrefitMethod::AF1;
    else if (s == "af2") out = PrefitMethod::AF2;
    else if (s == "af3") out = PrefitMethod::AF3;
    else if (s == "tri") out = PrefitMethod::TRI;
    else if (s == "cen") out = PrefitMethod::CEN;
    else return false;
    return true;
}

bool parse_iterative_name(const std::string& s, IterativeMethod& out) {
    if (s == "lmc") out = IterativeMethod::LMC;
    else if (s == "lma") out = IterativeMethod::LMA;
    else if (s == "landau") out = IterativeMethod::Landau;
    else if (s == "spath") out = IterativeMethod::Spath;
    else return false;
    return true;
}

double parse_num(const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &pos);
    } catch (const std::exception&) {
        fail(ErrorCode::Argument, "fit options: bad value for '" + key + "'");
    }
    if (pos != value.size() || !std::isfinite(v))
        fail(ErrorCode::Argument, "fit options: bad value for '" + key + "'");
    return v;
}

// Solver settings as key=value text; parsed for every method, applied by the
// iterative ones.
FitOptions options_from_text(IterativeMethod m, const char* text) {
    FitOptions opts = default_options(m);
    if (!text || !*text) return opts;
    for (const auto& [key, value] : parse_config(text)) {
        if (key == "max_iterations") {
            double v = parse_num(key, value);
            if (v < 1 || v != std::floor(v) || v > 2e9)
                fail(ErrorCode::Argument, "fit options: 'max_iterations' out of range");
            opts.max_iterations = static_cast<int>(v);
        } else if (key == "step_tolerance") {
            opts.step_tolerance = parse_num(key, value);
        } else if (key == "objective_tolerance") {
            opts.objective_tolerance = parse_num(key, value);
        } else if (key == "divergence_radius_factor") {
            opts.divergence_radius_factor = parse_num(key, value);
        } else if (key == "initial_damping") {
            opts.initial_damping = parse_num(key, value);
        } else if (key == "damping_up") {
            opts.damping_up = parse_num(key, value);
        } else if (key == "damping_down") {
            opts.damping_down = parse_num(key, value);
        } else if (key == "seed") {
            try {
                std::size_t pos = 0;
                opts.rng_seed = std::stoull(value, &pos);
                if (pos != value.size()) throw std::invalid_argument(key);
            } catch (const std::exception&) {
                fail(ErrorCode::Argument, "fit options: bad value for 'seed'");
            }
        } else {
            fail(ErrorCode::Argument, "fit options: unknown key '" + key + "'");
        }
    }
    return opts;
}

void fill_curve(cf_fit_result& r, const GeneralizedCircle& c) {
    if (c.is_line()) {
        r.is_line = 1;
        r.B = c.line().B;
        r.C = c.line().C;
        r.D = c.line().D;
        r.a = r.b = r.r = 0.0;
    } else {
        r.is_line = 0;
        r.a = c.circle().a;
        r.b = c.circle().b;
        r.r = c.circle().r;
        r.B = r.C = r.D = 0.0;
    }
}

void set_status(cf_fit_result& r, const char* name) {
    std::snprintf(r.status, sizeof(r.status), "%s", name);
}

}  // namespace

extern "C" {

const char* cf_last_error(void) {
    return t_last_error.c_str();
}

cf_status cf_dataset_create(const double* xy, size_t n, cf_dataset** out) {
    if (!out || (!xy && n > 0))
        return set_error(CF_ERR_ARGUMENT, "cf_dataset_create: null pointer");
    *out = nullptr;
    return guarded([&] {
        std::vector<Point> pts(n);
        for (size_t i = 0; i < n; ++i) pts[i] = {xy[2 * i], xy[2 * i + 1]};
        *out = new cf_dataset{DataSet(std::move(pts))};
    });
}

cf_status cf_dataset_load(const char* path, cf_dataset** out) {
    if (!out || !path) return set_error(CF_ERR_ARGUMENT, "cf_dataset_load: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new cf_dataset{load_dataset(path)}; });
}

cf_status cf_dataset_save(const cf_dataset* data, const char* path) {
    if (!data || !path) return set_error(CF_ERR_ARGUMENT, "cf_dataset_save: null pointer");
    return guarded([&] { save_dataset(data->data, path); });
}

void cf_dataset_free(cf_dataset* data) {
    delete data;
}

size_t cf_dataset_size(const cf_dataset* data) {
    return data ? data->data.size() : 0;
}

cf_status cf_dataset_points(const cf_dataset* data, double* xy) {
    if (!data || !xy) return set_error(CF_ERR_ARGUMENT, "cf_dataset_points: null pointer");
    const std::vector<Point>& pts = data->data.points();
    for (size_t i = 0; i < pts.size(); ++i) {
        xy[2 * i] = pts[i].x;
        xy[2 * i + 1] = pts[i].y;
    }
    return CF_OK;
}

cf_status cf_generate_square(size_t n, uint64_t seed, cf_dataset** out) {
    if (!out) return set_error(CF_ERR_ARGUMENT, "cf_generate_square: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new cf_dataset{gen_uniform_square(n, seed)}; });
}

void cf_arc_spec_init(cf_arc_spec* spec, size_t n) {
    if (!spec) return;
    spec->radius = 1.0;
    spec->arc_degrees = 360.0;
    spec->sigma = 0.0;
    spec->n = n;
    spec->center_x = 0.0;
    spec->center_y = 0.0;
    spec->start_degrees = CF_ARC_START_AUTO;
    spec->isotropic_noise = 0;
    spec->random_angles = 0;
}

cf_status cf_generate_arc(const cf_arc_spec* spec, uint64_t seed, cf_dataset** out) {
    if (!out || !spec) return set_error(CF_ERR_ARGUMENT, "cf_generate_arc: null pointer");
    *out = nullptr;
    return guarded([&] {
        ArcSpec s;
        s.radius = spec->radius;
        s.arc_degrees = spec->arc_degrees;
        s.sigma = spec->sigma;
        s.n = spec->n;
        s.center_x = spec->center_x;
        s.center_y = spec->center_y;
        s.start_degrees = spec->start_degrees;
        s.isotropic_noise = spec->isotropic_noise != 0;
        s.random_angles = spec->random_angles != 0;
        *out = new cf_dataset{gen_arc(s, seed)};
    });
}

cf_status cf_generate_multi_minima(size_t k, cf_dataset** out) {
    if (!out) return set_error(CF_ERR_ARGUMENT, "cf_generate_multi_minima: null pointer");
    *out = nullptr;
    return guarded([&] { *out = new cf_dataset{gen_multi_minima(k)}; });
}

cf_status cf_fit(const cf_dataset* data, const char* method, const char* prefit,
                 const char* options, cf_fit_result* result) {
    if (!data || !method || !result) return set_error(CF_ERR_ARGUMENT, "cf_fit: null pointer");
    return guarded([&] {
        cf_fit_result r;
        std::memset(&r, 0, sizeof(r));
        std::string mname = method;

        PrefitMethod direct;
        IterativeMethod iter;
        if (parse_prefit_name(mname, direct)) {
            if (prefit && *prefit)
                fail(ErrorCode::Argument, "cf_fit: direct method '" + mname + "' takes no prefit");
            options_from_text(IterativeMethod::LMA, options);  // validate syntax only
            PrefitResult pre = run_prefit(direct, data->data);
            fill_curve(r, pre.estimate);
            r.objective = objective(pre.estimate, data->data);
            r.newton_steps = pre.newton_steps;
            r.flops = pre.flops;
            set_status(r, "Direct");
        } else if (parse_iterative_name(mname, iter)) {
            PrefitMethod pf = PrefitMethod::AF2;
            if (prefit && *prefit) {
                if (!parse_prefit_name(prefit, pf))
                    fail(ErrorCode::Argument,
                         "cf_fit: unknown prefit '" + std::string(prefit) + "'");
            }
            FitOptions opts = options_from_text(iter, options);
            PrefitResult pre = run_prefit(pf, data->data);
            FitOutcome out = run_iterative(iter, data->data, pre.estimate, opts);
            fill_curve(r, out.result);
            r.objective = out.objective;
            r.iterations = out.iterations;
            r.newton_steps = pre.newton_steps;
            r.flops = pre.flops + out.flops;
            set_status(r, status_name(out.status));
        } else {
            fail(ErrorCode::Argument, "cf_fit: unknown method '" + mname + "'");
        }
        *result = r;
    });
}

cf_status cf_objective(const cf_dataset* data, const cf_fit_result* curve, double* value) {
    if (!data || !curve || !value)
        return set_error(CF_ERR_ARGUMENT, "cf_objective: null pointer");
    return guarded([&] {
        if (curve->is_line) {
            double h = std::hypot(curve->B, curve->C);
            if (!(h > 0.0) || !std::isfinite(h) || !std::isfinite(curve->D))
                fail(ErrorCode::Argument, "cf_objective: invalid line coefficients");
            Line l{curve->B / h, curve->C / h, curve->D / h};
            *value = objective(GeneralizedCircle(l), data->data);
        } else {
            if (!std::isfinite(curve->a) || !std::isfinite(curve->b) || !(curve->r > 0.0))
                fail(ErrorCode::Argument, "cf_objective: invalid circle parameters");
            NaturalCircle c{curve->a, curve->b, curve->r};
            *value = objective(GeneralizedCircle(c), data->data);
        }
    });
}

cf_status cf_contour(const cf_dataset* data, double x0, double x1, double y0, double y1,
                     int nx, int ny, double* values) {
    if (!data || !values) return set_error(CF_ERR_ARGUMENT, "cf_contour: null pointer");
    return guarded([&] {
        std::vector<double> grid = contour_grid(data->data, Window{x0, x1, y0, y1}, nx, ny);
        std::memcpy(values, grid.data(), grid.size() * sizeof(double));
    });
}

cf_status cf_bench_run(const char* experiment, const char* config_text, const char* out_dir) {
    if (!experiment || !out_dir)
        return set_error(CF_ERR_ARGUMENT, "cf_bench_run: null pointer");
    return guarded([&] {
        std::map<std::string, std::string> overrides;
        if (config_text && *config_text) overrides = parse_config(config_text);
        ExperimentReport rep = run_experiment(experiment, overrides);
        std::string dir = out_dir;
        if (!dir.empty() && dir.back() != '/') dir.push_back('/');
        write_file_atomic(dir + "report.json", rep.to_json());
        write_file_atomic(dir + rep.name + ".csv", rep.to_csv());
    });
}

cf_status cf_write_text(const char* path, const char* text) {
    if (!path || !text) return set_error(CF_ERR_ARGUMENT, "cf_write_text: null pointer");
    return guarded([&] { write_file_atomic(path, text); });
}

}  // extern "C"
