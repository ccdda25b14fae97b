// Command-line front end; talks to the shared library through the C API only.
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "mess_c.h"

namespace {

struct ConfigDeleter {
    void operator()(mess_config* c) const { mess_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<mess_config, ConfigDeleter>;

int fail(mess_status status) {
    std::fprintf(stderr, "error: %s\n", mess_last_error());
    return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"MESS: mixed-effects smoothing splines for longitudinal expression profiles"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_file;
    std::int64_t seed = -1, bootstrap = -1, genes = -1, threads = -1;
    double fdr = -1.0, effect_scale = -1.0;
    app.add_option("--config", config_file, "JSON config file (flags win over file values)");
    app.add_option("--seed", seed, "master random seed");
    app.add_option("--bootstrap", bootstrap, "bootstrap replicate count");
    app.add_option("--fdr", fdr, "FDR significance level");
    app.add_option("--effect-scale", effect_scale, "simulation effect scale");
    app.add_option("--genes", genes, "simulated gene count");
    app.add_option("--threads", threads, "worker count (0 = all cores)");

    std::string input, output, truth, curves, diagnostics, report, roc;
    auto* sim = app.add_subcommand("simulate", "generate a simulated dataset with truth labels");
    sim->add_option("--data", output, "output data CSV")->required();
    sim->add_option("--truth", truth, "output truth CSV")->required();

    auto* fit = app.add_subcommand("fit", "fit every gene and emit sampled curves");
    fit->add_option("--input", input, "long-format input CSV")->required();
    fit->add_option("--curves", curves, "output curves CSV")->required();
    fit->add_option("--diagnostics", diagnostics, "output diagnostics CSV")->required();

    auto* test = app.add_subcommand("test", "differential-expression test with bootstrap p-values");
    test->add_option("--input", input, "long-format input CSV")->required();
    test->add_option("--results", output, "output results CSV")->required();
    test->add_option("--diagnostics", diagnostics, "output diagnostics CSV")->required();

    auto* bench = app.add_subcommand("benchmark", "simulate and compare MESS against EDGE");
    bench->add_option("--report", report, "output report CSV")->required();
    bench->add_option("--roc", roc, "output ROC points CSV")->required();

    CLI11_PARSE(app, argc, argv);

    ConfigPtr config(mess_config_create());
    if (!config) {
        std::fprintf(stderr, "error: out of memory\n");
        return 3;
    }

    if (!config_file.empty()) {
        if (auto s = mess_config_load_file(config.get(), config_file.c_str())) return fail(s);
    }
    // flags win over config-file values
    if (seed >= 0)
        if (auto s = mess_config_set_int(config.get(), "seed", seed)) return fail(s);
    if (bootstrap >= 0)
        if (auto s = mess_config_set_int(config.get(), "bootstrap", bootstrap)) return fail(s);
    if (genes >= 0)
        if (auto s = mess_config_set_int(config.get(), "genes", genes)) return fail(s);
    if (threads >= 0)
        if (auto s = mess_config_set_int(config.get(), "threads", threads)) return fail(s);
    if (fdr >= 0.0)
        if (auto s = mess_config_set_double(config.get(), "fdr", fdr)) return fail(s);
    if (effect_scale >= 0.0)
        if (auto s = mess_config_set_double(config.get(), "effect_scale", effect_scale))
            return fail(s);

    mess_status status = MESS_OK;
    if (sim->parsed()) {
        status = mess_simulate(config.get(), output.c_str(), truth.c_str());
    } else if (fit->parsed()) {
        status = mess_fit(config.get(), input.c_str(), curves.c_str(), diagnostics.c_str());
    } else if (test->parsed()) {
        status = mess_test(config.get(), input.c_str(), output.c_str(), diagnostics.c_str());
    } else if (bench->parsed()) {
        status = mess_benchmark(config.get(), report.c_str(), roc.c_str());
    }
    if (status != MESS_OK) return fail(status);
    return 0;
}
