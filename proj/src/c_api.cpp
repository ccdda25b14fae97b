#include "mess_c.h"

#include <cstring>
#include <sstream>
#include <stdexcept>
#include <string>

#include "mess/pipeline.hpp"
#include "mess/runconfig.hpp"

struct mess_config {
    mess::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

void set_error(const char* msg) { g_last_error = msg ? msg : "unknown error"; }

template <typename Fn>
mess_status guarded(Fn&& fn) {
    try {
        fn();
        return MESS_OK;
    } catch (const std::invalid_argument& e) {
        set_error(e.what());
        return MESS_ERR_USAGE;
    } catch (const std::runtime_error& e) {
        set_error(e.what());
        // ingest/file problems are data errors, everything else numeric
        return std::strstr(e.what(), "line ") == e.what() ||
                       std::strstr(e.what(), "cannot open") || std::strstr(e.what(), "expected") ||
                       std::strstr(e.what(), "empty input")
                   ? MESS_ERR_DATA
                   : MESS_ERR_NUMERIC;
    } catch (const std::exception& e) {
        set_error(e.what());
        return MESS_ERR_NUMERIC;
    }
}

mess_status require(bool ok, const char* msg) {
    if (!ok) {
        set_error(msg);
        return MESS_ERR_USAGE;
    }
    return MESS_OK;
}

}  // namespace

extern "C" {

const char* mess_version(void) { return "0.1.0"; }

const char* mess_last_error(void) { return g_last_error.c_str(); }

mess_config* mess_config_create(void) { return new (std::nothrow) mess_config(); }

void mess_config_destroy(mess_config* config) { delete config; }

mess_status mess_config_set_int(mess_config* config, const char* key, int64_t value) {
    if (mess_status s = require(config && key, "null argument")) return s;
    return guarded([&] {
        const std::string k(key);
        auto& c = config->cfg;
        const mess::RunConfig saved = c;
        if (k == "seed") c.seed = static_cast<std::uint64_t>(value);
        else if (k == "bootstrap") c.bootstrap = static_cast<int>(value);
        else if (k == "threads") c.threads = static_cast<int>(value);
        else if (k == "genes") c.sim.genes = static_cast<std::size_t>(value);
        else if (k == "group1_size") c.sim.group1_size = static_cast<std::size_t>(value);
        else if (k == "group2_size") c.sim.group2_size = static_cast<std::size_t>(value);
        else if (k == "curve_samples") c.curve_samples = static_cast<int>(value);
        else if (k == "edge_basis_dim") c.edge_basis_dim = static_cast<int>(value);
        else if (k == "max_em_iterations") c.fit.max_em_iterations = static_cast<int>(value);
        else if (k == "max_evaluations") c.fit.max_evaluations = static_cast<int>(value);
        else throw std::invalid_argument("unknown integer config key: " + k);
        try {
            c.validate();
        } catch (...) {
            c = saved;
            throw;
        }
    });
}

mess_status mess_config_set_double(mess_config* config, const char* key, double value) {
    if (mess_status s = require(config && key, "null argument")) return s;
    return guarded([&] {
        const std::string k(key);
        auto& c = config->cfg;
        const mess::RunConfig saved = c;
        if (k == "fdr") c.fdr = value;
        else if (k == "effect_scale") c.sim.effect_scale = value;
        else if (k == "de_probability") c.sim.de_probability = value;
        else if (k == "dropout_probability") c.sim.dropout_probability = value;
        else if (k == "em_rel_tol") c.fit.em_rel_tol = value;
        else if (k == "log10_lo") c.fit.log10_lo = value;
        else if (k == "log10_hi") c.fit.log10_hi = value;
        else if (k == "simplex_spread_tol") c.fit.simplex_spread_tol = value;
        else throw std::invalid_argument("unknown real config key: " + k);
        try {
            c.validate();
        } catch (...) {
            c = saved;
            throw;
        }
    });
}

mess_status mess_config_set_times(mess_config* config, const char* times_csv) {
    if (mess_status s = require(config && times_csv, "null argument")) return s;
    return guarded([&] {
        std::vector<double> times;
        std::stringstream ss(times_csv);
        std::string item;
        while (std::getline(ss, item, ',')) {
            std::size_t pos = 0;
            double t = std::stod(item, &pos);
            if (pos != item.size()) throw std::invalid_argument("malformed time value: " + item);
            times.push_back(t);
        }
        if (times.size() < 3) throw std::invalid_argument("need at least three design times");
        config->cfg.sim.times = std::move(times);
    });
}

mess_status mess_config_load_file(mess_config* config, const char* path) {
    if (mess_status s = require(config && path, "null argument")) return s;
    return guarded([&] { config->cfg.load_json_file(path); });
}

mess_status mess_simulate(const mess_config* config, const char* data_csv,
                          const char* truth_csv) {
    if (mess_status s = require(config && data_csv && truth_csv, "null argument")) return s;
    return guarded([&] { mess::run_simulate(config->cfg, data_csv, truth_csv); });
}

mess_status mess_fit(const mess_config* config, const char* input_csv, const char* curves_csv,
                     const char* diagnostics_csv) {
    if (mess_status s = require(config && input_csv && curves_csv && diagnostics_csv,
                                "null argument"))
        return s;
    return guarded([&] { mess::run_fit(config->cfg, input_csv, curves_csv, diagnostics_csv); });
}

mess_status mess_test(const mess_config* config, const char* input_csv, const char* results_csv,
                      const char* diagnostics_csv) {
    if (mess_status s = require(config && input_csv && results_csv && diagnostics_csv,
                                "null argument"))
        return s;
    return guarded([&] { mess::run_test(config->cfg, input_csv, results_csv, diagnostics_csv); });
}

mess_status mess_benchmark(const mess_config* config, const char* report_csv,
                           const char* roc_csv) {
    if (mess_status s = require(config && report_csv && roc_csv, "null argument")) return s;
    return guarded([&] { mess::run_benchmark(config->cfg, report_csv, roc_csv); });
}

}  // extern "C"
