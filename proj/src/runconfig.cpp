#include "mess/runconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mess {

namespace {

std::string shortest(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

void RunConfig::validate() const {
    if (bootstrap < 1) throw std::invalid_argument("bootstrap count must be >= 1");
    if (!(fdr > 0.0) || !(fdr < 1.0)) throw std::invalid_argument("fdr must be in (0,1)");
    if (curve_samples < 2) throw std::invalid_argument("curve samples must be >= 2");
    if (edge_basis_dim < 2) throw std::invalid_argument("edge basis dimension must be >= 2");
    if (sim.genes < 1) throw std::invalid_argument("gene count must be >= 1");
    if (sim.group1_size < 2 || sim.group2_size < 2)
        throw std::invalid_argument("group sizes must be >= 2");
    if (sim.times.size() < 3) throw std::invalid_argument("need at least three design times");
    if (!(sim.de_probability >= 0.0) || !(sim.de_probability <= 1.0))
        throw std::invalid_argument("de probability must be in [0,1]");
    if (!(sim.dropout_probability >= 0.0) || !(sim.dropout_probability < 1.0))
        throw std::invalid_argument("dropout probability must be in [0,1)");
    if (!(sim.effect_scale >= 0.0)) throw std::invalid_argument("effect scale must be >= 0");
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os << "seed=" << seed << ";bootstrap=" << bootstrap << ";fdr=" << shortest(fdr)
       << ";curve_samples=" << curve_samples << ";edge_basis_dim=" << edge_basis_dim
       << ";genes=" << sim.genes << ";group1=" << sim.group1_size
       << ";group2=" << sim.group2_size << ";times=";
    for (std::size_t i = 0; i < sim.times.size(); ++i)
        os << (i ? "," : "") << shortest(sim.times[i]);
    os << ";effect_scale=" << shortest(sim.effect_scale)
       << ";de_prob=" << shortest(sim.de_probability)
       << ";dropout=" << shortest(sim.dropout_probability)
       << ";em_iters=" << fit.max_em_iterations << ";em_tol=" << shortest(fit.em_rel_tol)
       << ";box=" << shortest(fit.log10_lo) << ".." << shortest(fit.log10_hi)
       << ";simplex_tol=" << shortest(fit.simplex_spread_tol)
       << ";max_evals=" << fit.max_evaluations;
    // thread count deliberately excluded: outputs are schedule-independent
    return os.str();
}

std::string RunConfig::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 16; ++i) buf[15 - i] = hex[(h >> (4 * i)) & 0xF];
    buf[16] = '\0';
    return buf;
}

void RunConfig::load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("malformed config file: " + std::string(e.what()));
    }
    for (const auto& [key, value] : j.items()) {
        if (key == "seed") seed = value.get<std::uint64_t>();
        else if (key == "bootstrap") bootstrap = value.get<int>();
        else if (key == "fdr") fdr = value.get<double>();
        else if (key == "threads") threads = value.get<int>();
        else if (key == "curve_samples") curve_samples = value.get<int>();
        else if (key == "edge_basis_dim") edge_basis_dim = value.get<int>();
        else if (key == "genes") sim.genes = value.get<std::size_t>();
        else if (key == "group1_size") sim.group1_size = value.get<std::size_t>();
        else if (key == "group2_size") sim.group2_size = value.get<std::size_t>();
        else if (key == "times") sim.times = value.get<std::vector<double>>();
        else if (key == "effect_scale") sim.effect_scale = value.get<double>();
        else if (key == "de_probability") sim.de_probability = value.get<double>();
        else if (key == "dropout_probability") sim.dropout_probability = value.get<double>();
        else if (key == "max_em_iterations") fit.max_em_iterations = value.get<int>();
        else if (key == "em_rel_tol") fit.em_rel_tol = value.get<double>();
        else if (key == "log10_lo") fit.log10_lo = value.get<double>();
        else if (key == "log10_hi") fit.log10_hi = value.get<double>();
        else if (key == "simplex_spread_tol") fit.simplex_spread_tol = value.get<double>();
        else if (key == "max_evaluations") fit.max_evaluations = value.get<int>();
        else throw std::invalid_argument("unknown config key: " + key);
    }
}

}  // namespace mess
