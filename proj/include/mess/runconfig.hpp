#ifndef MESS_RUNCONFIG_HPP
#define MESS_RUNCONFIG_HPP

#include <cstdint>
#include <string>

#include "mess/fit.hpp"
#include "mess/simulate.hpp"

namespace mess {

// Everything a pipeline command needs; echoed (as a digest) into every
// output file for provenance.
struct RunConfig {
    std::uint64_t seed = 1;
    int bootstrap = 100;
    double fdr = 0.05;
    int threads = 0;  // 0 = available parallelism
    int curve_samples = 101;
    int edge_basis_dim = 5;
    SimConfig sim;
    FitConfig fit;

    void validate() const;

    // canonical serialization (fixed key order) of every field
    std::string canonical() const;
    // FNV-1a 64-bit hash of the canonical form, as 16 hex digits
    std::string digest() const;

    // merge keys from a JSON config file; unknown keys are an error
    void load_json_file(const std::string& path);
};

}  // namespace mess

#endif
