#ifndef MESS_RNG_HPP
#define MESS_RNG_HPP

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace mess {

// Counter-derivable random stream. Every consumer derives its own stream
// from (master seed, index...) so results are independent of scheduling.
// Normal draws use Box-Muller on two fresh uniforms per call (no cached
// spare), which keeps the stream position a pure function of the draw count.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed)) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Sub-stream for work unit (gene, replicate, ...).
    Rng derive(std::uint64_t a, std::uint64_t b = 0) const {
        return Rng(mix(state_ + mix(a + mix(b))));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in (0,1), 53-bit resolution, never exactly 0
    double uniform01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    // draw from MVN(0, L L^T) given a Cholesky factor L
    Eigen::VectorXd mvn(const Eigen::MatrixXd& chol_lower) {
        return chol_lower * normal_vector(chol_lower.rows());
    }

private:
    std::uint64_t state_;
};

}  // namespace mess

#endif
